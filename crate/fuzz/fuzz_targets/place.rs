#![no_main]

use adelic_heights::adelic::Place;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = s.parse::<Place>() {
        assert_eq!(v.to_string().parse::<Place>().unwrap(), v);
        assert_eq!(Place::from_json(&v.to_json()).unwrap(), v);
    }
    if let Ok(json) = serde_json::from_str(s) {
        let _ = Place::from_json(&json);
    }
});
