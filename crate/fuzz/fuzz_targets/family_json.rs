#![no_main]

use adelic_heights::adelic::{nef_check, raw_exceptions, AdelicFamily, ToricDivisor};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    if let (Some(d), Ok(raw)) = (json.get("divisor"), raw_exceptions(&json)) {
        if let Ok(d) = ToricDivisor::from_json(d) {
            let _ = nef_check(d, raw);
        }
    }
    let Ok(f) = AdelicFamily::from_json(&json) else { return };
    assert_eq!(AdelicFamily::from_json(&f.to_json()).unwrap().to_json(), f.to_json());
    let _ = f.global_height();
    let _ = f.nef_status();
});
