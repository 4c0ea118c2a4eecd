#![no_main]

use adelic_heights::convex::Measure1D;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice(data) else { return };
    let Ok(mu) = Measure1D::from_json(&json) else { return };
    assert_eq!(Measure1D::from_json(&mu.to_json()).unwrap(), mu);
    let _ = mu.total_mass();
});
