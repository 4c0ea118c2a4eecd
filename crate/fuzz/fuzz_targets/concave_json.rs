#![no_main]

use adelic_heights::convex::{legendre_dual, monge_ampere, ConcaveFn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice(data) else { return };
    let Ok(f) = ConcaveFn::from_json(&json) else { return };
    assert_eq!(ConcaveFn::from_json(&f.to_json()).unwrap(), f);
    let _ = f.eval(0.0);
    let _ = monge_ampere(&f).total_mass();
    if let Ok(d) = legendre_dual(&f) {
        let _ = d.bidual();
    }
});
