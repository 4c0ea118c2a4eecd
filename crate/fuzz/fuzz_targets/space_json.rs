#![no_main]

use adelic_heights::divisorial::{DivisorialSpace, RationalVector, SemilinearCone};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cone) = serde_json::from_slice::<SemilinearCone>(data) {
        let _ = cone.is_pointed();
    }
    let Ok(space) = serde_json::from_slice::<DivisorialSpace>(data) else { return };
    let zero = RationalVector::zeros(space.ambient_dim());
    let _ = space.cone_closure_contains(&zero);
    let back: DivisorialSpace = serde_json::from_str(&serde_json::to_string(&space).unwrap()).unwrap();
    assert_eq!(back, space);
});
