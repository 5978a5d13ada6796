#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = antopt::instances::parse_tsp(text) else { return };
    // explicit matrices have no coordinates to write back
    if let Ok(out) = g.to_tsplib("fuzz") {
        assert_eq!(antopt::instances::parse_tsp(&out).unwrap(), g);
    }
});
