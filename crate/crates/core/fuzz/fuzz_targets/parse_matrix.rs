#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = antopt::instances::parse_matrix(text) {
        assert_eq!(antopt::instances::parse_matrix(&p.to_matrix_market()).unwrap(), p);
    }
});
