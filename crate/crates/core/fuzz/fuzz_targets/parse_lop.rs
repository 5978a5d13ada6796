#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = antopt::instances::parse_lop(text) {
        assert_eq!(antopt::instances::parse_lop(&m.to_text()).unwrap(), m);
    }
});
