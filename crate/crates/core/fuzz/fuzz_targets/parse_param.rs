#![no_main]
use libfuzzer_sys::fuzz_target;

use antopt::sbsam::PslDistribution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((key, value)) = antopt::bench::parse_param(text) {
        assert!(!key.is_empty());
        let _ = value.parse::<PslDistribution>();
    }
    let _ = text.parse::<PslDistribution>();
});
