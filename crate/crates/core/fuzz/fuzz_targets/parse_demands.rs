#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = n as usize;
    if let Ok(pairs) = antopt::dps::parse_demands(text, n) {
        assert!(pairs.iter().all(|&(s, d)| s < n && d < n && s != d));
    }
});
