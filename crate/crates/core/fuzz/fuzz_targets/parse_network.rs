#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = antopt::dps::parse_network(text) {
        assert_eq!(antopt::dps::parse_network(&net.to_edge_list()).unwrap(), net);
    }
});
