#![no_main]
use libfuzzer_sys::fuzz_target;
use mbhe_cli::parse_ns;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ns) = parse_ns(text) {
            assert!(!ns.is_empty() && ns[0] > 0);
            assert!(ns.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
