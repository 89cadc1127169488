#![no_main]
use libfuzzer_sys::fuzz_target;
use mbhe::potential::PotentialSpec;
use mbhe_cli::parse_potential;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = PotentialSpec::parse(text);
        if let Ok(coeffs) = parse_potential(text) {
            let spec = PotentialSpec::new(coeffs).unwrap();
            assert!(spec.v(1.0).is_finite());
        }
    }
});
