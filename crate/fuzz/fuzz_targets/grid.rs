#![no_main]
use libfuzzer_sys::fuzz_target;
use mbhe_cli::parse_grid;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = parse_grid(text) {
            let v = grid.values();
            assert_eq!(v.len(), grid.points);
            assert!(v.iter().all(|&x| x >= grid.x_min && x <= grid.x_max));
        }
    }
});
