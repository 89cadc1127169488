#![no_main]
use libfuzzer_sys::fuzz_target;
use mbhe_cli::{ConfigFile, RunConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = ConfigFile::from_json(text) {
            if let Ok(cfg) = RunConfig::resolve(file, None) {
                assert!(cfg.n_list.windows(2).all(|w| w[0] < w[1]));
                if let Some(g) = cfg.grid {
                    assert!(g.x_min > 0.0 && g.x_max >= g.x_min);
                }
            }
        }
    }
});
