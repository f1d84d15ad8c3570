#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_core::io::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml_str(text) {
        // Accepted configs must build every derived object without panicking.
        let _ = cfg.map_spec();
        let _ = cfg.diophantine_class();
        let _ = cfg.solver_config();
        let _ = cfg.minimize_options();
        let _ = cfg.sweep.omegas();
    }
});
