#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_core::io::parse_omega;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_omega(text) {
        assert!(w.re.is_finite() && w.im.is_finite());
    }
});
