#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_core::io::parse_window;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((a, b)) = parse_window(text) {
        assert!(a.is_finite() && b.is_finite() && a < b);
    }
});
