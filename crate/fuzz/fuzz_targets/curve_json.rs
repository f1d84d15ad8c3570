#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_core::io::CurveRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rec) = CurveRecord::from_json(text) {
        let again = CurveRecord::from_json(&rec.to_json().unwrap()).unwrap();
        assert_eq!(again, rec);
        let _ = rec.u_series();
    }
});
