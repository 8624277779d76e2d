#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::parse_weight_json;
use beurling_interp::Complex64;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(w) = parse_weight_json(text) {
            let _ = w.p(Complex64::new(3.0, -1.0));
        }
    }
});
