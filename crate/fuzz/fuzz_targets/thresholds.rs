#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::parse_thresholds;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_thresholds(text) {
        assert!(t.bounded <= t.divergent);
    }
});
