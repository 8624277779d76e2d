#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::parse_radii;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_radii(text) {
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert!(r.iter().all(|x| x.is_finite() && *x > 0.0));
    }
});
