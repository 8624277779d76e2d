#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::{parse_variety_csv, variety_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(parsed) = parse_variety_csv(text, None) else { return };
    let w = parsed.value.window_radius();
    let again = parse_variety_csv(&variety_to_csv(&parsed.value), Some(w)).expect("written varieties parse");
    assert_eq!(again.value.points(), parsed.value.points());
});
