#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::{parse_variety_json, variety_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(parsed) = parse_variety_json(text) else { return };
    let again = parse_variety_json(&variety_to_json(&parsed.value)).expect("written varieties parse");
    assert_eq!(again.value.points(), parsed.value.points());
    assert!(again.warnings.is_empty());
});
