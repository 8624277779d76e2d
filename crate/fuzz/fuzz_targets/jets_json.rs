#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::io::parse_jets_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_jets_json(text);
    }
});
