#![no_main]
use libfuzzer_sys::fuzz_target;

use beurling_interp::generators::FamilySpec;
use beurling_interp::io::parse_family_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // parsing only: generating a valid spec may legitimately allocate millions of points
        let _: Option<FamilySpec> = parse_family_json(text).ok();
    }
});
