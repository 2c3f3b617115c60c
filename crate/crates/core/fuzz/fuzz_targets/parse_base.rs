#![no_main]

use libfuzzer_sys::fuzz_target;
use rank1_spectral::io::{parse_base, to_canonical_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(base) = parse_base(text) else { return };
    if let Ok(valid) = base.validate() {
        let _ = valid.lambda(0);
        let _ = valid.head_extent();
    }
    let again = to_canonical_json(&base).unwrap();
    assert_eq!(parse_base(&again).unwrap(), base);
});
