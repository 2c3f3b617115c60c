#![no_main]

use libfuzzer_sys::fuzz_target;
use rank1_spectral::io::{parse_target, to_canonical_json};
use rank1_spectral::model::{BaseSpectrum, IndexSet};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(target) = parse_target(text) else { return };
    let base = BaseSpectrum::affine(IndexSet::Integers, 1.0, 0.0).validate().unwrap();
    if let Ok(valid) = target.validate(&base) {
        let _ = valid.deviation_sum();
    }
    if let Ok(again) = to_canonical_json(&target) {
        let back = parse_target(&again).unwrap();
        assert_eq!(to_canonical_json(&back).unwrap(), again);
    }
});
