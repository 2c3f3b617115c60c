#![no_main]

use libfuzzer_sys::fuzz_target;
use rank1_spectral::io::{parse_coefficients, to_canonical_json};
use rank1_spectral::model::{BaseSpectrum, IndexSet};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(coeffs) = parse_coefficients(text) else { return };
    let base = BaseSpectrum::affine(IndexSet::Integers, 1.0, 0.0).validate().unwrap();
    if let Ok(valid) = coeffs.validate(&base) {
        let _ = valid.total_abs_sum();
        let _ = valid.partition(8);
    }
    if let Ok(again) = to_canonical_json(&coeffs) {
        let back = parse_coefficients(&again).unwrap();
        assert_eq!(to_canonical_json(&back).unwrap(), again);
    }
});
