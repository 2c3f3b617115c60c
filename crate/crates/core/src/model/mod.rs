//! Shared data types: the unperturbed spectrum, the perturbation
//! coefficients and target spectra, together with their validation.

mod base;
mod coeffs;
mod target;
pub mod zeta;

pub use base::{AffineTail, BaseSpectrum, RealHead, ValidBase};
pub use coeffs::{ComplexHead, PerturbationCoefficients, PowerLawTail, Tail, TailSum, ValidCoefficients};
pub use target::{TargetSpectrum, TargetTail, ValidTarget};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Position in the index set of the unperturbed eigenvalues.
pub type Index = i64;

/// Index set of the eigenvalue enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    /// `n = 0, 1, 2, ...` (operator bounded below).
    #[serde(rename = "N")]
    NaturalNumbers,
    /// `n` ranges over all integers; sums are taken over symmetric windows.
    #[serde(rename = "Z")]
    Integers,
}

impl IndexSet {
    pub fn contains(self, n: Index) -> bool {
        match self {
            IndexSet::NaturalNumbers => n >= 0,
            IndexSet::Integers => true,
        }
    }

    /// Smallest index, if any.
    pub fn first(self) -> Option<Index> {
        match self {
            IndexSet::NaturalNumbers => Some(0),
            IndexSet::Integers => None,
        }
    }

    /// Indices with `|n| <= radius`, in increasing order.
    pub fn window(self, radius: Index) -> impl DoubleEndedIterator<Item = Index> + Clone {
        let lo = match self {
            IndexSet::NaturalNumbers => 0,
            IndexSet::Integers => -radius,
        };
        lo..=radius
    }

    /// Number of indices with `|n| <= radius`.
    pub fn window_len(self, radius: Index) -> usize {
        match self {
            IndexSet::NaturalNumbers => radius as usize + 1,
            IndexSet::Integers => 2 * radius as usize + 1,
        }
    }

    /// Number of one-sided tails (beyond a symmetric window).
    pub fn sides(self) -> f64 {
        match self {
            IndexSet::NaturalNumbers => 1.0,
            IndexSet::Integers => 2.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            IndexSet::NaturalNumbers => "N",
            IndexSet::Integers => "Z",
        }
    }
}

pub(crate) fn to_complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

pub(crate) fn from_complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_enumerate_in_increasing_order() {
        let z: Vec<_> = IndexSet::Integers.window(2).collect();
        assert_eq!(z, vec![-2, -1, 0, 1, 2]);
        let n: Vec<_> = IndexSet::NaturalNumbers.window(2).collect();
        assert_eq!(n, vec![0, 1, 2]);
        assert_eq!(IndexSet::Integers.window_len(2), 5);
        assert_eq!(IndexSet::NaturalNumbers.window_len(2), 3);
    }

    #[test]
    fn index_set_json_symbols() {
        assert_eq!(serde_json::to_string(&IndexSet::Integers).unwrap(), "\"Z\"");
        let n: IndexSet = serde_json::from_str("\"N\"").unwrap();
        assert_eq!(n, IndexSet::NaturalNumbers);
        assert!(serde_json::from_str::<IndexSet>("\"Q\"").is_err());
    }
}
