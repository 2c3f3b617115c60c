use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexHead, Index, ValidBase};
use crate::error::Result;

/// Behaviour of the target beyond its explicit head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetTail {
    /// `nu_n = lambda_n` for every index outside the head.
    #[serde(rename = "equals_lambda")]
    EqualsLambda,
}

/// Desired spectrum for the inverse problem; repeated values encode
/// multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpectrum {
    pub nu_head: ComplexHead,
    pub tail: TargetTail,
}

impl TargetSpectrum {
    pub fn new(offset: Index, values: impl IntoIterator<Item = Complex64>) -> Self {
        TargetSpectrum {
            nu_head: ComplexHead {
                offset,
                values: values.into_iter().map(|z| [z.re, z.im]).collect(),
            },
            tail: TargetTail::EqualsLambda,
        }
    }

    pub fn validate(&self, base: &ValidBase) -> Result<ValidTarget> {
        self.nu_head.check("nu_head", base.index_set())?;
        Ok(ValidTarget {
            target: self.clone(),
            base: base.clone(),
        })
    }
}

/// A target whose head lies inside the index set and holds finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidTarget {
    target: TargetSpectrum,
    base: ValidBase,
}

impl ValidTarget {
    pub fn target(&self) -> &TargetSpectrum {
        &self.target
    }

    pub fn base(&self) -> &ValidBase {
        &self.base
    }

    pub fn nu(&self, n: Index) -> Complex64 {
        self.target
            .nu_head
            .get(n)
            .unwrap_or_else(|| Complex64::new(self.base.lambda(n), 0.0))
    }

    /// Head indices in increasing order.
    pub fn head_indices(&self) -> std::ops::Range<Index> {
        let head = &self.target.nu_head;
        head.offset..head.offset + head.values.len() as Index
    }

    /// `sum |nu_n - lambda_n|`; finite because the tail coincides with lambda.
    pub fn deviation_sum(&self) -> f64 {
        self.head_indices()
            .map(|n| (self.nu(n) - self.base.lambda(n)).norm())
            .sum()
    }
}
