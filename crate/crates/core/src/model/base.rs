use serde::{Deserialize, Serialize};

use super::{Index, IndexSet};
use crate::error::{Error, Result};

/// Explicit block of real values starting at index `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealHead {
    pub offset: Index,
    pub values: Vec<f64>,
}

/// `lambda_n = slope * n + intercept` outside the explicit head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineTail {
    pub slope: f64,
    pub intercept: f64,
}

/// Unperturbed eigenvalues as read from a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpectrum {
    pub index_set: IndexSet,
    pub lambda_head: RealHead,
    pub lambda_tail: AffineTail,
    /// Declared separation gap.
    pub gap: f64,
}

impl BaseSpectrum {
    /// Arithmetic progression `slope * n + intercept` with gap `slope`.
    pub fn affine(index_set: IndexSet, slope: f64, intercept: f64) -> Self {
        BaseSpectrum {
            index_set,
            lambda_head: RealHead {
                offset: 0,
                values: Vec::new(),
            },
            lambda_tail: AffineTail { slope, intercept },
            gap: slope,
        }
    }

    fn head_range(&self) -> Option<(Index, Index)> {
        let len = self.lambda_head.values.len() as Index;
        (len > 0).then(|| (self.lambda_head.offset, self.lambda_head.offset + len - 1))
    }

    pub fn lambda(&self, n: Index) -> f64 {
        let k = n - self.lambda_head.offset;
        if k >= 0 && (k as usize) < self.lambda_head.values.len() {
            self.lambda_head.values[k as usize]
        } else {
            self.lambda_tail.slope * n as f64 + self.lambda_tail.intercept
        }
    }

    /// Checks the separation and monotonicity assumptions and certifies the
    /// actual gap (the infimum of consecutive differences).
    pub fn validate(&self) -> Result<ValidBase> {
        let declared = self.gap;
        if !declared.is_finite() || declared <= 0.0 {
            return Err(Error::InvalidDocument(format!(
                "gap must be a positive finite number, got {declared}"
            )));
        }
        let AffineTail { slope, intercept } = self.lambda_tail;
        if !slope.is_finite() {
            return Err(Error::NonReal { field: "lambda_tail.slope", index: 0 });
        }
        if !intercept.is_finite() {
            return Err(Error::NonReal { field: "lambda_tail.intercept", index: 0 });
        }
        if self.index_set == IndexSet::NaturalNumbers && self.lambda_head.offset < 0 {
            return Err(Error::IndexMismatch {
                field: "lambda_head",
                offset: self.lambda_head.offset,
                set: self.index_set.symbol(),
            });
        }
        for (k, v) in self.lambda_head.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonReal {
                    field: "lambda_head",
                    index: self.lambda_head.offset + k as Index,
                });
            }
        }

        // Tail pairs all differ by exactly `slope`; probe one pair far from the head.
        let probe = match self.head_range() {
            Some((_, hi)) => hi + 1,
            None => 0,
        };
        let mut pairs: Vec<Index> = vec![probe.max(self.index_set.first().unwrap_or(probe))];
        if let Some((lo, hi)) = self.head_range() {
            let start = if self.index_set.contains(lo - 1) { lo - 1 } else { lo };
            pairs.extend(start..=hi);
        }
        let mut certified = f64::INFINITY;
        for n in pairs {
            let (x, y) = (self.lambda(n), self.lambda(n + 1));
            let diff = y - x;
            if !(diff > 0.0) {
                return Err(Error::NonMonotone {
                    index: n,
                    next: n + 1,
                    value: x,
                    next_value: y,
                });
            }
            if diff < declared {
                return Err(Error::GapViolation {
                    index: n,
                    next: n + 1,
                    actual: diff,
                    declared,
                });
            }
            certified = certified.min(diff);
        }
        Ok(ValidBase {
            spec: self.clone(),
            gap: certified,
        })
    }
}

/// A base spectrum whose monotonicity and gap have been verified.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidBase {
    spec: BaseSpectrum,
    gap: f64,
}

impl ValidBase {
    pub fn spec(&self) -> &BaseSpectrum {
        &self.spec
    }

    pub fn index_set(&self) -> IndexSet {
        self.spec.index_set
    }

    #[inline]
    pub fn lambda(&self, n: Index) -> f64 {
        self.spec.lambda(n)
    }

    /// Certified separation: infimum of `lambda_{n+1} - lambda_n`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn declared_gap(&self) -> f64 {
        self.spec.gap
    }

    /// Largest `|n|` covered by the explicit head (0 when empty).
    pub fn head_extent(&self) -> Index {
        match self.spec.head_range() {
            Some((lo, hi)) => lo.abs().max(hi.abs()),
            None => 0,
        }
    }

    /// Largest index `n` with `lambda_n <= x`, or `None` when every
    /// eigenvalue exceeds `x`.
    pub fn floor_index(&self, x: f64) -> Option<Index> {
        const LIMIT: Index = 1 << 50;
        let tail = self.spec.lambda_tail;
        let guess = ((x - tail.intercept) / tail.slope).floor();
        let mut guess = if guess.is_finite() {
            (guess as Index).clamp(-LIMIT, LIMIT)
        } else if guess > 0.0 {
            LIMIT
        } else {
            -LIMIT
        };
        if let Some(first) = self.index_set().first() {
            if self.lambda(first) > x {
                return None;
            }
            guess = guess.max(first);
        }
        // bracket: lambda(lo) <= x < lambda(hi)
        let mut lo = guess;
        let mut step: Index = 1;
        while self.lambda(lo) > x {
            let next = lo - step;
            lo = match self.index_set().first() {
                Some(first) if next < first => first,
                _ => next,
            };
            step = step.saturating_mul(2);
            if lo <= -LIMIT {
                return None;
            }
        }
        let mut hi = lo + 1;
        step = 1;
        while self.lambda(hi) <= x {
            if hi >= LIMIT {
                return Some(hi);
            }
            hi = hi.saturating_add(step);
            step = step.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.lambda(mid) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// Indices whose eigenvalue lies in the closed interval `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<Index> {
        let last = match self.floor_index(hi) {
            Some(k) => k,
            #[allow(clippy::reversed_empty_ranges)]
            None => return 1..=0,
        };
        let first = match self.floor_index(lo) {
            Some(k) if self.lambda(k) >= lo => k,
            Some(k) => k + 1,
            None => self.index_set().first().unwrap_or(0),
        };
        first..=last
    }

    /// Index of the eigenvalue closest to `x`.
    pub fn nearest_index(&self, x: f64) -> Index {
        match self.floor_index(x) {
            None => self.index_set().first().unwrap_or(0),
            Some(k) => {
                if (self.lambda(k + 1) - x).abs() < (x - self.lambda(k)).abs() {
                    k + 1
                } else {
                    k
                }
            }
        }
    }
}
