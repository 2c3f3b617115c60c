use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::zeta::power_tail;
use super::{from_complex, to_complex, Index, IndexSet, ValidBase};
use crate::error::{Error, Result};

/// Explicit block of complex values (`[re, im]` pairs) starting at `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexHead {
    pub offset: Index,
    pub values: Vec<[f64; 2]>,
}

impl ComplexHead {
    pub fn empty() -> Self {
        ComplexHead {
            offset: 0,
            values: Vec::new(),
        }
    }

    pub fn from_fn(indices: impl Iterator<Item = Index>, f: impl Fn(Index) -> Complex64) -> Self {
        let mut offset = None;
        let mut values = Vec::new();
        for n in indices {
            offset.get_or_insert(n);
            values.push(from_complex(f(n)));
        }
        ComplexHead {
            offset: offset.unwrap_or(0),
            values,
        }
    }

    pub fn get(&self, n: Index) -> Option<Complex64> {
        let k = n - self.offset;
        (k >= 0 && (k as usize) < self.values.len()).then(|| to_complex(self.values[k as usize]))
    }

    pub(crate) fn range(&self) -> Option<(Index, Index)> {
        let len = self.values.len() as Index;
        (len > 0).then(|| (self.offset, self.offset + len - 1))
    }

    pub(crate) fn check(&self, field: &'static str, set: IndexSet) -> Result<()> {
        if let Some((lo, _)) = self.range() {
            if !set.contains(lo) {
                return Err(Error::IndexMismatch {
                    field,
                    offset: lo,
                    set: set.symbol(),
                });
            }
        }
        for (k, v) in self.values.iter().enumerate() {
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::NonReal {
                    field,
                    index: self.offset + k as Index,
                });
            }
        }
        Ok(())
    }
}

fn is_zero_bits(v: &f64) -> bool {
    v.to_bits() == 0
}

fn is_false(v: &bool) -> bool {
    !*v
}

/// `scale * (|n| + shift)^(-beta) * exp(i phase)`, times `sign(n)` when `odd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawTail {
    pub beta: f64,
    pub scale: f64,
    pub phase: f64,
    #[serde(default, skip_serializing_if = "is_zero_bits")]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub odd: bool,
}

impl PowerLawTail {
    pub fn new(beta: f64, scale: f64) -> Self {
        PowerLawTail {
            beta,
            scale,
            phase: 0.0,
            shift: 0.0,
            odd: false,
        }
    }

    pub fn value(&self, n: Index) -> Complex64 {
        let base = n.unsigned_abs() as f64 + self.shift;
        if base == 0.0 || (self.odd && n == 0) {
            return Complex64::new(0.0, 0.0);
        }
        let magnitude = self.scale * base.powf(-self.beta);
        let sign = if self.odd && n < 0 { -1.0 } else { 1.0 };
        Complex64::from_polar(sign * magnitude, self.phase)
    }
}

/// Decaying tail generator for a coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TailRepr", into = "TailRepr")]
pub enum Tail {
    Zero,
    PowerLaw(PowerLawTail),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TailRepr {
    Keyword(String),
    PowerLaw(PowerLawTail),
}

impl TryFrom<TailRepr> for Tail {
    type Error = String;

    fn try_from(repr: TailRepr) -> std::result::Result<Self, String> {
        match repr {
            TailRepr::Keyword(k) if k == "zero" => Ok(Tail::Zero),
            TailRepr::Keyword(k) => Err(format!("unknown tail keyword {k:?}")),
            TailRepr::PowerLaw(p) => Ok(Tail::PowerLaw(p)),
        }
    }
}

impl From<Tail> for TailRepr {
    fn from(tail: Tail) -> Self {
        match tail {
            Tail::Zero => TailRepr::Keyword("zero".to_owned()),
            Tail::PowerLaw(p) => TailRepr::PowerLaw(p),
        }
    }
}

impl Tail {
    pub fn value(&self, n: Index) -> Complex64 {
        match self {
            Tail::Zero => Complex64::new(0.0, 0.0),
            Tail::PowerLaw(p) => p.value(n),
        }
    }

    fn vanishes(&self) -> bool {
        match self {
            Tail::Zero => true,
            Tail::PowerLaw(p) => p.scale == 0.0,
        }
    }

    fn check(&self, field: &'static str) -> Result<()> {
        if let Tail::PowerLaw(p) = self {
            if !(p.beta.is_finite() && p.scale.is_finite() && p.phase.is_finite() && p.shift.is_finite()) {
                return Err(Error::NonReal { field, index: 0 });
            }
            if p.shift < 0.0 {
                return Err(Error::InvalidDocument(format!("{field}: shift must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Fourier coefficients of the two vectors defining the perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationCoefficients {
    pub a_head: ComplexHead,
    pub a_tail: Tail,
    pub b_head: ComplexHead,
    pub b_tail: Tail,
}

impl PerturbationCoefficients {
    pub fn a(&self, n: Index) -> Complex64 {
        self.a_head.get(n).unwrap_or_else(|| self.a_tail.value(n))
    }

    pub fn b(&self, n: Index) -> Complex64 {
        self.b_head.get(n).unwrap_or_else(|| self.b_tail.value(n))
    }

    /// `c_n = conj(a_n) b_n`.
    pub fn c(&self, n: Index) -> Complex64 {
        self.a(n).conj() * self.b(n)
    }

    /// Largest `|n|` covered by either explicit head.
    pub fn extent(&self) -> Index {
        [self.a_head.range(), self.b_head.range()]
            .into_iter()
            .flatten()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Checks the coefficients against `base`, including square summability.
    pub fn validate(&self, base: &ValidBase) -> Result<ValidCoefficients> {
        self.validate_inner(base, true)
    }

    /// Same checks as [`validate`](Self::validate) except square summability
    /// of the tails. Used for the non-summable gallery example, whose
    /// truncation bounds are then infinite.
    pub fn validate_without_summability(&self, base: &ValidBase) -> Result<ValidCoefficients> {
        self.validate_inner(base, false)
    }

    fn validate_inner(&self, base: &ValidBase, require_l2: bool) -> Result<ValidCoefficients> {
        let set = base.index_set();
        self.a_head.check("a_head", set)?;
        self.b_head.check("b_head", set)?;
        self.a_tail.check("a_tail")?;
        self.b_tail.check("b_tail")?;
        if require_l2 {
            for (field, tail) in [("a_tail", &self.a_tail), ("b_tail", &self.b_tail)] {
                if let Tail::PowerLaw(p) = tail {
                    if p.scale != 0.0 && !(p.beta > 0.5) {
                        return Err(Error::NonSummable { field, beta: p.beta });
                    }
                }
            }
        }
        let extent = self.extent();
        for n in set.window(extent) {
            if self.a(n) == Complex64::new(0.0, 0.0) && self.b(n) == Complex64::new(0.0, 0.0) {
                return Err(Error::DegenerateIndex { index: n });
            }
        }
        if self.a_tail.vanishes() && self.b_tail.vanishes() {
            return Err(Error::DegenerateIndex { index: extent + 1 });
        }
        Ok(ValidCoefficients {
            coeffs: self.clone(),
            index_set: set,
            extent,
        })
    }
}

/// Tail sum `sum_{|n| > N} |c_n|` and whether it is exact or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub exact: bool,
}

/// Coefficients that passed validation against a base spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidCoefficients {
    coeffs: PerturbationCoefficients,
    index_set: IndexSet,
    extent: Index,
}

impl ValidCoefficients {
    pub fn coefficients(&self) -> &PerturbationCoefficients {
        &self.coeffs
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    /// Largest `|n|` covered by an explicit head.
    pub fn extent(&self) -> Index {
        self.extent
    }

    #[inline]
    pub fn c(&self, n: Index) -> Complex64 {
        self.coeffs.c(n)
    }

    /// Membership in `I_1` (exact comparison with zero).
    #[inline]
    pub fn in_i1(&self, n: Index) -> bool {
        self.c(n) != Complex64::new(0.0, 0.0)
    }

    /// Splits the window `|n| <= radius` into `(I_0, I_1)`.
    pub fn partition(&self, radius: Index) -> (Vec<Index>, Vec<Index>) {
        self.index_set.window(radius).partition(|&n| !self.in_i1(n))
    }

    /// True when every coefficient product beyond the explicit heads vanishes.
    pub fn has_zero_tail(&self) -> bool {
        self.coeffs.a_tail.vanishes() || self.coeffs.b_tail.vanishes()
    }

    /// `sum_{|n| <= radius} |c_n|`.
    pub fn abs_sum(&self, radius: Index) -> f64 {
        let mut acc = 0.0;
        for n in self.index_set.window(radius).rev() {
            if n.abs() <= radius {
                acc += self.c(n).norm();
            }
        }
        acc
    }

    /// `T(N) = sum_{|n| > radius} |c_n|`, evaluated from the explicit head
    /// and a closed form for the generator tails.
    pub fn tail_sum(&self, radius: Index) -> TailSum {
        let radius = radius.max(0);
        let generated = self.generator_tail(radius.max(self.extent));
        let mut value = generated.value;
        if radius < self.extent {
            for n in self.index_set.window(self.extent).rev() {
                if n.abs() > radius {
                    value += self.c(n).norm();
                }
            }
        }
        TailSum {
            value,
            exact: generated.exact,
        }
    }

    /// `sum |c_n|` over the whole index set.
    pub fn total_abs_sum(&self) -> TailSum {
        let tail = self.tail_sum(self.extent);
        TailSum {
            value: tail.value + self.abs_sum(self.extent),
            exact: tail.exact,
        }
    }

    /// Tail sum beyond `radius >= extent`, where both sequences follow
    /// their generators.
    fn generator_tail(&self, radius: Index) -> TailSum {
        let (pa, pb) = match (&self.coeffs.a_tail, &self.coeffs.b_tail) {
            (Tail::PowerLaw(pa), Tail::PowerLaw(pb)) if pa.scale != 0.0 && pb.scale != 0.0 => (pa, pb),
            _ => {
                return TailSum {
                    value: 0.0,
                    exact: true,
                }
            }
        };
        let scale = (pa.scale * pb.scale).abs() * self.index_set.sides();
        let exponent = pa.beta + pb.beta;
        if !(exponent > 1.0) {
            return TailSum {
                value: f64::INFINITY,
                exact: false,
            };
        }
        // (n + s_a)^-p_a (n + s_b)^-p_b <= (n + min s)^-(p_a + p_b)
        let exact = pa.shift == pb.shift;
        TailSum {
            value: scale * power_tail(exponent, radius, pa.shift.min(pb.shift)),
            exact,
        }
    }
}
