//! The characteristic function `F(z) = 1 + sum c_n / (lambda_n - z)` of a
//! rank-one perturbation, evaluated over a symmetric truncation window with
//! certified bounds for the discarded tail.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Index, TailSum, ValidBase, ValidCoefficients};

/// Relative distance below which a point is treated as sitting on a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// A point `base + offset` of the complex plane.
///
/// Anchoring at a real `base` (usually an eigenvalue `lambda_k`) keeps small
/// offsets at full relative precision: the differences `lambda_n - base` are
/// formed before the offset is subtracted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub base: f64,
    pub offset: Complex64,
}

impl Point {
    pub fn new(z: Complex64) -> Self {
        Point { base: 0.0, offset: z }
    }

    pub fn anchored(base: f64, offset: Complex64) -> Self {
        Point { base, offset }
    }

    pub fn value(&self) -> Complex64 {
        self.offset + self.base
    }

    /// Same point, re-anchored at `base`.
    pub fn rebase(&self, base: f64) -> Self {
        Point {
            base,
            offset: self.offset + (self.base - base),
        }
    }

    /// `self - lambda`, computed at full precision when `lambda` is close to the anchor.
    pub fn minus(&self, lambda: f64) -> Complex64 {
        self.offset - (lambda - self.base)
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::new(z)
    }
}

/// A computed value together with bounds on the truncation and rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: Complex64,
    pub truncation: f64,
    pub rounding: f64,
}

impl Bounded {
    pub fn exact(value: Complex64) -> Self {
        Bounded {
            value,
            truncation: 0.0,
            rounding: 0.0,
        }
    }

    /// Total error bound.
    pub fn error_bound(&self) -> f64 {
        self.truncation + self.rounding
    }
}

/// Meromorphic functions on the plane whose poles are simple and sit at
/// eigenvalues of a base spectrum. Both the truncated series and the closed
/// forms of the gallery implement it, so the contour machinery is shared.
pub trait Meromorphic: Sync {
    /// `f, f', ..., f^(order)` at `at`.
    fn derivatives(&self, at: Point, order: usize) -> Result<Vec<Bounded>>;

    fn base(&self) -> &ValidBase;

    /// Whether `lambda_n` is a pole.
    fn is_pole(&self, n: Index) -> bool;

    /// `1 + sum |c_n / (lambda_n - z)|`, the natural scale of rounding errors at `at`.
    fn magnitude(&self, at: Point) -> f64;

    /// Poles in the closed interval `[lo, hi]`, as `(index, position)`.
    fn poles_in(&self, lo: f64, hi: f64) -> Vec<(Index, f64)> {
        let base = self.base();
        base.indices_in(lo, hi)
            .filter(|&n| self.is_pole(n))
            .map(|n| (n, base.lambda(n)))
            .collect()
    }
}

/// Evaluatable truncation of the characteristic function.
#[derive(Debug, Clone)]
pub struct CharacteristicFunction {
    base: ValidBase,
    coeffs: ValidCoefficients,
    n_trunc: Index,
    /// Terms with `|n| <= n_trunc`, `c_n != 0`, largest `|n|` first.
    terms: Vec<Term>,
    tail: TailSum,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    n: Index,
    lambda: f64,
    c: Complex64,
    c_abs: f64,
    /// Squared pole tolerance at `lambda`.
    guard: f64,
}

/// Window radii controlling the localization of the zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radii {
    /// Smallest `K` with `sum_{|n| > K} |c_n| < eps`.
    pub tail: Index,
    /// Smallest `K' > K` with `sum_{|n| <= K} |c_n| / ((K' - K) d) < eps`.
    pub enclosure: Index,
}

impl CharacteristicFunction {
    pub fn new(base: &ValidBase, coeffs: &ValidCoefficients, n_trunc: Index) -> Self {
        let n_trunc = n_trunc.max(0);
        let set = base.index_set();
        let mut terms = Vec::new();
        for k in (0..=n_trunc).rev() {
            let mirror = (k > 0).then_some(-k);
            for n in std::iter::once(k).chain(mirror) {
                if !set.contains(n) {
                    continue;
                }
                let c = coeffs.c(n);
                if c != Complex64::new(0.0, 0.0) {
                    let lambda = base.lambda(n);
                    let tol = POLE_TOLERANCE * lambda.abs().max(1.0);
                    terms.push(Term {
                        n,
                        lambda,
                        c,
                        c_abs: c.norm(),
                        guard: tol * tol,
                    });
                }
            }
        }
        CharacteristicFunction {
            base: base.clone(),
            coeffs: coeffs.clone(),
            n_trunc,
            terms,
            tail: coeffs.tail_sum(n_trunc),
        }
    }

    pub fn coefficients(&self) -> &ValidCoefficients {
        &self.coeffs
    }

    pub fn n_trunc(&self) -> Index {
        self.n_trunc
    }

    /// `T(N) = sum_{|n| > N} |c_n|` for the truncation radius `N`.
    pub fn tail_sum(&self) -> TailSum {
        self.tail
    }

    /// Number of nonzero terms kept in the truncated sum.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `F(z)` with a bound covering the discarded tail and rounding.
    pub fn eval(&self, z: Complex64) -> Result<Bounded> {
        self.eval_at(Point::new(z))
    }

    pub fn eval_at(&self, at: Point) -> Result<Bounded> {
        Ok(self.derivatives(at, 0)?[0])
    }

    /// `F^(order)(z)` of the truncated sum, with the tail bound
    /// `T(N) order! / delta^(order + 1)`.
    pub fn eval_derivative(&self, z: Complex64, order: usize) -> Result<Bounded> {
        Ok(self.derivatives(Point::new(z), order)?[order])
    }

    /// Exact two-term value `1 + c_k / (lambda_k - z)`; its unique zero is
    /// `lambda_k + c_k`.
    pub fn eval_single_pole(&self, k: Index, z: Complex64) -> Result<Complex64> {
        let c = self.coeffs.c(k);
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::IndexNotInI1 { index: k });
        }
        let lambda = self.base.lambda(k);
        let w = Complex64::new(lambda, 0.0) - z;
        if hits_pole(w, lambda) {
            return Err(Error::PoleHit { index: k, lambda });
        }
        Ok(1.0 + c / w)
    }

    /// Partial sum `1 + sum_{|n| <= k} c_n / (lambda_n - z)` (no tail).
    pub fn eval_partial(&self, k: Index, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        if k < 0 {
            return Ok(acc + 1.0);
        }
        for n in self.base.index_set().window(k).rev() {
            let c = self.coeffs.c(n);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let lambda = self.base.lambda(n);
            let w = Complex64::new(lambda, 0.0) - z;
            if hits_pole(w, lambda) {
                return Err(Error::PoleHit { index: n, lambda });
            }
            acc += c / w;
        }
        Ok(acc + 1.0)
    }

    /// Localization radii for a given `eps` in `(0, d/2)`.
    pub fn localization_radii(&self, eps: f64) -> Result<Radii> {
        localization_radii(&self.base, &self.coeffs, eps)
    }

    /// Distance from `at` to the nearest eigenvalue with `|n| > N`.
    fn distance_to_unrepresented(&self, at: Point) -> (f64, Option<Index>) {
        let base = &self.base;
        let n = self.n_trunc;
        let x = at.value().re;
        let mut best = (f64::INFINITY, None);
        let mut consider = |k: Index| {
            let dist = at.minus(base.lambda(k)).norm();
            if dist < best.0 {
                best = (dist, Some(k));
            }
        };
        // right side: k >= n + 1
        let right = base.floor_index(x).map_or(n + 1, |f| f.max(n + 1));
        consider(right);
        consider(right + 1);
        if base.index_set().contains(-n - 1) {
            let left = base.floor_index(x).map_or(-n - 1, |f| f.min(-n - 2));
            consider(left.min(-n - 1));
            consider((left + 1).min(-n - 1));
        }
        best
    }
}

fn hits_pole(w: Complex64, lambda: f64) -> bool {
    w.norm() < POLE_TOLERANCE * lambda.abs().max(1.0)
}

impl CharacteristicFunction {
    /// Sums of `c_n k! / (lambda_n - z)^(k + 1)` and of their moduli (bounded
    /// by `|re| + |im|`) for `k = 0..=order`.
    fn sums(&self, at: Point, order: usize) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let mut values = vec![Complex64::new(0.0, 0.0); order + 1];
        let mut magnitudes = vec![0.0; order + 1];
        for t in &self.terms {
            let w = -at.minus(t.lambda);
            let r2 = w.norm_sqr();
            if r2 < t.guard {
                return Err(Error::PoleHit {
                    index: t.n,
                    lambda: t.lambda,
                });
            }
            let s = 1.0 / r2;
            let inv = Complex64::new(w.re * s, -w.im * s);
            let mut p = t.c * inv;
            values[0] += p;
            // |re| + |im| bounds the modulus without a square root
            magnitudes[0] += p.l1_norm();
            for k in 1..=order {
                p *= inv * k as f64;
                values[k] += p;
                magnitudes[k] += p.l1_norm();
            }
        }
        Ok((values, magnitudes))
    }

    /// [`Self::sums`] for `order = 1`, the hot path of the contour integrals.
    fn first_two(&self, at: Point) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let (mut v0, mut v1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let (mut m0, mut m1) = (0.0, 0.0);
        for t in &self.terms {
            let w = -at.minus(t.lambda);
            let r2 = w.norm_sqr();
            if r2 < t.guard {
                return Err(Error::PoleHit {
                    index: t.n,
                    lambda: t.lambda,
                });
            }
            let s = 1.0 / r2;
            let inv = Complex64::new(w.re * s, -w.im * s);
            let p = t.c * inv;
            let q = p * inv;
            v0 += p;
            v1 += q;
            m0 += p.l1_norm();
            m1 += q.l1_norm();
        }
        Ok((vec![v0, v1], vec![m0, m1]))
    }
}

impl Meromorphic for CharacteristicFunction {
    fn derivatives(&self, at: Point, order: usize) -> Result<Vec<Bounded>> {
        let (mut values, mut magnitudes) = if order <= 1 {
            self.first_two(at)?
        } else {
            self.sums(at, order)?
        };
        values.truncate(order + 1);
        magnitudes.truncate(order + 1);
        values[0] += 1.0;
        magnitudes[0] += 1.0;

        let tail = self.tail.value;
        let (delta, nearest) = if tail > 0.0 {
            self.distance_to_unrepresented(at)
        } else {
            (f64::INFINITY, None)
        };
        if let Some(k) = nearest {
            let lambda = self.base.lambda(k);
            if self.coeffs.in_i1(k) && delta < POLE_TOLERANCE * lambda.abs().max(1.0) {
                return Err(Error::PoleHit { index: k, lambda });
            }
        }
        let gamma = 2.0 * (self.terms.len() as f64 + 4.0) * f64::EPSILON;
        let mut factorial = 1.0;
        Ok((0..=order)
            .map(|k| {
                if k > 0 {
                    factorial *= k as f64;
                }
                let truncation = if tail > 0.0 {
                    tail * factorial / delta.powi(k as i32 + 1)
                } else {
                    0.0
                };
                Bounded {
                    value: values[k],
                    truncation,
                    rounding: gamma * magnitudes[k],
                }
            })
            .collect())
    }

    fn base(&self) -> &ValidBase {
        &self.base
    }

    fn is_pole(&self, n: Index) -> bool {
        n.abs() <= self.n_trunc && self.coeffs.in_i1(n)
    }

    fn magnitude(&self, at: Point) -> f64 {
        1.0 + self
            .terms
            .iter()
            .map(|t| t.c_abs / at.minus(t.lambda).norm_sqr().sqrt())
            .sum::<f64>()
    }
}

/// Radii `(K_eps, K'_eps)` for `eps` in `(0, d/2)`.
pub fn localization_radii(base: &ValidBase, coeffs: &ValidCoefficients, eps: f64) -> Result<Radii> {
    let d = base.gap();
    if !(eps > 0.0 && eps < d / 2.0) {
        return Err(Error::EpsOutOfRange { eps, limit: d / 2.0 });
    }
    let extent = coeffs.extent();
    let at_extent = coeffs.tail_sum(extent).value;
    let tail = if at_extent < eps {
        // walk inward while the tail stays below eps
        let set = coeffs.index_set();
        let mut k = extent;
        let mut t = at_extent;
        while k > 0 {
            let mut add = coeffs.c(k).norm();
            if set.contains(-k) {
                add += coeffs.c(-k).norm();
            }
            if t + add < eps {
                t += add;
                k -= 1;
            } else {
                break;
            }
        }
        k
    } else {
        if !at_extent.is_finite() {
            return Err(Error::CertificationFailed(
                "coefficient products are not summable; no finite localization radius".into(),
            ));
        }
        let mut hi = extent.max(1);
        while coeffs.tail_sum(hi).value >= eps {
            hi = hi.checked_mul(2).ok_or_else(|| {
                Error::CertificationFailed("localization radius overflow".into())
            })?;
        }
        let mut lo = extent;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if coeffs.tail_sum(mid).value < eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let head = coeffs.abs_sum(tail);
    let enclosure = tail + (head / (eps * d)).floor() as Index + 1;
    Ok(Radii { tail, enclosure })
}
