//! Dense finite sections of the perturbed operator, solved by a classical
//! eigensolver. Independent of the characteristic-function code paths.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assign::min_cost_assignment;
use crate::direct::PerturbedSpectrum;
use crate::error::{Error, Result};
use crate::model::{Index, ValidBase, ValidCoefficients};

pub const DIMENSION_CAP: usize = 1000;

/// Largest dimension for which the characteristic-polynomial fallback runs.
pub const COMPANION_LIMIT: usize = 8;

/// Matrix of the perturbed operator on the span of `v_n`, `n` in the
/// window: `M[j][k] = lambda_j delta_jk + b_j conj(a_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub radius: Index,
    /// Row and column indices, increasing.
    pub indices: Vec<Index>,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Finite section of radius `n`. Beyond the explicit heads the section is
/// exact only when `c_n` vanishes there.
pub fn build_truncation(base: &ValidBase, coeffs: &ValidCoefficients, n: Index) -> Result<TruncatedOperator> {
    let explicit = coeffs.extent().max(base.head_extent());
    if n > explicit && !coeffs.has_zero_tail() {
        return Err(Error::WindowExceeded {
            requested: n,
            available: explicit,
        });
    }
    let indices: Vec<Index> = base.index_set().window(n).collect();
    let dim = indices.len();
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
    }
    let raw = coeffs.coefficients();
    let a: Vec<Complex64> = indices.iter().map(|&k| raw.a(k).conj()).collect();
    let b: Vec<Complex64> = indices.iter().map(|&k| raw.b(k)).collect();
    let matrix = DMatrix::from_fn(dim, dim, |j, k| {
        let diag = if j == k { base.lambda(indices[j]) } else { 0.0 };
        b[j] * a[k] + diag
    });
    Ok(TruncatedOperator {
        radius: n,
        indices,
        matrix,
    })
}

fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

fn schur_eigenvalues(m: DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let dim = m.nrows();
    let schur = Schur::try_new(m, f64::EPSILON, 1000 * dim.max(1))?;
    let values = schur.eigenvalues()?;
    let out: Vec<Complex64> = values.iter().copied().collect();
    out.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(out)
}

/// Eigenvalues with multiplicity, sorted by real then imaginary part.
pub fn dense_eigenvalues(op: &TruncatedOperator) -> Result<Vec<Complex64>> {
    let dim = op.dim();
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
    }
    let mut values = match schur_eigenvalues(op.matrix.clone()) {
        Some(v) => v,
        None if dim <= COMPANION_LIMIT => companion_eigenvalues(op)?,
        None => return Err(Error::SolverFailure(format!("Schur iteration did not converge at dimension {dim}"))),
    };
    sort_spectrum(&mut values);
    Ok(values)
}

/// Monic characteristic polynomial `det(z - M)` by Faddeev-LeVerrier,
/// coefficients from the constant term up.
pub fn characteristic_polynomial(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut aux = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        aux = m * &aux;
        for i in 0..n {
            aux[(i, i)] += coeffs[n - k + 1];
        }
        coeffs[n - k] = -(m * &aux).trace() / k as f64;
    }
    coeffs
}

/// Eigenvalues through the roots of the characteristic polynomial, as
/// eigenvalues of its companion matrix. Intended for `dim <= 8`.
pub fn companion_eigenvalues(op: &TruncatedOperator) -> Result<Vec<Complex64>> {
    let n = op.dim();
    if n > COMPANION_LIMIT {
        return Err(Error::DimensionCap {
            dim: n,
            cap: COMPANION_LIMIT,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let p = characteristic_polynomial(&op.matrix);
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -p[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut values = schur_eigenvalues(companion)
        .ok_or_else(|| Error::SolverFailure("companion matrix eigenvalues did not converge".into()))?;
    sort_spectrum(&mut values);
    Ok(values)
}

/// `|sum of eigenvalues - (sum lambda_n + sum c_n)|` over the section.
pub fn trace_check(op: &TruncatedOperator, base: &ValidBase, coeffs: &ValidCoefficients, eigenvalues: &[Complex64]) -> f64 {
    let expected: Complex64 = op
        .indices
        .iter()
        .map(|&n| coeffs.c(n) + base.lambda(n))
        .sum();
    (eigenvalues.iter().sum::<Complex64>() - expected).norm()
}

/// Output of the `oracle` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub eigenvalues: Vec<Complex64>,
    pub trace_check: f64,
}

pub fn oracle_report(base: &ValidBase, coeffs: &ValidCoefficients, n: Index) -> Result<OracleReport> {
    let op = build_truncation(base, coeffs, n)?;
    let eigenvalues = dense_eigenvalues(&op)?;
    let trace_check = trace_check(&op, base, coeffs, &eigenvalues);
    Ok(OracleReport {
        eigenvalues,
        trace_check,
    })
}

/// Minimum-cost matching of two lists of eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `(computed, reference)` positions.
    pub pairs: Vec<(usize, usize)>,
    pub max_distance: f64,
    pub total_distance: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Matches two lists of equal length, counted with multiplicity.
pub fn compare_values(computed: &[Complex64], reference: &[Complex64], tol: f64) -> Result<Comparison> {
    if computed.len() != reference.len() {
        return Err(Error::CardinalityMismatch {
            computed: computed.len(),
            reference: reference.len(),
        });
    }
    let assignment = min_cost_assignment(computed.len(), reference.len(), |i, j| (computed[i] - reference[j]).norm());
    let pairs: Vec<(usize, usize)> = assignment.into_iter().enumerate().collect();
    let distances = pairs.iter().map(|&(i, j)| (computed[i] - reference[j]).norm());
    let (max_distance, total_distance) = distances.fold((0.0f64, 0.0), |(m, s), x| (m.max(x), s + x));
    Ok(Comparison {
        pairs,
        max_distance,
        total_distance,
        tol,
        pass: max_distance < tol,
    })
}

/// Compares a computed spectrum, one entry per unit of multiplicity, with
/// reference eigenvalues.
pub fn compare_spectra(computed: &PerturbedSpectrum, reference: &[Complex64], tol: f64) -> Result<Comparison> {
    compare_values(&computed.eigenvalues(), reference, tol)
}

/// Number of values within `radius` of `z`.
pub fn cluster_size(values: &[Complex64], z: Complex64, radius: f64) -> usize {
    values.iter().filter(|v| (**v - z).norm() <= radius).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BaseSpectrum, ComplexHead, IndexSet, PerturbationCoefficients, Tail};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_by_two() -> (ValidBase, ValidCoefficients) {
        let base = BaseSpectrum::affine(IndexSet::NaturalNumbers, 1.0, 0.0).validate().unwrap();
        let head = ComplexHead::from_fn(0..2, |n| c64([0.275f64, 0.075][n as usize].sqrt(), 0.0));
        let coeffs = PerturbationCoefficients {
            a_head: head.clone(),
            a_tail: Tail::PowerLaw(crate::model::PowerLawTail::new(1.0, 1.0)),
            b_head: head,
            b_tail: Tail::Zero,
        }
        .validate(&base)
        .unwrap();
        (base, coeffs)
    }

    #[test]
    fn two_by_two_section() {
        let (base, coeffs) = two_by_two();
        let op = build_truncation(&base, &coeffs, 1).unwrap();
        assert_eq!(op.dim(), 2);
        assert!((op.matrix[(0, 1)].re - 0.143_614_066_163_450_7).abs() < 1e-15);
        assert!((op.trace() - 1.35).norm() < 1e-15);
        let ev = dense_eigenvalues(&op).unwrap();
        assert!((ev[0] - 0.25).norm() < 1e-12);
        assert!((ev[1] - 1.1).norm() < 1e-12);
        let fallback = companion_eigenvalues(&op).unwrap();
        assert!(compare_values(&fallback, &ev, 1e-12).unwrap().pass);
        assert!(oracle_report(&base, &coeffs, 1).unwrap().trace_check < 1e-14);
    }

    #[test]
    fn polynomial_of_a_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]));
        let p = characteristic_polynomial(&m);
        assert_eq!(p, vec![c64(2.0, 0.0), c64(-3.0, 0.0), c64(1.0, 0.0)]);
    }

    #[test]
    fn limits() {
        let base = BaseSpectrum::affine(IndexSet::Integers, 1.0, 0.0).validate().unwrap();
        let coeffs = PerturbationCoefficients {
            a_head: ComplexHead::empty(),
            a_tail: Tail::PowerLaw(crate::model::PowerLawTail {
                shift: 1.0,
                ..crate::model::PowerLawTail::new(1.0, 1.0)
            }),
            b_head: ComplexHead::empty(),
            b_tail: Tail::Zero,
        }
        .validate(&base)
        .unwrap();
        let op = build_truncation(&base, &coeffs, 3).unwrap();
        assert_eq!(dense_eigenvalues(&op).unwrap(), (-3..=3).map(|n| c64(n as f64, 0.0)).collect::<Vec<_>>());
        assert!(matches!(
            build_truncation(&base, &coeffs, 600),
            Err(Error::DimensionCap { dim: 1201, .. })
        ));
        let with_tail = PerturbationCoefficients {
            b_tail: coeffs.coefficients().a_tail,
            ..coeffs.coefficients().clone()
        }
        .validate(&base)
        .unwrap();
        assert!(matches!(
            build_truncation(&base, &with_tail, 5),
            Err(Error::WindowExceeded { .. })
        ));
    }

    #[test]
    fn matching_ignores_order() {
        let a = [c64(1.0, 0.0), c64(2.0, 1.0), c64(-1.0, 0.0)];
        let b = [c64(-1.0, 0.0), c64(1.0, 0.0), c64(2.0, 1.0)];
        let r = compare_values(&a, &b, 1e-8).unwrap();
        assert_eq!(r.max_distance, 0.0);
        let shifted: Vec<_> = b.iter().map(|z| z + 1e-9).collect();
        assert!(compare_values(&a, &shifted, 1e-8).unwrap().pass);
        assert!(matches!(
            compare_values(&a, &b[..2], 1e-8),
            Err(Error::CardinalityMismatch { computed: 3, reference: 2 })
        ));
    }
}
