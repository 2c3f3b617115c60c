//! The inverse problem: perturbation coefficients realizing a prescribed
//! spectrum, via the product `prod (nu_n - z) / (lambda_n - z)` and its
//! residues at the unperturbed eigenvalues.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{CharacteristicFunction, POLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{
    ComplexHead, Index, PerturbationCoefficients, PowerLawTail, Tail, ValidBase, ValidCoefficients, ValidTarget,
};

/// Target after normalization: every `lambda_n` listed in the target is
/// assigned to its own index.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSplit {
    /// Indices of the head holding `nu_n = lambda_n`, increasing.
    pub i0: Vec<Index>,
    /// `(n, nu_n)` with `nu_n != lambda_n`, increasing in `n`.
    pub i1: Vec<(Index, Complex64)>,
}

/// Normalizes the target. Each head index `n` whose eigenvalue occurs among
/// the listed values claims one occurrence (its own position first); the
/// remaining values go, in order of appearance, to the remaining indices in
/// increasing order.
pub fn split_target(target: &ValidTarget) -> TargetSplit {
    let base = target.base();
    let indices: Vec<Index> = target.head_indices().collect();
    let values: Vec<Complex64> = indices.iter().map(|&n| target.nu(n)).collect();
    let mut claimed = vec![false; values.len()];
    let mut i0 = Vec::new();
    let mut rest = Vec::new();
    for (pos, &n) in indices.iter().enumerate() {
        let lambda = Complex64::new(base.lambda(n), 0.0);
        let hit = if values[pos] == lambda && !claimed[pos] {
            Some(pos)
        } else {
            (0..values.len()).find(|&j| !claimed[j] && values[j] == lambda)
        };
        match hit {
            Some(j) => {
                claimed[j] = true;
                i0.push(n);
            }
            None => rest.push(n),
        }
    }
    let leftovers = values.iter().zip(&claimed).filter(|(_, &c)| !c).map(|(&v, _)| v);
    let i1 = rest.into_iter().zip(leftovers).collect();
    TargetSplit { i0, i1 }
}

/// The finite product `F~(z) = prod_{n in I_1} (nu_n - z) / (lambda_n - z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    /// `(n, lambda_n, nu_n)`.
    factors: Vec<(Index, f64, Complex64)>,
    gap: f64,
}

impl ProductFunction {
    pub fn new(base: &ValidBase, split: &TargetSplit) -> Self {
        ProductFunction {
            factors: split.i1.iter().map(|&(n, nu)| (n, base.lambda(n), nu)).collect(),
            gap: base.gap(),
        }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        for &(n, lambda, _) in &self.factors {
            if (z - lambda).norm() < POLE_TOLERANCE * lambda.abs().max(1.0) {
                return Err(Error::PoleHit { index: n, lambda });
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self
            .factors
            .iter()
            .map(|&(_, lambda, nu)| (nu - z) / (lambda - z))
            .product())
    }

    /// `F~'(z)` by the product rule.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        let values: Vec<Complex64> = self.factors.iter().map(|&(_, l, nu)| (nu - z) / (l - z)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (k, &(_, lambda, nu)) in self.factors.iter().enumerate() {
            let d = (nu - lambda) / ((lambda - z) * (lambda - z));
            let others: Complex64 = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, v)| *v)
                .product();
            total += d * others;
        }
        Ok(total)
    }

    /// `exp(sum |nu_m - lambda_m| / d)`, an upper bound for every partial
    /// product of factors `(nu_m - lambda_n) / (lambda_m - lambda_n)`.
    pub fn factor_cap(&self) -> f64 {
        (self.factors.iter().map(|&(_, l, nu)| (nu - l).norm()).sum::<f64>() / self.gap).exp()
    }

    /// Residues `c_n = -lim (z - lambda_n) F~(z)
    /// = (nu_n - lambda_n) prod_{m != n} (nu_m - lambda_n) / (lambda_m - lambda_n)`,
    /// with the factors multiplied in order of increasing `|lambda_m - lambda_n|`.
    pub fn residues(&self) -> Result<Vec<(Index, Complex64)>> {
        let cap = self.factor_cap();
        let one = |k: usize| -> Result<(Index, Complex64)> {
            let (n, lambda_n, nu_n) = self.factors[k];
            let mut others: Vec<(f64, Complex64)> = self
                .factors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &(_, lambda_m, nu_m))| ((lambda_m - lambda_n).abs(), (nu_m - lambda_n) / (lambda_m - lambda_n)))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0));
            let product: Complex64 = others.iter().map(|p| p.1).product();
            if product.norm() > cap * (1.0 + 1e-12) {
                return Err(Error::SolverFailure(format!(
                    "residue product at index {n} exceeds its a priori bound {cap:e}"
                )));
            }
            Ok((n, (nu_n - lambda_n) * product))
        };
        if self.factors.len() > 64 {
            (0..self.factors.len()).into_par_iter().map(one).collect()
        } else {
            (0..self.factors.len()).map(one).collect()
        }
    }
}

fn head_range(indices: impl IntoIterator<Item = Index>) -> Option<(Index, Index)> {
    indices.into_iter().fold(None, |acc, n| match acc {
        None => Some((n, n)),
        Some((lo, hi)) => Some((lo.min(n), hi.max(n))),
    })
}

fn lookup(residues: &[(Index, Complex64)], n: Index) -> Option<Complex64> {
    residues
        .binary_search_by_key(&n, |r| r.0)
        .ok()
        .map(|i| residues[i].1)
}

/// `a_n = 1 / (1 + |n|)` as a generator.
fn reciprocal_tail() -> Tail {
    Tail::PowerLaw(PowerLawTail {
        shift: 1.0,
        ..PowerLawTail::new(1.0, 1.0)
    })
}

/// Coefficients with `conj(a_n) b_n = c_n`: `a_n = sqrt|c_n|`,
/// `b_n = sqrt|c_n| e^(i arg c_n)` on `I_1`, and `a_n = 1 / (1 + |n|)`,
/// `b_n = 0` elsewhere. `residues` must be sorted by index.
pub fn synthesize_coefficients(residues: &[(Index, Complex64)]) -> PerturbationCoefficients {
    let Some((lo, hi)) = head_range(residues.iter().map(|r| r.0)) else {
        return PerturbationCoefficients {
            a_head: ComplexHead::empty(),
            a_tail: reciprocal_tail(),
            b_head: ComplexHead::empty(),
            b_tail: Tail::Zero,
        };
    };
    let a = |n: Index| match lookup(residues, n) {
        Some(c) if c != Complex64::new(0.0, 0.0) => Complex64::new(c.norm().sqrt(), 0.0),
        _ => Complex64::new(1.0 / (1.0 + n.abs() as f64), 0.0),
    };
    let b = |n: Index| match lookup(residues, n) {
        Some(c) if c != Complex64::new(0.0, 0.0) => c / c.norm().sqrt(),
        _ => Complex64::new(0.0, 0.0),
    };
    PerturbationCoefficients {
        a_head: ComplexHead::from_fn(lo..=hi, a),
        a_tail: reciprocal_tail(),
        b_head: ComplexHead::from_fn(lo..=hi, b),
        b_tail: Tail::Zero,
    }
}

/// The coefficients of a fixed `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPhi {
    pub a_head: ComplexHead,
    pub a_tail: Tail,
}

impl FixedPhi {
    pub fn a(&self, n: Index) -> Complex64 {
        self.a_head.get(n).unwrap_or_else(|| self.a_tail.value(n))
    }
}

/// With `phi` prescribed, `b_n = c_n / conj(a_n)` is forced on `I_1`; where
/// `a_n = 0` the product cannot be realized. Off `I_1`, `b_n = 0` unless
/// `a_n = 0`, where `b_n = 1 / (1 + |n|)` keeps the index non-degenerate.
pub fn synthesize_with_phi(residues: &[(Index, Complex64)], phi: &FixedPhi) -> Result<PerturbationCoefficients> {
    let zero = Complex64::new(0.0, 0.0);
    for &(n, c) in residues {
        if c != zero && phi.a(n) == zero {
            return Err(Error::ZeroCoefficientObstruction { index: n });
        }
    }
    let a_span = phi.a_head.range();
    let range = head_range(residues.iter().map(|r| r.0).chain(a_span.into_iter().flat_map(|(lo, hi)| [lo, hi])));
    let b = |n: Index| {
        let a = phi.a(n);
        match lookup(residues, n) {
            Some(c) if c != zero => c / a.conj(),
            _ if a == zero => Complex64::new(1.0 / (1.0 + n.abs() as f64), 0.0),
            _ => zero,
        }
    };
    let b_head = match range {
        Some((lo, hi)) => ComplexHead::from_fn(lo..=hi, b),
        None => ComplexHead::empty(),
    };
    let b_tail = match phi.a_tail {
        Tail::Zero => reciprocal_tail(),
        Tail::PowerLaw(_) => Tail::Zero,
    };
    Ok(PerturbationCoefficients {
        a_head: phi.a_head.clone(),
        a_tail: phi.a_tail,
        b_head,
        b_tail,
    })
}

/// Maximum of `|F(z) - F~(z)|` over sample points against the allowance
/// from both evaluation error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub max: f64,
    /// Combined error bound at the worst point (relative to the bound).
    pub allowed: f64,
    /// Whether every sample stays within its own combined bound.
    pub within_bounds: bool,
}

/// Compares the characteristic function of `coeffs` with the product.
pub fn check_f_equals_product(
    base: &ValidBase,
    coeffs: &ValidCoefficients,
    product: &ProductFunction,
    samples: &[Complex64],
) -> Result<Discrepancy> {
    let f = CharacteristicFunction::new(base, coeffs, coeffs.extent());
    let m = product.len() as f64;
    let u = f64::EPSILON;
    let mut out = Discrepancy {
        max: 0.0,
        allowed: 0.0,
        within_bounds: true,
    };
    let mut worst_ratio = 0.0;
    for &z in samples {
        let fv = f.eval(z)?;
        let pv = product.eval(z)?;
        let diff = (fv.value - pv).norm();
        // residues carry O(m u) relative error each; the product O(m u)
        let spread: f64 = product
            .factors
            .iter()
            .map(|&(n, lambda, _)| coeffs.c(n).norm() / (lambda - z).norm())
            .sum();
        let allowed = fv.error_bound() + 8.0 * (m + 2.0) * u * (pv.norm() + spread + 1.0);
        out.within_bounds &= diff <= allowed;
        let ratio = diff / allowed;
        if diff > out.max {
            out.max = diff;
        }
        if ratio >= worst_ratio {
            worst_ratio = ratio;
            out.allowed = allowed;
        }
    }
    Ok(out)
}

/// 25 deterministic sample points at distance at least `d/2` from every
/// eigenvalue: midpoints between consecutive eigenvalues near the
/// deviating indices, at several heights.
pub fn sample_points(base: &ValidBase, split: &TargetSplit) -> Vec<Complex64> {
    let d = base.gap();
    let anchors: Vec<Index> = if split.i1.is_empty() {
        vec![base.index_set().first().unwrap_or(0)]
    } else {
        split.i1.iter().map(|p| p.0).collect()
    };
    (0..25)
        .map(|j| {
            let n = anchors[j % anchors.len()];
            let x = 0.5 * (base.lambda(n) + base.lambda(n + 1));
            let y = d * (j as f64 - 12.0) / 6.0;
            Complex64::new(x, y)
        })
        .collect()
}

/// Residues and coefficients for a target, with the F = F~ check.
#[derive(Debug, Clone)]
pub struct InverseSolution {
    pub split: TargetSplit,
    pub product: ProductFunction,
    pub residues: Vec<(Index, Complex64)>,
    pub coefficients: PerturbationCoefficients,
    pub discrepancy: Discrepancy,
}

/// Certificate emitted next to the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub residues: Vec<(Index, Complex64)>,
    #[serde(rename = "max_F_vs_product_discrepancy")]
    pub max_discrepancy: f64,
}

impl InverseSolution {
    pub fn certificate(&self) -> Certificate {
        Certificate {
            residues: self.residues.clone(),
            max_discrepancy: self.discrepancy.max,
        }
    }
}

fn finish(
    target: &ValidTarget,
    split: TargetSplit,
    product: ProductFunction,
    residues: Vec<(Index, Complex64)>,
    coefficients: PerturbationCoefficients,
) -> Result<InverseSolution> {
    let base = target.base();
    let valid = coefficients.validate(base)?;
    let discrepancy = check_f_equals_product(base, &valid, &product, &sample_points(base, &split))?;
    Ok(InverseSolution {
        split,
        product,
        residues,
        coefficients,
        discrepancy,
    })
}

/// Split, residues, coefficients.
pub fn solve_inverse(target: &ValidTarget) -> Result<InverseSolution> {
    let split = split_target(target);
    let product = ProductFunction::new(target.base(), &split);
    let residues = product.residues()?;
    let coefficients = synthesize_coefficients(&residues);
    finish(target, split, product, residues, coefficients)
}

/// As [`solve_inverse`], with the coefficients of `phi` prescribed.
pub fn solve_inverse_with_phi(target: &ValidTarget, phi: &FixedPhi) -> Result<InverseSolution> {
    let split = split_target(target);
    let product = ProductFunction::new(target.base(), &split);
    let residues = product.residues()?;
    let coefficients = synthesize_with_phi(&residues, phi)?;
    finish(target, split, product, residues, coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BaseSpectrum, IndexSet, TargetSpectrum};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn integers() -> ValidBase {
        BaseSpectrum::affine(IndexSet::Integers, 1.0, 0.0).validate().unwrap()
    }

    fn target(offset: Index, values: &[Complex64]) -> ValidTarget {
        TargetSpectrum::new(offset, values.iter().copied()).validate(&integers()).unwrap()
    }

    #[test]
    fn identity_target_has_no_deviations() {
        let t = target(-2, &[c64(-2.0, 0.0), c64(-1.0, 0.0), c64(0.0, 0.0)]);
        let s = split_target(&t);
        assert!(s.i1.is_empty());
        assert_eq!(s.i0, vec![-2, -1, 0]);
        let sol = solve_inverse(&t).unwrap();
        assert_eq!(ProductFunction::new(&integers(), &s).eval(c64(0.3, 0.2)).unwrap(), c64(1.0, 0.0));
        assert_eq!(sol.discrepancy.max, 0.0);
        let v = sol.coefficients.validate(&integers()).unwrap();
        assert!((-5..=5).all(|n| v.c(n) == c64(0.0, 0.0)));
    }

    #[test]
    fn two_point_target() {
        let t = target(0, &[c64(0.25, 0.0), c64(1.1, 0.0)]);
        let s = split_target(&t);
        assert_eq!(s.i1.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
        let p = ProductFunction::new(&integers(), &s);
        assert!((p.eval(c64(2.0, 0.0)).unwrap() - 0.7875).norm() < 1e-15);
        assert!((p.eval(c64(0.0, 1e6)).unwrap() - 1.0).norm() < 1e-5);
        let r = p.residues().unwrap();
        assert!((r[0].1 - 0.275).norm() < 1e-15);
        assert!((r[1].1 - 0.075).norm() < 1e-15);
        let coeffs = synthesize_coefficients(&r);
        assert!((coeffs.a(0).re - 0.524_404_424_085_075_8).abs() < 1e-15);
        assert_eq!(coeffs.a(0), coeffs.b(0));
        let sol = solve_inverse(&t).unwrap();
        assert!(sol.discrepancy.within_bounds);
        assert!(sol.discrepancy.max < 1e-12);
    }

    #[test]
    fn double_point_residues() {
        let t = target(0, &[c64(0.5, 0.0), c64(0.5, 0.0)]);
        let sol = solve_inverse(&t).unwrap();
        assert!((sol.residues[0].1 - 0.25).norm() < 1e-15);
        assert!((sol.residues[1].1 + 0.25).norm() < 1e-15);
        let v = sol.coefficients.validate(&integers()).unwrap();
        let f = CharacteristicFunction::new(&integers(), &v, 5);
        let z = c64(0.5, 0.0);
        assert!(f.eval(z).unwrap().value.norm() < 1e-15);
        assert!(f.eval_derivative(z, 1).unwrap().value.norm() < 1e-10);
        assert!(sol.product.derivative(z).unwrap().norm() < 1e-10);
    }

    #[test]
    fn negative_residue_gets_real_negative_b() {
        let coeffs = synthesize_coefficients(&[(2, c64(-1.0, 0.0))]);
        assert_eq!(coeffs.a(2), c64(1.0, 0.0));
        assert_eq!(coeffs.b(2), c64(-1.0, 0.0));
    }

    #[test]
    fn common_indices_get_reciprocal_a() {
        let coeffs = synthesize_coefficients(&[(0, c64(0.1, 0.0)), (7, c64(0.1, 0.0))]);
        assert_eq!(coeffs.a(4), c64(0.2, 0.0));
        assert_eq!(coeffs.b(4), c64(0.0, 0.0));
        assert_eq!(coeffs.a(-9), c64(0.1, 0.0));
    }

    #[test]
    fn listed_eigenvalue_moves_to_its_index() {
        // lambda_3 = 3 listed at position 7
        let mut values: Vec<Complex64> = (0..10).map(|n| c64(n as f64, 0.0)).collect();
        values[3] = c64(3.4, 0.0);
        values[7] = c64(3.0, 0.0);
        let s = split_target(&target(0, &values));
        assert!(s.i0.contains(&3));
        assert_eq!(s.i1, vec![(7, c64(3.4, 0.0))]);
    }

    #[test]
    fn complex_target() {
        let t = target(0, &[c64(0.0, 1.0)]);
        let sol = solve_inverse(&t).unwrap();
        assert_eq!(sol.residues, vec![(0, c64(0.0, 1.0))]);
    }

    #[test]
    fn fixed_phi_forces_b() {
        let phi = FixedPhi {
            a_head: ComplexHead {
                offset: 0,
                values: vec![[0.0, 0.0], [2.0, 0.0]],
            },
            a_tail: Tail::Zero,
        };
        assert!(matches!(
            synthesize_with_phi(&[(0, c64(0.3, 0.0))], &phi),
            Err(Error::ZeroCoefficientObstruction { index: 0 })
        ));
        let coeffs = synthesize_with_phi(&[(1, c64(0.3, 0.1))], &phi).unwrap();
        assert_eq!(coeffs.c(1), c64(0.3, 0.1));
        assert_eq!(coeffs.b(0), c64(1.0, 0.0));
        assert!(coeffs.validate(&integers()).is_ok());
    }
}
