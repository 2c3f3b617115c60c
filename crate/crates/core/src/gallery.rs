//! Built-in examples over the spectrum of the periodic derivative operator
//! (`lambda_n = n`, `n` in Z), with their invariant checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{Bounded, Meromorphic, Point, POLE_TOLERANCE};
use crate::direct::{assemble_spectrum, localize_with, solve_direct_detailed, DirectOptions, PerturbedSpectrum, Plan};
use crate::error::{Error, Result};
use crate::model::zeta::hurwitz_zeta;
use crate::model::{
    BaseSpectrum, ComplexHead, Index, IndexSet, PerturbationCoefficients, PowerLawTail, Tail, ValidBase,
};

/// Number of series terms used for `F` near the origin.
const SERIES_TERMS: usize = 30;
/// Below this modulus `F` is summed from its Taylor series at 0.
const SERIES_RADIUS: f64 = 0.25;

/// `lambda_n = n` over Z, gap 1.
pub fn example_periodic_base() -> BaseSpectrum {
    BaseSpectrum::affine(IndexSet::Integers, 1.0, 0.0)
}

fn periodic() -> ValidBase {
    example_periodic_base().validate().expect("the periodic base is valid")
}

/// `a_0 = 1`, `b_0 = 0` keeps index 0 non-degenerate while `c_0 = 0`.
fn origin_heads() -> (ComplexHead, ComplexHead) {
    (
        ComplexHead {
            offset: 0,
            values: vec![[1.0, 0.0]],
        },
        ComplexHead {
            offset: 0,
            values: vec![[0.0, 0.0]],
        },
    )
}

/// `cot(w)`, stable for large `|Im w|`.
fn cot(w: Complex64) -> Complex64 {
    if w.im.abs() < 20.0 {
        return w.cos() / w.sin();
    }
    let flip = w.im < 0.0;
    let w = if flip { w.conj() } else { w };
    // e = exp(2iw) is tiny here
    let e = (Complex64::new(0.0, 2.0) * w).exp();
    let v = Complex64::new(0.0, 1.0) * (e + 1.0) / (e - 1.0);
    if flip {
        v.conj()
    } else {
        v
    }
}

/// Closed form `F(z) = (z^2 + 1)/z^2 - (pi/z) cot(pi z)` of the
/// characteristic function with `c_n = 1/n`, `c_0 = 0`. Only `F` and `F'`
/// are available.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    base: ValidBase,
    /// `zeta(2j + 2)`.
    zetas: Vec<f64>,
}

impl Default for ClosedForm {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosedForm {
    pub fn new() -> Self {
        ClosedForm {
            base: periodic(),
            zetas: (0..SERIES_TERMS).map(|j| hurwitz_zeta(2.0 * j as f64 + 2.0, 1.0)).collect(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.derivatives(Point::new(z), 0)?[0].value)
    }

    /// `(F, F', |terms of F|, |terms of F'|)`.
    fn parts(&self, at: Point) -> Result<(Complex64, Complex64, f64, f64)> {
        let z = at.value();
        if z.norm() < SERIES_RADIUS {
            // F = 1 + 2 sum zeta(2j+2) z^(2j)
            let z2 = z * z;
            let (mut f, mut df) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let (mut mf, mut mdf) = (0.0, 0.0);
            let mut power = Complex64::new(1.0, 0.0);
            for (j, &zeta) in self.zetas.iter().enumerate() {
                if j > 0 {
                    let term = power / z * (2.0 * zeta * 2.0 * j as f64);
                    df += term;
                    mdf += term.norm();
                }
                let term = power * (2.0 * zeta);
                f += term;
                mf += term.norm();
                power *= z2;
            }
            return Ok((f + 1.0, df, mf + 1.0, mdf));
        }
        let k = (at.base + at.offset.re).round();
        let r = Complex64::new(at.base - k, 0.0) + at.offset;
        if k != 0.0 && r.norm() < POLE_TOLERANCE * k.abs().max(1.0) {
            return Err(Error::PoleHit {
                index: k as Index,
                lambda: k,
            });
        }
        let cot = cot(PI * r);
        let inv = z.inv();
        let inv2 = inv * inv;
        let pc = PI * cot * inv;
        let f = inv2 + 1.0 - pc;
        let csc2 = cot * cot + 1.0;
        let df = -2.0 * inv2 * inv + PI * PI * csc2 * inv + pc * inv;
        let mf = 1.0 + inv2.norm() + pc.norm();
        let mdf = 2.0 * (inv2 * inv).norm() + PI * PI * (1.0 + cot.norm_sqr()) * inv.norm() + (pc * inv).norm();
        Ok((f, df, mf, mdf))
    }

    /// `|tan(pi mu) - pi mu / (mu^2 + 1)|`.
    pub fn tan_residual(mu: Complex64) -> f64 {
        ((PI * mu).tan() - PI * mu / (mu * mu + 1.0)).norm()
    }
}

impl Meromorphic for ClosedForm {
    fn derivatives(&self, at: Point, order: usize) -> Result<Vec<Bounded>> {
        if order > 1 {
            return Err(Error::UnsupportedDerivative(order));
        }
        let (f, df, mf, mdf) = self.parts(at)?;
        let u = 16.0 * f64::EPSILON;
        let mut out = vec![Bounded {
            value: f,
            truncation: 0.0,
            rounding: u * mf,
        }];
        if order == 1 {
            out.push(Bounded {
                value: df,
                truncation: 0.0,
                rounding: u * mdf,
            });
        }
        Ok(out)
    }

    fn base(&self) -> &ValidBase {
        &self.base
    }

    fn is_pole(&self, n: Index) -> bool {
        n != 0
    }

    fn magnitude(&self, at: Point) -> f64 {
        self.parts(at).map_or(f64::INFINITY, |p| p.2)
    }
}

/// The non-summable example: `a_n = |n|^(-1/2)`, `b_n = sign(n) |n|^(-1/2)`,
/// so `c_n = 1/n`; index 0 carries `a_0 = 1`, `b_0 = 0`.
#[derive(Debug, Clone)]
pub struct Example51 {
    pub coefficients: PerturbationCoefficients,
    pub closed_form: ClosedForm,
    pub window: Index,
}

pub fn example_51(window: Index) -> Result<Example51> {
    if window < 1 {
        return Err(Error::InvalidDocument(format!("window must be at least 1, got {window}")));
    }
    let (a_head, b_head) = origin_heads();
    let half = PowerLawTail::new(0.5, 1.0);
    Ok(Example51 {
        coefficients: PerturbationCoefficients {
            a_head,
            a_tail: Tail::PowerLaw(half),
            b_head,
            b_tail: Tail::PowerLaw(PowerLawTail { odd: true, ..half }),
        },
        closed_form: ClosedForm::new(),
        window,
    })
}

/// Radius of the rectangle around the origin for the closed form; disks
/// beyond it hold exactly one zero each.
const EXAMPLE_51_CENTRAL: Index = 3;

/// Eigenvalues for `|n| <= window`, located on the closed form (the
/// truncated series has no finite tail bound here).
pub fn solve_example_51(ex: &Example51, opts: &DirectOptions) -> Result<PerturbedSpectrum> {
    let plan = Plan {
        central: EXAMPLE_51_CENTRAL.min(ex.window),
        inner: 0,
        window: ex.window,
        balanced: false,
        tail_bound: f64::INFINITY,
    };
    let loc = localize_with(&ex.closed_form, plan, opts)?;
    assemble_spectrum(&ex.closed_form, &loc, opts.coincidence_tol)
}

/// `a_n = b_n = |n|^(-beta)` for `n != 0`, so `c_n = |n|^(-2 beta)`;
/// index 0 carries `a_0 = 1`, `b_0 = 0`.
pub fn example_52(beta: f64) -> Result<PerturbationCoefficients> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let (a_head, b_head) = origin_heads();
    let tail = Tail::PowerLaw(PowerLawTail::new(beta, 1.0));
    Ok(PerturbationCoefficients {
        a_head,
        a_tail: tail,
        b_head,
        b_tail: tail,
    })
}

/// One line of a gallery report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            value,
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!("{}: {} ({:e})", self.name, if self.pass { "PASS" } else { "FAIL" }, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryReport {
    pub example: String,
    pub checks: Vec<Check>,
}

impl GalleryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn offset(spectrum: &PerturbedSpectrum, n: Index) -> Option<Complex64> {
    spectrum.entry(n).map(|e| e.mu - n as f64)
}

pub fn report_periodic() -> Result<GalleryReport> {
    let base = periodic();
    let monotone = (-50..50).all(|n| base.lambda(n) < base.lambda(n + 1));
    Ok(GalleryReport {
        example: "periodic".into(),
        checks: vec![
            Check::new("gap = 1", base.gap(), base.gap() == 1.0),
            Check::new("lambda_0 = 0", base.lambda(0), base.lambda(0) == 0.0),
            Check::new("monotone increasing", 0.0, monotone),
        ],
    })
}

/// Partial sums `sum_{|n| <= N} |mu_n - n|` for `N = 1..=window`.
pub fn partial_offset_sums(spectrum: &PerturbedSpectrum, window: Index) -> Vec<f64> {
    let mut acc = offset(spectrum, 0).map_or(0.0, |z| z.norm());
    (1..=window)
        .map(|n| {
            acc += [n, -n].iter().filter_map(|&k| offset(spectrum, k)).map(|z| z.norm()).sum::<f64>();
            acc
        })
        .collect()
}

/// Periodic-coefficient example checks: the zero equation, `n (mu_n - n) -> 1`, and
/// logarithmic growth of the partial offset sums (coefficient per side).
pub fn report_51(window: Index, opts: &DirectOptions) -> Result<(PerturbedSpectrum, GalleryReport)> {
    let ex = example_51(window)?;
    let spectrum = solve_example_51(&ex, opts)?;
    let tan = (1..=window.min(200))
        .filter_map(|n| spectrum.entry(n))
        .map(|e| ClosedForm::tan_residual(e.mu))
        .fold(0.0, f64::max);
    let asymptotic: Vec<f64> = (100..=window)
        .filter_map(|n| offset(&spectrum, n).map(|z| (n as f64 * z - 1.0).norm()))
        .collect();
    let worst = asymptotic.iter().copied().fold(0.0, f64::max);
    let sums = partial_offset_sums(&spectrum, window);
    let start = 10.min(window);
    let (x, y): (Vec<f64>, Vec<f64>) = (start..=window)
        .map(|n| ((n as f64).ln(), sums[n as usize - 1]))
        .unzip();
    let per_side = if x.len() >= 2 { linear_fit(&x, &y).0 / 2.0 } else { f64::NAN };
    let checks = vec![
        Check::new("tan equation residual < 1e-8", tan, tan < 1e-8),
        Check::new(
            "|n(mu_n - n) - 1| < 0.05 for n >= 100",
            worst,
            !asymptotic.is_empty() && worst < 0.05,
        ),
        Check::new(
            "partial offset sums grow like log N, coefficient in [0.8, 1.2]",
            per_side,
            (0.8..=1.2).contains(&per_side),
        ),
    ];
    Ok((
        spectrum,
        GalleryReport {
            example: "ex51".into(),
            checks,
        },
    ))
}

/// Power-law example checks: summability certificate, and decay exponent and
/// two-sided bound of the offsets over `|n|` in `[20, 200]`.
pub fn report_52(beta: f64, window: Index, opts: &DirectOptions) -> Result<(PerturbedSpectrum, GalleryReport)> {
    let base = periodic();
    let coeffs = example_52(beta)?.validate(&base)?;
    let opts = DirectOptions {
        window: Some(window),
        ..opts.clone()
    };
    let solution = solve_direct_detailed(&base, &coeffs, &opts)?;
    let spectrum = solution.spectrum;
    let exponent = 2.0 * beta;
    let hi = window.min(200);
    let (x, y): (Vec<f64>, Vec<f64>) = (20..=hi)
        .filter_map(|n| offset(&spectrum, n).map(|z| ((n as f64).ln(), z.norm().ln())))
        .unzip();
    let slope = if x.len() >= 2 { linear_fit(&x, &y).0 } else { f64::NAN };
    let ratios: Vec<f64> = (20..=hi)
        .flat_map(|n| [n, -n])
        .filter_map(|n| offset(&spectrum, n).map(|z| z.norm() * (n.abs() as f64).powf(exponent)))
        .collect();
    let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let total = spectrum.total_offset_bound();
    let checks = vec![
        Check::new("certified localization", 0.0, spectrum.certified),
        Check::new("offset sum plus tail bound finite", total, total.is_finite()),
        Check::new(
            format!("slope within 5% of -{exponent}"),
            slope,
            ((-slope) / exponent - 1.0).abs() < 0.05,
        ),
        Check::new("two-sided bound C/c < 10", spread, spread < 10.0),
    ];
    Ok((
        spectrum,
        GalleryReport {
            example: "ex52".into(),
            checks,
        },
    ))
}
