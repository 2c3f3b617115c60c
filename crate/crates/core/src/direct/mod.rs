//! The direct problem: eigenvalues of `A + <., phi> psi` with their
//! algebraic multiplicities, paired to the unperturbed eigenvalues.
//!
//! Zeros of the characteristic function are counted with the argument
//! principle on disks `|z - lambda_k| < d/2` for large `|k|` and on one
//! central rectangle, isolated by subdivision and refined by Newton's method.

mod assemble;
pub mod contour;
mod isolate;
pub mod refine;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use assemble::assemble_spectrum;
pub use contour::{winding_number, Quadrature, Region, Winding};
pub use isolate::Isolation;
pub use refine::{refine_zero, resolution_radius, LocatedZero};

use crate::charfn::{localization_radii, CharacteristicFunction, Meromorphic, Point, Radii};
use crate::error::{Error, Result};
use crate::model::{Index, IndexSet, ValidBase, ValidCoefficients};

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectOptions {
    /// Localization parameter; defaults to `d / (2 + d)`.
    pub eps: Option<f64>,
    /// Truncation radius of the characteristic function.
    pub n_trunc: Index,
    pub quad: usize,
    pub max_quad: usize,
    /// How often `n_trunc` is doubled when certification fails.
    pub max_trunc_doublings: u32,
    /// Residual tolerance for refined zeros.
    pub tol: f64,
    /// Cluster radius relative to the gap.
    pub cluster_tol: f64,
    /// Relative distance at which a zero is identified with a common eigenvalue.
    pub coincidence_tol: f64,
    /// Lower bound for the explicit window radius.
    pub window: Option<Index>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            eps: None,
            n_trunc: 2000,
            quad: 256,
            max_quad: 4096,
            max_trunc_doublings: 2,
            tol: 1e-10,
            cluster_tol: 1e-6,
            coincidence_tol: 1e-9,
            window: None,
        }
    }
}

impl DirectOptions {
    fn isolation(&self, gap: f64) -> Isolation {
        Isolation {
            quad: Quadrature {
                initial: self.quad,
                max: self.max_quad.max(self.quad),
                scale: gap,
            },
            tol: self.tol,
            cluster: self.cluster_tol * gap,
        }
    }
}

/// Where a computed eigenvalue comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// `lambda_n` with `c_n = 0` and `F(lambda_n) != 0`.
    #[serde(rename = "common")]
    CommonWithA,
    #[serde(rename = "zero_of_F")]
    ZeroOfF,
    /// `lambda_n` with `c_n = 0` where `F` also vanishes.
    #[serde(rename = "both")]
    Both,
}

/// One unit of algebraic multiplicity, paired to one index. `mult` is the
/// algebraic multiplicity of the value `mu`, so an eigenvalue of
/// multiplicity `m` appears in `m` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumEntry {
    pub mu: Complex64,
    pub mult: usize,
    pub paired_index: Index,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbedSpectrum {
    /// Sorted by `paired_index`.
    pub entries: Vec<SpectrumEntry>,
    /// `sum |mu_n - lambda_n|` over the window.
    pub offset_sum: f64,
    /// Bound on `sum |mu_n - lambda_n|` over the indices beyond the window;
    /// `null` in JSON when there is none.
    #[serde(with = "crate::io::bound")]
    pub tail_bound: f64,
    pub certified: bool,
}

impl PerturbedSpectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.mu).collect()
    }

    pub fn entry(&self, n: Index) -> Option<&SpectrumEntry> {
        self.entries
            .binary_search_by_key(&n, |e| e.paired_index)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Offsets `|mu_n - lambda_n|` in index order.
    pub fn offsets(&self, base: &ValidBase) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| (e.mu - base.lambda(e.paired_index)).norm())
            .collect()
    }

    /// Certified total `sum |mu_n - lambda_n|` over all indices.
    pub fn total_offset_bound(&self) -> f64 {
        self.offset_sum + self.tail_bound
    }
}

/// Geometry of the localization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plan {
    /// Radius `K` of the central rectangle.
    pub central: Index,
    /// Radius used for the distance guard of the central rectangle: points
    /// outside it are at least `(central - inner) d` away from `lambda_n`, `|n| <= inner`.
    pub inner: Index,
    /// Explicit window radius; disks cover `central < |n| <= window`.
    pub window: Index,
    /// Whether the central rectangle must hold as many zeros as poles.
    pub balanced: bool,
    pub tail_bound: f64,
}

impl Plan {
    /// The central rectangle for radius `k`: real range from
    /// `lambda_{-k} - d/2` (or its mirror `-lambda_k` over the naturals) to
    /// `lambda_k + d/2`, and a symmetric imaginary range at least as tall as
    /// the real range is wide from the origin.
    pub fn central_region(&self, base: &ValidBase) -> Region {
        let d = base.gap();
        let k = self.central;
        let reach = (self.central - self.inner).max(0) as f64 * d;
        let right = base.lambda(k) + 0.5 * d;
        let left = match base.index_set() {
            IndexSet::Integers => base.lambda(-k),
            IndexSet::NaturalNumbers => (-base.lambda(k)).min(base.lambda(0) - reach),
        } - 0.5 * d;
        let h = left.abs().max(right.abs()).max(reach + 0.5 * d);
        let anchor = base.lambda(base.nearest_index(0.5 * (left + right)));
        Region::rectangle(anchor, (left, right), (-h, h))
    }
}

/// Which part of the localization a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Central,
    Disk(Index),
}

/// Zeros found in one region together with its winding certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroReport {
    pub label: RegionLabel,
    pub region: Region,
    pub winding: Winding,
    pub zeros: Vec<LocatedZero>,
    pub certified: bool,
}

impl ZeroReport {
    /// Total order of the zeros found.
    pub fn zero_count(&self) -> usize {
        self.zeros.iter().map(|z| z.order).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    /// Final plan, after disks with unexpected counts were absorbed into
    /// the central rectangle.
    pub plan: Plan,
    /// Central report first, then disks in increasing index order.
    pub reports: Vec<ZeroReport>,
    pub certified: bool,
}

impl Localization {
    pub fn central(&self) -> &ZeroReport {
        &self.reports[0]
    }

    pub fn disks(&self) -> &[ZeroReport] {
        &self.reports[1..]
    }
}

/// Counts, isolates and refines the zeros in disk `R_n`. `None` when the
/// disk does not behave like a single-pole disk and must be absorbed.
fn disk_report<F: Meromorphic + ?Sized>(f: &F, n: Index, iso: &Isolation) -> Result<Option<ZeroReport>> {
    let base = f.base();
    let d = base.gap();
    let center = Point::anchored(base.lambda(n), Complex64::new(0.0, 0.0));
    let expected = f.is_pole(n) as i64;
    let mut last = None;
    for shrink in 0..=4 {
        let region = Region::disk(center, 0.5 * d - shrink as f64 * d / 400.0);
        let w = match iso.quad.certify(f, &region) {
            Ok(w) => w,
            Err(Error::ContourThroughSingularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if w.certified {
            last = Some((region, w));
            break;
        }
    }
    let Some((region, winding)) = last else {
        return Ok(None);
    };
    if winding.zeros() != expected {
        return Ok(None);
    }
    let zeros = if expected == 1 {
        let seed = winding.zero_centroid(&region).expect("one zero");
        match refine_zero(f, seed, 1, iso.tol, &region, &iso.quad) {
            Ok(z) => vec![z],
            Err(Error::NoConvergence { .. }) | Err(Error::OrderMismatch { .. }) | Err(Error::CertificationFailed(_)) => {
                return Ok(None)
            }
            Err(e) => return Err(e),
        }
    } else {
        Vec::new()
    };
    Ok(Some(ZeroReport {
        label: RegionLabel::Disk(n),
        region,
        winding,
        zeros,
        certified: true,
    }))
}

fn central_report<F: Meromorphic + ?Sized>(f: &F, plan: &Plan, iso: &Isolation) -> Result<ZeroReport> {
    let base = f.base();
    let d = base.gap();
    let full = plan.central_region(base);
    let mut found = None;
    for shrink in 0..=4 {
        let region = match full {
            Region::Rectangle { anchor, re, im } => {
                let s = shrink as f64 * d / 400.0;
                Region::Rectangle {
                    anchor,
                    re: (re.0 + s, re.1 - s),
                    im: (im.0 + s, im.1 - s),
                }
            }
            disk => disk,
        };
        match iso.quad.certify(f, &region) {
            Ok(w) if w.certified => {
                found = Some((region, w));
                break;
            }
            Ok(_) | Err(Error::ContourThroughSingularity { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((region, winding)) = found else {
        return Err(Error::CertificationFailed(format!(
            "winding count on the central rectangle of radius {} did not certify",
            plan.central
        )));
    };
    let poles = winding.poles.len();
    if plan.balanced && winding.zeros() != poles as i64 {
        return Err(Error::CountMismatch {
            expected: poles,
            found: winding.zeros().max(0) as usize,
        });
    }
    let zeros = isolate::isolate(f, region, winding.clone(), iso)?;
    Ok(ZeroReport {
        label: RegionLabel::Central,
        region,
        winding,
        zeros,
        certified: true,
    })
}

/// Localizes every zero of `f` over the window of `plan`: one report per
/// disk `R_n` with `central < |n| <= window`, and one for the central
/// rectangle. Disks whose count differs from the single-pole expectation
/// are absorbed by enlarging the central rectangle.
pub fn localize_with<F: Meromorphic + ?Sized>(f: &F, plan: Plan, opts: &DirectOptions) -> Result<Localization> {
    let base = f.base();
    let iso = opts.isolation(base.gap());
    let disk_indices: Vec<Index> = base
        .index_set()
        .window(plan.window)
        .filter(|n| n.abs() > plan.central)
        .collect();
    let disks: Vec<Result<Option<ZeroReport>>> = disk_indices.par_iter().map(|&n| disk_report(f, n, &iso)).collect();
    let mut reports = Vec::with_capacity(disks.len());
    let mut central = plan.central;
    for (n, r) in disk_indices.iter().zip(disks) {
        match r? {
            Some(report) => reports.push(report),
            None => central = central.max(n.abs()),
        }
    }
    reports.retain(|r| matches!(r.label, RegionLabel::Disk(n) if n.abs() > central));
    let plan = Plan { central, ..plan };
    let center = central_report(f, &plan, &iso)?;
    reports.insert(0, center);
    let certified = reports.iter().all(|r| r.certified);
    Ok(Localization {
        plan,
        reports,
        certified,
    })
}

/// Everything the direct solver computed.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub spectrum: PerturbedSpectrum,
    pub localization: Localization,
    /// Radii for the enclosure parameter.
    pub radii: Radii,
    pub eps: f64,
    /// Parameter behind the tail bound, `d / (2 (d + 4))`.
    pub tail_eps: f64,
    pub n_trunc: Index,
}

/// Chooses the localization geometry for validated inputs.
pub fn plan_for(base: &ValidBase, coeffs: &ValidCoefficients, opts: &DirectOptions) -> Result<(Plan, Radii, f64, f64)> {
    let d = base.gap();
    let enclosure_eps = d / (2.0 + d);
    let eps = opts.eps.unwrap_or(enclosure_eps);
    let radii = localization_radii(base, coeffs, eps)?;
    let tail_eps = d / (2.0 * (d + 4.0));
    let mut window = coeffs.extent().max(radii.enclosure).max(opts.window.unwrap_or(0));
    let tail_bound = if coeffs.has_zero_tail() {
        0.0
    } else {
        window = window.max(localization_radii(base, coeffs, tail_eps)?.enclosure);
        d / (2.0 * tail_eps) * coeffs.tail_sum(window).value
    };
    let plan = Plan {
        central: radii.enclosure,
        inner: radii.tail,
        window,
        balanced: eps <= enclosure_eps * (1.0 + 1e-12),
        tail_bound,
    };
    Ok((plan, radii, eps, tail_eps))
}

/// Localization for validated inputs, returning the function it used.
pub fn localize_spectrum(
    base: &ValidBase,
    coeffs: &ValidCoefficients,
    opts: &DirectOptions,
) -> Result<(CharacteristicFunction, Localization)> {
    let (plan, ..) = plan_for(base, coeffs, opts)?;
    let mut n_trunc = opts.n_trunc.max(plan.window);
    let mut attempt = 0;
    loop {
        let f = CharacteristicFunction::new(base, coeffs, n_trunc);
        match localize_with(&f, plan, opts) {
            Ok(loc) => return Ok((f, loc)),
            Err(Error::CertificationFailed(_))
                if attempt < opts.max_trunc_doublings && !coeffs.has_zero_tail() =>
            {
                attempt += 1;
                n_trunc *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn solve_direct_detailed(base: &ValidBase, coeffs: &ValidCoefficients, opts: &DirectOptions) -> Result<DirectSolution> {
    let (_, radii, eps, tail_eps) = plan_for(base, coeffs, opts)?;
    let (f, localization) = localize_spectrum(base, coeffs, opts)?;
    let spectrum = assemble_spectrum(&f, &localization, opts.coincidence_tol)?;
    Ok(DirectSolution {
        spectrum,
        localization,
        radii,
        eps,
        tail_eps,
        n_trunc: f.n_trunc(),
    })
}

/// Eigenvalues of the perturbed operator over the explicit window.
pub fn solve_direct(base: &ValidBase, coeffs: &ValidCoefficients, opts: &DirectOptions) -> Result<PerturbedSpectrum> {
    Ok(solve_direct_detailed(base, coeffs, opts)?.spectrum)
}

/// First-order location `lambda_n + c_n` of an eigenvalue beyond the window.
pub fn tail_eigenvalue(base: &ValidBase, coeffs: &ValidCoefficients, n: Index) -> Complex64 {
    coeffs.c(n) + base.lambda(n)
}
