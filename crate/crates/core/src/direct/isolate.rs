//! Isolation of the zeros inside a rectangle by recursive subdivision.

use rayon::prelude::*;

use super::contour::{Quadrature, Region, Winding};
use super::refine::{refine_zero, resolution_radius, LocatedZero};
use crate::charfn::{Meromorphic, Point};
use crate::error::{Error, Result};

/// Offsets (as fractions of the box side) tried for a split line that
/// fails to certify.
const SPLIT_SHIFTS: [f64; 7] = [0.0, 0.071, -0.093, 0.137, -0.151, 0.193, -0.211];

/// Settings shared by the isolation and refinement steps.
#[derive(Debug, Clone, Copy)]
pub struct Isolation {
    pub quad: Quadrature,
    pub tol: f64,
    /// Minimal cluster radius, absolute.
    pub cluster: f64,
}

fn bounds(region: &Region) -> (f64, (f64, f64), (f64, f64)) {
    match *region {
        Region::Rectangle { anchor, re, im } => (anchor, re, im),
        Region::Disk { .. } => unreachable!("subdivision applies to rectangles"),
    }
}

/// Real coordinates of the vertical split line, relative to the anchor:
/// the midpoint between consecutive eigenvalues closest to the box center
/// when it lies in the middle half, else the center itself.
fn vertical_split<F: Meromorphic + ?Sized>(f: &F, region: &Region) -> f64 {
    let (anchor, re, _) = bounds(region);
    let width = re.1 - re.0;
    let center = anchor + 0.5 * (re.0 + re.1);
    let base = f.base();
    let mut best = 0.5 * (re.0 + re.1);
    let mut best_dist = f64::INFINITY;
    if let Some(k) = base.floor_index(center) {
        for j in [k - 1, k, k + 1] {
            if !base.index_set().contains(j) {
                continue;
            }
            let mid = 0.5 * (base.lambda(j) + base.lambda(j + 1)) - anchor;
            let dist = (mid - (re.0 + re.1) * 0.5).abs();
            if dist < 0.25 * width && dist < best_dist {
                best = mid;
                best_dist = dist;
            }
        }
    }
    best
}

/// Imaginary coordinate of the horizontal split line, kept off the real axis.
fn horizontal_split(region: &Region) -> f64 {
    let (_, _, im) = bounds(region);
    let height = im.1 - im.0;
    let mid = 0.5 * (im.0 + im.1);
    if im.0 < 0.0 && im.1 > 0.0 && mid.abs() < 0.1 * height {
        0.1 * height
    } else {
        mid
    }
}

fn children<F: Meromorphic + ?Sized>(f: &F, region: &Region, shift: f64) -> Vec<Region> {
    let (anchor, re, im) = bounds(region);
    let (w, h) = (re.1 - re.0, im.1 - im.0);
    let xs = if h > 2.0 * w {
        vec![re.0, re.1]
    } else {
        vec![re.0, vertical_split(f, region) + shift * w, re.1]
    };
    let ys = if w > 2.0 * h {
        vec![im.0, im.1]
    } else {
        vec![im.0, horizontal_split(region) + shift * h, im.1]
    };
    let mut out = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            let cx = anchor + 0.5 * (xs[i] + xs[i + 1]);
            let child_anchor = f.base().lambda(f.base().nearest_index(cx));
            out.push(Region::rectangle(child_anchor, (anchor + xs[i], anchor + xs[i + 1]), (ys[j], ys[j + 1])));
        }
    }
    out
}

/// Splits `region` into certified children whose counts add up to `zeros`.
fn split<F: Meromorphic + ?Sized>(f: &F, region: &Region, zeros: i64, opts: &Isolation) -> Result<Vec<(Region, Winding)>> {
    for shift in SPLIT_SHIFTS {
        let parts = children(f, region, shift);
        let expected = parts.len();
        let windings: Vec<Result<Winding>> = parts.par_iter().map(|r| opts.quad.certify(f, r)).collect();
        let mut ok = Vec::with_capacity(parts.len());
        for (r, w) in parts.into_iter().zip(windings) {
            match w {
                Ok(w) if w.certified => ok.push((r, w)),
                Ok(_) | Err(Error::ContourThroughSingularity { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        if ok.len() == expected {
            let total: i64 = ok.iter().map(|(_, w)| w.zeros()).sum();
            if total == zeros && ok.iter().all(|(_, w)| w.zeros() >= 0) {
                return Ok(ok);
            }
        }
    }
    Err(Error::CertificationFailed(format!(
        "could not subdivide the box around {} holding {zeros} zeros",
        region.center().value()
    )))
}

/// Locates all zeros in `region` given its certified winding.
pub fn isolate<F: Meromorphic + ?Sized>(f: &F, region: Region, winding: Winding, opts: &Isolation) -> Result<Vec<LocatedZero>> {
    let zeros = winding.zeros();
    if zeros <= 0 {
        return Ok(Vec::new());
    }
    let centroid = winding
        .zero_centroid(&region)
        .expect("positive zero count has a centroid");
    if zeros == 1 {
        return Ok(vec![refine_zero(f, centroid, 1, opts.tol, &region, &opts.quad)?]);
    }

    let m = zeros as usize;
    if let Some(zero) = try_cluster(f, &region, centroid, m, opts)? {
        return Ok(vec![zero]);
    }
    let scale = centroid.value().norm().max(1.0);
    if region.diameter() < 1e-12 * scale {
        return Err(Error::CertificationFailed(format!(
            "{m} zeros near {} could not be separated",
            centroid.value()
        )));
    }
    let parts = split(f, &region, zeros, opts)?;
    let found: Vec<Result<Vec<LocatedZero>>> = parts.into_par_iter().map(|(r, w)| isolate(f, r, w, opts)).collect();
    let mut out = Vec::new();
    for z in found {
        out.extend(z?);
    }
    Ok(out)
}

/// Reports `m` zeros as one zero of order `m` when a small circle around
/// their centroid captures all of them.
fn try_cluster<F: Meromorphic + ?Sized>(
    f: &F,
    region: &Region,
    centroid: Point,
    m: usize,
    opts: &Isolation,
) -> Result<Option<LocatedZero>> {
    let noise = match resolution_radius(f, centroid, m) {
        Ok(r) => r,
        Err(Error::PoleHit { .. }) | Err(Error::UnsupportedDerivative(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let radius = opts.cluster.max(10.0 * noise);
    if !(radius.is_finite() && radius < 0.5 * region.diameter()) {
        return Ok(None);
    }
    let circle = Region::disk(centroid, radius);
    let w = match opts.quad.certify(f, &circle) {
        Ok(w) => w,
        Err(Error::ContourThroughSingularity { .. }) | Err(Error::PoleHit { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !(w.certified && w.zeros() == m as i64) {
        return Ok(None);
    }
    // Newton on F^(m-1) from the centroid; the circle confines the result.
    let centroid = w.zero_centroid(&circle).unwrap_or(centroid);
    match refine_zero(f, centroid, m, opts.tol, &circle, &opts.quad) {
        Ok(z) => Ok(Some(z)),
        Err(Error::NoConvergence { .. }) | Err(Error::OrderMismatch { .. }) => {
            let v = f.derivatives(centroid, 0)?[0];
            Ok(Some(LocatedZero {
                point: centroid,
                order: m,
                residual: v.value.norm(),
            }))
        }
        Err(e) => Err(e),
    }
}
