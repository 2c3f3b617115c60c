//! Argument-principle integrals over disks and axis-parallel rectangles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfn::{Meromorphic, Point};
use crate::error::{Error, Result};
use crate::model::Index;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Fixed rotation of the trapezoid nodes, keeping them off the real axis.
const ROTATION: f64 = 0.123_456_789;

/// Node sets above this size are evaluated in parallel.
const PARALLEL_NODES: usize = 1024;

/// A closed contour: a disk, or an axis-parallel rectangle whose real
/// coordinates are stored relative to `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Point, radius: f64 },
    Rectangle { anchor: f64, re: (f64, f64), im: (f64, f64) },
}

impl Region {
    pub fn disk(center: Point, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    /// Rectangle with absolute real range `re`, anchored at `anchor`.
    pub fn rectangle(anchor: f64, re: (f64, f64), im: (f64, f64)) -> Self {
        Region::Rectangle {
            anchor,
            re: (re.0 - anchor, re.1 - anchor),
            im,
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Region::Disk { center, .. } => center,
            Region::Rectangle { anchor, re, im } => {
                Point::anchored(anchor, Complex64::new(0.5 * (re.0 + re.1), 0.5 * (im.0 + im.1)))
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Region::Disk { radius, .. } => 2.0 * radius,
            Region::Rectangle { re, im, .. } => (re.1 - re.0).hypot(im.1 - im.0),
        }
    }

    /// Absolute real range covered by the region.
    pub fn real_extent(&self) -> (f64, f64) {
        match *self {
            Region::Disk { center, radius } => {
                let x = center.value().re;
                (x - radius, x + radius)
            }
            Region::Rectangle { anchor, re, .. } => (anchor + re.0, anchor + re.1),
        }
    }

    /// Signed distance from `p` to the boundary: positive inside, negative outside.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match *self {
            Region::Disk { center, radius } => {
                let rel = p.rebase(center.base).offset - center.offset;
                radius - rel.norm()
            }
            Region::Rectangle { anchor, re, im } => {
                let rel = p.rebase(anchor).offset;
                let dx = (re.0 - rel.re).max(rel.re - re.1);
                let dy = (im.0 - rel.im).max(rel.im - im.1);
                if dx <= 0.0 && dy <= 0.0 {
                    -dx.max(dy)
                } else {
                    -(dx.max(0.0).hypot(dy.max(0.0)))
                }
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.boundary_distance(p) > 0.0
    }

    /// Quadrature nodes: the trapezoid rule on circles, composite 8-point
    /// Gauss-Legendre on rectangle sides with panel length tied to `q`.
    fn nodes(&self, q: usize, scale: f64) -> Vec<Node> {
        match *self {
            Region::Disk { center, radius } => (0..q)
                .map(|j| {
                    let theta = ROTATION + 2.0 * PI * j as f64 / q as f64;
                    let rel = Complex64::from_polar(radius, theta);
                    Node {
                        point: Point::anchored(center.base, center.offset + rel),
                        rel,
                        weight: Complex64::i() * rel * (2.0 * PI / q as f64),
                        spacing: 2.0 * PI * radius / q as f64,
                    }
                })
                .collect(),
            Region::Rectangle { anchor, re, im } => {
                let center = self.center().offset;
                let corners = [
                    Complex64::new(re.0, im.0),
                    Complex64::new(re.1, im.0),
                    Complex64::new(re.1, im.1),
                    Complex64::new(re.0, im.1),
                ];
                // Node spacing follows the local length scale: the gap near
                // the real axis, the height above it elsewhere.
                let cap = self.diameter();
                let spacing_at = |y: f64| PI * cap.min(scale.max(y.abs())) / q as f64;
                let mut out = Vec::new();
                for s in 0..4 {
                    let (a, b) = (corners[s], corners[(s + 1) % 4]);
                    let len = (b - a).norm();
                    let dir = (b - a) / len;
                    let mut t = 0.0;
                    while t < len {
                        let mut panel = 8.0 * spacing_at((a + dir * t).im);
                        // shrink while the panel approaches the axis
                        let lowest = |l: f64| {
                            let (y0, y1) = ((a + dir * t).im, (a + dir * (t + l)).im);
                            if y0 * y1 <= 0.0 { 0.0 } else { y0.abs().min(y1.abs()) }
                        };
                        panel = panel.min(8.0 * spacing_at(lowest(panel)));
                        panel = panel.min(len / 2.0);
                        if len - (t + panel) < 0.25 * panel {
                            panel = len - t;
                        }
                        let mid = a + dir * (t + 0.5 * panel);
                        let step = dir * panel;
                        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                            let z = mid + step * (0.5 * x);
                            out.push(Node {
                                point: Point::anchored(anchor, z),
                                rel: z - center,
                                weight: step * (0.5 * w),
                                spacing: 0.2 * panel,
                            });
                        }
                        t += panel;
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    point: Point,
    /// Offset from the region center.
    rel: Complex64,
    weight: Complex64,
    spacing: f64,
}

/// Outcome of one argument-principle integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Winding {
    /// Rounded value of `(1/2 pi i) \oint f'/f`: zeros minus poles inside.
    pub count: i64,
    pub integral: Complex64,
    /// `(1/2 pi i) \oint (z - center) f'/f dz`: sum of zeros minus sum of
    /// poles, relative to the region center.
    pub moment: Complex64,
    /// Poles strictly inside the region.
    pub poles: Vec<(Index, f64)>,
    pub quadrature_error: f64,
    pub evaluation_error: f64,
    pub min_abs: f64,
    pub nodes: usize,
    pub certified: bool,
}

impl Winding {
    /// Number of zeros inside, counted with multiplicity.
    pub fn zeros(&self) -> i64 {
        self.count + self.poles.len() as i64
    }

    /// Mean of the zeros inside the region, when there are any.
    pub fn zero_centroid(&self, region: &Region) -> Option<Point> {
        let m = self.zeros();
        if m <= 0 {
            return None;
        }
        let center = region.center();
        let pole_sum: Complex64 = self.poles.iter().map(|&(_, lambda)| -center.minus(lambda)).sum();
        Some(Point::anchored(center.base, center.offset + (self.moment + pole_sum) / m as f64))
    }
}

struct Sample {
    g: Complex64,
    error: f64,
    abs: f64,
    resolved: bool,
    relative_error: f64,
}

fn sample<F: Meromorphic + ?Sized>(f: &F, node: &Node) -> Result<Sample> {
    let v = f.derivatives(node.point, 1)?;
    let (fv, dv) = (v[0], v[1]);
    let abs = fv.value.norm();
    let g = dv.value / fv.value;
    let e_f = fv.error_bound();
    let error = node.weight.norm() * (dv.error_bound() / abs + dv.value.norm() * e_f / (abs * abs)) / (2.0 * PI);
    Ok(Sample {
        g,
        error,
        abs,
        resolved: abs >= 1.5 * node.spacing * dv.value.norm(),
        relative_error: e_f / abs,
    })
}

fn evaluate<F: Meromorphic + ?Sized>(f: &F, nodes: &[Node]) -> Result<Vec<Sample>> {
    if nodes.len() >= PARALLEL_NODES {
        nodes.par_iter().map(|n| sample(f, n)).collect()
    } else {
        nodes.iter().map(|n| sample(f, n)).collect()
    }
}

fn integrate(nodes: &[Node], samples: &[Sample], stride: usize) -> (Complex64, Complex64) {
    let scale = Complex64::new(0.0, 2.0 * PI);
    let (mut s0, mut s1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (node, s) in nodes.iter().zip(samples).step_by(stride) {
        let w = node.weight * stride as f64 * s.g;
        s0 += w;
        s1 += w * node.rel;
    }
    (s0 / scale, s1 / scale)
}

/// Poles within the real extent of `region`, split into those strictly
/// inside and an error for any lying on the contour.
fn poles_inside<F: Meromorphic + ?Sized>(f: &F, region: &Region) -> Result<Vec<(Index, f64)>> {
    let (lo, hi) = region.real_extent();
    let pad: f64 = 1e-8;
    let guard = pad.min(1e-3 * region.diameter());
    let mut inside = Vec::new();
    for (n, lambda) in f.poles_in(lo - pad, hi + pad) {
        let p = Point::anchored(lambda, Complex64::new(0.0, 0.0));
        let dist = region.boundary_distance(p);
        if dist.abs() < guard {
            return Err(Error::ContourThroughSingularity {
                position: lambda,
                distance: dist.abs(),
            });
        }
        if dist > 0.0 {
            inside.push((n, lambda));
        }
    }
    Ok(inside)
}

/// Argument-principle count over `region` with resolution `q` (nodes on a
/// circle; for rectangles, node spacing comparable to a circle of diameter
/// `min(scale, diameter)`).
///
/// The count is certified when the distance of the integral to the nearest
/// integer exceeds the quadrature estimate (against a half-resolution rule)
/// plus the propagated evaluation error, when `|f| > 2 * error` at every node,
/// and when every node resolves the local variation of `f`.
pub fn winding_number<F: Meromorphic + ?Sized>(f: &F, region: &Region, q: usize, scale: f64) -> Result<Winding> {
    let poles = poles_inside(f, region)?;
    let q = q.max(16) & !1;
    let nodes = region.nodes(q, scale);
    let samples = evaluate(f, &nodes)?;
    let (s0, s1) = integrate(&nodes, &samples, 1);
    let half = match region {
        Region::Disk { .. } => integrate(&nodes, &samples, 2).0,
        Region::Rectangle { .. } => {
            let coarse = region.nodes(q / 2, scale);
            let coarse_samples = evaluate(f, &coarse)?;
            integrate(&coarse, &coarse_samples, 1).0
        }
    };
    let quadrature_error = (s0 - half).norm();
    let evaluation_error: f64 = samples.iter().map(|s| s.error).sum();
    let min_abs = samples.iter().map(|s| s.abs).fold(f64::INFINITY, f64::min);
    let dominated = samples.iter().all(|s| s.relative_error < 0.5);
    let resolved = samples.iter().all(|s| s.resolved);
    let count = s0.re.round();
    let gap = 0.5 - (s0 - count).norm();
    let finite = s0.re.is_finite() && s0.im.is_finite();
    Ok(Winding {
        count: if finite { count as i64 } else { 0 },
        integral: s0,
        moment: s1,
        poles,
        quadrature_error,
        evaluation_error,
        min_abs,
        nodes: nodes.len(),
        certified: finite && dominated && resolved && gap > quadrature_error + evaluation_error,
    })
}

/// Quadrature resolution schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub initial: usize,
    pub max: usize,
    /// Length scale of the problem (the separation gap).
    pub scale: f64,
}

impl Quadrature {
    /// Runs [`winding_number`] with `q` doubling from `initial` up to `max`
    /// until the count certifies; returns the last attempt otherwise.
    pub fn certify<F: Meromorphic + ?Sized>(&self, f: &F, region: &Region) -> Result<Winding> {
        let mut q = self.initial.max(16);
        loop {
            let w = winding_number(f, region, q, self.scale)?;
            if w.certified || q >= self.max {
                return Ok(w);
            }
            q = (2 * q).min(self.max.max(q));
        }
    }
}
