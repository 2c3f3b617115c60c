//! Newton refinement of isolated zeros and confirmation of their order.

use num_complex::Complex64;

use super::contour::{Quadrature, Region};
use crate::charfn::{Meromorphic, Point};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;

/// A refined zero of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedZero {
    pub point: Point,
    pub order: usize,
    /// `|F(location)|`.
    pub residual: f64,
}

impl LocatedZero {
    pub fn location(&self) -> Complex64 {
        self.point.value()
    }
}

/// Scale below which an order-`m` zero cannot be told apart from an
/// `m`-cluster: `(dF / (|F^(m)| / m!))^(1/m)` with `dF` the floating-point
/// noise of `F` at `at`.
pub fn resolution_radius<F: Meromorphic + ?Sized>(f: &F, at: Point, m: usize) -> Result<f64> {
    let m = m.max(1);
    let v = f.derivatives(at, m)?;
    let noise = 16.0 * f64::EPSILON * f.magnitude(at);
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    let taylor = v[m].value.norm() / factorial;
    Ok((noise / taylor).powf(1.0 / m as f64))
}

/// `g^(0..=order)` for `g = F` or, when `regularize`, for `G = -(z - base) F`
/// which removes the pole at the anchor.
fn derivatives<F: Meromorphic + ?Sized>(f: &F, z: Point, order: usize, regularize: bool) -> Result<Vec<Complex64>> {
    let v = f.derivatives(z, order)?;
    if !regularize {
        return Ok(v.iter().map(|b| b.value).collect());
    }
    let delta = z.offset;
    Ok((0..=order)
        .map(|k| {
            let prev = if k > 0 { v[k - 1].value * k as f64 } else { Complex64::new(0.0, 0.0) };
            -(delta * v[k].value + prev)
        })
        .collect())
}

/// Refines `seed` to a zero of order `order` inside `confine` by Newton's
/// method on `F^(order - 1)` (regularized near a pole), then confirms the
/// order by the winding count on a shrunk circle around the result.
pub fn refine_zero<F: Meromorphic + ?Sized>(
    f: &F,
    seed: Point,
    order: usize,
    tol: f64,
    confine: &Region,
    quad: &Quadrature,
) -> Result<LocatedZero> {
    let order = order.max(1);
    let base = f.base();
    let k = base.nearest_index(seed.value().re);
    let lambda_k = base.lambda(k);
    let regularize = f.is_pole(k) && seed.minus(lambda_k).norm() < 0.5 * base.gap();
    let mut z = if regularize { seed.rebase(lambda_k) } else { seed };
    let limit = 0.5 * confine.diameter();

    let mut previous = f64::INFINITY;
    let mut stalled = 0;
    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let g = derivatives(f, z, order, regularize)?;
        let (value, slope) = (g[order - 1], g[order]);
        if value == Complex64::new(0.0, 0.0) {
            last_step = 0.0;
            break;
        }
        let mut step = value / slope;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(Error::NoConvergence {
                iterations: MAX_ITERATIONS,
                residual: value.norm(),
            });
        }
        if step.norm() > limit {
            step *= limit / step.norm();
        }
        z.offset -= step;
        last_step = step.norm();
        let floor = 4.0 * f64::EPSILON * z.value().norm().max(z.offset.norm()).max(f64::MIN_POSITIVE);
        if last_step <= floor {
            break;
        }
        if last_step >= previous {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        }
        previous = last_step;
    }

    let v = f.derivatives(z, 0)?[0];
    let residual = v.value.norm();
    if !(residual <= tol.max(4.0 * v.error_bound())) {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    let room = confine.boundary_distance(z);
    if room <= 0.0 {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: last_step,
        });
    }
    confirm_order(f, z, order, room, quad)?;
    Ok(LocatedZero {
        point: z,
        order,
        residual,
    })
}

/// Winding count on a circle between the noise radius and the distance to
/// the confining boundary must equal `order`.
fn confirm_order<F: Meromorphic + ?Sized>(f: &F, z: Point, order: usize, room: f64, quad: &Quadrature) -> Result<()> {
    let lo = (10.0 * resolution_radius(f, z, order)?).max(1e-14 * z.value().norm().max(1.0));
    let hi = 0.9 * room;
    let mid = if lo < hi { (lo * hi).sqrt() } else { hi };
    let mut last = None;
    for radius in [mid, (mid * 8.0).min(hi), (mid / 8.0).max(lo.min(hi))] {
        let circle = Region::disk(z, radius);
        let w = match quad.certify(f, &circle) {
            Ok(w) => w,
            Err(Error::ContourThroughSingularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if w.certified {
            if w.zeros() == order as i64 {
                return Ok(());
            }
            last = Some(w.zeros());
        }
    }
    match last {
        Some(found) => Err(Error::OrderMismatch {
            expected: order,
            found,
        }),
        None => Err(Error::CertificationFailed(format!(
            "order of the zero near {} could not be confirmed",
            z.value()
        ))),
    }
}
