use num_complex::Complex64;

use super::{Localization, Origin, PerturbedSpectrum, RegionLabel, SpectrumEntry};
use crate::assign::min_cost_assignment;
use crate::charfn::Meromorphic;
use crate::error::{Error, Result};
use crate::model::Index;

/// Merges the common eigenvalues with the zeros of `F` and pairs every unit
/// of multiplicity with an index of the window.
///
/// A zero of order `l` at `lambda_n` with `c_n = 0` makes `lambda_n` an
/// eigenvalue of multiplicity `l + 1`; elsewhere a zero of order `l` is an
/// eigenvalue of multiplicity `l`. Inside the central rectangle the zero
/// copies are matched to the indices with `c_n != 0` by minimum total
/// distance `|mu - lambda_n|`; disk zeros pair with their disk's index.
pub fn assemble_spectrum<F: Meromorphic + ?Sized>(
    f: &F,
    loc: &Localization,
    coincidence_tol: f64,
) -> Result<PerturbedSpectrum> {
    let base = f.base();
    let plan = &loc.plan;
    let mut entries: Vec<SpectrumEntry> = Vec::new();

    for report in loc.disks() {
        let RegionLabel::Disk(n) = report.label else { continue };
        let lambda = base.lambda(n);
        entries.push(match report.zeros.first() {
            Some(z) => SpectrumEntry {
                mu: z.location(),
                mult: 1,
                paired_index: n,
                origin: Origin::ZeroOfF,
            },
            None => SpectrumEntry {
                mu: Complex64::new(lambda, 0.0),
                mult: 1,
                paired_index: n,
                origin: Origin::CommonWithA,
            },
        });
    }

    let central: Vec<Index> = base.index_set().window(plan.central).collect();
    let (common, poles): (Vec<Index>, Vec<Index>) = central.iter().partition(|&&n| !f.is_pole(n));
    let mut coincident = vec![0usize; common.len()];
    // (value, multiplicity, origin) for each unit to be paired
    let mut pool: Vec<(Complex64, usize, Origin)> = Vec::new();
    for z in &loc.central().zeros {
        let mu = z.location();
        let n = base.nearest_index(mu.re);
        let lambda = base.lambda(n);
        let slot = common.binary_search(&n).ok();
        match slot {
            Some(i) if (mu - lambda).norm() <= coincidence_tol * lambda.abs().max(1.0) => {
                coincident[i] += z.order;
                for _ in 0..z.order {
                    pool.push((Complex64::new(lambda, 0.0), z.order + 1, Origin::Both));
                }
            }
            _ => {
                for _ in 0..z.order {
                    pool.push((mu, z.order, Origin::ZeroOfF));
                }
            }
        }
    }
    for (i, &n) in common.iter().enumerate() {
        let lambda = Complex64::new(base.lambda(n), 0.0);
        entries.push(if coincident[i] > 0 {
            SpectrumEntry {
                mu: lambda,
                mult: coincident[i] + 1,
                paired_index: n,
                origin: Origin::Both,
            }
        } else {
            SpectrumEntry {
                mu: lambda,
                mult: 1,
                paired_index: n,
                origin: Origin::CommonWithA,
            }
        });
    }
    if pool.len() != poles.len() {
        return Err(Error::CountMismatch {
            expected: poles.len(),
            found: pool.len(),
        });
    }
    let lambdas: Vec<f64> = poles.iter().map(|&n| base.lambda(n)).collect();
    let assignment = min_cost_assignment(pool.len(), poles.len(), |i, j| (pool[i].0 - lambdas[j]).norm());
    for (i, &j) in assignment.iter().enumerate() {
        let (mu, mult, origin) = pool[i];
        entries.push(SpectrumEntry {
            mu,
            mult,
            paired_index: poles[j],
            origin,
        });
    }

    entries.sort_by_key(|e| e.paired_index);
    let offset_sum = entries
        .iter()
        .map(|e| (e.mu - base.lambda(e.paired_index)).norm())
        .sum();
    Ok(PerturbedSpectrum {
        entries,
        offset_sum,
        tail_bound: plan.tail_bound,
        certified: loc.certified,
    })
}
