//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero when
//! any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1_spectral::direct::{solve_direct_detailed, RegionLabel};
use rank1_spectral::gallery::{example_52, example_periodic_base, linear_fit, report_51};
use rank1_spectral::inverse::{solve_inverse, InverseSolution};
use rank1_spectral::model::{
    ComplexHead, Index, PerturbationCoefficients, PowerLawTail, Tail, TargetSpectrum, ValidBase, ValidCoefficients,
    ValidTarget,
};
use rank1_spectral::oracle::{build_truncation, cluster_size, compare_values, dense_eigenvalues};
use rank1_spectral::{DirectOptions, Origin, PerturbedSpectrum};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn periodic() -> ValidBase {
    example_periodic_base().validate().unwrap()
}

fn reciprocal() -> Tail {
    Tail::PowerLaw(PowerLawTail {
        shift: 1.0,
        ..PowerLawTail::new(1.0, 1.0)
    })
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Zero-tail coefficients with prescribed products on `-radius..=radius`.
fn finite_instance(rng: &mut ChaCha8Rng, radius: Index) -> Vec<(Index, Complex64)> {
    (-radius..=radius)
        .map(|n| {
            let c = if rng.gen_bool(0.15) {
                c64(0.0, 0.0)
            } else {
                let r = 0.3 * rng.gen::<f64>();
                let phase = if rng.gen_bool(0.5) {
                    rng.gen_range(0.0..std::f64::consts::TAU)
                } else if rng.gen_bool(0.5) {
                    0.0
                } else {
                    std::f64::consts::PI
                };
                Complex64::from_polar(r, phase)
            };
            (n, c)
        })
        .collect()
}

fn coefficients_for(rng: &mut ChaCha8Rng, base: &ValidBase, c: &[(Index, Complex64)]) -> ValidCoefficients {
    let lo = c.first().map_or(0, |p| p.0);
    let a: Vec<Complex64> = c
        .iter()
        .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    PerturbationCoefficients {
        a_head: ComplexHead::from_fn(lo..lo + c.len() as Index, |n| a[(n - lo) as usize]),
        a_tail: reciprocal(),
        b_head: ComplexHead::from_fn(lo..lo + c.len() as Index, |n| {
            let k = (n - lo) as usize;
            c[k].1 / a[k].conj()
        }),
        b_tail: Tail::Zero,
    }
    .validate(base)
    .unwrap()
}

fn window_of(s: &PerturbedSpectrum) -> Index {
    s.entries.iter().map(|e| e.paired_index.abs()).max().unwrap_or(0)
}

fn timed(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed < limit, format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

/// Criteria 1 and 8 share their instances.
fn finite_oracle_and_trace() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = periodic();
    let start = Instant::now();
    let (mut worst, mut worst_trace) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let mut trace_ok = true;
    for i in 0..50 {
        let radius = rng.gen_range(1..=40);
        let c = finite_instance(&mut rng, radius);
        let coeffs = coefficients_for(&mut rng, &base, &c);
        let s = match solve_direct_detailed(&base, &coeffs, &DirectOptions::default()) {
            Ok(sol) if sol.spectrum.certified => sol.spectrum,
            Ok(_) => {
                failures.push(format!("instance {i}: not certified"));
                continue;
            }
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let op = build_truncation(&base, &coeffs, window_of(&s)).unwrap();
        let dense = dense_eigenvalues(&op).unwrap();
        let rho = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cmp = compare_values(&s.eigenvalues(), &dense, f64::INFINITY).unwrap();
        let rel = cmp.max_distance / (1.0 + rho);
        worst = worst.max(rel);
        if rel >= 1e-8 {
            failures.push(format!("instance {i}: deviation {:e}", cmp.max_distance));
        }
        let shift: Complex64 = s.entries.iter().map(|e| e.mu - base.lambda(e.paired_index)).sum();
        let total: Complex64 = c.iter().map(|p| p.1).sum();
        let abs: f64 = c.iter().map(|p| p.1.norm()).sum();
        let err = (shift - total).norm() / (1.0 + abs);
        worst_trace = worst_trace.max(err);
        trace_ok &= err < 1e-10;
    }
    let (fast, time) = timed(Duration::from_secs(30), start.elapsed());
    let first = outcome(
        failures.is_empty() && fast,
        format!("max relative deviation {worst:.2e}, {time}; {}", failures.join("; ")),
    );
    let second = outcome(
        failures.is_empty() && trace_ok,
        format!("max relative trace error {worst_trace:.2e}"),
    );
    (first, second)
}

/// Random admissible target with at most ten deviating points.
fn random_target(rng: &mut ChaCha8Rng, i: usize) -> TargetSpectrum {
    let lo: Index = rng.gen_range(-20..=10);
    let len = rng.gen_range(3..=10usize);
    let mut values: Vec<Complex64> = (0..len)
        .map(|k| {
            let lambda = (lo + k as Index) as f64;
            if rng.gen_bool(0.3) {
                c64(lambda, 0.0)
            } else {
                let r = 0.25 * rng.gen::<f64>();
                c64(lambda, 0.0) + Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            }
        })
        .collect();
    // a double and a triple point in every batch of five
    let k = rng.gen_range(0..len.saturating_sub(3).max(1));
    let point = c64((lo + k as Index) as f64 + 0.5, rng.gen_range(-0.2..0.2));
    if i % 5 == 1 && len >= 2 {
        values[k] = point;
        values[k + 1] = point;
    }
    if i % 5 == 2 && len >= 3 {
        values[k] = point;
        values[k + 1] = point;
        values[k + 2] = point;
    }
    TargetSpectrum::new(lo, values)
}

struct RoundtripResult {
    deviation: f64,
    certified: bool,
    multiplicities_ok: bool,
    discrepancy_ok: bool,
}

fn roundtrip(target: &ValidTarget) -> Result<(InverseSolution, RoundtripResult), String> {
    let base = target.base();
    let inv = solve_inverse(target).map_err(|e| e.to_string())?;
    let coeffs = inv.coefficients.validate(base).map_err(|e| e.to_string())?;
    let s = solve_direct_detailed(base, &coeffs, &DirectOptions::default())
        .map_err(|e| e.to_string())?
        .spectrum;
    let expected: Vec<Complex64> = s.entries.iter().map(|e| target.nu(e.paired_index)).collect();
    let cmp = compare_values(&s.eigenvalues(), &expected, 1e-8).map_err(|e| e.to_string())?;
    // each target value repeated m times must come back as m entries of multiplicity m
    let multiplicities_ok = s.entries.iter().all(|e| {
        let m = expected.iter().filter(|v| (**v - e.mu).norm() < 1e-6).count();
        m == e.mult
    });
    let discrepancy_ok = inv.discrepancy.within_bounds;
    Ok((
        inv,
        RoundtripResult {
            deviation: cmp.max_distance,
            certified: s.certified,
            multiplicities_ok,
            discrepancy_ok,
        },
    ))
}

/// Criteria 2 and 9 (the inverse runs of criterion 10 also count for 9).
fn roundtrips(extra_discrepancy_ok: bool) -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base = periodic();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut discrepancy_ok = extra_discrepancy_ok;
    let (mut doubles, mut triples) = (0, 0);
    for i in 0..50 {
        let target = random_target(&mut rng, i).validate(&base).unwrap();
        match roundtrip(&target) {
            Ok((inv, r)) => {
                worst = worst.max(r.deviation);
                discrepancy_ok &= r.discrepancy_ok;
                if !(r.deviation < 1e-8 && r.certified && r.multiplicities_ok) {
                    failures.push(format!(
                        "target {i}: deviation {:e}, certified {}, multiplicities {}",
                        r.deviation, r.certified, r.multiplicities_ok
                    ));
                }
                let values: Vec<Complex64> = inv.split.i1.iter().map(|p| p.1).collect();
                for v in &values {
                    match values.iter().filter(|w| *w == v).count() {
                        2 => doubles += 1,
                        3 => triples += 1,
                        _ => {}
                    }
                }
            }
            Err(e) => {
                failures.push(format!("target {i}: {e}"));
                discrepancy_ok = false;
            }
        }
    }
    let (fast, time) = timed(Duration::from_secs(60), start.elapsed());
    let covered = doubles > 0 && triples > 0;
    (
        outcome(
            failures.is_empty() && fast && covered,
            format!(
                "max deviation {worst:.2e}, {} double and {} triple points, {time}; {}",
                doubles / 2,
                triples / 3,
                failures.join("; ")
            ),
        ),
        outcome(discrepancy_ok, "every F vs product check within its combined bound"),
    )
}

/// Criteria 3, 4 and 6 on the power-law example.
fn example_52_criteria() -> (Outcome, Outcome, Outcome) {
    let base = periodic();
    let coeffs = example_52(2.0).unwrap().validate(&base).unwrap();
    let mut bounds = Vec::new();
    let mut localization = outcome(false, "not run");
    let mut decay = outcome(false, "not run");
    for window in [50, 100, 200] {
        let opts = DirectOptions {
            window: Some(window),
            ..DirectOptions::default()
        };
        let sol = match solve_direct_detailed(&base, &coeffs, &opts) {
            Ok(sol) => sol,
            Err(e) => {
                bounds.push(f64::NAN);
                if window == 200 {
                    localization = outcome(false, e.to_string());
                }
                continue;
            }
        };
        bounds.push(sol.spectrum.total_offset_bound());
        if window != 200 {
            continue;
        }
        let loc = &sol.localization;
        let k_prime = sol.radii.enclosure;
        let disks = loc.disks();
        let expected_disks = (k_prime + 1..=loc.plan.window).count() * 2;
        let all_one = disks
            .iter()
            .all(|r| r.certified && r.zero_count() == 1 && matches!(r.label, RegionLabel::Disk(n) if n.abs() > k_prime));
        let central = loc.central();
        let poles = central.winding.poles.len();
        let central_ok = central.certified && central.winding.zeros() == poles as i64 && central.zero_count() == poles;
        localization = outcome(
            all_one && disks.len() == expected_disks && loc.plan.central == k_prime && central_ok,
            format!(
                "K' = {k_prime}, {} of {expected_disks} disks with exactly one zero, central {} zeros for {poles} poles",
                disks.iter().filter(|r| r.certified && r.zero_count() == 1).count(),
                central.zero_count()
            ),
        );
        let (x, y): (Vec<f64>, Vec<f64>) = (20..=200)
            .filter_map(|n| sol.spectrum.entry(n))
            .map(|e| (((e.paired_index) as f64).ln(), (e.mu - e.paired_index as f64).norm().ln()))
            .unzip();
        let slope = linear_fit(&x, &y).0;
        let exponent = 4.0;
        decay = outcome(
            (-slope / exponent - 1.0).abs() < 0.05,
            format!("slope {slope:.4} against residue exponent -{exponent}"),
        );
    }
    let finite = bounds.iter().all(|b| b.is_finite());
    let monotone = bounds.windows(2).all(|w| w[1] <= w[0]);
    let summability = outcome(
        finite && monotone,
        format!("bounds over windows 50, 100, 200: {bounds:?}"),
    );
    (localization, summability, decay)
}

fn example_51_criterion() -> Outcome {
    match report_51(200, &DirectOptions::default()) {
        Ok((_, report)) => {
            let lines: Vec<String> = report.checks.iter().map(|c| c.line()).collect();
            outcome(report.passed(), lines.join("; "))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn interlacing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let base = periodic();
    let mut failures = Vec::new();
    for i in 0..20 {
        let alpha = [0.5, -0.5, 2.0, -2.0][i % 4];
        let radius: Index = rng.gen_range(1..=8);
        let a: Vec<f64> = (0..=2 * radius).map(|_| rng.gen_range(0.1..0.6)).collect();
        let tail = PowerLawTail {
            shift: 1.0,
            ..PowerLawTail::new(2.0, 0.5)
        };
        let coeffs = PerturbationCoefficients {
            a_head: ComplexHead::from_fn(-radius..=radius, |n| c64(a[(n + radius) as usize], 0.0)),
            a_tail: Tail::PowerLaw(tail),
            b_head: ComplexHead::from_fn(-radius..=radius, |n| c64(alpha * a[(n + radius) as usize], 0.0)),
            b_tail: Tail::PowerLaw(PowerLawTail {
                scale: alpha * tail.scale,
                ..tail
            }),
        }
        .validate(&base)
        .unwrap();
        let s = match solve_direct_detailed(&base, &coeffs, &DirectOptions::default()) {
            Ok(sol) => sol.spectrum,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        for e in &s.entries {
            let n = e.paired_index;
            let lambda = base.lambda(n);
            let (lo, hi) = if alpha > 0.0 {
                (lambda, base.lambda(n + 1))
            } else {
                (base.lambda(n - 1), lambda)
            };
            let real = e.mu.im.abs() < 1e-10;
            let inside = e.mu.re > lo && e.mu.re < hi;
            let sign = (e.mu.re - lambda).signum() == alpha.signum();
            if !(real && inside && sign && e.mult == 1) {
                failures.push(format!("instance {i}, index {n}: mu = {}", e.mu));
            }
        }
    }
    outcome(failures.is_empty(), format!("20 instances; {}", failures.join("; ")))
}

/// Target repeating `lambda_n`: `n` joins `I_0` while `F(lambda_n) = 0`.
fn multiplicity_rule() -> (Outcome, bool) {
    let base = periodic();
    let cases: [(&str, Vec<Complex64>, Index, usize); 2] = [
        ("l = 1", vec![c64(2.0, 0.0), c64(1.3, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)], 2, 2),
        (
            "l = 2",
            vec![c64(2.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(3.4, 0.1)],
            2,
            3,
        ),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    let mut discrepancy_ok = true;
    for (name, values, n, mult) in cases {
        let target = TargetSpectrum::new(0, values).validate(&base).unwrap();
        let inv = solve_inverse(&target).unwrap();
        discrepancy_ok &= inv.discrepancy.within_bounds;
        let coeffs = inv.coefficients.validate(&base).unwrap();
        let s = match solve_direct_detailed(&base, &coeffs, &DirectOptions::default()) {
            Ok(sol) => sol.spectrum,
            Err(e) => {
                pass = false;
                details.push(format!("{name}: {e}"));
                continue;
            }
        };
        let lambda = c64(base.lambda(n), 0.0);
        let both = s.entry(n).filter(|e| e.origin == Origin::Both && e.mu == lambda).map(|e| e.mult);
        let copies = s.entries.iter().filter(|e| e.mu == lambda).count();
        let op = build_truncation(&base, &coeffs, window_of(&s)).unwrap();
        let dense = dense_eigenvalues(&op).unwrap();
        let oracle = cluster_size(&dense, lambda, 1e-4);
        let ok = both == Some(mult) && copies == mult && oracle == mult;
        pass &= ok;
        details.push(format!(
            "{name}: assembled multiplicity {both:?} ({copies} entries), oracle cluster {oracle}"
        ));
    }
    (outcome(pass, details.join("; ")), discrepancy_ok)
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let (c1, c8) = finite_oracle_and_trace();
    let (c10, inverse_ok) = multiplicity_rule();
    let (c2, c9) = roundtrips(inverse_ok);
    let (c3, c4, c6) = example_52_criteria();
    results.push((1, "finite-oracle equivalence", c1));
    results.push((2, "round-trip", c2));
    results.push((3, "exactly-one-zero localization", c3));
    results.push((4, "summability certificate", c4));
    results.push((5, "periodic-coefficient asymptotics", example_51_criterion()));
    results.push((6, "power-law decay", c6));
    results.push((7, "self-adjoint interlacing", interlacing()));
    results.push((8, "trace identity", c8));
    results.push((9, "F equals the product", c9));
    results.push((10, "multiplicity rule", c10));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (k, name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {verdict}: {name} ({})", o.detail.trim_end_matches("; "));
        failed += (!o.pass) as usize;
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
