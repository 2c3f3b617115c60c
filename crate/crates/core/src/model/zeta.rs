//! Tail sums of power laws, used for the certified truncation bounds.

/// Hurwitz zeta function `sum_{k>=0} (k + q)^(-s)` for `s > 1`, `q > 0`.
///
/// Sums the head directly and closes the remainder with an Euler-Maclaurin
/// expansion; relative accuracy is close to machine precision for the
/// exponents that occur in practice (`1 < s < 60`).
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    if !(s > 1.0) {
        return f64::INFINITY;
    }
    debug_assert!(q > 0.0);
    // B_{2j} / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];
    let start = (2.0 * s + 20.0).max(q);
    let head_terms = (start - q).ceil().max(0.0) as usize;
    let mut head = 0.0;
    // smallest terms first
    for k in (0..head_terms).rev() {
        head += (q + k as f64).powf(-s);
    }
    let a = q + head_terms as f64;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s + 2j - 2) times a^(-s-2j+1)
    let mut rising = s;
    let mut power = a.powf(-s - 1.0);
    for (j, coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        tail += coef * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= a * a;
    }
    head + tail
}

/// `sum_{n > after} (n + shift)^(-s)`.
pub fn power_tail(s: f64, after: i64, shift: f64) -> f64 {
    hurwitz_zeta(s, after as f64 + 1.0 + shift)
}
