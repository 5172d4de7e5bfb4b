//! Numerically careful q-arithmetic shared by the samplers and chains.
//!
//! Every quantity of the form `1 − q^a` goes through `expm1(a · ln q)`,
//! which has no cancellation for q near 1. `q = 1` is handled as the
//! exact limit.

/// `q^k` for a non-negative integer exponent.
#[inline]
pub fn pow(q: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        q.powi(k as i32)
    } else {
        q.powf(k as f64)
    }
}

/// `1 − q^k` for `0 < q ≤ 1`.
#[inline]
pub fn one_minus_pow(q: f64, k: u64) -> f64 {
    if k == 0 || q == 1.0 {
        0.0
    } else {
        -(k as f64 * q.ln()).exp_m1()
    }
}

/// `(1 − q^a) / (1 − q^b)` for `q > 0`, `b ≥ 1`; at `q = 1` this is `a / b`.
///
/// Equals the geometric-sum ratio `(1 + … + q^{a−1}) / (1 + … + q^{b−1})`,
/// so it is well defined for every positive q. `a == b` returns exactly 1.
#[inline]
pub fn ratio(q: f64, a: u64, b: u64) -> f64 {
    debug_assert!(b >= 1);
    if a == b {
        return 1.0;
    }
    if a == 0 {
        return 0.0;
    }
    if q == 1.0 {
        return a as f64 / b as f64;
    }
    if q < 1.0 {
        let l = q.ln();
        (a as f64 * l).exp_m1() / (b as f64 * l).exp_m1()
    } else {
        // (q^a − 1)/(q^b − 1) = q^{a−b} · (1 − q^{−a})/(1 − q^{−b})
        let l = -q.ln();
        let tail = (a as f64 * l).exp_m1() / (b as f64 * l).exp_m1();
        (-(a as f64 - b as f64) * l).exp() * tail
    }
}

/// `1 + q + … + q^{m−1}` by direct summation.
pub fn geometric_sum(q: f64, m: u64) -> f64 {
    let mut acc = 0.0;
    let mut term = 1.0;
    for _ in 0..m {
        acc += term;
        term *= q;
    }
    acc
}

/// `ln(1 + q + … + q^{m−1})` for `q > 0`, `m ≥ 1`.
pub fn ln_geometric_sum(q: f64, m: u64) -> f64 {
    debug_assert!(m >= 1);
    if q == 1.0 {
        (m as f64).ln()
    } else if q < 1.0 {
        let l = q.ln();
        (-(m as f64 * l).exp_m1()).ln() - (-l.exp_m1()).ln()
    } else {
        (m as f64 - 1.0) * q.ln() + ln_geometric_sum(1.0 / q, m)
    }
}
