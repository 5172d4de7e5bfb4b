//! Small accumulators for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Running mean and variance; merging is order-sensitive but deterministic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Binomial standard error of a frequency `k/n` around probability `p`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|k/n − p|` measured in binomial standard deviations.
pub fn z_score(k: u64, n: u64, p: f64) -> f64 {
    let sigma = binomial_sigma(p, n);
    let diff = k as f64 / n as f64 - p;
    if sigma == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff.abs() / sigma
    }
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Smallest `k` with `Σ_{j ≤ k} counts[j] ≥ p · total`, for integer data
/// stored as a histogram.
pub fn quantile_from_counts(counts: &[u64], p: f64) -> usize {
    let total: u64 = counts.iter().sum();
    let target = ((p.clamp(0.0, 1.0) * total as f64).ceil() as u64).max(1);
    let mut acc = 0;
    for (k, &c) in counts.iter().enumerate() {
        acc += c;
        if acc >= target {
            return k;
        }
    }
    counts.len().saturating_sub(1)
}

/// Pearson chi-square statistic of `counts` against `probabilities`.
pub fn chi_square(counts: &[u64], probabilities: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper `alpha` point of the chi-square law with `df` degrees of
/// freedom, by the Wilson–Hilferty approximation.
pub fn chi_square_critical(df: usize, z_alpha: f64) -> f64 {
    let k = df as f64;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z_alpha * c.sqrt()).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let m: Moments = xs.iter().copied().collect();
        assert!((m.mean - 4.0).abs() < 1e-15);
        assert!((m.variance() - 7.5).abs() < 1e-12);
        let mut a: Moments = xs[..2].iter().copied().collect();
        let b: Moments = xs[2..].iter().copied().collect();
        a.merge(&b);
        assert!((a.mean - m.mean).abs() < 1e-15);
        assert!((a.variance() - m.variance()).abs() < 1e-12);
        let mut e = Moments::new();
        e.merge(&m);
        assert_eq!(e, m);
    }

    #[test]
    fn quantile_and_z() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&v, 0.5), 1.5);
        assert_eq!(quantile_sorted(&v, 1.0), 3.0);
        assert_eq!(z_score(50, 100, 0.5), 0.0);
        assert!((z_score(60, 100, 0.5) - 2.0).abs() < 1e-12);
        assert_eq!(z_score(1, 10, 0.0), f64::INFINITY);
        let counts = [5, 0, 90, 5];
        assert_eq!(quantile_from_counts(&counts, 0.01), 0);
        assert_eq!(quantile_from_counts(&counts, 0.05), 0);
        assert_eq!(quantile_from_counts(&counts, 0.06), 2);
        assert_eq!(quantile_from_counts(&counts, 0.99), 3);
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square(&[25, 25, 25, 25], &[0.25; 4]), 0.0);
        assert!((chi_square(&[30, 20], &[0.5, 0.5]) - 2.0).abs() < 1e-12);
        // 99.9% point for 23 dof is 49.73
        assert!((chi_square_critical(23, 3.0902) - 49.73).abs() < 0.3);
    }
}
