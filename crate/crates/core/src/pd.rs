//! Multisets of cycle lengths, the sorted-`ℓ²` metric, weighted lengths,
//! and comparisons against uniform permutations.

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mallows::{self, MallowsParams};
use crate::oracle;
use crate::perm::Permutation;
use crate::replicate::fold_replicates;
use crate::stats::Moments;

/// Non-increasing non-negative parts, with an implicit tail of zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthMultiset {
    parts: Vec<f64>,
    sum: f64,
}

/// Tolerance used by [`LengthMultiset::approx_eq`].
pub const PART_TOLERANCE: f64 = 1e-12;

impl LengthMultiset {
    /// Sorts `parts`; zeros are kept, negatives and non-finite values rejected.
    pub fn new(mut parts: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = parts.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(invalid("parts", format!("{bad} is not a non-negative real")));
        }
        parts.sort_unstable_by(|a, b| b.total_cmp(a));
        let sum = parts.iter().sum();
        Ok(LengthMultiset { parts, sum })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// `ℓ_1`, or 0 for the empty multiset.
    pub fn largest(&self) -> f64 {
        self.parts.first().copied().unwrap_or(0.0)
    }

    /// Equality up to [`PART_TOLERANCE`], ignoring trailing zeros.
    pub fn approx_eq(&self, other: &LengthMultiset) -> bool {
        pd_metric(self, other) <= PART_TOLERANCE
    }
}

/// Sorted cycle lengths divided by `n`.
pub fn normalized_cycle_lengths(p: &Permutation) -> LengthMultiset {
    let n = p.len() as f64;
    let parts = p
        .cycle_decomposition()
        .sorted_lengths
        .iter()
        .map(|&l| l as f64 / n)
        .collect();
    LengthMultiset::new(parts).expect("lengths are positive")
}

/// Sorted cycle lengths over `n` as exact fractions.
pub fn normalized_cycle_lengths_exact(p: &Permutation) -> Vec<BigRational> {
    let n = p.len() as i64;
    p.cycle_decomposition()
        .sorted_lengths
        .iter()
        .map(|&l| oracle::rational(l as i64, n))
        .collect()
}

/// `L(σ, w)`: the multiset of per-orbit weight sums.
pub fn weighted_lengths(sigma: &Permutation, w: &[f64]) -> Result<LengthMultiset> {
    if w.len() != sigma.len() {
        return Err(Error::MismatchedSupport {
            left: sigma.len(),
            right: w.len(),
        });
    }
    if let Some(&bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(invalid("weights", format!("{bad} is negative or not finite")));
    }
    let parts = sigma
        .cycle_decomposition()
        .cycles
        .iter()
        .map(|c| c.iter().map(|&s| w[s - 1]).sum())
        .collect();
    LengthMultiset::new(parts)
}

/// `d(x, y)`: `ℓ²` distance between the sorted, zero-padded part vectors.
pub fn pd_metric(x: &LengthMultiset, y: &LengthMultiset) -> f64 {
    let len = x.parts.len().max(y.parts.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    (0..len)
        .map(|i| (at(&x.parts, i) - at(&y.parts, i)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Uniform permutation of size `k` (the `q = 1` sampler).
pub fn uniform_sample<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Permutation> {
    Ok(mallows::sample(&MallowsParams::new(k, 1.0)?, rng))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// `sup_x |F(x) − x|` for the empirical CDF `F` of `samples` against U[0,1].
pub fn ks_uniform(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let below = i as f64 / n;
        while i < v.len() && v[i] == x {
            i += 1;
        }
        let at = i as f64 / n;
        let u = x.clamp(0.0, 1.0);
        best = best.max((u - below).abs()).max((at - u).abs());
    }
    Ok(best.max(1.0 - v[v.len() - 1].clamp(0.0, 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub n: usize,
    pub q: f64,
    pub uniform_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdReport {
    pub regime_params: RegimeParams,
    /// KS statistic between the laws of `ℓ_1/n` and `ℓ_1/k`.
    pub ks_stat: f64,
    pub mean_largest_part: f64,
    pub mean_largest_part_uniform: f64,
    /// Mean `d` between the paired Mallows and uniform samples.
    pub mean_pair_distance: f64,
    /// `sup |F − U[0,1]|` for `|C_s|/n`, `s` uniform on `[n]`.
    pub cycle_fraction_sup_distance: f64,
    pub replicates: u64,
    pub seed: u64,
}

/// Compares `normalized_cycle_lengths` of `μ_{n,q}` draws with those of
/// uniform permutations of size `uniform_size`. Replicate `i` draws the
/// Mallows permutation, the uniform one, then `s`, all from stream `i`.
pub fn pd_comparison(params: &MallowsParams, uniform_size: usize, replicates: u64, seed: u64) -> Result<PdReport> {
    if replicates == 0 {
        return Err(invalid("replicates", "must be positive"));
    }
    let uniform = MallowsParams::new(uniform_size, 1.0)?;
    let n = params.n();
    type Acc = (Vec<f64>, Vec<f64>, Moments, Vec<f64>);
    let (mallows_l1, uniform_l1, dist, fractions): Acc = fold_replicates(
        seed,
        replicates,
        || (Vec::new(), Vec::new(), Moments::new(), Vec::new()),
        |acc, _, rng| {
            let p = mallows::sample(params, rng);
            let x = normalized_cycle_lengths(&p);
            let y = normalized_cycle_lengths(&mallows::sample(&uniform, rng));
            let s = rng.gen_range(1..=n);
            acc.0.push(x.largest());
            acc.1.push(y.largest());
            acc.2.push(pd_metric(&x, &y));
            acc.3.push(p.cycle_decomposition().cycle_of(s).len() as f64 / n as f64);
        },
        |a, b| {
            a.0.extend(b.0);
            a.1.extend(b.1);
            a.2.merge(&b.2);
            a.3.extend(b.3);
        },
    );
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(PdReport {
        regime_params: RegimeParams {
            n: params.n(),
            q: params.q(),
            uniform_size,
        },
        ks_stat: ks_two_sample(&mallows_l1, &uniform_l1)?,
        mean_largest_part: mean(&mallows_l1),
        mean_largest_part_uniform: mean(&uniform_l1),
        mean_pair_distance: dist.mean,
        cycle_fraction_sup_distance: ks_uniform(&fractions)?,
        replicates,
        seed,
    })
}

/// `½((1 − Σw)² + Σ(1/|S| − w_s)²)`, the bound on
/// `E[d²(L(σ, 𝟙/|S|), L(σ, w))]` for uniform `σ` on `S`.
pub fn weighted_length_bound(w: &[f64]) -> f64 {
    let k = w.len() as f64;
    let total: f64 = w.iter().sum();
    0.5 * ((1.0 - total).powi(2) + w.iter().map(|x| (1.0 / k - x).powi(2)).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvCouplingCheck {
    pub tv: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact `TV(μ_{k,q}, uniform)` from the oracle, against `1 − q^{k²}`.
pub fn tv_coupling_bound_check(k: usize, q: f64) -> Result<TvCouplingCheck> {
    if k > 6 {
        return Err(Error::TooLarge { n: k, cap: 6 });
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("q", format!("must lie in (0,1], got {q}")));
    }
    let dist = oracle::enumerate_distribution(k, q)?;
    let u = 1.0 / dist.len() as f64;
    let tv = 0.5 * dist.probabilities().iter().map(|p| (p - u).abs()).sum::<f64>();
    let bound = 1.0 - crate::qmath::pow(q, (k * k) as u64);
    Ok(TvCouplingCheck {
        tv,
        bound,
        holds: tv <= bound + 1e-15,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn ms(v: &[f64]) -> LengthMultiset {
        LengthMultiset::new(v.to_vec()).unwrap()
    }

    fn brute_metric(x: &LengthMultiset, y: &LengthMultiset) -> f64 {
        let len = x.parts().len().max(y.parts().len());
        let pad = |v: &[f64]| {
            let mut v = v.to_vec();
            v.resize(len, 0.0);
            v
        };
        let (a, b) = (pad(x.parts()), pad(y.parts()));
        (0..len)
            .permutations(len)
            .map(|phi| phi.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    #[test]
    fn normalized_examples() {
        let p: Permutation = "8 6 3 5 4 1 2 7".parse().unwrap();
        assert_eq!(normalized_cycle_lengths(&p).parts(), &[0.625, 0.25, 0.125]);
        assert_eq!(
            normalized_cycle_lengths_exact(&p),
            vec![oracle::rational(5, 8), oracle::rational(1, 4), oracle::rational(1, 8)]
        );
        assert_eq!(
            normalized_cycle_lengths(&Permutation::identity(4).unwrap()).parts(),
            &[0.25; 4]
        );
        let long = Permutation::from_one_line(&[2, 3, 4, 1]).unwrap();
        assert_eq!(normalized_cycle_lengths(&long).parts(), &[1.0]);
        let w = weighted_lengths(&p, &[0.125; 8]).unwrap();
        assert!(w.approx_eq(&normalized_cycle_lengths(&p)));
    }

    #[test]
    fn weighted_examples() {
        let three = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        let w = weighted_lengths(&three, &[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(w.parts().len(), 1);
        assert!((w.parts()[0] - 1.0).abs() < 1e-15);
        let p: Permutation = "8 6 3 5 4 1 2 7".parse().unwrap();
        assert_eq!(weighted_lengths(&p, &[1.0; 8]).unwrap().parts(), &[5.0, 2.0, 1.0]);
        assert!(weighted_lengths(&three, &[0.2, -0.1, 0.5]).is_err());
        assert!(weighted_lengths(&three, &[0.2]).is_err());
    }

    #[test]
    fn metric_examples() {
        let x = ms(&[0.5, 0.3, 0.2]);
        assert_eq!(pd_metric(&x, &x), 0.0);
        assert!((pd_metric(&ms(&[0.7]), &ms(&[0.2])) - 0.5).abs() < 1e-15);
        assert!((pd_metric(&ms(&[1.0]), &ms(&[0.5, 0.5])) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(ms(&[0.5, 0.5]).approx_eq(&ms(&[0.5, 0.5, 0.0])));
        assert!(LengthMultiset::new(vec![0.1, -0.2]).is_err());
        assert!(LengthMultiset::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
        // ties across samples
        assert_eq!(ks_two_sample(&[1.0, 1.0], &[1.0]).unwrap(), 0.0);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!((ks_uniform(&[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!((ks_uniform(&[0.25, 0.75]).unwrap() - 0.25).abs() < 1e-15);
        assert!((ks_uniform(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(ks_uniform(&[]).is_err());
    }

    #[test]
    fn uniform_sampler_basics() {
        let mut rng = seed_stream(20, 0);
        assert!(uniform_sample(1, &mut rng).unwrap().is_identity());
        let mut a = seed_stream(21, 0);
        let mut b = seed_stream(21, 0);
        let params = MallowsParams::new(9, 1.0).unwrap();
        assert_eq!(uniform_sample(9, &mut a).unwrap(), mallows::sample(&params, &mut b));
    }

    #[test]
    fn tv_coupling_examples() {
        let c = tv_coupling_bound_check(4, 1.0).unwrap();
        assert!(c.tv.abs() < 1e-15 && c.bound == 0.0 && c.holds);
        assert_eq!(tv_coupling_bound_check(1, 0.3).unwrap().tv, 0.0);
        let c = tv_coupling_bound_check(4, 0.95).unwrap();
        assert!(c.holds && (c.bound - (1.0 - 0.95f64.powi(16))).abs() < 1e-15);
        assert!(tv_coupling_bound_check(7, 0.5).is_err());
        assert!(tv_coupling_bound_check(3, 1.5).is_err());
    }

    #[test]
    fn report_json_keys() {
        let params = MallowsParams::new(20, 0.9).unwrap();
        let r = pd_comparison(&params, 20, 50, 1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["regime_params", "ks_stat", "mean_largest_part", "mean_pair_distance", "replicates", "seed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(r, pd_comparison(&params, 20, 50, 1).unwrap());
    }

    proptest! {
        #[test]
        fn metric_axioms(
            a in prop::collection::vec(0.0f64..1.0, 0..6),
            b in prop::collection::vec(0.0f64..1.0, 0..6),
            c in prop::collection::vec(0.0f64..1.0, 0..6),
        ) {
            let (x, y, z) = (ms(&a), ms(&b), ms(&c));
            prop_assert!((pd_metric(&x, &y) - pd_metric(&y, &x)).abs() < 1e-15);
            prop_assert!(pd_metric(&x, &z) <= pd_metric(&x, &y) + pd_metric(&y, &z) + 1e-12);
            prop_assert!((pd_metric(&x, &y) - brute_metric(&x, &y)).abs() < 1e-12);
        }
    }
}
