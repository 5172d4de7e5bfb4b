//! Brute-force ground truth over small symmetric groups.
//!
//! Enumerates all of `S_n` (n ≤ 8) in lexicographic order and weights
//! each permutation by `q^{inv}`, normalized by the brute-force sum of
//! weights. Nothing here goes through the samplers or the closed-form
//! normalizing constant, which is what makes it usable as an oracle for
//! them. The weight type is generic so that rational `q` gives exact
//! identities.

use std::io::{self, Write};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Hard cap on the enumerated size; `8! = 40320` entries.
pub const MAX_N: usize = 8;

#[derive(Clone, Debug)]
pub struct ExactDistribution<W = f64> {
    n: usize,
    q: W,
    entries: Vec<(Permutation, W)>,
    inversions: Vec<u64>,
}

/// `μ_{n,q}` with floating-point weights.
pub fn enumerate_distribution(n: usize, q: f64) -> Result<ExactDistribution<f64>> {
    crate::mallows::check_q(q)?;
    ExactDistribution::enumerate(n, q)
}

/// `μ_{n,q}` with exact rational weights.
pub fn enumerate_rational(n: usize, q: BigRational) -> Result<ExactDistribution<BigRational>> {
    if q <= BigRational::from_integer(0.into()) {
        return Err(crate::error::invalid("q", "must be positive"));
    }
    ExactDistribution::enumerate(n, q)
}

/// `p/d` as a rational.
pub fn rational(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

impl<W: Clone + Num> ExactDistribution<W> {
    fn enumerate(n: usize, q: W) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if n > MAX_N {
            return Err(Error::TooLarge { n, cap: MAX_N });
        }
        let mut perms = Vec::new();
        let mut inversions = Vec::new();
        for values in (1..=n).permutations(n) {
            let p = Permutation::from_one_line(&values)?;
            inversions.push(brute_inversions(&values));
            perms.push(p);
        }
        let weights: Vec<W> = inversions
            .iter()
            .map(|&k| num_traits::pow(q.clone(), k as usize))
            .collect();
        let total = weights.iter().cloned().fold(W::zero(), |a, b| a + b);
        let entries = perms
            .into_iter()
            .zip(weights)
            .map(|(p, w)| (p, w / total.clone()))
            .collect();
        Ok(ExactDistribution {
            n,
            q,
            entries,
            inversions,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &W {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(permutation, probability)` in lexicographic order of one-line notation.
    pub fn entries(&self) -> &[(Permutation, W)] {
        &self.entries
    }

    /// Cached inversion counts, aligned with [`Self::entries`].
    pub fn inversion_counts(&self) -> &[u64] {
        &self.inversions
    }

    pub fn total_mass(&self) -> W {
        self.entries
            .iter()
            .map(|(_, w)| w.clone())
            .fold(W::zero(), |a, b| a + b)
    }

    /// `Σ_π μ(π) · statistic(π)`.
    pub fn expectation<F>(&self, statistic: F) -> W
    where
        F: Fn(&Permutation) -> W,
    {
        self.entries
            .iter()
            .map(|(p, w)| w.clone() * statistic(p))
            .fold(W::zero(), |a, b| a + b)
    }

    /// `P[event]`.
    pub fn probability<F>(&self, event: F) -> W
    where
        F: Fn(&Permutation) -> bool,
    {
        self.entries
            .iter()
            .filter(|(p, _)| event(p))
            .map(|(_, w)| w.clone())
            .fold(W::zero(), |a, b| a + b)
    }
}

impl ExactDistribution<f64> {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, w)| *w).collect()
    }

    /// TV distance between this law and the empirical law of `counts`
    /// (indexed by [`lex_rank`]).
    pub fn tv_to_counts(&self, counts: &[u64]) -> Result<f64> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(crate::error::invalid("counts", "no observations"));
        }
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        tv_distance(&self.probabilities(), &empirical)
    }

    /// CSV table: `permutation,inversions,cycles,c1_length,probability`.
    pub fn write_table_csv<Wr: Write>(&self, mut out: Wr) -> io::Result<()> {
        writeln!(out, "permutation,inversions,cycles,c1_length,probability")?;
        for ((p, w), inv) in self.entries.iter().zip(&self.inversions) {
            let cycles = p.cycle_decomposition();
            writeln!(
                out,
                "{},{},{},{},{:.17e}",
                p,
                inv,
                cycles.num_cycles(),
                cycles.cycle_of(1).len(),
                w
            )?;
        }
        Ok(())
    }
}

impl ExactDistribution<BigRational> {
    pub fn to_f64(&self) -> ExactDistribution<f64> {
        ExactDistribution {
            n: self.n,
            q: self.q.to_f64().unwrap_or(f64::NAN),
            entries: self
                .entries
                .iter()
                .map(|(p, w)| (p.clone(), w.to_f64().unwrap_or(f64::NAN)))
                .collect(),
            inversions: self.inversions.clone(),
        }
    }

    /// `Σ_π q^{inv(π)}` recomputed from the cached inversion counts.
    pub fn raw_weight_sum(&self) -> BigRational {
        self.inversions
            .iter()
            .map(|&k| num_traits::pow(self.q.clone(), k as usize))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Conditional law of `κ_{t+1} − κ_t ∈ {−1, 0, +1}` given `κ_t = k`,
    /// read off the full distribution. `None` when `P[κ_t = k] = 0`.
    pub fn kappa_transition(&self, t: usize, k: u32) -> Option<[BigRational; 3]> {
        let mut mass = BigRational::zero();
        let mut moves = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
        for (p, w) in &self.entries {
            let kappa = crate::arc::arc_chain_of(p).values;
            if kappa[t] != k {
                continue;
            }
            mass += w;
            let slot = (kappa[t + 1] as i64 - k as i64 + 1) as usize;
            moves[slot] += w;
        }
        if mass.is_zero() {
            return None;
        }
        Some(moves.map(|m| m / &mass))
    }

    /// `P[π_{t+1} = t+1 | κ_t = k]` from the full distribution.
    pub fn fixed_point_given_kappa(&self, t: usize, k: u32) -> Option<BigRational> {
        let mut mass = BigRational::zero();
        let mut hits = BigRational::zero();
        for (p, w) in &self.entries {
            if crate::arc::arc_chain_of(p).values[t] != k {
                continue;
            }
            mass += w;
            if p.as_zero_based()[t] as usize == t {
                hits += w;
            }
        }
        (!mass.is_zero()).then(|| hits / mass)
    }
}

fn one() -> BigRational {
    BigRational::one()
}

/// `1 + q + … + q^{m−1}`.
pub fn q_integer(q: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::zero();
    let mut term = one();
    for _ in 0..m {
        acc += &term;
        term *= q;
    }
    acc
}

/// `∏_{j ≤ n} [j]_q`, the closed-form normalizing constant.
pub fn q_factorial(q: &BigRational, n: u64) -> BigRational {
    (1..=n).map(|j| q_integer(q, j)).fold(one(), |a, b| a * b)
}

/// `[a]_q / [b]_q`, equal to `(1 − q^a)/(1 − q^b)` off `q = 1`.
pub fn q_ratio_exact(q: &BigRational, a: u64, b: u64) -> BigRational {
    q_integer(q, a) / q_integer(q, b)
}

/// Exact `(down, stay, up)` of the `(n,q)` arc chain at time `t`, state `k ≤ n − t`.
pub fn exact_step_probabilities(k: u32, t: usize, n: usize, q: &BigRational) -> [BigRational; 3] {
    let m = (n - t) as u64;
    let k = k as u64;
    let a = q_ratio_exact(q, k, m);
    let b = if k < m { q_ratio_exact(q, k + 1, m) } else { one() };
    let not_a = one() - &a;
    [&a * &a, &not_a * (&a + &b), &not_a * (one() - b)]
}

/// Exact `P[π_{t+1} = t+1 | κ_t = k]`.
pub fn exact_fixed_point_probability(k: u32, t: usize, n: usize, q: &BigRational) -> BigRational {
    let m = (n - t) as u64;
    let k = k as u64;
    num_traits::pow(q.clone(), k as usize) * q_ratio_exact(q, 1, m) * (one() - q_ratio_exact(q, k, m))
}

/// Exact `(down, stay, up)` of the `(∞,q)` arc chain.
pub fn exact_infinite_step_probabilities(k: u32, q: &BigRational) -> [BigRational; 3] {
    let qk = num_traits::pow(q.clone(), k as usize);
    let a = one() - &qk;
    let b = one() - &qk * q;
    [&a * &a, &qk * (a + b), &qk * &qk * q]
}

/// Unnormalized stationary weights `z_0 = 1`, `z_s = ∏_{i ≤ s} q^{2i−1}/(1 − q^i)²`.
pub fn exact_stationary_weights(q: &BigRational, upto: usize) -> Vec<BigRational> {
    let mut z = vec![one()];
    for i in 1..=upto {
        let qi = num_traits::pow(q.clone(), i);
        let u = num_traits::pow(q.clone(), 2 * i - 1);
        let v = (one() - &qi) * (one() - qi);
        let next = &z[i - 1] * u / v;
        z.push(next);
    }
    z
}

/// `Σ_π μ(π) · statistic(π)` for floating weights.
pub fn exact_expectation<F>(dist: &ExactDistribution<f64>, statistic: F) -> f64
where
    F: Fn(&Permutation) -> f64,
{
    dist.expectation(statistic)
}

/// `½ Σ |p_i − r_i|` over a common indexed support.
pub fn tv_distance(p: &[f64], r: &[f64]) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::MismatchedSupport {
            left: p.len(),
            right: r.len(),
        });
    }
    Ok(0.5 * p.iter().zip(r).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Lexicographic rank of `p` among all permutations of its size
/// (the index of `p` in [`ExactDistribution::entries`]).
pub fn lex_rank(p: &Permutation) -> usize {
    let v = p.as_zero_based();
    let n = v.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller_later = v[i + 1..].iter().filter(|&&x| x < v[i]).count();
        rank = rank * (n - i) + smaller_later;
    }
    rank
}

fn brute_inversions(values: &[usize]) -> u64 {
    let mut c = 0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] > values[j] {
                c += 1;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_law() {
        let d = enumerate_distribution(2, 0.5).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.entries()[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(d.entries()[0].0.is_identity());
        assert!((d.entries()[1].1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_and_normalized() {
        let d = enumerate_distribution(3, 1.0).unwrap();
        assert!(d.entries().iter().all(|(_, w)| (w - 1.0 / 6.0).abs() < 1e-15));
        for n in 1..=7 {
            let d = enumerate_distribution(n, 0.37).unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-12);
            assert!(d.entries().iter().all(|(_, w)| *w > 0.0));
        }
        let r = enumerate_rational(5, rational(3, 10)).unwrap();
        assert_eq!(r.total_mass(), rational(1, 1));
    }

    #[test]
    fn size_cap() {
        assert_eq!(
            enumerate_distribution(9, 0.5).unwrap_err(),
            Error::TooLarge { n: 9, cap: 8 }
        );
        assert_eq!(enumerate_distribution(8, 0.5).unwrap().len(), 40320);
        assert!(enumerate_distribution(0, 0.5).is_err());
        assert!(enumerate_distribution(3, 0.0).is_err());
    }

    #[test]
    fn expectation_examples() {
        // S_2: identity has 2 cycles with weight 1, the swap 1 cycle with weight q.
        for &q in &[0.2, 0.5, 0.9] {
            let d = enumerate_distribution(2, q).unwrap();
            let e = exact_expectation(&d, |p| p.cycle_decomposition().num_cycles() as f64);
            assert!((e - (2.0 + q) / (1.0 + q)).abs() < 1e-14);
        }
        let d = enumerate_distribution(1, 0.5).unwrap();
        assert_eq!(exact_expectation(&d, |p| p.cycle_decomposition().cycle_of(1).len() as f64), 1.0);
        // average of {0,1,1,2,2,3}
        let d = enumerate_rational(3, rational(1, 1)).unwrap();
        let e = d.expectation(|p| BigRational::from_integer(p.inversions().into()));
        assert_eq!(e, rational(3, 2));
    }

    #[test]
    fn rational_transition_identities() {
        for q in [rational(3, 10), rational(1, 2), rational(1, 1), rational(7, 3)] {
            let d = enumerate_rational(5, q.clone()).unwrap();
            assert_eq!(d.raw_weight_sum(), q_factorial(&q, 5));
            for t in 0..5 {
                for k in 0..=(5 - t) as u32 {
                    if let Some(law) = d.kappa_transition(t, k) {
                        assert_eq!(law, exact_step_probabilities(k, t, 5, &q), "t={t} k={k}");
                        assert_eq!(
                            d.fixed_point_given_kappa(t, k).unwrap(),
                            exact_fixed_point_probability(k, t, 5, &q)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rational_detailed_balance() {
        let q = rational(3, 10);
        let z = exact_stationary_weights(&q, 6);
        for k in 0..6u32 {
            let up = exact_infinite_step_probabilities(k, &q)[2].clone();
            let down = exact_infinite_step_probabilities(k + 1, &q)[0].clone();
            assert_eq!(&z[k as usize] * up, &z[k as usize + 1] * down);
            let [a, b, c] = exact_infinite_step_probabilities(k, &q);
            assert_eq!(a + b + c, BigRational::one());
        }
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn lex_rank_is_entry_index() {
        let d = enumerate_distribution(5, 0.5).unwrap();
        for (i, (p, _)) in d.entries().iter().enumerate() {
            assert_eq!(lex_rank(p), i);
        }
    }

    #[test]
    fn table_dump() {
        let d = enumerate_distribution(2, 0.5).unwrap();
        let mut buf = Vec::new();
        d.write_table_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "permutation,inversions,cycles,c1_length,probability");
        assert!(lines[1].starts_with("1 2,0,2,1,6.666"));
        assert!(lines[2].starts_with("2 1,1,1,2,3.333"));
    }
}
