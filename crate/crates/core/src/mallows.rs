//! The Mallows measure `μ_{n,q}(π) ∝ q^{inv(π)}` and its exact
//! sequential sampler.
//!
//! Position `s` takes the k-th smallest unused value with probability
//! `(1−q) q^{k−1} / (1 − q^{n−s+1})`. Unused values live in a Fenwick
//! order-statistic set, so a draw costs O(n log n). `q = 1` is the
//! uniform shuffle. For `q > 1` we draw `σ ~ μ_{n,1/q}` and return
//! `σ ∘ r`, which has law `μ_{n,q}`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fenwick::Fenwick;
use crate::perm::Permutation;
use crate::qmath;

/// Largest value of `ln Z` representable as a finite `f64`.
const LN_F64_MAX: f64 = 709.782_712_893_384;

/// Threshold below which `1 − q` is treated as "near one".
pub const NEAR_ONE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallowsParams {
    n: usize,
    q: f64,
    /// True when `q > 1`, so sampling goes through `μ_{n,1/q}` and a reflection.
    canonicalized: bool,
}

impl MallowsParams {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        check_q(q)?;
        Ok(MallowsParams {
            n,
            q,
            canonicalized: q > 1.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn canonicalized(&self) -> bool {
        self.canonicalized
    }

    /// The parameter actually fed to the geometric-insertion sampler (≤ 1).
    pub fn sampling_q(&self) -> f64 {
        if self.canonicalized {
            1.0 / self.q
        } else {
            self.q
        }
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(invalid("q", format!("must be a positive finite real, got {q}")))
    }
}

/// `Z_{n,q} = ∏_{i=1..n} (1 + q + … + q^{i−1})`.
///
/// Near `q = 1` each factor is summed term by term; elsewhere the closed
/// form is used. Fails with [`Error::Overflow`] when `Z` exceeds `f64`.
pub fn normalizing_constant(params: &MallowsParams) -> Result<f64> {
    let log_z = log_normalizing_constant(params);
    if log_z > LN_F64_MAX {
        return Err(Error::Overflow { log_value: log_z });
    }
    let q = params.q;
    let near_one = (1.0 - q).abs() < NEAR_ONE;
    let mut z = 1.0;
    for i in 1..=params.n as u64 {
        z *= if near_one {
            qmath::geometric_sum(q, i)
        } else {
            (qmath::ln_geometric_sum(q, i)).exp()
        };
    }
    Ok(z)
}

/// `ln Z_{n,q}`, finite for every `n`.
pub fn log_normalizing_constant(params: &MallowsParams) -> f64 {
    (1..=params.n as u64)
        .map(|i| qmath::ln_geometric_sum(params.q, i))
        .sum()
}

/// `μ_{n,q}(p)`, evaluated in the log domain.
pub fn pmf(p: &Permutation, q: f64) -> Result<f64> {
    Ok(log_pmf(p, q)?.exp())
}

pub fn log_pmf(p: &Permutation, q: f64) -> Result<f64> {
    let params = MallowsParams::new(p.len(), q)?;
    Ok(p.inversions() as f64 * q.ln() - log_normalizing_constant(&params))
}

/// Inverse-CDF draw of `J ∈ 1..=k` with `P[J = j] ∝ q^{j−1}`.
///
/// `u` must lie in `[0, 1)`. For `q < 1` this is
/// `min(k, 1 + ⌊ln(1 − u(1 − q^k)) / ln q⌋)`; within `1e-6` of one the
/// CDF is scanned linearly instead. `q = 1` is uniform and `q > 1` is
/// the mirror image of the `1/q` law.
pub fn truncated_geometric(k: usize, q: f64, u: f64) -> usize {
    debug_assert!(k >= 1);
    debug_assert!((0.0..1.0).contains(&u));
    if k == 1 {
        return 1;
    }
    if q == 1.0 {
        return ((u * k as f64) as usize + 1).min(k);
    }
    if q > 1.0 {
        return k + 1 - truncated_geometric(k, 1.0 / q, u);
    }
    if 1.0 - q < NEAR_ONE {
        return scan_truncated_geometric(k, q, u);
    }
    let mass = qmath::one_minus_pow(q, k as u64);
    let x = (-u * mass).ln_1p() / q.ln();
    if x.is_nan() || x >= k as f64 {
        return k;
    }
    (x as usize + 1).min(k)
}

fn scan_truncated_geometric(k: usize, q: f64, u: f64) -> usize {
    let target = u * qmath::geometric_sum(q, k as u64);
    let mut acc = 0.0;
    let mut w = 1.0;
    for j in 1..=k {
        acc += w;
        if target < acc {
            return j;
        }
        w *= q;
    }
    k
}

/// Exact draw from `μ_{n,q}`.
pub fn sample<R: Rng + ?Sized>(params: &MallowsParams, rng: &mut R) -> Permutation {
    let q = params.sampling_q();
    let image = if q == 1.0 {
        let mut v: Vec<u32> = (0..params.n as u32).collect();
        v.shuffle(rng);
        v
    } else {
        insertion_image(params.n, q, rng)
    };
    let sigma = Permutation::from_zero_based_unchecked(image);
    if params.canonicalized {
        sigma.reflect_positions()
    } else {
        sigma
    }
}

/// Sequential geometric insertion for `0 < q ≤ 1`.
fn insertion_image<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Vec<u32> {
    let mut unused = Fenwick::full(n);
    let mut image = Vec::with_capacity(n);
    for s in 0..n {
        let k = truncated_geometric(n - s, q, rng.gen());
        let v = unused.kth(k as i64).expect("k never exceeds the unused count");
        unused.add(v, -1);
        image.push(v as u32);
    }
    image
}

/// `|π_s − s|`.
pub fn displacement(p: &Permutation, s: usize) -> Result<usize> {
    p.displacement(s)
}

/// Upper bound `min(2q/(1−q), n−1)` on the expected displacement, for `0 < q < 1`.
pub fn displacement_upper_bound(n: usize, q: f64) -> f64 {
    let cap = (n - 1) as f64;
    if q >= 1.0 {
        cap
    } else {
        (2.0 * q / (1.0 - q)).min(cap)
    }
}
