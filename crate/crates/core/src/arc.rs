//! The arc chain `κ_t = |{i ≤ t : π_i > t}|` of a permutation, the
//! `(n,q)` and `(∞,q)` birth-and-death chains that describe its law
//! under Mallows, the stationary law of the `(∞,q)` chain, and the
//! shared-uniform monotone coupling.

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Error, Result};
use crate::mallows::MallowsParams;
use crate::perm::Permutation;
use crate::qmath::{self, pow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    Finite { n: usize },
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepProbabilities {
    pub down: f64,
    pub stay: f64,
    pub up: f64,
}

impl StepProbabilities {
    pub fn sum(&self) -> f64 {
        self.down + self.stay + self.up
    }
}

/// A realized path `κ_0, …, κ_T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcTrajectory {
    pub values: Vec<u32>,
    pub kind: ChainKind,
    /// `None` for the arc chain read off a fixed permutation.
    pub q: Option<f64>,
}

impl ArcTrajectory {
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    /// `|κ_{t+1} − κ_t| ≤ 1`, plus `κ_t ≤ n − t` for finite chains.
    pub fn is_valid(&self) -> bool {
        let steps_ok = self
            .values
            .windows(2)
            .all(|w| w[0].abs_diff(w[1]) <= 1);
        let bounds_ok = match self.kind {
            ChainKind::Finite { n } => self
                .values
                .iter()
                .enumerate()
                .all(|(t, &k)| t <= n && k as usize <= n - t),
            ChainKind::Infinite => true,
        };
        steps_ok && bounds_ok
    }

    /// CSV with columns `t,kappa`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,kappa")?;
        for (t, k) in self.values.iter().enumerate() {
            writeln!(out, "{t},{k}")?;
        }
        Ok(())
    }
}

/// `ξ_q = min{i ≥ 1 : q^i ≤ 1/2}`.
pub fn xi(q: f64) -> Result<u32> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q", format!("ξ needs 0 < q < 1, got {q}")));
    }
    let guess = (0.5f64.ln() / q.ln()).ceil().max(1.0) as u32;
    // the float ceiling can land one off either way
    let mut i = guess.saturating_sub(1).max(1);
    while pow(q, i as u64) > 0.5 {
        i += 1;
    }
    Ok(i)
}

/// Arc chain of a permutation: `κ_t = |{i ≤ t : π_i > t}|`, `0 ≤ t ≤ n`.
pub fn arc_chain_of(p: &Permutation) -> ArcTrajectory {
    let n = p.len();
    let image = p.as_zero_based();
    // κ_{t+1} = κ_t + 1 − [π_{t+1} ≤ t+1] − [π^{-1}(t+1) ≤ t]; with 0-based
    // position i = t and value v, compare against the new cutoff.
    let inv = p.inverse();
    let pre = inv.as_zero_based();
    let mut values = Vec::with_capacity(n + 1);
    let mut k: i64 = 0;
    values.push(0);
    for t in 0..n {
        // position t (1-based t+1) is revealed, along with value t
        k += 1;
        if (image[t] as usize) <= t {
            k -= 1;
        }
        if (pre[t] as usize) < t {
            k -= 1;
        }
        values.push(k as u32);
    }
    ArcTrajectory {
        values,
        kind: ChainKind::Finite { n },
        q: None,
    }
}

/// `κ_t` from the other side: `|{t < i ≤ n : π_i ≤ t}|`.
pub fn arc_chain_from_right(p: &Permutation) -> Vec<u32> {
    let n = p.len();
    (0..=n)
        .map(|t| {
            p.as_zero_based()[t..]
                .iter()
                .filter(|&&v| (v as usize) < t)
                .count() as u32
        })
        .collect()
}

/// `(1 − q^k)/(1 − q^m)` complement, `(q^k − q^m)/(1 − q^m)`, for `k ≤ m`.
fn complement(q: f64, k: u64, m: u64) -> f64 {
    if q <= 1.0 {
        pow(q, k) * qmath::ratio(q, m - k, m)
    } else {
        1.0 - qmath::ratio(q, k, m)
    }
}

/// Transition law of the `(n,q)` arc chain at time `t` from state `k`.
pub fn finite_step_probabilities(k: u32, t: usize, params: &MallowsParams) -> Result<StepProbabilities> {
    let n = params.n();
    if t >= n {
        return Err(out_of_range("time", t as i64, format!("0..{n}")));
    }
    let m = (n - t) as u64;
    let k = k as u64;
    if k > m {
        return Err(out_of_range("state", k as i64, format!("0..={m}")));
    }
    let q = params.q();
    let a = qmath::ratio(q, k, m);
    let not_a = complement(q, k, m);
    let (b, not_b) = if k < m {
        (qmath::ratio(q, k + 1, m), complement(q, k + 1, m))
    } else {
        (1.0, 0.0)
    };
    Ok(StepProbabilities {
        down: a * a,
        stay: not_a * (a + b),
        up: not_a * not_b,
    })
}

/// Transition law of the homogeneous `(∞,q)` arc chain from state `k`.
pub fn infinite_step_probabilities(k: u32, q: f64) -> Result<StepProbabilities> {
    check_open_unit(q)?;
    let k = k as u64;
    let a = qmath::one_minus_pow(q, k);
    let b = qmath::one_minus_pow(q, k + 1);
    let qk = pow(q, k);
    Ok(StepProbabilities {
        down: a * a,
        stay: qk * (a + b),
        up: qk * pow(q, k + 1),
    })
}

fn check_open_unit(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(invalid("q", format!("must lie in (0,1), got {q}")))
    }
}

/// `P_t[π_{t+1} = t+1]` given `κ_t = k`.
pub fn fixed_point_probability(k: u32, t: usize, params: &MallowsParams) -> Result<f64> {
    let n = params.n();
    if t >= n {
        return Err(out_of_range("time", t as i64, format!("0..{n}")));
    }
    let m = (n - t) as u64;
    if k as u64 > m {
        return Err(out_of_range("state", k as i64, format!("0..={m}")));
    }
    let q = params.q();
    Ok(pow(q, k as u64) * qmath::ratio(q, 1, m) * complement(q, k as u64, m))
}

/// `q^{d²+d} / (1 − q^{2d})`: bound on `ν[ξ+d+1, ∞)` and on `P[κ_t > ξ+d]`.
pub fn tail_bound(q: f64, d: u32) -> f64 {
    let d = d as u64;
    pow(q, d * d + d) / qmath::one_minus_pow(q, 2 * d)
}

/// An arc chain, finite or infinite, ready to be stepped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcChain {
    kind: ChainKind,
    q: f64,
}

impl ArcChain {
    /// `(n,q)` chain; any `q > 0` gives valid transitions, `q = 1` included.
    pub fn finite(n: usize, q: f64) -> Result<Self> {
        MallowsParams::new(n, q)?;
        Ok(ArcChain {
            kind: ChainKind::Finite { n },
            q,
        })
    }

    pub fn infinite(q: f64) -> Result<Self> {
        check_open_unit(q)?;
        Ok(ArcChain {
            kind: ChainKind::Infinite,
            q,
        })
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn max_horizon(&self) -> usize {
        match self.kind {
            ChainKind::Finite { n } => n,
            ChainKind::Infinite => usize::MAX,
        }
    }

    pub fn step_probabilities(&self, k: u32, t: usize) -> Result<StepProbabilities> {
        match self.kind {
            ChainKind::Finite { n } => finite_step_probabilities(k, t, &MallowsParams::new(n, self.q)?),
            ChainKind::Infinite => infinite_step_probabilities(k, self.q),
        }
    }

    /// One step of the shared-uniform update
    /// `k + 1{u > 1 − P[up]} − 1{u ≤ P[down]}`, for `u ∈ (0, 1]`.
    pub fn update(&self, k: u32, t: usize, u: f64) -> Result<u32> {
        let p = self.step_probabilities(k, t)?;
        let mut next = k as i64;
        if u > 1.0 - p.up {
            next += 1;
        }
        if u <= p.down {
            next -= 1;
        }
        Ok(next as u32)
    }

    fn check_start(&self, start: u32, horizon: usize) -> Result<()> {
        if horizon > self.max_horizon() {
            return Err(out_of_range(
                "horizon",
                horizon as i64,
                format!("0..={}", self.max_horizon()),
            ));
        }
        if let ChainKind::Finite { n } = self.kind {
            if start as usize > n {
                return Err(out_of_range("start", start as i64, format!("0..={n}")));
            }
        }
        Ok(())
    }

    /// Runs `horizon` steps from `start`, drawing one uniform per step.
    pub fn run<R: Rng + ?Sized>(&self, start: u32, horizon: usize, rng: &mut R) -> Result<ArcTrajectory> {
        self.check_start(start, horizon)?;
        let mut values = Vec::with_capacity(horizon + 1);
        let mut k = start;
        values.push(k);
        for t in 0..horizon {
            k = self.update(k, t, open_closed_uniform(rng))?;
            values.push(k);
        }
        Ok(ArcTrajectory {
            values,
            kind: self.kind,
            q: Some(self.q),
        })
    }

    /// `low` may be coupled below `self` when its q and n are no larger.
    fn dominates(&self, low: &ArcChain) -> bool {
        let n_ok = match (low.kind, self.kind) {
            (_, ChainKind::Infinite) => true,
            (ChainKind::Finite { n }, ChainKind::Finite { n: n_hat }) => n <= n_hat,
            (ChainKind::Infinite, ChainKind::Finite { .. }) => false,
        };
        n_ok && low.q <= self.q
    }
}

/// Uniform on `(0, 1]`, so `u ≤ 0` never fires a down step.
pub(crate) fn open_closed_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Runs `kind` for `horizon` steps with the shared-uniform rule.
pub fn run_chain<R: Rng + ?Sized>(
    kind: ChainKind,
    q: f64,
    start: u32,
    horizon: usize,
    rng: &mut R,
) -> Result<ArcTrajectory> {
    let chain = match kind {
        ChainKind::Finite { n } => ArcChain::finite(n, q)?,
        ChainKind::Infinite => ArcChain::infinite(q)?,
    };
    chain.run(start, horizon, rng)
}

/// Drives `low` and `high` with one shared uniform sequence and checks
/// `κ_t ≤ κ̂_t` at every step; a violation is returned as an error.
pub fn monotone_coupled_run<R: Rng + ?Sized>(
    low: &ArcChain,
    high: &ArcChain,
    starts: (u32, u32),
    horizon: usize,
    rng: &mut R,
) -> Result<(ArcTrajectory, ArcTrajectory)> {
    if !high.dominates(low) {
        return Err(invalid("chains", "coupling needs q ≤ q̂ and n ≤ n̂"));
    }
    if starts.0 > starts.1 {
        return Err(invalid("starts", format!("{} > {}", starts.0, starts.1)));
    }
    low.check_start(starts.0, horizon)?;
    high.check_start(starts.1, horizon)?;
    let mut a = vec![starts.0];
    let mut b = vec![starts.1];
    let (mut k, mut k_hat) = starts;
    for t in 0..horizon {
        let u = open_closed_uniform(rng);
        k = low.update(k, t, u)?;
        k_hat = high.update(k_hat, t, u)?;
        if k > k_hat {
            return Err(Error::CouplingViolation {
                t: t + 1,
                low: k,
                high: k_hat,
            });
        }
        a.push(k);
        b.push(k_hat);
    }
    Ok((
        ArcTrajectory {
            values: a,
            kind: low.kind,
            q: Some(low.q),
        },
        ArcTrajectory {
            values: b,
            kind: high.kind,
            q: Some(high.q),
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HittingTime {
    Hit(usize),
    /// No zero in `s..=horizon`.
    Censored { horizon: usize },
}

impl HittingTime {
    pub fn time(&self) -> Option<usize> {
        match *self {
            HittingTime::Hit(t) => Some(t),
            HittingTime::Censored { .. } => None,
        }
    }
}

/// `T_s = min{t ≥ s : κ_t = 0}`.
pub fn hitting_time(trajectory: &ArcTrajectory, s: usize) -> Result<HittingTime> {
    let horizon = trajectory.horizon();
    if s > horizon {
        return Err(out_of_range("time", s as i64, format!("0..={horizon}")));
    }
    Ok(trajectory.values[s..]
        .iter()
        .position(|&k| k == 0)
        .map(|i| HittingTime::Hit(s + i))
        .unwrap_or(HittingTime::Censored { horizon }))
}

/// Stationary law `ν` of the `(∞,q)` arc chain, truncated at a cutoff
/// certified by the tail bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub q: f64,
    pub xi: u32,
    /// `ν_0 ..= ν_S` for the cutoff `S = probabilities.len() − 1`.
    pub probabilities: Vec<f64>,
    /// Certified upper bound on `ν(S, ∞)`.
    pub tail_bound: f64,
    /// `ν(S, ∞)` summed numerically past the cutoff.
    pub tail_mass: f64,
}

/// Computes `ν_s ∝ ∏_{i ≤ s} u_i / v_i` with `u_i = q^{2i−1}`,
/// `v_i = (1 − q^i)²`. The cutoff is `ξ + max(d, 3)` for the least `d`
/// with `q^{d²+d}/(1 − q^{2d}) < tail_eps`.
pub fn stationary_distribution(q: f64, tail_eps: f64) -> Result<StationaryDistribution> {
    check_open_unit(q)?;
    if tail_eps.is_nan() || tail_eps <= 0.0 {
        return Err(invalid("tail_eps", "must be positive"));
    }
    let xi = xi(q)?;
    let mut d = 1u32;
    while tail_bound(q, d) >= tail_eps {
        d += 1;
    }
    let cutoff = (xi + d.max(3)) as usize;

    // log z_s, extended past the cutoff until the terms are negligible
    let ln_q = q.ln();
    let mut log_z = vec![0.0f64];
    let mut s = 0usize;
    loop {
        s += 1;
        let i = s as u64;
        let log_w = (2 * i - 1) as f64 * ln_q - 2.0 * qmath::one_minus_pow(q, i).ln();
        let next = log_z[s - 1] + log_w;
        log_z.push(next);
        let peak = log_z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if s > cutoff && next < peak - 800.0 {
            break;
        }
    }
    let peak = log_z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_z.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights[..=cutoff].iter().map(|w| w / total).collect();
    let tail_mass = weights[cutoff + 1..].iter().sum::<f64>() / total;
    let certified = if cutoff as u32 > xi {
        tail_bound(q, cutoff as u32 - xi)
    } else {
        1.0
    };
    Ok(StationaryDistribution {
        q,
        xi,
        probabilities,
        tail_bound: certified,
        tail_mass,
    })
}

impl StationaryDistribution {
    pub fn cutoff(&self) -> usize {
        self.probabilities.len() - 1
    }

    /// `ν[d, ∞)`, counting the residual past the cutoff.
    pub fn upper_tail(&self, d: usize) -> f64 {
        let within: f64 = self.probabilities.iter().skip(d).sum();
        within + self.tail_mass
    }

    /// Largest relative residual of `ν_s u_{s+1} = ν_{s+1} v_{s+1}` over the cutoff.
    pub fn detailed_balance_residual(&self) -> f64 {
        let q = self.q;
        (0..self.cutoff())
            .map(|s| {
                let i = s as u64 + 1;
                let u = pow(q, 2 * i - 1);
                let v = qmath::one_minus_pow(q, i).powi(2);
                let lhs = self.probabilities[s] * u;
                let rhs = self.probabilities[s + 1] * v;
                if lhs == 0.0 && rhs == 0.0 {
                    0.0
                } else {
                    (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
                }
            })
            .fold(0.0, f64::max)
    }

    /// The law after one `(∞,q)` step from `ν`, on `0 ..= S+1`.
    pub fn push_forward(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.probabilities.len() + 1];
        for (k, &p) in self.probabilities.iter().enumerate() {
            let step = infinite_step_probabilities(k as u32, self.q).expect("q checked at construction");
            if k > 0 {
                out[k - 1] += p * step.down;
            }
            out[k] += p * step.stay;
            out[k + 1] += p * step.up;
        }
        out
    }

    /// Inverse-CDF draw; the residual mass past the cutoff lands on the cutoff.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (s, &p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return s as u32;
            }
        }
        self.cutoff() as u32
    }
}
