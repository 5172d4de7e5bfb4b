//! Sampling from a mid-point.
//!
//! For a split level `s`, `χ_t = |Γ_π ∩ {x > t, y ≤ s}|` counts the
//! graph points right of `t` in the bottom strip. Its descents are the
//! `x`-projection of the bottom strip, and the relative orders of the
//! bottom and top strips are independent Mallows permutations. The
//! two-sided version stitches two one-sided infinite permutations at 0.

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arc::{stationary_distribution, StationaryDistribution};
use crate::error::{invalid, out_of_range, Result};
use crate::mallows::{self, MallowsParams};
use crate::perm::Permutation;
use crate::qmath::{pow, ratio};

/// Steps before a homogeneous `χ` run is declared censored.
pub const DEFAULT_HORIZON: usize = 1_000_000;
/// Tail mass allowed when truncating the law of `χ_0`.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiTrajectory {
    /// `χ_0, χ_1, …`; absorbed at 0 unless `censored`.
    pub values: Vec<u32>,
    pub split: usize,
    pub q: f64,
    pub censored: bool,
}

impl ChiTrajectory {
    /// Times `t ≥ 1` with `χ_t = χ_{t−1} − 1`.
    pub fn descents(&self) -> Vec<usize> {
        self.values
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] + 1 == w[0])
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Non-increasing steps of size at most one.
    pub fn is_valid(&self) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1] <= w[0] && w[0] - w[1] <= 1)
    }
}

/// `(P[down], P[stay])` for the finite `χ` chain at state `x`, time `t`.
pub fn chi_step_finite(x: u32, t: usize, params: &MallowsParams) -> Result<(f64, f64)> {
    let n = params.n();
    if t >= n {
        return Err(out_of_range("time", t as i64, format!("0..{n}")));
    }
    let m = (n - t) as u64;
    if x as u64 > m {
        return Err(out_of_range("state", x as i64, format!("0..={m}")));
    }
    let q = params.q();
    let down = ratio(q, x as u64, m);
    let stay = if q <= 1.0 {
        pow(q, x as u64) * ratio(q, m - x as u64, m)
    } else {
        1.0 - down
    };
    Ok((down, stay))
}

/// Runs the finite `χ` chain from `χ_0 = s` to `χ_n = 0`.
pub fn sample_chi<R: Rng + ?Sized>(params: &MallowsParams, s: usize, rng: &mut R) -> Result<ChiTrajectory> {
    let n = params.n();
    if s > n {
        return Err(out_of_range("split", s as i64, format!("0..={n}")));
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut x = s as u32;
    values.push(x);
    for t in 0..n {
        if x > 0 {
            let (down, _) = chi_step_finite(x, t, params)?;
            if rng.gen::<f64>() < down {
                x -= 1;
            }
        }
        values.push(x);
    }
    debug_assert_eq!(x, 0);
    Ok(ChiTrajectory {
        values,
        split: s,
        q: params.q(),
        censored: false,
    })
}

/// Assembles a permutation from the `χ` descents and the two strip
/// orders; an empty strip is `None`.
pub fn assemble(chi: &ChiTrajectory, bottom: Option<&Permutation>, top: Option<&Permutation>) -> Result<Permutation> {
    let s = chi.split;
    let n = chi.values.len() - 1;
    let bottom = bottom.map(|p| p.as_zero_based()).unwrap_or(&[]);
    let top = top.map(|p| p.as_zero_based()).unwrap_or(&[]);
    if bottom.len() != s || top.len() + s != n {
        return Err(invalid(
            "strips",
            format!("sizes {} + {} do not split {n} at {s}", bottom.len(), top.len()),
        ));
    }
    let descents = chi.descents();
    if descents.len() != s {
        return Err(invalid("chi", format!("{} descents for split {s}", descents.len())));
    }
    let mut image = vec![0u32; n];
    let mut is_descent = vec![false; n];
    for (i, &x) in descents.iter().enumerate() {
        image[x - 1] = bottom[i];
        is_descent[x - 1] = true;
    }
    let mut rest = top.iter();
    for x in 0..n {
        if !is_descent[x] {
            image[x] = s as u32 + rest.next().expect("sizes checked above");
        }
    }
    Permutation::from_zero_based(image)
}

/// Mallows sample built from the split `s`: `χ`, then `λ^A ~ μ_{s,q}`
/// and `λ^B ~ μ_{n−s,q}`, then [`assemble`].
pub fn stitch_sample<R: Rng + ?Sized>(params: &MallowsParams, s: usize, rng: &mut R) -> Result<Permutation> {
    let chi = sample_chi(params, s, rng)?;
    let n = params.n();
    let q = params.q();
    let bottom = strip_sample(s, q, rng)?;
    let top = strip_sample(n - s, q, rng)?;
    assemble(&chi, bottom.as_ref(), top.as_ref())
}

fn strip_sample<R: Rng + ?Sized>(k: usize, q: f64, rng: &mut R) -> Result<Option<Permutation>> {
    if k == 0 {
        return Ok(None);
    }
    Ok(Some(mallows::sample(&MallowsParams::new(k, q)?, rng)))
}

/// Relative order of the points of `p` with `y ≤ s` (bottom strip).
pub fn bottom_strip(p: &Permutation, s: usize) -> Option<Permutation> {
    let image: Vec<u32> = p.as_zero_based().iter().copied().filter(|&v| (v as usize) < s).collect();
    (!image.is_empty()).then(|| Permutation::from_zero_based_unchecked(image))
}

/// Relative order of the points of `p` with `y > s` (top strip).
pub fn top_strip(p: &Permutation, s: usize) -> Option<Permutation> {
    let image: Vec<u32> = p
        .as_zero_based()
        .iter()
        .filter(|&&v| (v as usize) >= s)
        .map(|&v| v - s as u32)
        .collect();
    (!image.is_empty()).then(|| Permutation::from_zero_based_unchecked(image))
}

/// `χ` for a fixed permutation and split: `χ_t = |{x > t : π_x ≤ s}|`.
pub fn chi_of(p: &Permutation, s: usize, q: f64) -> ChiTrajectory {
    let n = p.len();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = s.min(n) as u32;
    values.push(x);
    for &v in p.as_zero_based() {
        if (v as usize) < s {
            x -= 1;
        }
        values.push(x);
    }
    ChiTrajectory {
        values,
        split: s,
        q,
        censored: false,
    }
}

/// Homogeneous `χ` chain (`P[down] = 1 − q^x`) run until it hits 0.
pub fn sample_chi_homogeneous<R: Rng + ?Sized>(q: f64, chi0: u32, horizon: usize, rng: &mut R) -> ChiTrajectory {
    let mut values = vec![chi0];
    let mut x = chi0;
    let mut t = 0;
    while x > 0 && t < horizon {
        if rng.gen::<f64>() < crate::qmath::one_minus_pow(q, x as u64) {
            x -= 1;
        }
        values.push(x);
        t += 1;
    }
    ChiTrajectory {
        values,
        split: chi0 as usize,
        q,
        censored: x > 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub index: i64,
    pub value: i64,
    /// `false` when the value falls outside the window or the draw was censored.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub window: i64,
    pub chi0: u32,
    /// `A_x ∩ ℕ`: positive positions mapped to `y ≤ 0`.
    pub a_positive: Vec<i64>,
    /// `B_x \ ℕ`: non-positive positions mapped to `y > 0`.
    pub b_nonpositive: Vec<i64>,
    pub censored: bool,
    /// Entries for `index = −W ..= W`.
    pub entries: Vec<WindowEntry>,
}

impl WindowSample {
    pub fn value(&self, index: i64) -> Option<&WindowEntry> {
        let i = index + self.window;
        if i < 0 {
            return None;
        }
        self.entries.get(i as usize)
    }

    /// CSV with columns `index,value,complete`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,value,complete")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.index, e.value, e.complete)?;
        }
        Ok(())
    }
}

/// Draws `σ_1, σ_2, …` of a one-sided infinite Mallows permutation of `ℕ`:
/// `σ_i` is the `k`-th smallest unused integer with `k ~ Geometric(1 − q)`.
#[derive(Clone, Debug)]
pub struct OneSidedSampler {
    q: f64,
    used: Vec<u64>,
}

impl OneSidedSampler {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid("q", format!("must lie in (0,1), got {q}")));
        }
        Ok(OneSidedSampler { q, used: Vec::new() })
    }

    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        // k ≥ 1 with P[k] = (1−q) q^{k−1}
        let u: f64 = 1.0 - rng.gen::<f64>();
        let k = (u.ln() / self.q.ln()).floor() as u64 + 1;
        let mut v = k;
        for &w in &self.used {
            if w <= v {
                v += 1;
            } else {
                break;
            }
        }
        let at = self.used.partition_point(|&w| w < v);
        self.used.insert(at, v);
        v
    }
}

/// Two-sided sampler on the window `[−W, W]`; reuses the law of `χ_0`.
#[derive(Clone, Debug)]
pub struct TwoSidedSampler {
    q: f64,
    window: i64,
    horizon: usize,
    nu: StationaryDistribution,
}

impl TwoSidedSampler {
    pub fn new(q: f64, window: i64, horizon: usize) -> Result<Self> {
        if window < 1 {
            return Err(out_of_range("window", window, "1..".to_string()));
        }
        Ok(TwoSidedSampler {
            q,
            window,
            horizon,
            nu: stationary_distribution(q, DEFAULT_TAIL_EPS)?,
        })
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.nu
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WindowSample {
        let w = self.window;
        let chi0 = self.nu.sample(rng);
        let one = sample_chi_homogeneous(self.q, chi0, self.horizon, rng);
        let two = sample_chi_homogeneous(self.q, chi0, self.horizon, rng);
        let censored = one.censored || two.censored;
        let a_positive: Vec<i64> = one.descents().iter().map(|&t| t as i64).collect();
        let b_nonpositive: Vec<i64> = two.descents().iter().map(|&t| 1 - t as i64).collect();

        // A_x = (A ∩ ℕ) ∪ (ℤ≤0 \ (B \ ℕ)), walked downward from its maximum
        let in_b_neg = |x: i64| b_nonpositive.binary_search_by(|b| x.cmp(b)).is_ok();
        let in_a_pos = |x: i64| a_positive.binary_search(&x).is_ok();
        let mut entries = vec![
            WindowEntry {
                index: 0,
                value: 0,
                complete: false
            };
            (2 * w + 1) as usize
        ];
        let mut put = |x: i64, value: i64| {
            if (-w..=w).contains(&x) {
                entries[(x + w) as usize] = WindowEntry {
                    index: x,
                    value,
                    complete: !censored && (-w..=w).contains(&value),
                };
            }
        };

        let mut sigma = OneSidedSampler::new(self.q).expect("q checked at construction");
        let a_top = a_positive.last().copied().unwrap_or(0);
        for x in (-w..=a_top).rev() {
            if (x > 0 && in_a_pos(x)) || (x <= 0 && !in_b_neg(x)) {
                put(x, 1 - sigma.next(rng) as i64);
            }
        }
        // B_x = (B \ ℕ) ∪ (ℕ \ (A ∩ ℕ)), walked upward from its minimum
        let mut sigma = OneSidedSampler::new(self.q).expect("q checked at construction");
        let b_bottom = b_nonpositive.last().copied().unwrap_or(1).min(-w);
        for x in b_bottom..=w {
            if (x <= 0 && in_b_neg(x)) || (x > 0 && !in_a_pos(x)) {
                put(x, sigma.next(rng) as i64);
            }
        }
        WindowSample {
            window: w,
            chi0,
            a_positive,
            b_nonpositive,
            censored,
            entries,
        }
    }
}

/// One draw of the two-sided recipe restricted to `[−W, W]`.
pub fn two_sided_window_sample<R: Rng + ?Sized>(q: f64, window: i64, rng: &mut R) -> Result<WindowSample> {
    Ok(TwoSidedSampler::new(q, window, DEFAULT_HORIZON)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn chi_step_examples() {
        let params = MallowsParams::new(7, 0.6).unwrap();
        for t in 0..7 {
            assert_eq!(chi_step_finite(0, t, &params).unwrap(), (0.0, 1.0));
            let m = (7 - t) as u32;
            assert_eq!(chi_step_finite(m, t, &params).unwrap(), (1.0, 0.0));
            for x in 0..=m {
                let (d, s) = chi_step_finite(x, t, &params).unwrap();
                assert!((d + s - 1.0).abs() < 1e-14);
                let q: f64 = 0.6;
                let raw = (q.powi(x as i32) - q.powi(m as i32)) / (1.0 - q.powi(m as i32));
                assert!((s - raw).abs() < 1e-14);
            }
        }
        assert!(chi_step_finite(8, 0, &params).is_err());
        assert!(chi_step_finite(0, 7, &params).is_err());
        let flat = MallowsParams::new(5, 1.0).unwrap();
        assert_eq!(chi_step_finite(2, 0, &flat).unwrap(), (0.4, 0.6));
    }

    #[test]
    fn finite_chi_invariants() {
        let mut rng = seed_stream(10, 0);
        for &q in &[0.2, 0.8, 1.0, 1.7] {
            let params = MallowsParams::new(30, q).unwrap();
            for s in 0..=30 {
                let chi = sample_chi(&params, s, &mut rng).unwrap();
                assert!(chi.is_valid());
                assert_eq!(chi.values[0] as usize, s);
                assert_eq!(*chi.values.last().unwrap(), 0);
                assert_eq!(chi.descents().len(), s);
            }
        }
        assert!(sample_chi(&MallowsParams::new(3, 0.5).unwrap(), 4, &mut rng).is_err());
    }

    #[test]
    fn strips_round_trip() {
        let p: Permutation = "8 6 3 5 4 1 2 7".parse().unwrap();
        for s in 0..=8 {
            let chi = chi_of(&p, s, 0.5);
            let back = assemble(&chi, bottom_strip(&p, s).as_ref(), top_strip(&p, s).as_ref()).unwrap();
            assert_eq!(back, p);
        }
        assert_eq!(bottom_strip(&p, 3).unwrap().one_line(), vec![3, 1, 2]);
        assert!(bottom_strip(&p, 0).is_none());
        assert_eq!(chi_of(&p, 3, 0.5).descents(), vec![3, 6, 7]);
    }

    #[test]
    fn degenerate_splits() {
        let params = MallowsParams::new(6, 0.4).unwrap();
        let mut a = seed_stream(11, 0);
        let mut b = seed_stream(11, 0);
        // s = 0 draws nothing for χ, so the output is the plain sample
        let stitched = stitch_sample(&params, 0, &mut a).unwrap();
        let plain = mallows::sample(&params, &mut b);
        assert_eq!(stitched, plain);
        let p = stitch_sample(&params, 6, &mut a).unwrap();
        assert_eq!(chi_of(&p, 6, 0.4).descents(), (1..=6).collect::<Vec<_>>());
    }

    #[test]
    fn one_sided_sampler_is_injective() {
        let mut rng = seed_stream(12, 0);
        let mut s = OneSidedSampler::new(0.9).unwrap();
        let mut seen: Vec<u64> = (0..500).map(|_| s.next(&mut rng)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 500);
        assert!(OneSidedSampler::new(1.0).is_err());
    }

    #[test]
    fn window_is_a_partial_bijection() {
        let mut rng = seed_stream(13, 0);
        for &q in &[0.3, 0.8, 0.95] {
            let sampler = TwoSidedSampler::new(q, 40, DEFAULT_HORIZON).unwrap();
            for _ in 0..300 {
                let w = sampler.sample(&mut rng);
                assert!(!w.censored);
                assert_eq!(w.a_positive.len(), w.chi0 as usize);
                assert_eq!(w.b_nonpositive.len(), w.chi0 as usize);
                let mut values: Vec<i64> = w.entries.iter().map(|e| e.value).collect();
                values.sort_unstable();
                values.dedup();
                assert_eq!(values.len(), w.entries.len());
                for (i, e) in w.entries.iter().enumerate() {
                    assert_eq!(e.index, i as i64 - 40);
                    assert_eq!(e.value <= 0, e.index <= 0 && !w.b_nonpositive.contains(&e.index) || w.a_positive.contains(&e.index));
                    assert_eq!(e.complete, (-40..=40).contains(&e.value));
                }
            }
        }
    }

    #[test]
    fn tiny_q_window_is_identity() {
        let mut rng = seed_stream(14, 0);
        let w = two_sided_window_sample(1e-6, 10, &mut rng).unwrap();
        assert_eq!(w.chi0, 0);
        assert!(w.entries.iter().all(|e| e.value == e.index && e.complete));
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,value,complete\n-10,-10,true\n"));
        assert!(two_sided_window_sample(0.5, 0, &mut rng).is_err());
        assert!(two_sided_window_sample(1.0, 3, &mut rng).is_err());
    }
}
