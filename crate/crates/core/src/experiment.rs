//! Monte Carlo experiments: configuration, deterministic parallel
//! replicates, summary reports and plot-ready CSV tables.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arc::{self, ArcChain, HittingTime};
use crate::error::{invalid, out_of_range, Error, Result};
use crate::mallows::{self, MallowsParams};
use crate::oracle::{self, lex_rank};
use crate::pd;
use crate::qmath;
use crate::replicate::{fold_replicates, with_workers};
use crate::stats::{quantile_from_counts, Moments};
use crate::stitch::{self, TwoSidedSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Sample,
    CycleLength,
    CycleVar,
    CycleDiameter,
    NumCycles,
    ArcChain,
    HittingTime,
    PdTest,
    StitchCheck,
    OracleCheck,
    Displacement,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::Sample,
        ExperimentId::CycleLength,
        ExperimentId::CycleVar,
        ExperimentId::CycleDiameter,
        ExperimentId::NumCycles,
        ExperimentId::ArcChain,
        ExperimentId::HittingTime,
        ExperimentId::PdTest,
        ExperimentId::StitchCheck,
        ExperimentId::OracleCheck,
        ExperimentId::Displacement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Sample => "sample",
            ExperimentId::CycleLength => "cycle-length",
            ExperimentId::CycleVar => "cycle-var",
            ExperimentId::CycleDiameter => "cycle-diameter",
            ExperimentId::NumCycles => "num-cycles",
            ExperimentId::ArcChain => "arc-chain",
            ExperimentId::HittingTime => "hitting-time",
            ExperimentId::PdTest => "pd-test",
            ExperimentId::StitchCheck => "stitch-check",
            ExperimentId::OracleCheck => "oracle-check",
            ExperimentId::Displacement => "displacement",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub n: usize,
    pub q: f64,
    /// Index of interest; experiment-specific default when absent
    /// (uniform for cycle-length, `⌈n/2⌉` elsewhere).
    pub s: Option<usize>,
    pub replicates: u64,
    pub horizon: Option<usize>,
    pub window: Option<i64>,
    pub seed: u64,
    pub workers: usize,
}

/// TV threshold for the sampler checks.
pub const TV_THRESHOLD: f64 = 0.005;

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, n: usize, q: f64) -> Self {
        ExperimentConfig {
            experiment,
            n,
            q,
            s: None,
            replicates: 10_000,
            horizon: None,
            window: None,
            seed: 0,
            workers: 1,
        }
    }

    pub fn params(&self) -> Result<MallowsParams> {
        MallowsParams::new(self.n, self.q)
    }

    fn middle(&self) -> usize {
        self.n.div_ceil(2).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentId::*;
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        self.params()?;
        let n = self.n;
        let in_range = |lo: usize, hi: usize| -> Result<()> {
            match self.s {
                Some(s) if s < lo || s > hi => Err(out_of_range("s", s as i64, format!("{lo}..={hi}"))),
                _ => Ok(()),
            }
        };
        match self.experiment {
            CycleLength | CycleVar | CycleDiameter | Displacement => in_range(1, n)?,
            StitchCheck => in_range(0, n)?,
            HittingTime => {
                let h = self.horizon.unwrap_or(n);
                if h > n {
                    return Err(out_of_range("horizon", h as i64, format!("0..={n}")));
                }
                in_range(0, h)?;
            }
            _ => {}
        }
        if self.window.is_some() && self.experiment != StitchCheck {
            return Err(invalid("window", format!("not used by {}", self.experiment)));
        }
        match (self.experiment, self.window) {
            (StitchCheck, Some(w)) => {
                if w < 1 {
                    return Err(out_of_range("window", w, "1..".to_string()));
                }
                if !(self.q > 0.0 && self.q < 1.0) {
                    return Err(invalid("q", "the two-sided window needs 0 < q < 1"));
                }
            }
            (StitchCheck, None) | (OracleCheck, _) if n > oracle::MAX_N => {
                return Err(Error::TooLarge {
                    n,
                    cap: oracle::MAX_N,
                })
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub experiment: ExperimentId,
    pub estimate: f64,
    pub std_error: f64,
    pub replicates: u64,
    pub censored_fraction: Option<f64>,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub extras: BTreeMap<String, f64>,
    pub check: Option<Check>,
}

/// A CSV file produced by an experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataTable {
    pub name: String,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub report: EstimateReport,
    pub tables: Vec<DataTable>,
}

struct Builder<'a> {
    config: &'a ExperimentConfig,
    estimate: f64,
    std_error: f64,
    censored_fraction: Option<f64>,
    extras: BTreeMap<String, f64>,
    check: Option<Check>,
    tables: Vec<DataTable>,
}

impl<'a> Builder<'a> {
    fn new(config: &'a ExperimentConfig, estimate: f64, std_error: f64) -> Self {
        Builder {
            config,
            estimate,
            std_error,
            censored_fraction: None,
            extras: BTreeMap::new(),
            check: None,
            tables: Vec::new(),
        }
    }

    fn from_moments(config: &'a ExperimentConfig, m: &Moments) -> Self {
        Builder::new(config, m.mean, m.std_error())
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    fn table(mut self, name: &str, csv: String) -> Self {
        self.tables.push(DataTable {
            name: name.to_string(),
            csv,
        });
        self
    }

    fn check(mut self, criterion: String, passed: bool) -> Self {
        self.check = Some(Check { criterion, passed });
        self
    }

    fn finish(self) -> ExperimentOutput {
        ExperimentOutput {
            report: EstimateReport {
                experiment: self.config.experiment,
                estimate: self.estimate,
                std_error: self.std_error.max(0.0),
                replicates: self.config.replicates,
                censored_fraction: self.censored_fraction,
                config: self.config.clone(),
                seed: self.config.seed,
                extras: self.extras,
                check: self.check,
            },
            tables: self.tables,
        }
    }
}

/// Validates `config` and runs it on a pool of `config.workers` threads.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    with_workers(config.workers, || dispatch(config))?
}

fn dispatch(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    use ExperimentId::*;
    match c.experiment {
        Sample => run_sample(c),
        CycleLength => run_cycle_length(c),
        CycleVar => run_cycle_var(c),
        CycleDiameter => run_cycle_diameter(c),
        NumCycles => run_num_cycles(c),
        ArcChain => run_arc_chain(c),
        HittingTime => run_hitting_time(c),
        PdTest => run_pd_test(c),
        StitchCheck => match c.window {
            Some(w) => run_window(c, w),
            None => run_stitch_check(c),
        },
        OracleCheck => run_oracle_check(c),
        Displacement => run_displacement(c),
    }
}

/// Exact `E[inv]` under `μ_{n,q}`: a sum of truncated-geometric means.
pub fn expected_inversions(n: usize, q: f64) -> f64 {
    if q > 1.0 {
        return (n * (n - 1)) as f64 / 2.0 - expected_inversions(n, 1.0 / q);
    }
    (1..=n as u64)
        .map(|j| {
            if 1.0 - q > 1e-4 {
                q / (1.0 - q) - j as f64 * qmath::pow(q, j) / qmath::one_minus_pow(q, j)
            } else {
                let (mut num, mut den) = (0.0, 0.0);
                for k in 0..j {
                    let w = qmath::pow(q, k);
                    num += k as f64 * w;
                    den += w;
                }
                num / den
            }
        })
        .sum()
}

fn run_sample(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    const KEPT: u64 = 1000;
    let (moments, kept) = fold_replicates(
        c.seed,
        c.replicates,
        || (Moments::new(), Vec::new()),
        |acc, i, rng| {
            let p = mallows::sample(&params, rng);
            acc.0.push(p.inversions() as f64);
            if i < KEPT {
                acc.1.push((i, p));
            }
        },
        |a, b| {
            a.0.merge(&b.0);
            a.1.extend(b.1);
        },
    );
    let mut samples = String::from("replicate,permutation\n");
    for (i, p) in &kept {
        writeln!(samples, "{i},{p}").unwrap();
    }
    let mut points = String::from("x,y\n");
    for (x, y) in kept[0].1.one_line().iter().enumerate() {
        writeln!(points, "{},{}", x + 1, y).unwrap();
    }
    Ok(Builder::from_moments(c, &moments)
        .extra("expected_inversions", expected_inversions(c.n, c.q))
        .table("samples.csv", samples)
        .table("points.csv", points)
        .finish())
}

/// Counts of `|C_s|` over `1..=n`; `s` fixed or uniform per replicate.
pub fn cycle_length_histogram(params: &MallowsParams, s: Option<usize>, replicates: u64, seed: u64) -> Vec<u64> {
    let n = params.n();
    fold_replicates(
        seed,
        replicates,
        || vec![0u64; n + 1],
        |acc, _, rng| {
            let p = mallows::sample(params, rng);
            let s = s.unwrap_or_else(|| rng.gen_range(1..=n));
            acc[crate::exposure::cycle_stats(&p, s).expect("s in range").length] += 1;
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )
}

fn run_cycle_length(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let hist = cycle_length_histogram(&params, c.s, c.replicates, c.seed);
    let mut csv = String::from("length,count,frequency\n");
    let total = c.replicates as f64;
    for (len, &count) in hist.iter().enumerate().skip(1) {
        writeln!(csv, "{len},{count},{}", count as f64 / total).unwrap();
    }
    // mean and variance straight from the histogram
    let mean = hist.iter().enumerate().map(|(l, &k)| l as f64 * k as f64).sum::<f64>() / total;
    let var = hist
        .iter()
        .enumerate()
        .map(|(l, &k)| (l as f64 - mean).powi(2) * k as f64)
        .sum::<f64>()
        / (total - 1.0).max(1.0);
    Ok(Builder::new(c, mean, (var / total).sqrt())
        .extra("mean_over_n", mean / c.n as f64)
        .extra("variance", var)
        .table("cycle_length_histogram.csv", csv)
        .finish())
}

fn collect<F>(c: &ExperimentConfig, f: F) -> Vec<f64>
where
    F: Fn(&mut crate::rng::RandomStream) -> f64 + Sync,
{
    crate::replicate::map_replicates(c.seed, c.replicates, |_, rng| f(rng))
}

fn run_cycle_var(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let s = c.s.unwrap_or(c.middle());
    let xs = collect(c, |rng| {
        let p = mallows::sample(&params, rng);
        crate::exposure::cycle_stats(&p, s).expect("s in range").length as f64
    });
    let m: Moments = xs.iter().copied().collect();
    let var = m.variance();
    let m4 = xs.iter().map(|x| (x - m.mean).powi(4)).sum::<f64>() / xs.len() as f64;
    let se = ((m4 - var * var).max(0.0) / xs.len() as f64).sqrt();
    Ok(Builder::new(c, var, se)
        .extra("mean", m.mean)
        .extra("s", s as f64)
        .finish())
}

fn run_cycle_diameter(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let s = c.s.unwrap_or(c.middle());
    let (up, down, diam) = fold_replicates(
        c.seed,
        c.replicates,
        || (Moments::new(), Moments::new(), Moments::new()),
        |acc, _, rng| {
            let st = crate::exposure::cycle_stats(&mallows::sample(&params, rng), s).expect("s in range");
            acc.0.push((st.max - s) as f64);
            acc.1.push((s - st.min) as f64);
            acc.2.push(st.diameter as f64);
        },
        |a, b| {
            a.0.merge(&b.0);
            a.1.merge(&b.1);
            a.2.merge(&b.2);
        },
    );
    Ok(Builder::from_moments(c, &up)
        .extra("mean_s_minus_min", down.mean)
        .extra("mean_diameter", diam.mean)
        .extra("cap", (c.n - s) as f64)
        .extra("s", s as f64)
        .finish())
}

/// `Σ_s (1−q)/(1−q^{n−s+1})`, the upper bound on `E[#cycles]`.
pub fn num_cycles_upper_bound(n: usize, q: f64) -> f64 {
    (1..=n as u64).map(|m| qmath::ratio(q, 1, m)).sum()
}

fn run_num_cycles(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let m = fold_replicates(
        c.seed,
        c.replicates,
        Moments::new,
        |acc, _, rng| acc.push(mallows::sample(&params, rng).cycle_decomposition().num_cycles() as f64),
        |a, b| a.merge(&b),
    );
    let n = c.n as f64;
    let reference = (1.0 - c.q).abs() * n + (n + 1.0).ln();
    Ok(Builder::from_moments(c, &m)
        .extra("reference", reference)
        .extra("upper_bound", num_cycles_upper_bound(c.n, c.q))
        .finish())
}

/// Per-time histograms of `κ_t` over sampled permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaHistograms {
    pub counts: Vec<Vec<u64>>,
    pub replicates: u64,
}

impl KappaHistograms {
    pub fn quantile(&self, t: usize, p: f64) -> usize {
        quantile_from_counts(&self.counts[t], p)
    }

    pub fn mean(&self, t: usize) -> f64 {
        self.counts[t]
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / self.replicates as f64
    }

    /// Number of samples with `κ_t > level`.
    pub fn exceed(&self, t: usize, level: usize) -> u64 {
        self.counts[t].iter().skip(level + 1).sum()
    }

    pub fn percentile_csv(&self) -> String {
        let mut csv = String::from("t,p01,p50,p99,mean\n");
        for t in 0..self.counts.len() {
            writeln!(
                csv,
                "{t},{},{},{},{}",
                self.quantile(t, 0.01),
                self.quantile(t, 0.5),
                self.quantile(t, 0.99),
                self.mean(t)
            )
            .unwrap();
        }
        csv
    }
}

pub fn kappa_histograms(params: &MallowsParams, replicates: u64, seed: u64) -> KappaHistograms {
    let n = params.n();
    let counts = fold_replicates(
        seed,
        replicates,
        || vec![Vec::<u64>::new(); n + 1],
        |acc, _, rng| {
            let kappa = arc::arc_chain_of(&mallows::sample(params, rng)).values;
            for (h, &k) in acc.iter_mut().zip(&kappa) {
                let k = k as usize;
                if h.len() <= k {
                    h.resize(k + 1, 0);
                }
                h[k] += 1;
            }
        },
        |a, b| {
            for (h, g) in a.iter_mut().zip(b) {
                if h.len() < g.len() {
                    h.resize(g.len(), 0);
                }
                h.iter_mut().zip(g).for_each(|(x, y)| *x += y);
            }
        },
    );
    KappaHistograms { counts, replicates }
}

fn run_arc_chain(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let hist = kappa_histograms(&params, c.replicates, c.seed);
    let mid = c.n / 2;
    let mut b = Builder::new(
        c,
        hist.mean(mid),
        (hist.counts[mid]
            .iter()
            .enumerate()
            .map(|(k, &n)| (k as f64 - hist.mean(mid)).powi(2) * n as f64)
            .sum::<f64>()
            / c.replicates as f64
            / c.replicates as f64)
            .sqrt(),
    );
    if c.q < 1.0 {
        let xi = arc::xi(c.q)? as usize;
        let (lo, hi) = (c.n / 10, c.n - c.n / 10);
        let bracketed = (lo..=hi)
            .filter(|&t| hist.quantile(t, 0.01) <= xi && xi <= hist.quantile(t, 0.99))
            .count();
        b = b
            .extra("xi", xi as f64)
            .extra("bracket_fraction", bracketed as f64 / (hi - lo + 1) as f64);
        for d in [2u32, 3] {
            let worst = (0..=c.n)
                .map(|t| hist.exceed(t, xi + d as usize) as f64 / c.replicates as f64)
                .fold(0.0, f64::max);
            b = b
                .extra(&format!("max_tail_d{d}"), worst)
                .extra(&format!("tail_bound_d{d}"), arc::tail_bound(c.q, d));
        }
    }
    Ok(b.table("arc_chain_percentiles.csv", hist.percentile_csv()).finish())
}

fn run_hitting_time(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let chain = ArcChain::finite(c.n, c.q)?;
    let horizon = c.horizon.unwrap_or(c.n);
    let s = c.s.unwrap_or(c.middle().min(horizon));
    let (sq, gap, censored) = fold_replicates(
        c.seed,
        c.replicates,
        || (Moments::new(), Moments::new(), 0u64),
        |acc, _, rng| {
            let tr = chain.run(0, horizon, rng).expect("validated");
            match arc::hitting_time(&tr, s).expect("validated") {
                HittingTime::Hit(t) => {
                    acc.0.push(((t - s) as f64).powi(2));
                    acc.1.push((t - s) as f64);
                }
                HittingTime::Censored { .. } => acc.2 += 1,
            }
        },
        |a, b| {
            a.0.merge(&b.0);
            a.1.merge(&b.1);
            a.2 += b.2;
        },
    );
    let mut b = Builder::from_moments(c, &sq)
        .extra("mean_gap", gap.mean)
        .extra("s", s as f64);
    b.censored_fraction = Some(censored as f64 / c.replicates as f64);
    Ok(b.finish())
}

fn run_pd_test(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let r = pd::pd_comparison(&c.params()?, c.n, c.replicates, c.seed)?;
    Ok(Builder::new(c, r.ks_stat, f64::NAN)
        .extra("mean_largest_part", r.mean_largest_part)
        .extra("mean_largest_part_uniform", r.mean_largest_part_uniform)
        .extra("mean_pair_distance", r.mean_pair_distance)
        .extra("cycle_fraction_sup_distance", r.cycle_fraction_sup_distance)
        .table(
            "pd_report.json",
            serde_json::to_string_pretty(&r).expect("report serializes"),
        )
        .finish())
}

/// Empirical counts over `S_n` in lexicographic order.
pub fn permutation_counts<F>(n: usize, replicates: u64, seed: u64, draw: F) -> Vec<u64>
where
    F: Fn(&mut crate::rng::RandomStream) -> crate::perm::Permutation + Sync,
{
    let size: usize = (1..=n).product();
    fold_replicates(
        seed,
        replicates,
        || vec![0u64; size],
        |acc, _, rng| acc[lex_rank(&draw(rng))] += 1,
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )
}

fn counts_table(dist: &oracle::ExactDistribution, counts: &[u64]) -> String {
    let total: u64 = counts.iter().sum();
    let mut csv = String::from("permutation,count,empirical,exact\n");
    for ((p, w), &k) in dist.entries().iter().zip(counts) {
        writeln!(csv, "{p},{k},{},{w}", k as f64 / total as f64).unwrap();
    }
    csv
}

fn tv_output(c: &ExperimentConfig, counts: Vec<u64>, what: &str) -> Result<ExperimentOutput> {
    let dist = oracle::enumerate_distribution(c.n, c.q)?;
    let tv = dist.tv_to_counts(&counts)?;
    let mut oracle_csv = Vec::new();
    dist.write_table_csv(&mut oracle_csv).expect("writing to memory");
    Ok(Builder::new(c, tv, f64::NAN)
        .check(format!("{what} TV < {TV_THRESHOLD}"), tv < TV_THRESHOLD)
        .table("counts.csv", counts_table(&dist, &counts))
        .table(
            "oracle_table.csv",
            String::from_utf8(oracle_csv).expect("ascii table"),
        )
        .finish())
}

fn run_oracle_check(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let counts = permutation_counts(c.n, c.replicates, c.seed, |rng| mallows::sample(&params, rng));
    tv_output(c, counts, "sampler")
}

fn run_stitch_check(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let s = c.s.unwrap_or(c.n / 2);
    let counts = permutation_counts(c.n, c.replicates, c.seed, |rng| {
        stitch::stitch_sample(&params, s, rng).expect("validated")
    });
    let mut out = tv_output(c, counts, "stitch_sample")?;
    out.report.extras.insert("s".into(), s as f64);
    Ok(out)
}

fn run_window(c: &ExperimentConfig, window: i64) -> Result<ExperimentOutput> {
    let sampler = TwoSidedSampler::new(c.q, window, c.horizon.unwrap_or(stitch::DEFAULT_HORIZON))?;
    let (chi0, censored, complete, first) = fold_replicates(
        c.seed,
        c.replicates,
        || (Moments::new(), 0u64, Moments::new(), None),
        |acc, i, rng| {
            let w = sampler.sample(rng);
            acc.0.push(w.chi0 as f64);
            acc.1 += w.censored as u64;
            let k = w.entries.iter().filter(|e| e.complete).count();
            acc.2.push(k as f64 / w.entries.len() as f64);
            if i == 0 {
                acc.3 = Some(w);
            }
        },
        |a, b| {
            a.0.merge(&b.0);
            a.1 += b.1;
            a.2.merge(&b.2);
            if a.3.is_none() {
                a.3 = b.3;
            }
        },
    );
    let nu = sampler.stationary();
    let nu_mean: f64 = nu.probabilities.iter().enumerate().map(|(s, p)| s as f64 * p).sum();
    let mut csv = Vec::new();
    first.expect("at least one replicate").write_csv(&mut csv).expect("writing to memory");
    let mut b = Builder::from_moments(c, &chi0)
        .extra("stationary_mean", nu_mean)
        .extra("complete_fraction", complete.mean)
        .table("window.csv", String::from_utf8(csv).expect("ascii table"));
    b.censored_fraction = Some(censored as f64 / c.replicates as f64);
    Ok(b.finish())
}

fn run_displacement(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = c.params()?;
    let s = c.s.unwrap_or(c.middle());
    let m = fold_replicates(
        c.seed,
        c.replicates,
        Moments::new,
        |acc, _, rng| acc.push(mallows::sample(&params, rng).displacement(s).expect("s in range") as f64),
        |a, b| a.merge(&b),
    );
    let bound = mallows::displacement_upper_bound(c.n, c.q.min(1.0 / c.q));
    let passed = m.mean <= bound + 5.0 * m.std_error();
    Ok(Builder::from_moments(c, &m)
        .extra("upper_bound", bound)
        .extra("s", s as f64)
        .check("mean displacement within the upper bound".into(), passed)
        .finish())
}
