use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use mallows_core::experiment::{self, EstimateReport, ExperimentConfig, ExperimentId, ExperimentOutput};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Monte Carlo experiments on Mallows permutations.
#[derive(Debug, Parser)]
#[command(name = "mallows", version)]
struct Cli {
    #[arg(long, value_parser = parse_experiment)]
    experiment: ExperimentId,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: f64,
    /// Index of interest (split level for stitch-check).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    replicates: u64,
    #[arg(long, env = "MALLOWS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Half-width of the two-sided window (stitch-check only).
    #[arg(long, allow_negative_numbers = true)]
    window: Option<i64>,
    /// Directory for the report and data tables; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exit with status 4 when the experiment's pass/fail check fails.
    #[arg(long)]
    acceptance: bool,
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = ExperimentId::ALL.iter().map(|id| id.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

impl Cli {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: self.experiment,
            n: self.n,
            q: self.q,
            s: self.s,
            replicates: self.replicates,
            horizon: self.horizon,
            window: self.window,
            seed: self.seed,
            workers: self
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

fn report_csv(report: &EstimateReport) -> String {
    let c = &report.config;
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut rows: Vec<(String, String)> = vec![
        ("experiment".into(), report.experiment.to_string()),
        ("estimate".into(), report.estimate.to_string()),
        ("std_error".into(), report.std_error.to_string()),
        ("replicates".into(), report.replicates.to_string()),
        ("censored_fraction".into(), opt(report.censored_fraction.map(|x| x.to_string()))),
        ("seed".into(), report.seed.to_string()),
        ("n".into(), c.n.to_string()),
        ("q".into(), c.q.to_string()),
        ("s".into(), opt(c.s.map(|x| x.to_string()))),
        ("horizon".into(), opt(c.horizon.map(|x| x.to_string()))),
        ("window".into(), opt(c.window.map(|x| x.to_string()))),
        ("workers".into(), c.workers.to_string()),
    ];
    rows.extend(report.extras.iter().map(|(k, v)| (k.clone(), v.to_string())));
    if let Some(check) = &report.check {
        rows.push(("check".into(), check.criterion.clone()));
        rows.push(("check_passed".into(), check.passed.to_string()));
    }
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let v = if v.contains(',') { format!("\"{v}\"") } else { v };
        writeln!(out, "{k},{v}").unwrap();
    }
    out
}

fn render(report: &EstimateReport, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Csv => report_csv(report),
    })
}

fn write_outputs(dir: &Path, output: &ExperimentOutput, format: Format) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = match format {
        Format::Json => "report.json",
        Format::Csv => "report.csv",
    };
    let path = dir.join(name);
    fs::write(&path, render(&output.report, format)?).with_context(|| format!("writing {}", path.display()))?;
    for table in &output.tables {
        let path = dir.join(&table.name);
        fs::write(&path, &table.csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match experiment::run(&cli.config()) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let written = match &cli.out {
        Some(dir) => write_outputs(dir, &output, cli.format),
        None => render(&output.report, cli.format).map(|text| print!("{text}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_IO);
    }
    if let Some(check) = &output.report.check {
        eprintln!("{}: {}", if check.passed { "PASS" } else { "FAIL" }, check.criterion);
        if cli.acceptance && !check.passed {
            return ExitCode::from(EXIT_ACCEPTANCE);
        }
    }
    ExitCode::SUCCESS
}
