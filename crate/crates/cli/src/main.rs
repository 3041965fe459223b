use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use poisson_calculus::suite::{self, Report, RunConfig, SuiteName, DEFAULT_CONFIG};

/// Monte Carlo verification of the calculus, kernel and isoperimetric
/// results on Poisson configuration spaces.
#[derive(Debug, Parser)]
#[command(name = "poisson-verify", version)]
struct Cli {
    /// TOML run configuration; the bundled default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `mc.seed` (and the POISSON_VERIFY_SEED variable).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Where report.json and report.csv are written.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Confidence level of reported intervals.
    #[arg(long, global = true)]
    ci_level: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every suite listed in the configuration.
    All,
    Identities,
    Kernels,
    Boundaries,
    Coarea,
    MargulisRusso,
    Deviation,
    Profiles,
    Inequalities,
    Clark,
    /// Print every check id with its suite and the result it verifies.
    ListChecks,
}

impl Command {
    fn suite(&self) -> Option<SuiteName> {
        Some(match self {
            Command::Identities => SuiteName::Identities,
            Command::Kernels => SuiteName::Kernels,
            Command::Boundaries => SuiteName::Boundaries,
            Command::Coarea => SuiteName::Coarea,
            Command::MargulisRusso => SuiteName::MargulisRusso,
            Command::Deviation => SuiteName::Deviation,
            Command::Profiles => SuiteName::Profiles,
            Command::Inequalities => SuiteName::Inequalities,
            Command::Clark => SuiteName::Clark,
            Command::All | Command::ListChecks => return None,
        })
    }
}

fn load(cli: &Cli) -> Result<(RunConfig, String)> {
    let (mut cfg, text) = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => (RunConfig::parse(DEFAULT_CONFIG)?, DEFAULT_CONFIG.to_string()),
    };
    cfg.apply_env()?;
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
    }
    if let Some(c) = cli.ci_level {
        cfg.mc.ci_level = c;
    }
    cfg.validate()?;
    Ok((cfg, text))
}

fn print_summary(report: &Report) {
    for r in &report.rows {
        println!(
            "{:<28} {:<14} left={:<14.6} right={:<14.6} diff={:<12.3e} se={:<10.3e} {}",
            r.check_id,
            r.suite,
            r.left.mean,
            r.right.mean,
            r.difference.mean,
            r.difference.stderr,
            serde_verdict(r)
        );
    }
    println!(
        "{} checks, {} failed (seed {}, config sha256 {})",
        report.rows.len(),
        report.failures,
        report.seed,
        report.config_sha256
    );
}

fn serde_verdict(r: &suite::Row) -> String {
    format!("{:?}", r.verdict).to_lowercase()
}

fn run(cli: &Cli) -> Result<bool> {
    if let Command::ListChecks = cli.command {
        print!("{}", suite::list_checks());
        return Ok(true);
    }
    let (cfg, text) = load(cli)?;
    let only = cli.command.suite().map(|s| vec![s]);
    let report = suite::run(&cfg, &text, only.as_deref())?;
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let (json, csv) = report.write(&dir).context("writing reports")?;
    print_summary(&report);
    println!("wrote {} and {}", json.display(), csv.display());
    for r in report.failing_rows() {
        eprintln!("FAILED {}: {}", r.check_id, r.inputs);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
