use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opstoch::hstoch::{MeasureFile, ProcessFile};
use opstoch::report::SuiteReport;
use opstoch::suites::{
    all_suites, bernoulli_suite, fock_ito_suite, hstoch_suite, mc_suite, refine_suite, HstochInputs,
    McConfig, McModel, RefineConfig, SuiteConfig, SuiteTolerances,
};

/// Exact and statistical verification of operator-valued stochastic integrals.
#[derive(Parser)]
#[command(name = "opstoch", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Monte Carlo checks of the Wiener and Poisson chaos isometries.
    Mc(McArgs),
    /// Grid-refinement table for the integral of Z against itself.
    Refine(RefineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Hstoch,
    FockIto,
    Bernoulli,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Brownian,
    Poisson,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time in the report (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=20))]
    cells: u64,
    /// Largest integrand degree in the Fock-space suites.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(0..=6))]
    degree: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Tolerance override NAME=VALUE; NAME is exact, bound, commute or norm-rel.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Projector measure and martingale vector (JSON) for the hstoch suite.
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Operator process (JSON) on the grid of --measure.
    #[arg(long, requires = "measure")]
    process: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    paths: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=4096))]
    cells: u64,
    #[arg(long, value_enum, default_value_t = Model::Brownian)]
    model: Model,
    /// Jump intensity of the Poisson model.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    lambda: f64,
    /// Also write the sampled increments as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RefineArgs {
    /// Cells on the coarsest level.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=1024))]
    cells: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..=12))]
    levels: u64,
    #[command(flatten)]
    common: Common,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
    SuiteTolerances::default()
        .set(name, value)
        .map_err(|e| e.to_string())?;
    Ok((name.to_string(), value))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<opstoch::Error> for Failure {
    fn from(e: opstoch::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let s = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn verify(a: &VerifyArgs) -> Result<SuiteReport, Failure> {
    let mut tol = SuiteTolerances::default();
    for (name, value) in &a.tol {
        tol.set(name, *value)?;
    }
    let cfg = SuiteConfig {
        cells: a.cells as usize,
        degree: a.degree as usize,
        trials: a.trials as usize,
        seed: a.common.seed,
        tol,
    };
    if a.measure.is_some() && !matches!(a.suite, Suite::Hstoch) {
        return Err(Failure::Usage("--measure and --process apply to the hstoch suite only".into()));
    }
    Ok(match a.suite {
        Suite::Hstoch => match &a.measure {
            Some(path) => {
                let mart = read_json::<MeasureFile>(path)?
                    .to_martingale::<f64>()
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let process = match &a.process {
                    Some(p) => Some(
                        read_json::<ProcessFile>(p)?
                            .to_process(mart.grid().clone())
                            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                    ),
                    None => None,
                };
                hstoch_suite(
                    &cfg,
                    Some(HstochInputs {
                        martingale: &mart,
                        process: process.as_ref(),
                    }),
                )?
            }
            None => hstoch_suite(&cfg, None)?,
        },
        Suite::FockIto => fock_ito_suite(&cfg)?,
        Suite::Bernoulli => bernoulli_suite(&cfg)?,
        Suite::All => all_suites(&cfg)?,
    })
}

fn mc(a: &McArgs) -> Result<SuiteReport, Failure> {
    let cfg = McConfig {
        paths: a.paths as usize,
        cells: a.cells as usize,
        seed: a.common.seed,
        model: match a.model {
            Model::Brownian => McModel::Brownian,
            Model::Poisson => McModel::Poisson,
        },
        lambda: a.lambda,
        ..McConfig::default()
    };
    let (report, ens) = mc_suite(&cfg)?;
    if let Some(path) = &a.csv {
        let f = fs::File::create(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
        ens.write_csv(io::BufWriter::new(f))?;
    }
    Ok(report)
}

fn refine(a: &RefineArgs) -> Result<SuiteReport, Failure> {
    Ok(refine_suite(&RefineConfig {
        cells: a.cells as usize,
        levels: a.levels as usize,
        seed: a.common.seed,
    })?)
}

fn emit(report: &SuiteReport, out: Option<&Path>) -> Result<(), Failure> {
    let json = report.to_json()?;
    match out {
        Some(path) => fs::write(path, json).map_err(|e| Failure::Run(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| Failure::Run(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let (common, report) = match &cli.cmd {
        Cmd::Verify(a) => (&a.common, verify(a)),
        Cmd::Mc(a) => (&a.common, mc(a)),
        Cmd::Refine(a) => (&a.common, refine(a)),
    };
    let mut report = report?;
    if common.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    emit(&report, common.out.as_deref())?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    eprintln!(
        "{}: {} checks, {} failed",
        report.suite,
        report.checks.len(),
        failed.len()
    );
    for name in &failed {
        eprintln!("  FAIL {name}");
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
