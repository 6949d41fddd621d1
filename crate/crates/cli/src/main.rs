use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use phscale_core::geometry::{distance_matrix, generate_circle, generate_hypercube, generate_random_cloud};
use phscale_core::harness::{
    diagrams_for, run_audit, run_montecarlo, run_scenario, CloudSpec, MonteCarloConfig, Scenario, SuiteSpec,
};
use phscale_core::report::{emit_report, to_json, DiagramSet, ReportFormat};
use phscale_core::rips::default_eps_cap;
use phscale_core::{Error, PointCloud};

#[derive(Parser)]
#[command(name = "phscale", version, about = "Persistence diagrams under anisotropic scaling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed for every random choice
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of homology dimensions to compute (1..=3)
    #[arg(long, global = true)]
    max_dim: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CloudKind {
    Circle,
    Hypercube,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic point cloud (json or csv)
    Generate {
        #[arg(long, value_enum)]
        kind: CloudKind,
        /// Samples on the circle
        #[arg(long, default_value_t = 24)]
        m: usize,
        /// Hypercube dimension
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Random cloud size
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Random cloud ambient dimension
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the persistence diagrams of a point-cloud file
    Persist {
        input: PathBuf,
        /// Largest filtration value; defaults to just above the diameter
        #[arg(long)]
        eps_cap: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run one scenario file: diagrams, distances, bounds and verdicts
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a suite of scenarios; the built-in case studies when no file is given
    Audit {
        suite: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the expected bottleneck distance under Uniform(a, b) factors
    Montecarlo {
        /// Point-cloud file; a seeded random cloud when omitted
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure of a sup-norm stability check, which can only be a bug.
#[derive(Debug)]
struct InvariantViolation(String);

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate {
            kind,
            m,
            n,
            count,
            dim,
            common,
        } => {
            let cloud = match kind {
                CloudKind::Circle => generate_circle(m)?,
                CloudKind::Hypercube => generate_hypercube(n)?,
                CloudKind::Random => generate_random_cloud(count, dim, common.seed.unwrap_or(0))?,
            };
            let text = match common.format {
                Format::Json => to_json(&cloud)?,
                Format::Csv => cloud.to_csv(),
                Format::Markdown => bail!("generate writes json or csv"),
            };
            write_text(&text, common.out.as_deref())
        }
        Command::Persist { input, eps_cap, common } => {
            let cloud = PointCloud::load(&input)?;
            let d = distance_matrix(&cloud);
            let max_dim = common.max_dim.unwrap_or(2);
            let diagrams = diagrams_for(&d, max_dim, eps_cap.unwrap_or_else(|| default_eps_cap(&d)))?;
            emit_report(&DiagramSet(diagrams), common.format.into(), common.out.as_deref())?;
            Ok(())
        }
        Command::Compare { scenario, common } => {
            let mut sc: Scenario = read_json(&scenario)?;
            if let Some(seed) = common.seed {
                sc.seed = seed;
            }
            if let Some(max_dim) = common.max_dim {
                sc.max_dim = max_dim;
            }
            let result = run_scenario(&sc)?;
            emit_report(&result, common.format.into(), common.out.as_deref())?;
            if result.classical_violated() {
                return Err(InvariantViolation(format!(
                    "d_B {} exceeds the sup-norm perturbation {}",
                    result.classical.max_bottleneck, result.classical.bound
                ))
                .into());
            }
            Ok(())
        }
        Command::Audit { suite, common } => {
            let mut suite = match suite {
                Some(path) => read_json::<SuiteSpec>(&path)?,
                None => SuiteSpec::case_studies(common.seed.unwrap_or(0)),
            };
            if let Some(seed) = common.seed {
                suite.seed = seed;
            }
            if let Some(max_dim) = common.max_dim {
                suite.scenarios.iter_mut().for_each(|s| s.max_dim = max_dim);
                if let Some(r) = suite.random.as_mut() {
                    r.max_dim = max_dim;
                }
            }
            let report = run_audit(&suite)?;
            emit_report(&report, common.format.into(), common.out.as_deref())?;
            if !report.classical_violations.is_empty() {
                return Err(InvariantViolation(format!(
                    "sup-norm stability failed in {}",
                    report.classical_violations.join(", ")
                ))
                .into());
            }
            Ok(())
        }
        Command::Montecarlo {
            input,
            points,
            dim,
            a,
            b,
            trials,
            common,
        } => {
            let config = MonteCarloConfig {
                cloud: match input {
                    Some(path) => CloudSpec::File { path },
                    None => CloudSpec::Random { count: points, dim },
                },
                a,
                b,
                trials,
                seed: common.seed.unwrap_or(0),
                max_dim: common.max_dim.unwrap_or(2),
            };
            let report = run_montecarlo(&config)?;
            emit_report(&report, common.format.into(), common.out.as_deref())?;
            if report.classical_violations > 0 {
                return Err(InvariantViolation(format!(
                    "sup-norm stability failed in {} trials",
                    report.classical_violations
                ))
                .into());
            }
            Ok(())
        }
    }
}

fn write_text(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err.downcast_ref::<InvariantViolation>().is_some()
        || matches!(err.downcast_ref::<Error>(), Some(Error::Invariant(_)));
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
