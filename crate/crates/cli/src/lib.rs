//! `strata` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or validation errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use strata_core::io::{
    builtin_dataset_with, parse_micro_csv, parse_summary_csv, render_simulation, write_report,
    write_summary_csv, ReportFormat,
};
use strata_core::montecarlo::{gen_population, simulate, Family, PopulationSpec, SimulationConfig};
use strata_core::{
    opt_a, opt_lambdas, point_estimate_classical, point_estimate_tp, pre_table, EstimatorId,
    FConvention, StratifiedDesign,
};
use thiserror::Error;

/// Environment variable holding the simulation worker count.
pub const THREADS_ENV: &str = "STRATA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("`{path}`: {source}")]
    File {
        path: PathBuf,
        source: strata_core::Error,
    },
    #[error(transparent)]
    Data(#[from] strata_core::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "strata",
    version,
    about = "Stratified-sampling mean estimators: analysis, estimation, simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First-order MSEs and percent relative efficiencies of every estimator.
    Analyze(AnalyzeArgs),
    /// Point estimate from sample microdata.
    Estimate(EstimateArgs),
    /// Monte-Carlo check of the first-order MSEs on a synthetic population.
    Simulate(SimulateArgs),
    /// Embedded datasets.
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Summary-statistics CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Name of an embedded dataset.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long = "f-convention", default_value = "computed")]
    f_convention: FConvention,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Sample microdata CSV (`stratum_id,y,x`).
    #[arg(long)]
    micro: PathBuf,
    /// Summary CSV supplying the population means of x.
    #[arg(long)]
    summary: PathBuf,
    #[arg(long)]
    estimator: EstimatorId,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
    /// `opt` or a constant used for every stratum.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "lognormal")]
    dist: Family,
    /// Multiply every N_h by this factor before generating the population.
    #[arg(long = "pop-scale")]
    pop_scale: Option<u64>,
    /// Comma-separated estimator ids.
    #[arg(long)]
    estimators: Option<String>,
}

#[derive(Debug, Subcommand)]
enum DatasetAction {
    /// Write an embedded dataset as summary CSV.
    Export {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_summary(path: &Path) -> Result<StratifiedDesign, CliError> {
    let design = parse_summary_csv(&read(path)?).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(design.with_name(name))
}

fn load_design(source: &Source, convention: FConvention) -> Result<StratifiedDesign, CliError> {
    match (&source.summary, &source.dataset) {
        (Some(path), _) => {
            let design = load_summary(path)?;
            Ok(match convention {
                FConvention::Computed => design.without_fpc_overrides(),
                FConvention::Tabulated => design,
            })
        }
        (None, Some(name)) => Ok(builtin_dataset_with(name, convention)?),
        (None, None) => Err(CliError::Usage(
            "one of --summary or --dataset is required".into(),
        )),
    }
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let design = load_design(&args.source, args.f_convention)?;
    let report = pre_table(&design);
    write!(out, "{}", write_report(&report, args.format)).expect("stdout");
    Ok(())
}

fn estimate(args: EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let design = load_summary(&args.summary)?;
    let sample = parse_micro_csv(&read(&args.micro)?)
        .map_err(|source| CliError::File {
            path: args.micro.clone(),
            source,
        })?
        .aligned_to(&design)?;
    let value = match args.estimator {
        EstimatorId::Tp => {
            let (l1, l2) = match (args.lambda1, args.lambda2) {
                (Some(l1), Some(l2)) => (l1, l2),
                (None, None) => opt_lambdas(&design)?,
                _ => {
                    return Err(CliError::Usage(
                        "--lambda1 and --lambda2 must be given together".into(),
                    ))
                }
            };
            point_estimate_tp(&sample, &design, l1, l2)?
        }
        EstimatorId::TR => {
            let a = match args.a.as_deref() {
                None | Some("opt") => opt_a(&design)?,
                Some(raw) => {
                    let value: f64 = raw.parse().map_err(|_| {
                        CliError::Usage(format!("--a expects `opt` or a number, got `{raw}`"))
                    })?;
                    vec![value; design.len()]
                }
            };
            point_estimate_classical(EstimatorId::TR, &sample, &design, Some(&a))?
        }
        other => point_estimate_classical(other, &sample, &design, None)?,
    };
    writeln!(out, "{} {}", args.estimator, value).expect("stdout");
    Ok(())
}

fn threads_from_env(threads: Option<&str>) -> Result<usize, CliError> {
    match threads {
        None => Ok(0),
        Some(raw) => raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got `{raw}`"
            ))
        }),
    }
}

fn simulate_cmd(
    args: SimulateArgs,
    threads: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let threads = threads_from_env(threads)?;
    let design = load_design(&args.source, FConvention::Computed)?;
    let estimators = match &args.estimators {
        Some(list) => EstimatorId::parse_list(list).map_err(|e| CliError::Usage(e.to_string()))?,
        None => EstimatorId::ALL.to_vec(),
    };
    if estimators.is_empty() {
        return Err(CliError::Usage("--estimators is empty".into()));
    }
    let scale = args.pop_scale.unwrap_or(1);
    if scale == 0 {
        return Err(CliError::Usage("--pop-scale must be at least 1".into()));
    }
    let spec = PopulationSpec::from_design(&design, args.dist, args.seed, scale);
    let pop = gen_population(&spec)?;
    let config = SimulationConfig::new(args.reps, args.seed).with_threads(threads);
    let report = simulate(&pop, &design.sample_sizes(), &estimators, config)?;
    let family = match args.dist {
        Family::Gaussian => "gaussian",
        Family::Lognormal => "lognormal",
    };
    writeln!(
        out,
        "synthetic-population validation: {} ({family}, N_h x{scale})",
        design.name().unwrap_or("custom")
    )
    .expect("stdout");
    write!(out, "{}", render_simulation(&report)).expect("stdout");
    Ok(())
}

fn dataset(action: DatasetAction) -> Result<(), CliError> {
    match action {
        DatasetAction::Export { name, out } => {
            let design = builtin_dataset_with(&name, FConvention::Computed)?;
            std::fs::write(&out, write_summary_csv(&design))
                .map_err(|source| CliError::Write { path: out, source })
        }
    }
}

/// Runs one invocation. `threads` is the raw value of [`THREADS_ENV`], if set.
pub fn run_cli<I, T>(
    argv: I,
    threads: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{e}").expect("stdout");
                    EXIT_OK
                }
                _ => {
                    write!(err, "{e}").expect("stderr");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => analyze(args, out),
        Command::Estimate(args) => estimate(args, out),
        Command::Simulate(args) => simulate_cmd(args, threads, out),
        Command::Dataset { action } => dataset(action),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            writeln!(err, "error: {e}").expect("stderr");
            e.exit_code()
        }
    }
}
