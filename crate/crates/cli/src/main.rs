//! Command-line front end: simulate homodyne datasets, fit them with
//! stopping rules, derive confidence intervals and region reports.
//!
//! Every command is deterministic given its config (seeds included);
//! results go to files as CSV/JSON, human summaries to stdout, and errors
//! to stderr with a machine-readable code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qtomo::confidence::{state_region_report, StoppingContext, StoppingKind};
use qtomo::constrained::expectation_ci;
use qtomo::homodyne::{mean_photon_number, sample_records, scenario_truth, Scenario};
use qtomo::io;
use qtomo::optimizer::{maximize, Algorithm, StopSpec};
use qtomo::{Dataset64, FitResult64};

#[derive(Parser)]
#[command(
    name = "qtomo",
    about = "Maximum-likelihood quantum-state tomography with certified stopping rules",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a homodyne experiment: write the dataset and truth state.
    Simulate(SimulateArgs),
    /// Maximize the likelihood of a dataset and export the iteration trace.
    Fit(FitArgs),
    /// Confidence interval for an observable's expectation value.
    Ci(CiArgs),
    /// State confidence-region report from a stored fit result.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for dataset.json and truth.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    /// Safeguarded fixed-point iteration.
    Rhor,
    /// Line-search gradient ascent.
    Gradient,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Rhor => Algorithm::Rhor,
            AlgoArg::Gradient => Algorithm::GradientAscent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ContextArg {
    /// Point estimate: stop at half the chi-squared quantile.
    Point,
    /// State confidence region: stop at a fraction of the chi-squared
    /// standard deviation.
    Region,
    /// Expectation-value interval: stop at a fraction of sqrt(2).
    Ci,
}

impl From<ContextArg> for StoppingKind {
    fn from(c: ContextArg) -> StoppingKind {
        match c {
            ContextArg::Point => StoppingKind::PointEstimate,
            ContextArg::Region => StoppingKind::StateRegion,
            ContextArg::Ci => StoppingKind::ExpectationCi,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Dataset JSON (generic POVM form or homodyne record form).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trace.csv and state.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "rhor")]
    algo: AlgoArg,
    /// Explicit stopping threshold on the gap bound; overrides --context.
    #[arg(long)]
    r_threshold: Option<f64>,
    /// Derives the stopping threshold from an inference context (needs --s).
    #[arg(long, value_enum)]
    context: Option<ContextArg>,
    /// Level of significance for --context.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Fit-result JSON of a longer reference run; adds the gap column
    /// reference − loglik to the trace CSV.
    #[arg(long)]
    reference_loglik: Option<PathBuf>,
}

#[derive(Args)]
struct CiArgs {
    /// Dataset JSON.
    #[arg(long)]
    config: PathBuf,
    /// Observable matrix JSON (Hermitian).
    #[arg(long)]
    observable: PathBuf,
    /// Level of significance of the interval.
    #[arg(long)]
    s: f64,
    /// Output directory for interval.json.
    #[arg(long)]
    out: PathBuf,
    /// Stopping threshold for both the unconstrained and constrained fits;
    /// defaults to the expectation-interval context rule.
    #[arg(long)]
    r_threshold: Option<f64>,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "rhor")]
    algo: AlgoArg,
}

#[derive(Args)]
struct ReportArgs {
    /// Fit-result JSON produced by `qtomo fit`.
    #[arg(long)]
    config: PathBuf,
    /// Level of significance of the region.
    #[arg(long)]
    s: f64,
    /// Optional output directory for region.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(qtomo::Error),
    Codec(io::IoError),
    File { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Codec(e) => e.code(),
            CliError::File { .. } => "io_error",
            CliError::Usage(_) => "usage_error",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Codec(e) => e.fmt(f),
            CliError::File { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<qtomo::Error> for CliError {
    fn from(e: qtomo::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Codec(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Codec(io::IoError::Json(e)))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })
}

fn load_dataset(path: &Path) -> CliResult<Dataset64> {
    Ok(io::dataset_from_value(&read_json(path)?)?)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut scenario: Scenario<f64> = io::scenario_from_value(&read_json(&args.config)?)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let truth = scenario_truth(&scenario)?;
    let records = sample_records(&scenario, &truth)?;
    ensure_dir(&args.out)?;
    let dataset_path = args.out.join("dataset.json");
    let truth_path = args.out.join("truth.json");
    write_text(
        &dataset_path,
        &serde_json::to_string(&io::homodyne_dataset_to_value(
            &records,
            scenario.efficiency,
            scenario.dim,
        ))
        .map_err(io::IoError::Json)?,
    )?;
    write_text(
        &truth_path,
        &serde_json::to_string(&io::matrix_to_value(truth.matrix())).map_err(io::IoError::Json)?,
    )?;
    println!(
        "simulated {} events at {} phases (dim {}, seed {})",
        scenario.n_samples,
        scenario.phases.len(),
        scenario.dim,
        scenario.seed
    );
    println!(
        "truth state: purity {:.6}, mean photon number {:.6}",
        truth.purity(),
        mean_photon_number(&truth)
    );
    println!("wrote {} and {}", dataset_path.display(), truth_path.display());
    Ok(())
}

fn resolve_threshold(
    r_threshold: Option<f64>,
    context: Option<ContextArg>,
    s: Option<f64>,
    dim: usize,
) -> CliResult<f64> {
    if let Some(r) = r_threshold {
        return Ok(r);
    }
    let Some(context) = context else {
        return Err(CliError::Usage(
            "provide --r-threshold, or --context together with --s".into(),
        ));
    };
    let Some(s) = s else {
        return Err(CliError::Usage("--context requires --s".into()));
    };
    let ctx = StoppingContext::new(context.into(), dim, s)?;
    Ok(ctx.r_threshold()?)
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let data = load_dataset(&args.config)?;
    let threshold = resolve_threshold(args.r_threshold, args.context, args.s, data.dim())?;
    let stop = StopSpec::new(threshold, args.max_iters)?;
    let reference = match &args.reference_loglik {
        Some(path) => Some(io::reference_loglik_from_value::<f64>(&read_json(path)?)?),
        None => None,
    };
    let fit: FitResult64 = maximize(&data, args.algo.into(), &stop, None)?;
    ensure_dir(&args.out)?;
    let trace_path = args.out.join("trace.csv");
    let state_path = args.out.join("state.json");
    write_text(&trace_path, &io::trace_to_csv(&fit.trace, reference))?;
    write_text(
        &state_path,
        &serde_json::to_string(&io::fit_to_value(&fit)).map_err(io::IoError::Json)?,
    )?;
    println!(
        "stop_reason: {} after {} iterations (threshold {:e})",
        fit.stop_reason.as_str(),
        fit.iterations(),
        threshold
    );
    println!("final r_k: {:e}", fit.final_r);
    println!("final loglik: {}", fit.final_loglik());
    if let Some(last_dist) = fit.trace.last().and_then(|r| r.trace_dist) {
        println!("trace distance at stop: {last_dist:e}");
    }
    if let Some(reference) = reference {
        println!("gap to reference at stop: {:e}", reference - fit.final_loglik());
    }
    println!("wrote {} and {}", trace_path.display(), state_path.display());
    Ok(())
}

fn cmd_ci(args: &CiArgs) -> CliResult<()> {
    let data = load_dataset(&args.config)?;
    let observable = io::hermitian_from_value::<f64>(&read_json(&args.observable)?)?;
    let threshold = resolve_threshold(args.r_threshold, Some(ContextArg::Ci), Some(args.s), data.dim())?;
    let stop = StopSpec::new(threshold, args.max_iters)?;
    let fit = maximize(&data, args.algo.into(), &stop, None)?;
    let ci = expectation_ci(&data, &observable, args.s, &fit, &stop)?;
    ensure_dir(&args.out)?;
    let interval_path = args.out.join("interval.json");
    write_text(
        &interval_path,
        &serde_json::to_string(&io::interval_to_value(&ci)).map_err(io::IoError::Json)?,
    )?;
    println!("interval for Tr(rho A): [{:.9}, {:.9}]", ci.f_lo, ci.f_hi);
    println!("s = {}, chi-squared(1) threshold t = {:.6}", ci.s, ci.t);
    println!(
        "{:>9} {:>14} {:>12} {:>10} {:>10} {:>11} {:>11}",
        "endpoint", "lambda", "f", "D_lb", "D_ub", "pvalue_lb", "pvalue_ub"
    );
    for (name, e) in ["lower", "upper"].iter().zip(&ci.endpoints) {
        println!(
            "{:>9} {:>14.6} {:>12.8} {:>10.6} {:>10.6} {:>11.6} {:>11.6}",
            name, e.lambda, e.f, e.d_lb, e.d_ub, e.pvalue_lb, e.pvalue_ub
        );
    }
    println!("wrote {}", interval_path.display());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> CliResult<()> {
    let (dim, final_r) = io::fit_summary_from_value(&read_json(&args.config)?)?;
    // Converged fits can carry harmless negative rounding dust.
    let r_k = final_r.max(0.0);
    let report = state_region_report(dim, args.s, r_k)?;
    println!("state confidence region at s = {} (dim {dim}, r_k {r_k:e})", args.s);
    println!("{:>22} {:>16} {:>18}", "threshold_t", "nominal_pvalue", "worst_case_pvalue");
    println!(
        "{:>22.6} {:>16.6} {:>18.6}",
        report.threshold_t, report.nominal_pvalue, report.worst_case_pvalue
    );
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        let path = out.join("region.json");
        write_text(
            &path,
            &serde_json::to_string(&io::region_report_to_value(&report)).map_err(io::IoError::Json)?,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run() -> CliResult<()> {
    match Cli::parse().command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Ci(args) => cmd_ci(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
