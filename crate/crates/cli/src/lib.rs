//! Argument parsing and dispatch for the `homsim` binary.

use std::ffi::OsString;
use std::fmt;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homsim_core::config::{Model, OutputFormat, RunConfig, DEFAULT_SEED, DEFAULT_RATIOS};
use homsim_core::experiments::{self, ExperimentReport};
use homsim_core::fock::DEFAULT_GRID_POINTS;
use homsim_core::HomError;

pub const OUTPUT_ENV: &str = "HOMSIM_OUTPUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "homsim",
    version,
    about = "Hong-Ou-Mandel coincidence simulator: wave-coherence pair model and two-photon Fock oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One coincidence curve for the selected model.
    Scan(CommonArgs),
    /// Shifted-model curves for a family of bandwidth ratios.
    SweepBandwidth(CommonArgs),
    /// Unshifted (cos²) against shifted (sin²) coincidence.
    Contrast(CommonArgs),
    /// Coincidence fringe from a nonzero mean detuning [default --mean-offset 3].
    Fringe(CommonArgs),
    /// Fock oracle: product against path-entangled input [default --tau-max 10].
    Witness(CommonArgs),
    /// Fock curve against the coherence closed form [default --tau-steps 33].
    Compare(CommonArgs),
    /// Mean port intensities over an antithetic ensemble.
    BornRule(CommonArgs),
    /// Per-detuning coincidence table before ensemble averaging.
    DetuningMap(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Coherence,
    CoherenceUnshifted,
    Fock,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Model for `scan`.
    #[arg(long, value_enum, default_value = "coherence")]
    model: ModelArg,
    /// Spectral standard deviation σ in rad/s (Fock: per-photon intensity width).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    /// Mean detuning μ in rad/s [default: 0, or 3σ for `fringe`].
    #[arg(long, allow_negative_numbers = true)]
    mean_offset: Option<f64>,
    /// Spectral filter ratio in (0, 1].
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    bandwidth_ratio: f64,
    /// Largest delay in s [default: 4/σ, or 10/σ for `witness`].
    #[arg(long, allow_negative_numbers = true)]
    tau_max: Option<f64>,
    /// Number of delays on [0, tau-max] [default: 65, or 33 for `compare`].
    #[arg(long)]
    tau_steps: Option<usize>,
    /// Ensemble size; must be even.
    #[arg(long, default_value_t = 100_000)]
    n_pairs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Use the closed form instead of Monte Carlo.
    #[arg(long)]
    analytic: bool,
    /// Bandwidth ratios for `sweep-bandwidth`.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RATIOS.to_vec(), allow_negative_numbers = true)]
    ratios: Vec<f64>,
    /// Signal/idler center offset from degeneracy, rad/s (Fock oracle).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    center_split: f64,
    /// Relative phase of the path-entangled input, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    psi_rel: f64,
    /// Pump envelope width for a frequency-anticorrelated Fock state
    /// [default: separable; σ/4 for `compare`].
    #[arg(long, allow_negative_numbers = true)]
    pump_sigma: Option<f64>,
    /// Frequency grid points per axis (Fock oracle).
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Detuning rows for `detuning-map`.
    #[arg(long, default_value_t = 65)]
    detuning_steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; standard output when absent.
    #[arg(long, short, env = OUTPUT_ENV)]
    output: Option<String>,
}

/// Which scenario an invocation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Scan,
    SweepBandwidth,
    Contrast,
    Fringe,
    Witness,
    Compare,
    BornRule,
    DetuningMap,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Scan => "scan",
            Task::SweepBandwidth => "sweep-bandwidth",
            Task::Contrast => "contrast",
            Task::Fringe => "fringe",
            Task::Witness => "witness",
            Task::Compare => "compare",
            Task::BornRule => "born-rule",
            Task::DetuningMap => "detuning-map",
        }
    }
}

/// A parsed and validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub task: Task,
    pub config: RunConfig,
    pub detuning_steps: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Syntax errors, unknown flags, `--help` and `--version`.
    Clap(clap::Error),
    /// One message per invalid value.
    Invalid(Vec<String>),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Invalid(lines) => {
                for l in lines {
                    writeln!(f, "error: {l}")?;
                }
                Ok(())
            }
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Invalid(_) => EXIT_USAGE,
        }
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (task, args) = match cli.command {
        Command::Scan(a) => (Task::Scan, a),
        Command::SweepBandwidth(a) => (Task::SweepBandwidth, a),
        Command::Contrast(a) => (Task::Contrast, a),
        Command::Fringe(a) => (Task::Fringe, a),
        Command::Witness(a) => (Task::Witness, a),
        Command::Compare(a) => (Task::Compare, a),
        Command::BornRule(a) => (Task::BornRule, a),
        Command::DetuningMap(a) => (Task::DetuningMap, a),
    };

    let sigma = args.sigma;
    let model = match task {
        Task::Scan => match args.model {
            ModelArg::Coherence => Model::Coherence,
            ModelArg::CoherenceUnshifted => Model::CoherenceUnshifted,
            ModelArg::Fock => Model::Fock,
        },
        Task::Witness | Task::Compare => Model::Fock,
        _ => Model::Coherence,
    };
    let mean_offset = args
        .mean_offset
        .unwrap_or(if task == Task::Fringe { 3.0 * sigma } else { 0.0 });
    let tau_max = args
        .tau_max
        .unwrap_or(if task == Task::Witness { 10.0 / sigma } else { 4.0 / sigma });
    let tau_steps = args
        .tau_steps
        .unwrap_or(if task == Task::Compare { 33 } else { 65 });
    let config = RunConfig {
        model,
        sigma,
        mean_offset,
        bandwidth_ratio: args.bandwidth_ratio,
        tau_max,
        tau_steps,
        n_pairs: args.n_pairs,
        seed: args.seed,
        analytic: args.analytic,
        ratios: args.ratios,
        center_split: args.center_split,
        psi_rel: args.psi_rel,
        pump_sigma: args.pump_sigma,
        grid_points: args.grid_points,
        output_format: match args.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
        output_path: args.output,
    };

    let mut problems = config.problems();
    if task == Task::DetuningMap && args.detuning_steps < 2 {
        problems.push(format!("detuning-steps must be >= 2, got {}", args.detuning_steps));
    }
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    Ok(Invocation {
        task,
        config,
        detuning_steps: args.detuning_steps,
    })
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    /// Report lines for failed checks; empty when all passed.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn render_report(report: &ExperimentReport, format: OutputFormat) -> Outcome {
    let body = match format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    let failures = report
        .failed_checks()
        .map(|c| {
            format!(
                "check failed: {} (measured {:e}, tolerance {:e})",
                c.name, c.measured, c.tolerance
            )
        })
        .collect();
    Outcome { body, failures }
}

pub fn execute(inv: &Invocation) -> Result<Outcome, HomError> {
    let cfg = &inv.config;
    let report = match inv.task {
        Task::Scan => experiments::run_scan(cfg)?,
        Task::SweepBandwidth => experiments::reproduce_fig1d(cfg)?,
        Task::Contrast => experiments::eq3_vs_eq4_contrast(cfg)?,
        Task::Fringe => experiments::fringe_extension(cfg)?,
        Task::Witness => experiments::witness(cfg)?,
        Task::Compare => experiments::model_equivalence(cfg)?,
        Task::BornRule => experiments::born_rule_check(cfg)?,
        Task::DetuningMap => {
            let map = experiments::detuning_map(cfg, inv.detuning_steps)?;
            let body = match cfg.output_format {
                OutputFormat::Csv => map.to_csv(),
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&map).expect("map serializes");
                    s.push('\n');
                    s
                }
            };
            return Ok(Outcome {
                body,
                failures: Vec::new(),
            });
        }
    };
    Ok(render_report(&report, cfg.output_format))
}

/// Exit code for a library error: bad parameters are usage errors, anything
/// else is a failed run.
pub fn error_exit_code(err: &HomError) -> i32 {
    match err {
        HomError::Config(_) | HomError::Argument(_) => EXIT_USAGE,
        _ => EXIT_CHECK_FAILED,
    }
}
