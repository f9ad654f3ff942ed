//! Command-line front end. Every command produces a [`Report`] of named
//! checks; the exit code is 0 when all checks pass, 1 when any fails and 2
//! for invalid input.

mod commands;
mod input;
pub mod report;

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::{Check, Report};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "coherent-split", version, about = "Coherent states, subsystem splitting and Bell checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; CSV is only available for uniqueness scan records.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for scans and optimizer starts.
    #[arg(long, global = true, env = "COHERENT_SPLIT_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Su2,
    Su11,
    Wh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateArg {
    /// Coherent state with amplitude --zeta (or --alpha).
    Cs,
    /// Weight-basis state selected by --m.
    Weight,
    /// Coefficients read from --state-file.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Haar,
    Cs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Scan,
    Minimize,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Commutation relations and Casimir across a label sweep.
    VerifyAlgebra(VerifyAlgebraArgs),
    /// Coherent state built by displacement, disentangled form and closed form.
    Coherent(CoherentArgs),
    /// Split a state and report Schmidt values, entropy and factors.
    Split(SplitArgs),
    /// Optimize the CHSH value of a split spin state.
    Bell(BellArgs),
    /// Randomized uniqueness scan and entropy minimization.
    Uniqueness(UniquenessArgs),
    /// Beamsplitter splitting of a Glauber state next to an SU(2) split.
    GlauberCompare(GlauberArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyAlgebraArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Su2)]
    pub kind: KindArg,
    /// Single spin label; overrides --j-max.
    #[arg(long)]
    pub j: Option<String>,
    /// Sweep j = 0, 1/2, ..., j-max.
    #[arg(long, default_value = "10")]
    pub j_max: String,
    /// Bargmann index for su11.
    #[arg(long, default_value = "1")]
    pub k: String,
    /// Truncation dimension for su11 and wh.
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Perturb one raising-operator entry (test fixture).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoherentArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Su2)]
    pub kind: KindArg,
    #[arg(long, default_value = "1")]
    pub j: String,
    #[arg(long, default_value = "1")]
    pub k: String,
    /// Truncation dimension (su11 default 128; wh default from the tail bound).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Coherent amplitude ζ (su2) or τ (su11), as RE,IM.
    #[arg(long, alias = "tau", value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    pub zeta: [f64; 2],
    /// Glauber amplitude α for wh, as RE,IM.
    #[arg(long, value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    pub alpha: [f64; 2],
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StateSelect {
    #[arg(long, value_enum, default_value_t = StateArg::Cs)]
    pub state: StateArg,
    /// Coherent amplitude ζ (su2) or τ (su11), as RE,IM.
    #[arg(long, alias = "tau", value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    pub zeta: [f64; 2],
    /// Glauber amplitude α for wh, as RE,IM.
    #[arg(long, value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    pub alpha: [f64; 2],
    /// Weight label: m for su2 (e.g. -1/2), level n for su11 and wh.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// One amplitude per line as "re im".
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Su2)]
    pub kind: KindArg,
    /// Subsystem labels JB/JC (or KB/KC), e.g. 1/1 or 1/2,1/2.
    #[arg(long)]
    pub split: Option<String>,
    /// Truncation of the split system (su11 default 64, wh default 16).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Output-mode truncation for wh (default: equal to --dim).
    #[arg(long)]
    pub dim_out: Option<usize>,
    #[arg(long, default_value_t = FRAC_PI_4, allow_hyphen_values = true)]
    pub theta_bs: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateSelect,
    /// Entropy threshold for the coherent-input check (default 1e-10, 1e-8 when truncated).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BellArgs {
    /// Subsystem spins JB/JC.
    #[arg(long, default_value = "1/2,1/2")]
    pub split: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateSelect,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    /// Force a' = a and b' = b.
    #[arg(long)]
    pub tied_settings: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct UniquenessArgs {
    /// Subsystem spins JB/JC.
    #[arg(long, default_value = "1/1")]
    pub split: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::uniqueness::DEFAULT_ENTROPY_EPS)]
    pub entropy_eps: f64,
    #[arg(long, default_value_t = crate::uniqueness::DEFAULT_FIDELITY_DELTA)]
    pub fidelity_delta: f64,
    #[arg(long, value_enum, default_value_t = SourceArg::Haar)]
    pub source: SourceArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Scan)]
    pub mode: ModeArg,
    /// Entropy-minimization starts.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlauberArgs {
    #[arg(long, value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "1,0")]
    pub alpha: [f64; 2],
    #[arg(long, default_value_t = FRAC_PI_4, allow_hyphen_values = true)]
    pub theta_bs: f64,
    /// Fock truncation per mode (default from the tail bound).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Spin of the SU(2) system shown alongside.
    #[arg(long, default_value = "1")]
    pub j: String,
    #[arg(long, value_parser = input::parse_complex, allow_hyphen_values = true, default_value = "1,0")]
    pub zeta: [f64; 2],
    /// SU(2) split JB/JC (default: as even as possible).
    #[arg(long)]
    pub split: Option<String>,
}

/// Why a run did not produce a passing report.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit code 2.
    Validation(String),
    /// Internal or I/O failure; exit code 1.
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Consistency(_) => CliError::Failure(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Output of one command: the report and, for scans, a CSV table.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("--{name} must be a positive number, got {v}")))
    }
}

/// Runs a parsed command line and returns its outcome.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        // A pool installed earlier in the same process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.format == OutputFormat::Csv && !matches!(cli.command, Command::Uniqueness(_)) {
        return Err(CliError::Validation("CSV output is only available for uniqueness scan records".into()));
    }
    let start = Instant::now();
    let (mut report, csv) = match &cli.command {
        Command::VerifyAlgebra(a) => {
            positive("tol", a.tol)?;
            (commands::verify_algebra(a)?, None)
        }
        Command::Coherent(a) => {
            positive("tol", a.tol)?;
            (commands::coherent(a)?, None)
        }
        Command::Split(a) => {
            if let Some(t) = a.tol {
                positive("tol", t)?;
            }
            (commands::split(a)?, None)
        }
        Command::Bell(a) => (commands::bell(a)?, None),
        Command::Uniqueness(a) => {
            positive("entropy-eps", a.entropy_eps)?;
            positive("fidelity-delta", a.fidelity_delta)?;
            let (r, table) = commands::uniqueness(a)?;
            (r, Some(table))
        }
        Command::GlauberCompare(a) => (commands::glauber_compare(a)?, None),
    };
    report.finish(start.elapsed().as_millis() as u64);
    Ok(Outcome { report, csv })
}

fn emit(cli: &Cli, outcome: &Outcome) -> CliResult<()> {
    let text = match (cli.format, &outcome.csv) {
        (OutputFormat::Csv, Some(table)) => {
            let r = &outcome.report;
            let failed: Vec<&str> = r.records.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            eprintln!(
                "{}: {}{}",
                r.command,
                if r.pass { "PASS" } else { "FAIL" },
                if failed.is_empty() { String::new() } else { format!(" ({})", failed.join("; ")) }
            );
            table.clone()
        }
        _ => outcome.report.to_json(),
    };
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Failure(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Failure(format!("writing stdout: {e}"))),
    }
}

/// Process entry point.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = execute(&cli).and_then(|outcome| emit(&cli, &outcome).map(|_| outcome.report.pass));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
