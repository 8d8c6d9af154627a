//! `stf-lab` — desk-scale laboratory for shear-thickening-fluid admittance
//! control.
//!
//! Every subcommand reads JSON configs, writes artifacts atomically, and
//! prints one machine-parsable JSON summary line to stdout. Errors go to
//! stderr as a single `error: <class>: <reason>` line with a matching exit
//! code: 2 when a requested constraint check fails, 3 for invalid input,
//! 4 when a simulation diverges.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

mod commands;
mod schema;

// ==================== Failure taxonomy ====================

/// A command failure, classed by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed config, out-of-domain parameters.
    Invalid(String),
    /// An explicitly requested constraint check came back violated.
    Constraint(String),
    /// The simulated state left the trust region.
    Divergence(String),
}

impl Failure {
    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        Failure::Invalid(msg.to_string())
    }

    /// Map library errors onto the CLI taxonomy: divergence keeps its own
    /// exit code, everything else is an input problem.
    pub fn from_lib(err: stf_control::Error) -> Self {
        match err {
            stf_control::Error::Divergence { .. } => Failure::Divergence(err.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 3,
            Failure::Constraint(_) => 2,
            Failure::Divergence(_) => 4,
        }
    }

    fn render(&self) -> String {
        let (class, msg) = match self {
            Failure::Invalid(m) => ("invalid-input", m),
            Failure::Constraint(m) => ("constraint-violated", m),
            Failure::Divergence(m) => ("divergence", m),
        };
        format!("error: {class}: {}", one_line(msg))
    }
}

/// Collapse a message onto one line so stderr stays machine-parsable.
fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ==================== CLI surface ====================

#[derive(Parser)]
#[command(
    name = "stf-lab",
    version,
    about = "Desk-scale laboratory for shear-thickening-fluid admittance control"
)]
pub struct Cli {
    /// Scenario / requirements / IK description (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output artifact path (CSV or JSON, depending on the subcommand).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Built-in parameter set, e.g. fixed_sfc, mobile_lac.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Assert that the run uses no randomness. Always true for this binary;
    /// the flag is reserved so scripts can pin the guarantee.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    seedless: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Run a scenario and write the full per-sample trace as CSV.
    Simulate,
    /// Sweep sinusoidal drives over a frequency grid and write the response
    /// table as CSV.
    Bode(BodeArgs),
    /// Derive a parameter set from interaction requirements and write it as
    /// a params file ready for `simulate` and `check`.
    Tune,
    /// Evaluate the sample-time bound (and optionally the coupled condition)
    /// for a parameter set.
    Check(CheckArgs),
    /// Sample a scenario's input force and label it steady / tremor / impact.
    Classify(ClassifyArgs),
    /// Map a task-space velocity to joint rates through a damped
    /// least-squares inverse.
    Ik,
    /// Regenerate the reference tables and report reproduction errors.
    Tables(TablesArgs),
}

#[derive(clap::Args)]
pub struct BodeArgs {
    /// Parameter file (JSON); alternative to --preset.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Drive amplitude [N]; repeat for a family of curves.
    #[arg(long = "amplitude-n", value_name = "N", required = true)]
    pub amplitude_n: Vec<f64>,

    /// numeric: measure each point by simulation; analytic: closed-form
    /// response of the equivalent linear system (shear-thickening sets only).
    #[arg(long, value_enum, default_value_t = Method::Numeric)]
    pub method: Method,
}

#[derive(Copy, Clone, ValueEnum)]
pub enum Method {
    Numeric,
    Analytic,
}

#[derive(clap::Args)]
pub struct CheckArgs {
    /// Parameter file (JSON); alternative to --preset.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Largest force the loop must survive [N].
    #[arg(long = "f-max-n", value_name = "N")]
    pub f_max_n: f64,

    /// Sample time to check [s]; defaults to the parameter file's dt_s.
    #[arg(long = "dt-s", value_name = "S")]
    pub dt_s: Option<f64>,

    /// Also run the coupled discrete-phase condition at this drive
    /// frequency [rad/s].
    #[arg(long = "omega-rad-s", value_name = "RAD_S")]
    pub omega_rad_s: Option<f64>,
}

#[derive(clap::Args)]
pub struct ClassifyArgs {
    /// Force threshold separating gentle from forceful contact [N].
    #[arg(long = "f-th-n", value_name = "N")]
    pub f_th_n: f64,

    /// Upper band edge for the tremor/impact split [Hz].
    #[arg(long = "eps-plus-hz", value_name = "HZ")]
    pub eps_plus_hz: f64,

    /// Lower band edge for the tremor/impact split [Hz].
    #[arg(long = "eps-minus-hz", value_name = "HZ")]
    pub eps_minus_hz: f64,

    /// Spectral magnitudes at or below this level are ignored [N].
    #[arg(long = "noise-floor-n", value_name = "N")]
    pub noise_floor_n: Option<f64>,
}

#[derive(clap::Args)]
pub struct TablesArgs {
    /// Table id to regenerate (3, 4, or 5); repeat for several. Default: all.
    #[arg(long = "which", value_name = "ID")]
    pub which: Vec<u8>,

    /// Directory receiving table_<id>.json files.
    #[arg(long = "out-dir", value_name = "DIR")]
    pub out_dir: PathBuf,
}

// ==================== Entry point ====================

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("error: invalid-args: {}", one_line(&e.to_string()));
            return ExitCode::from(3);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.render());
            ExitCode::from(failure.exit_code())
        }
    }
}
