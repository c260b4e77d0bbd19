//! `sepkit`: separability and distillability reports for GHZ-diagonal states.

mod commands;
mod input;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Output, Status};
use sepkit::tensor::DEFAULT_PPT_TOL;

/// Failure before a report could be produced.
#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<sepkit::Error> for CliError {
    fn from(e: sepkit::Error) -> Self {
        Self(e.to_string())
    }
}

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_APPLICABLE: u8 = 3;
const EXIT_SELFTEST: u8 = 1;

#[derive(Parser)]
#[command(
    name = "sepkit",
    version,
    about = "Separability and distillability of GHZ-diagonal states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the JSON report (default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Emit a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    /// Significant digits of emitted reals; 17 round-trips exactly.
    #[arg(long, global = true, default_value_t = 17, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Args)]
struct StateArgs {
    /// State file (JSON with "weights" or "matrix").
    #[arg(long)]
    input: PathBuf,
    /// Numerical tolerance for matrix validation and eigenvalue checks.
    #[arg(long, default_value_t = DEFAULT_PPT_TOL, value_parser = parse_tol)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a state by partial-transpose positivity.
    Classify(StateArgs),
    /// Project a density matrix onto the GHZ-diagonal family.
    Depolarize(StateArgs),
    /// Plan the distillation of a maximally entangled pair (three qubits).
    Distill {
        #[command(flatten)]
        state: StateArgs,
        /// The pair, e.g. A,C.
        #[arg(long)]
        pair: String,
        /// Number of copies; the smallest sufficient one by default.
        #[arg(long)]
        m: Option<u64>,
        /// Also run the dense simulation and report its deviation.
        #[arg(long)]
        oracle: bool,
    },
    /// Separability certificates (three qubits).
    Witness {
        #[command(flatten)]
        state: StateArgs,
        /// Also write the separable ensemble to this file.
        #[arg(long)]
        ensemble_out: Option<PathBuf>,
    },
    /// Separability threshold of the GHZ/white-noise mixture.
    Threshold {
        #[arg(long)]
        n: usize,
    },
    #[command(hide = true)]
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_PPT_TOL, value_parser = parse_tol)]
        tol: f64,
    },
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let digits = cli.precision as usize;
    match &cli.command {
        Command::Classify(a) => {
            commands::classify_cmd(&input::load(&a.input, a.tol)?, a.tol, digits)
        }
        Command::Depolarize(a) => Ok(commands::depolarize_cmd(
            &input::load(&a.input, a.tol)?,
            a.tol,
            digits,
        )),
        Command::Distill {
            state,
            pair,
            m,
            oracle,
        } => commands::distill_cmd(
            &input::load(&state.input, state.tol)?,
            pair,
            *m,
            *oracle,
            state.tol,
            digits,
        ),
        Command::Witness {
            state,
            ensemble_out,
        } => commands::witness_cmd(
            &input::load(&state.input, state.tol)?,
            ensemble_out.as_deref(),
            state.tol,
            digits,
        ),
        Command::Threshold { n } => commands::threshold_cmd(*n, digits),
        Command::Selftest {
            seed,
            n,
            samples,
            tol,
        } => commands::selftest_cmd(*seed, *n, *samples, *tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.text {
                print!("{}", out.text);
            } else {
                print!("{}", out.to_json(cli.precision as usize));
            }
            if let Some(d) = &out.diagnostic {
                eprintln!("sepkit: {d}");
            }
            match out.status {
                Status::Success => ExitCode::SUCCESS,
                Status::NotApplicable => ExitCode::from(EXIT_NOT_APPLICABLE),
                Status::SelftestFailed => ExitCode::from(EXIT_SELFTEST),
            }
        }
        Err(e) => {
            eprintln!("sepkit: error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
