//! `wickward`: command line front end for the Wick-calculus engine.

mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, OutputFormat, RunConfig};
use error::CliError;
use report::Outcome;

const USAGE_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "wickward", version, about = "Symbolic Wick calculus and Master Ward Identity checks for the free complex scalar field")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Spacetime dimension (at least 3).
    #[arg(long, global = true)]
    dim: Option<u32>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Record the rewrite steps of the normalizer.
    #[arg(long, global = true)]
    trace: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with defaults for `dim`, `format`, `trace`, `out` and `eta`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Charge-conjugation phase, a constant of modulus one such as `1`, `-1` or `i`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an expression to its canonical form.
    Expand { expr: String },
    /// Star product of two expressions.
    Star {
        left: String,
        right: String,
        /// Use the Feynman propagator instead of the two-point function.
        #[arg(long)]
        feynman: bool,
    },
    /// Star commutator of two expressions.
    Commutator { left: String, right: String },
    /// Unrenormalized time-ordered product of field polynomials.
    Tproduct {
        #[arg(required = true)]
        args: Vec<String>,
    },
    /// Vacuum expectation value of an expression.
    Vev { expr: String },
    /// Check the Master Ward Identity at VEV level (exit 0 verified, 1 anomaly candidate).
    WardCheck {
        #[arg(required = true)]
        args: Vec<String>,
        /// Point label of the inserted current; defaults to a fresh `y`.
        #[arg(long)]
        at: Option<String>,
    },
    /// Furry's theorem test with brute-force confirmation.
    FurryCheck {
        #[arg(required = true)]
        args: Vec<String>,
    },
    /// Charge-number test with brute-force confirmation.
    ChargeCheck {
        #[arg(required = true)]
        args: Vec<String>,
    },
    /// Classify one tuple, or scan all small tuples when none is given.
    AnomalyScan {
        args: Vec<String>,
        /// Largest tuple size of the scan.
        #[arg(long, default_value_t = 5)]
        max_n: usize,
    },
    /// Case I reduction certificate.
    Case1Report {
        /// Number of L-type points.
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// The eight explicit rows of the case table.
    Table1 {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Mass dimensions of polynomials, or invariant tensor bases with `--rank`.
    Dims {
        args: Vec<String>,
        #[arg(long)]
        rank: Option<usize>,
        /// Require total symmetry in all indices.
        #[arg(long)]
        symmetric: bool,
        /// Admit Levi-Civita structures.
        #[arg(long)]
        epsilon: bool,
    },
    /// Contraction diagrams of a VEV, as DOT with `--format dot`.
    ExportDiagrams {
        #[arg(required = true)]
        args: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Expand { .. } => "expand",
            Command::Star { .. } => "star",
            Command::Commutator { .. } => "commutator",
            Command::Tproduct { .. } => "tproduct",
            Command::Vev { .. } => "vev",
            Command::WardCheck { .. } => "ward-check",
            Command::FurryCheck { .. } => "furry-check",
            Command::ChargeCheck { .. } => "charge-check",
            Command::AnomalyScan { .. } => "anomaly-scan",
            Command::Case1Report { .. } => "case1-report",
            Command::Table1 { .. } => "table1",
            Command::Dims { .. } => "dims",
            Command::ExportDiagrams { .. } => "export-diagrams",
        }
    }
}

fn run_command(command: &Command, config: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Expand { expr } => commands::expand(expr),
        Command::Star { left, right, feynman } => commands::star(left, right, *feynman),
        Command::Commutator { left, right } => commands::commutator(left, right),
        Command::Tproduct { args } => commands::tproduct(args),
        Command::Vev { expr } => commands::vev(expr),
        Command::WardCheck { args, at } => {
            let y = match at {
                Some(y) => y.clone(),
                None => commands::fresh_current_label(args)?,
            };
            commands::ward_check(args, &y, config)
        }
        Command::FurryCheck { args } => commands::furry(args, config),
        Command::ChargeCheck { args } => commands::charge(args),
        Command::AnomalyScan { args, max_n } => commands::anomaly_scan(args, *max_n, config),
        Command::Case1Report { m } => commands::case1_report(*m, config),
        Command::Table1 { n } => commands::table(*n, config),
        Command::Dims { args, rank, symmetric, epsilon } => commands::dims(args, *rank, *symmetric, *epsilon, config),
        Command::ExportDiagrams { args } => commands::export_diagrams(args),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = FileConfig {
        dim: cli.global.dim,
        format: cli.global.format,
        trace: cli.global.trace.then_some(true),
        out: cli.global.out,
        eta: cli.global.eta,
    };
    let config = RunConfig::resolve(flags, file)?;
    let name = cli.command.name();
    let outcome = run_command(&cli.command, &config)?;
    let rendered = report::render(name, &config, &outcome)?;
    match &config.out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| CliError::Io(path.display().to_string(), e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io("stdout".into(), e))?;
        }
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
