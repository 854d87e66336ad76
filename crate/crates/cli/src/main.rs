//! `qedcc`: run the coupled-cluster engine, the H2 oracle, photon couplings
//! and MRCC from JSON inputs.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 input error. Failures print
//! one `error[<class>]: <reason>` line on stderr.

mod commands;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qedcc_core::cc::{Method, PairMode};
use qedcc_core::qed::{ChannelSet, PairDenominator};

use commands::{CliError, MrccArgs, RunArgs, SolverSettings};
use report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "qedcc",
    version,
    about = "QED-extended coupled-cluster engine for tiny model systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve CCD or CCSD on a model file and print the correlation report.
    Run {
        model: PathBuf,
        #[arg(long, default_value = "ccsd", value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        channels: ChannelArg,
        #[arg(long, default_value = "decoupled", value_parser = parse_pair_mode)]
        pair_mode: PairMode,
        /// `exact` or `limit` (2mc^2 / 4mc^2).
        #[arg(long, default_value = "exact", value_parser = parse_pair_denominator)]
        pair_denominator: PairDenominator,
        #[command(flatten)]
        solver: SolverArgs,
        /// Add MHz and cm^-1 columns.
        #[arg(long)]
        conversions: bool,
    },
    /// Closed-form H2 unit energies from a parameter fixture.
    OracleH2 {
        fixture: PathBuf,
        /// Replica count of the doubles-CI row.
        #[arg(long, default_value_t = 2)]
        dci_units: usize,
        #[arg(long)]
        conversions: bool,
    },
    /// Per-unit CCD and doubles-CI energies of replicated H2 units.
    Extensivity {
        fixture: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        units: Vec<usize>,
        #[command(flatten)]
        channels: ChannelArg,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Thermal photon occupations, field averages and radiative coupling.
    Photon { thermal: PathBuf },
    /// State-specific multireference CC over a model space.
    Mrcc {
        model: PathBuf,
        /// Model-space JSON: `{"references": ["1100", ...], "target_root": 0}`.
        #[arg(long)]
        space: PathBuf,
        /// Overrides `target_root` from the model-space file.
        #[arg(long)]
        target_root: Option<usize>,
        #[command(flatten)]
        channels: ChannelArg,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        conversions: bool,
    },
    /// Check model invariants; exits 2 when any is violated.
    Validate {
        model: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

#[derive(Debug, Args)]
struct ChannelArg {
    /// Comma-separated subset of coulomb, breit, hyperfine, lamb, all.
    #[arg(long, default_value = "coulomb", value_parser = parse_channels)]
    channels: ChannelSet,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    energy_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    level_shift: f64,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            max_iterations: self.max_iterations,
            damping: self.damping,
            residual_tol: self.residual_tol,
            energy_tol: self.energy_tol,
            level_shift: self.level_shift,
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
        .map_err(|e: qedcc_core::cc::CcError| e.to_string())
}

fn parse_pair_mode(s: &str) -> Result<PairMode, String> {
    s.parse()
        .map_err(|e: qedcc_core::cc::CcError| e.to_string())
}

fn parse_pair_denominator(s: &str) -> Result<PairDenominator, String> {
    s.parse()
        .map_err(|e: qedcc_core::qed::QedError| e.to_string())
}

fn parse_channels(s: &str) -> Result<ChannelSet, String> {
    s.parse()
        .map_err(|e: qedcc_core::qed::QedError| e.to_string())
}

fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Run {
            model,
            method,
            channels,
            pair_mode,
            pair_denominator,
            solver,
            conversions,
        } => {
            let r = commands::run(&RunArgs {
                model,
                method: *method,
                channels: channels.channels,
                pair_mode: *pair_mode,
                pair_denominator: *pair_denominator,
                solver: solver.settings(),
            })?;
            Ok(if *conversions {
                r.with_conversions()
            } else {
                r
            })
        }
        Command::OracleH2 {
            fixture,
            dci_units,
            conversions,
        } => {
            let r = commands::oracle_h2(fixture, *dci_units)?;
            Ok(if *conversions {
                r.with_conversions()
            } else {
                r
            })
        }
        Command::Extensivity {
            fixture,
            units,
            channels,
            solver,
        } => commands::extensivity(fixture, units, channels.channels, &solver.settings()),
        Command::Photon { thermal } => commands::photon(thermal),
        Command::Mrcc {
            model,
            space,
            target_root,
            channels,
            solver,
            conversions,
        } => {
            let r = commands::mrcc(&MrccArgs {
                model,
                space,
                channels: channels.channels,
                target_root: *target_root,
                solver: solver.settings(),
            })?;
            Ok(if *conversions {
                r.with_conversions()
            } else {
                r
            })
        }
        Command::Validate { model, tolerance } => commands::validate(model, *tolerance),
    }
}

fn emit(report: &Report, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
    };
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(class: &str, message: &str, code: u8) -> ExitCode {
    let line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{class}]: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail("usage", first.trim_start_matches("error: "), 2);
        }
    };

    let result = execute(&cli.command).and_then(|r| emit(&r, cli.format, cli.output.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let CliError::Rejected { report, .. } = &err {
                if let Err(e) = emit(report, cli.format, cli.output.as_deref()) {
                    return fail(e.class(), &e.to_string(), e.exit_code() as u8);
                }
            }
            fail(err.class(), &err.to_string(), err.exit_code() as u8)
        }
    }
}
