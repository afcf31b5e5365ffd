use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dlsrr_core::run::{run, Overrides, Subcommand};
use dlsrr_core::scenario::load_scenario;
use dlsrr_core::thermal::StagnationCorrelation;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Ascent,
    Impact,
    Thermal,
    Sweep,
    Tables,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Qk {
    Klein,
    Sutton,
    Chapman,
    Detra,
}

/// Ballistic flight and aerodynamic heating of an air-launched sounding rocket.
#[derive(Debug, Parser)]
#[command(name = "dlsrr", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Scenario file (TOML). Optional for `tables`.
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,

    /// Integration time step, s.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,

    /// Stagnation heat-transfer correlation.
    #[arg(long, value_enum)]
    qk: Option<Qk>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };

    let subcommand = match args.command {
        Command::Ascent => Subcommand::Ascent,
        Command::Impact => Subcommand::Impact,
        Command::Thermal => Subcommand::Thermal,
        Command::Sweep => Subcommand::Sweep,
        Command::Tables => Subcommand::Tables,
    };
    let overrides = Overrides {
        dt: args.dt,
        correlation: args.qk.map(|q| match q {
            Qk::Klein => StagnationCorrelation::Klein,
            Qk::Sutton => StagnationCorrelation::Sutton,
            Qk::Chapman => StagnationCorrelation::Chapman,
            Qk::Detra => StagnationCorrelation::Detra,
        }),
    };

    if args.scenario.is_none() && subcommand != Subcommand::Tables {
        eprintln!("error: --scenario is required for `{}`", subcommand.name());
        return ExitCode::from(EXIT_USAGE);
    }
    let result = args
        .scenario
        .as_deref()
        .map(load_scenario)
        .transpose()
        .and_then(|scenario| run(subcommand, scenario.as_ref(), &overrides, &args.out));

    match result {
        Ok(report) => {
            for f in &report.outputs {
                println!("{}", args.out.join(f).display());
            }
            if let Some(t) = &report.tables {
                println!("{} of {} cells within tolerance", t.cells - t.failed, t.cells);
                for line in &t.failures {
                    eprintln!("FAIL {line}");
                }
            }
            if report.within_tolerance() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_TOLERANCE)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
