use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weaksim_cli::commands;
use weaksim_cli::config::{load_scenario, Format, SweepRange};
use weaksim_cli::report;
use weaksim_core::pointer::oracle::GridSpec;
use weaksim_core::{Basis, EstimatorKind, Result};

#[derive(Parser)]
#[command(
    name = "weaksim",
    about = "Weak and strong measurements on pre- and post-selected quantum systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArg {
    /// Builtin scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
}

#[derive(Args)]
struct GridArgs {
    /// Oracle grid spacing as a fraction of the coordinate scale.
    #[arg(long, default_value_t = 0.125)]
    grid_spacing: f64,
    /// Oracle grid reach beyond extreme shifts, in coordinate scales.
    #[arg(long, default_value_t = 8.0)]
    grid_extent: f64,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            spacing: self.grid_spacing,
            extent: self.grid_extent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print weak values of the scenario observables.
    Weakvalue {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Print the intermediate-measurement outcome distribution and
    /// strong expectations.
    Abl {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Device moments: closed form against the grid oracle.
    Moments {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Pointer width; defaults to the scenario's.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Sweep the pointer width and write figure data as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        delta_min: f64,
        #[arg(long)]
        delta_max: f64,
        #[arg(long, default_value_t = 40)]
        delta_points: usize,
        /// Log-spaced width grid.
        #[arg(long)]
        log: bool,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw shots, write them as CSV, and print ensemble statistics.
    Sample {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value = "direct")]
        estimator: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, default_value = "position")]
        basis: String,
        /// Shot dump CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// List builtin scenarios or export one as JSON.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Run every builtin scenario against its reference values and write
    /// the reproduction report.
    Report {
        #[arg(long, default_value = "REPRODUCTION.md")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    Export {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Weakvalue { scenario, format } => {
            let spec = load_scenario(&scenario.scenario)?;
            commands::cmd_weakvalue(&spec, format.parse::<Format>()?)
        }
        Command::Abl { scenario, format } => {
            let spec = load_scenario(&scenario.scenario)?;
            commands::cmd_abl(&spec, format.parse::<Format>()?)
        }
        Command::Moments {
            scenario,
            delta,
            grid,
            format,
        } => {
            let spec = load_scenario(&scenario.scenario)?;
            commands::cmd_moments(&spec, delta, &grid.spec(), format.parse::<Format>()?)
        }
        Command::Sweep {
            scenario,
            delta_min,
            delta_max,
            delta_points,
            log,
            out,
        } => {
            let spec = load_scenario(&scenario.scenario)?;
            let range = SweepRange {
                min: delta_min,
                max: delta_max,
                points: delta_points,
                log,
            };
            commands::cmd_sweep(&spec, &range, &out)
        }
        Command::Sample {
            scenario,
            estimator,
            delta,
            shots,
            seed,
            basis,
            out,
            format,
        } => {
            let spec = load_scenario(&scenario.scenario)?;
            commands::cmd_sample(
                &spec,
                estimator.parse::<EstimatorKind>()?,
                delta,
                shots,
                seed,
                basis.parse::<Basis>()?,
                out.as_deref(),
                format.parse::<Format>()?,
            )
        }
        Command::Scenario { action } => match action {
            ScenarioAction::List => Ok(commands::cmd_scenario_list()),
            ScenarioAction::Export { scenario, out } => {
                commands::cmd_scenario_export(&scenario.scenario, &out)
            }
        },
        Command::Report { out } => report::cmd_report(&out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(weaksim_cli::exit_code_for(&err) as u8)
        }
    }
}
