//! `posic`: batch analysis and simulation of nonnegative integral control
//! loops around positive dynamical systems.

mod commands;
mod presets;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CmdError;

#[derive(Parser)]
#[command(
    name = "posic",
    about = "Analysis and simulation of integral control for positive systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Positivity and stability-assumption checks (exit 0 iff all pass)
    Check(RunArgs),
    /// Supremal stability bounds and the SPR certificate (bounds.json)
    Bounds(RunArgs),
    /// Closed-loop time simulation (trajectory.csv, metrics.json)
    Simulate(RunArgs),
    /// Root locus in the coupling or the gain (locus.csv)
    Locus(RunArgs),
    /// Bifurcation sweep over the (k, eta) grid (sweep.csv)
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Name of a built-in preset (fig_genexp, fig_bif, ...)
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: the scenario's output_dir, else ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<scenario::LoadedScenario, CmdError> {
    let text = match (&args.scenario, &args.preset) {
        (Some(_), Some(_)) => {
            return Err(CmdError::Scenario(
                "give exactly one of --scenario and --preset".into(),
            ))
        }
        (None, None) => {
            return Err(CmdError::Scenario(format!(
                "a scenario is required: --scenario FILE or --preset NAME (presets: {})",
                presets::names().join(", ")
            )))
        }
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| CmdError::Scenario(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => presets::find(name)
            .ok_or_else(|| {
                CmdError::Scenario(format!(
                    "unknown preset '{name}' (available: {})",
                    presets::names().join(", ")
                ))
            })?
            .to_string(),
    };
    scenario::parse(&text).map_err(|e| CmdError::Scenario(e.0))
}

fn out_dir(args: &RunArgs, loaded: &scenario::LoadedScenario) -> PathBuf {
    args.out
        .clone()
        .or_else(|| loaded.scenario.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run() -> Result<u8, CmdError> {
    let cli = Cli::parse();
    let (args, runner): (
        &RunArgs,
        fn(&scenario::LoadedScenario, &std::path::Path) -> Result<u8, CmdError>,
    ) = match &cli.command {
        Command::Check(a) => (a, commands::cmd_check),
        Command::Bounds(a) => (a, commands::cmd_bounds),
        Command::Simulate(a) => (a, commands::cmd_simulate),
        Command::Locus(a) => (a, commands::cmd_locus),
        Command::Sweep(a) => (a, commands::cmd_sweep),
    };
    let loaded = load(args)?;
    runner(&loaded, &out_dir(args, &loaded))
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
