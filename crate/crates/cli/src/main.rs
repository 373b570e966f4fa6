//! `ccpp` command-line tool.

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccpp", version, about = "Cooperative coverage path planning for structure inspection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a mission and write trajectories, a summary and a run manifest.
    Plan(PlanArgs),
    /// Check previously written trajectories for safety and coverage.
    Verify(VerifyArgs),
    /// Print bounds, point count and per-slice loop counts of a model.
    InspectModel(InspectArgs),
    /// Write a built-in test structure as a point-set file.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Planner configuration (`key = value` lines); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the number of agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Override the clustering seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlanArgs {
    /// Structure model: .stl, .obj or a point-set file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write slice, loop and offset tables under `<out>/debug`.
    #[arg(long)]
    dump_debug: bool,
    /// Fail when a slice has more branches than agents instead of flying them in turn.
    #[arg(long)]
    strict_branches: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory holding `trajectory_<id>.csv` files.
    #[arg(long)]
    trajectories: PathBuf,
    /// Write plot tables (paths, yaw traces, uncovered points) here.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Slice spacing; defaults to the one implied by the configuration.
    #[arg(long)]
    delta_lambda: Option<f64>,
}

#[derive(Args)]
struct FixtureArgs {
    /// cylinder, pillars, boxes or turbine.
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// Surface sampling pitch; the fixture's own default when omitted.
    #[arg(long)]
    pitch: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CCPP_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => commands::plan(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::InspectModel(a) => commands::inspect_model(&a),
        Command::Fixture(a) => commands::fixture(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
