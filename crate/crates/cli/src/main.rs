mod commands;
mod config;
mod manifest;
mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greenwave::rl::{IntervalMode, Method};
use greenwave::scenario::Scale;

pub const OUT_ENV: &str = "GREENWAVE_OUT";

#[derive(Debug, Parser)]
#[command(name = "greenwave", version, about = "Intersection simulator and learned traffic-light controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a DQN, DDQN or PPO controller.
    Train(TrainArgs),
    /// Evaluate the predefined light or a checkpoint over several seeded runs.
    Eval(EvalArgs),
    /// Evaluate policies across action-disturbance probabilities.
    Sweep(SweepArgs),
    /// Summarize a trajectory dump.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Dqn,
    Ddqn,
    Ppo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dqn => Method::Dqn,
            MethodArg::Ddqn => Method::Ddqn,
            MethodArg::Ppo => Method::Ppo,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntervalArg {
    Fixed,
    Variable,
}

impl From<IntervalArg> for IntervalMode {
    fn from(m: IntervalArg) -> Self {
        match m {
            IntervalArg::Fixed => IntervalMode::Fixed,
            IntervalArg::Variable => IntervalMode::Variable,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

/// Scenario selection shared by every command.
#[derive(Debug, Clone, Args)]
struct ScenarioArgs {
    /// balanced, collision-in, collision-out, malfunction or unbalanced.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    #[arg(long, value_enum)]
    intervals: Option<IntervalArg>,
    /// Total vehicles to spawn.
    #[arg(long)]
    vehicles: Option<usize>,
    /// Chance that a decision is replaced by a random other phase.
    #[arg(long)]
    disturbance: Option<f64>,
    #[arg(long)]
    watchdog: Option<u32>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    passes: Option<usize>,
    /// Checkpoint period in episodes; 0 keeps only the final one.
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Record elapsed wall-clock time in the episode log.
    #[arg(long)]
    wallclock: bool,
    /// Output directory (default: $GREENWAVE_OUT/<run name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Include the predefined cycling light.
    #[arg(long, value_parser = ["predefined"])]
    baseline: Option<String>,
    /// Policy checkpoint; may be repeated for sweeps.
    #[arg(long)]
    checkpoint: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Write one trajectory dump per run.
    #[arg(long)]
    trajectory: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated disturbance probabilities (default 0.05 to 0.35).
    #[arg(long, value_delimiter = ',')]
    probabilities: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    dump: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Replay(a) => commands::replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
