use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lobbynet", version, about = "Opinion dynamics with lobbyists")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one seeded run and write its result as JSON.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicate runs over a (lambda, phi) grid and write the heatmap CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Runs per grid cell.
        #[arg(long)]
        runs: Option<usize>,
        /// `lambda_start:end:step,phi_start:end:step`.
        #[arg(long)]
        grid: Option<String>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the solvable single-agent and two-lobbyist games.
    Nash {
        #[arg(long = "pi-o", default_value_t = 0.01)]
        pi_o: f64,
        #[arg(long = "pi-p", default_value_t = 0.99)]
        pi_p: f64,
        /// Rounds available to the single-agent lobbyist.
        #[arg(long, default_value_t = 3)]
        tau: usize,
        /// Budget of the single-agent lobbyist.
        #[arg(long, default_value_t = 3.0)]
        budget: f64,
        #[arg(long = "initial-weight", default_value_t = 0.5)]
        initial_weight: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Also write the JSON document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a pool of uniform strategy matrices.
    PoolGen {
        #[command(flatten)]
        pool: PoolArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Baseline,
    OneLobbyist,
    TwoLobbyists,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// JSON config (a manifest written by a previous invocation).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long = "pi-o")]
    pub pi_o: Option<f64>,
    #[arg(long = "pi-p")]
    pub pi_p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long = "pool-size")]
    pub pool_size: Option<usize>,
    /// Round cap, in sweeps of `n` rounds.
    #[arg(long = "max-sweeps")]
    pub max_sweeps: Option<u64>,
    /// Directed edge list replacing the complete graph.
    #[arg(long = "edge-list")]
    pub edge_list: Option<PathBuf>,
    /// Record a trajectory (every sweep unless --stride is given).
    #[arg(long)]
    pub trajectory: bool,
    /// Trajectory sampling period in rounds.
    #[arg(long)]
    pub stride: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PoolArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long = "pool-size")]
    pub pool_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}
