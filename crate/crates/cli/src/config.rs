//! Resolution of config files plus flag overrides into validated documents.

use std::path::Path;

use lobbynet_core::engine::{
    ConvergenceCriterion, LobbyistSetup, PoolSource, Topology, TrajectoryConfig,
    DEFAULT_MAX_SWEEPS,
};
use lobbynet_core::sweep::{default_grid, parse_grid, SweepSpec};
use lobbynet_core::{BiasProfile, Lobbyist, ModelPair, ScenarioConfig, SupportedModel};
use serde::{Deserialize, Serialize};

use crate::args::{PoolArgs, Scenario, ScenarioArgs};

pub const DEFAULT_AGENTS: usize = 500;
pub const DEFAULT_BUDGET: u64 = 10_000;
pub const DEFAULT_HORIZON: usize = 100;
pub const DEFAULT_POOL_SIZE: usize = 100;
pub const DEFAULT_RUNS: usize = 150;
pub const DEFAULT_LAMBDA: f64 = 0.8;
pub const DEFAULT_PHI: f64 = 0.0;

/// Fully resolved input of `run`; also its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub scenario: ScenarioConfig,
}

/// Fully resolved input of `pool-gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolManifest {
    pub n: usize,
    pub horizon: usize,
    pub budget: u64,
    pub pool_size: usize,
    pub seed: u64,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn preset_lobbyists(scenario: Scenario, budget: u64, horizon: usize, pool: usize) -> Vec<LobbyistSetup> {
    let setup = |model| LobbyistSetup {
        lobbyist: Lobbyist {
            model,
            budget,
            horizon,
        },
        pool: PoolSource::Uniform { size: pool },
    };
    match scenario {
        Scenario::Baseline => Vec::new(),
        Scenario::OneLobbyist => vec![setup(SupportedModel::Pessimistic)],
        Scenario::TwoLobbyists => vec![
            setup(SupportedModel::Pessimistic),
            setup(SupportedModel::Optimistic),
        ],
    }
}

fn default_scenario() -> ScenarioConfig {
    ScenarioConfig::baseline(
        DEFAULT_AGENTS,
        ModelPair::default(),
        BiasProfile {
            lambda_base: DEFAULT_LAMBDA,
            phi: DEFAULT_PHI,
        },
    )
}

/// Applies scenario flags on top of `base`.
pub fn apply_scenario_overrides(
    mut cfg: ScenarioConfig,
    args: &ScenarioArgs,
) -> Result<ScenarioConfig, String> {
    if let Some(n) = args.agents {
        cfg.n = n;
        cfg.max_rounds = DEFAULT_MAX_SWEEPS * n as u64;
        if cfg.convergence.is_some() {
            cfg.convergence = Some(ConvergenceCriterion::for_population(n));
        }
    }
    if let Some(v) = args.pi_o {
        cfg.models.pi_o = v;
    }
    if let Some(v) = args.pi_p {
        cfg.models.pi_p = v;
    }
    if let Some(v) = args.lambda {
        cfg.bias.lambda_base = v;
    }
    if let Some(v) = args.phi {
        cfg.bias.phi = v;
    }
    if let Some(sweeps) = args.max_sweeps {
        cfg.max_rounds = sweeps.saturating_mul(cfg.n as u64);
    }
    if let Some(path) = &args.edge_list {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg.topology = Topology::EdgeList(text);
    }
    if let Some(scenario) = args.scenario {
        let budget = args.budget.unwrap_or(DEFAULT_BUDGET);
        let horizon = args.horizon.unwrap_or(DEFAULT_HORIZON);
        let pool = args.pool_size.unwrap_or(DEFAULT_POOL_SIZE);
        cfg.lobbyists = preset_lobbyists(scenario, budget, horizon, pool);
    } else {
        for setup in &mut cfg.lobbyists {
            if let Some(b) = args.budget {
                setup.lobbyist.budget = b;
            }
            if let Some(h) = args.horizon {
                setup.lobbyist.horizon = h;
            }
            if let Some(size) = args.pool_size {
                setup.pool = PoolSource::Uniform { size };
            }
        }
    }
    if let Some(stride) = args.stride {
        cfg.trajectory = Some(TrajectoryConfig { stride });
    } else if args.trajectory && cfg.trajectory.is_none() {
        cfg.trajectory = Some(TrajectoryConfig {
            stride: cfg.n.max(1) as u64,
        });
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn resolve_run(args: &ScenarioArgs, seed: Option<u64>) -> Result<RunManifest, String> {
    let base = match &args.config {
        Some(path) => read_json::<RunManifest>(path)?,
        None => RunManifest {
            seed: 0,
            scenario: default_scenario(),
        },
    };
    Ok(RunManifest {
        seed: seed.unwrap_or(base.seed),
        scenario: apply_scenario_overrides(base.scenario, args)?,
    })
}

pub fn resolve_sweep(
    args: &ScenarioArgs,
    seed: Option<u64>,
    runs: Option<usize>,
    grid: Option<&str>,
) -> Result<SweepSpec, String> {
    let mut spec = match &args.config {
        Some(path) => read_json::<SweepSpec>(path)?,
        None => SweepSpec {
            lambda_grid: default_grid(),
            phi_grid: default_grid(),
            runs_per_cell: DEFAULT_RUNS,
            scenario: default_scenario(),
            master_seed: 0,
        },
    };
    spec.scenario = apply_scenario_overrides(spec.scenario, args)?;
    spec.scenario.trajectory = None;
    if let Some(s) = seed {
        spec.master_seed = s;
    }
    if let Some(r) = runs {
        spec.runs_per_cell = r;
    }
    if let Some(g) = grid {
        let (l, p) = parse_grid(g).map_err(|e| e.to_string())?;
        spec.lambda_grid = l;
        spec.phi_grid = p;
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn resolve_pool(args: &PoolArgs) -> Result<PoolManifest, String> {
    let base = match &args.config {
        Some(path) => read_json::<PoolManifest>(path)?,
        None => PoolManifest {
            n: DEFAULT_AGENTS,
            horizon: DEFAULT_HORIZON,
            budget: DEFAULT_BUDGET,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
        },
    };
    let m = PoolManifest {
        n: args.agents.unwrap_or(base.n),
        horizon: args.horizon.unwrap_or(base.horizon),
        budget: args.budget.unwrap_or(base.budget),
        pool_size: args.pool_size.unwrap_or(base.pool_size),
        seed: args.seed.unwrap_or(base.seed),
    };
    if m.n == 0 {
        return Err("invalid configuration: need at least one agent".into());
    }
    Ok(m)
}
