//! The per-round simulation loop.
//!
//! Each round runs the fixed timeline: lobbyists deliver their signals in a
//! random order, then one uniformly drawn speaker sends a Bernoulli signal to
//! everyone it talks to. A run repeats rounds until the population stops
//! changing or the round cap is reached.

use std::fmt::Write as _;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    clamp_weight, lobby_update, peer_update, subjective_probability, BiasProfile, ModelPair,
    Signal,
};
use crate::error::{Error, Result};
use crate::lobbying::{
    realized_payoff, schedule_round, Lobbyist, RoundLobbySchedule, StrategyMatrix, StrategyPool,
};
use crate::metrics::{effective_clusters, mean_probability, partition, DEFAULT_CLUSTER_EPSILON};
use crate::network::DirectedGraph;
use crate::rng::rng_from_seed;

/// Default cap in sweeps (multiples of `n` rounds).
pub const DEFAULT_MAX_SWEEPS: u64 = 5_000;

/// Above this population size trajectories store summaries instead of every
/// agent.
pub const FULL_TRAJECTORY_LIMIT: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    /// Weights within this distance of 0 or 1 count as absorbed.
    pub absorb_epsilon: f64,
    /// Rounds without a significant update before declaring a fixed point.
    pub quiet_window: u64,
    /// Largest per-update change that still counts as "no update".
    pub delta_tolerance: f64,
}

impl ConvergenceCriterion {
    pub fn for_population(n: usize) -> Self {
        ConvergenceCriterion {
            absorb_epsilon: 1e-6,
            quiet_window: 10 * n as u64,
            delta_tolerance: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.absorb_epsilon > 0.0 && self.delta_tolerance > 0.0 && self.quiet_window > 0) {
            return Err(Error::InvalidConfig(
                "convergence tolerances must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Complete,
    /// Edge-list document as accepted by [`DirectedGraph::load_edge_list`].
    EdgeList(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialWeights {
    /// Independent draws from the open unit interval.
    Uniform,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolSource {
    /// A fresh pool of `size` uniform strategies, generated from the run seed.
    Uniform { size: usize },
    Explicit(StrategyPool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobbyistSetup {
    pub lobbyist: Lobbyist,
    pub pool: PoolSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Sampling period in rounds.
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub models: ModelPair,
    pub bias: BiasProfile,
    pub topology: Topology,
    pub initial_weights: InitialWeights,
    pub lobbyists: Vec<LobbyistSetup>,
    pub max_rounds: u64,
    /// `None` runs exactly `max_rounds` rounds.
    pub convergence: Option<ConvergenceCriterion>,
    pub trajectory: Option<TrajectoryConfig>,
    pub cluster_epsilon: f64,
}

impl ScenarioConfig {
    /// Complete graph, uniform priors, no lobbyists, default convergence.
    pub fn baseline(n: usize, models: ModelPair, bias: BiasProfile) -> Self {
        ScenarioConfig {
            n,
            models,
            bias,
            topology: Topology::Complete,
            initial_weights: InitialWeights::Uniform,
            lobbyists: Vec::new(),
            max_rounds: DEFAULT_MAX_SWEEPS * n as u64,
            convergence: Some(ConvergenceCriterion::for_population(n)),
            trajectory: None,
            cluster_epsilon: DEFAULT_CLUSTER_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("need at least one agent".into()));
        }
        self.models.validate()?;
        self.bias.validate()?;
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if let Some(c) = &self.convergence {
            c.validate()?;
        }
        if let Some(t) = &self.trajectory {
            if t.stride == 0 {
                return Err(Error::InvalidConfig("trajectory stride must be positive".into()));
            }
        }
        if !(self.cluster_epsilon > 0.0) {
            return Err(Error::InvalidConfig("cluster epsilon must be positive".into()));
        }
        if let InitialWeights::Fixed(w) = &self.initial_weights {
            if w.len() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "{} initial weights given for {} agents",
                    w.len(),
                    self.n
                )));
            }
            if w.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(Error::InvalidConfig(
                    "initial weights must lie strictly inside (0,1)".into(),
                ));
            }
        }
        if let Topology::EdgeList(text) = &self.topology {
            let g = DirectedGraph::load_edge_list(text)?;
            if g.n() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "edge list has n={} but the scenario has {} agents",
                    g.n(),
                    self.n
                )));
            }
        }
        for setup in &self.lobbyists {
            let l = &setup.lobbyist;
            if l.horizon as u64 > self.max_rounds {
                return Err(Error::InvalidConfig(format!(
                    "lobbyist horizon {} exceeds max_rounds {}",
                    l.horizon, self.max_rounds
                )));
            }
            match &setup.pool {
                PoolSource::Uniform { size } => {
                    if *size == 0 {
                        return Err(Error::Empty("strategy pool"));
                    }
                    let capacity = (self.n as u64).saturating_mul(l.horizon as u64);
                    if l.budget > capacity {
                        return Err(Error::InvalidConfig(format!(
                            "budget {} exceeds n * horizon = {capacity}",
                            l.budget
                        )));
                    }
                }
                PoolSource::Explicit(pool) => pool.check_feasible(l, self.n)?,
            }
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<DirectedGraph> {
        match &self.topology {
            Topology::Complete => DirectedGraph::complete(self.n),
            Topology::EdgeList(text) => DirectedGraph::load_edge_list(text),
        }
    }
}

/// Mutable state of a run between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub weights: Vec<f64>,
    /// Rounds executed so far.
    pub round: u64,
    /// Last round in which some weight moved by more than the delta tolerance.
    pub last_change_round: u64,
    /// Last round in which any chosen strategy still sends signals.
    pub lobby_end: u64,
    /// Whether the bias profile makes every update the identity.
    pub frozen: bool,
}

impl RunState {
    pub fn new(weights: Vec<f64>, bias: &BiasProfile, lobby_end: u64) -> Self {
        RunState {
            weights,
            round: 0,
            last_change_round: 0,
            lobby_end,
            frozen: bias.is_frozen(),
        }
    }

    pub fn probabilities(&self, models: &ModelPair) -> Vec<f64> {
        self.weights
            .iter()
            .map(|&w| subjective_probability(w, models))
            .collect()
    }
}

/// Read-only inputs shared by every round of a run.
pub struct StepContext<'a> {
    pub graph: &'a DirectedGraph,
    pub bias: BiasProfile,
    pub models: ModelPair,
    pub lobbyists: Vec<(Lobbyist, &'a StrategyMatrix)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub speaker: usize,
    pub signal: Signal,
    pub lobby_signals: usize,
    pub max_delta: f64,
}

/// Applies one round's lobby deliveries in arrival order. Returns the
/// largest weight change.
pub fn apply_lobby_schedule(
    weights: &mut [f64],
    schedule: &RoundLobbySchedule,
    bias: &BiasProfile,
    models: &ModelPair,
) -> f64 {
    let mut max_delta = 0.0f64;
    for &(agent, model) in &schedule.deliveries {
        let old = weights[agent];
        let new = clamp_weight(lobby_update(old, model, bias, models));
        weights[agent] = new;
        max_delta = max_delta.max((new - old).abs());
    }
    max_delta
}

/// Delivers `signal` from `speaker` to all of its receivers. Returns the
/// largest weight change.
pub fn apply_peer_signal(
    weights: &mut [f64],
    graph: &DirectedGraph,
    speaker: usize,
    signal: Signal,
    bias: &BiasProfile,
    models: &ModelPair,
) -> f64 {
    let mut max_delta = 0.0f64;
    for j in graph.out_neighbors(speaker) {
        let old = weights[j];
        let new = clamp_weight(peer_update(old, signal, bias, models));
        weights[j] = new;
        max_delta = max_delta.max((new - old).abs());
    }
    max_delta
}

/// Executes round `state.round + 1`.
pub fn step<R: Rng + ?Sized>(
    state: &mut RunState,
    ctx: &StepContext<'_>,
    criterion: Option<&ConvergenceCriterion>,
    rng: &mut R,
) -> RoundRecord {
    let t = state.round + 1;
    let schedule = schedule_round(&ctx.lobbyists, t as usize, rng);
    let lobby_delta = apply_lobby_schedule(&mut state.weights, &schedule, &ctx.bias, &ctx.models);

    let n = state.weights.len();
    let speaker = rng.gen_range(0..n);
    let p = subjective_probability(state.weights[speaker], &ctx.models);
    let signal = if rng.gen::<f64>() < p {
        Signal::Pessimistic
    } else {
        Signal::Optimistic
    };
    let peer_delta = apply_peer_signal(
        &mut state.weights,
        ctx.graph,
        speaker,
        signal,
        &ctx.bias,
        &ctx.models,
    );

    let max_delta = lobby_delta.max(peer_delta);
    state.round = t;
    let tolerance = criterion.map_or(0.0, |c| c.delta_tolerance);
    if max_delta > tolerance {
        state.last_change_round = t;
    }
    RoundRecord {
        round: t,
        speaker,
        signal,
        lobby_signals: schedule.deliveries.len(),
        max_delta,
    }
}

/// Terminal-state test.
///
/// Never true while a lobbyist still has signals scheduled. Otherwise true if
/// every weight is absorbed at 0 or 1, if no update in the last
/// `quiet_window` rounds exceeded the delta tolerance, or if the bias
/// profile freezes all updates.
pub fn converged(state: &RunState, criterion: &ConvergenceCriterion) -> bool {
    if state.round < state.lobby_end {
        return false;
    }
    if state.frozen {
        return true;
    }
    let eps = criterion.absorb_epsilon;
    if state.weights.iter().all(|&w| w <= eps || w >= 1.0 - eps) {
        return true;
    }
    state.round - state.last_change_round >= criterion.quiet_window
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub deciles: [f64; 9],
}

impl DecileSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let last = sorted.len() - 1;
        let deciles = std::array::from_fn(|k| {
            let idx = ((last as f64) * (k + 1) as f64 / 10.0).round() as usize;
            sorted[idx]
        });
        DecileSummary {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            max: sorted[last],
            deciles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleValues {
    Full(Vec<f64>),
    Summary(DecileSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub round: u64,
    pub values: SampleValues,
}

/// Subjective probabilities sampled over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    fn record(&mut self, round: u64, probabilities: &[f64]) {
        let values = if self.n <= FULL_TRAJECTORY_LIMIT {
            SampleValues::Full(probabilities.to_vec())
        } else {
            SampleValues::Summary(DecileSummary::of(probabilities))
        };
        self.samples.push(TrajectorySample { round, values });
    }

    pub fn is_full(&self) -> bool {
        self.n <= FULL_TRAJECTORY_LIMIT
    }

    /// `sweep,agent_id,p` for full trajectories, otherwise
    /// `sweep,mean_p,min_p,max_p,d1..d9`. A sweep is `n` rounds.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.is_full() {
            out.push_str("sweep,agent_id,p\n");
        } else {
            out.push_str("sweep,mean_p,min_p,max_p,d1,d2,d3,d4,d5,d6,d7,d8,d9\n");
        }
        for sample in &self.samples {
            let sweep = sample.round as f64 / self.n as f64;
            match &sample.values {
                SampleValues::Full(ps) => {
                    for (i, p) in ps.iter().enumerate() {
                        let _ = writeln!(out, "{sweep},{i},{p}");
                    }
                }
                SampleValues::Summary(s) => {
                    let _ = write!(out, "{sweep},{},{},{}", s.mean, s.min, s.max);
                    for d in &s.deciles {
                        let _ = write!(out, ",{d}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub final_weights: Vec<f64>,
    pub final_probabilities: Vec<f64>,
    /// Rounds executed.
    pub rounds: u64,
    /// `rounds / n`.
    pub sweeps: f64,
    /// Stopped because the convergence test passed (always false in
    /// fixed-horizon runs).
    pub converged: bool,
    /// Pool index drawn by each lobbyist.
    pub chosen_strategy_ids: Vec<usize>,
    pub mean_p: f64,
    /// `None` when the bias profile freezes all dynamics.
    pub effective_clusters: Option<f64>,
    /// Realized payoff of each lobbyist.
    pub payoffs: Vec<f64>,
    pub trajectory: Option<Trajectory>,
}

/// Runs one seeded simulation. Identical `(config, seed)` give identical
/// results.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    let mut rng = rng_from_seed(seed);
    let graph = config.build_graph()?;

    let generated: Vec<Option<StrategyPool>> = config
        .lobbyists
        .iter()
        .map(|s| match &s.pool {
            PoolSource::Uniform { size } => StrategyPool::generate(
                *size,
                config.n,
                s.lobbyist.horizon,
                s.lobbyist.budget,
                &mut rng,
            )
            .map(Some),
            PoolSource::Explicit(_) => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut chosen_strategy_ids = Vec::with_capacity(config.lobbyists.len());
    let mut lobbyists = Vec::with_capacity(config.lobbyists.len());
    for (setup, gen) in config.lobbyists.iter().zip(&generated) {
        let pool = match (&setup.pool, gen) {
            (_, Some(p)) => p,
            (PoolSource::Explicit(p), None) => p,
            (PoolSource::Uniform { .. }, None) => unreachable!(),
        };
        let (idx, matrix) = pool.draw(&mut rng);
        chosen_strategy_ids.push(idx);
        lobbyists.push((setup.lobbyist, matrix));
    }
    let lobby_end = lobbyists
        .iter()
        .filter_map(|(l, m)| {
            (1..=m.horizon().min(l.horizon))
                .rev()
                .find(|&t| !m.targets(t).is_empty())
        })
        .max()
        .unwrap_or(0) as u64;

    let weights = match &config.initial_weights {
        InitialWeights::Uniform => (0..config.n).map(|_| rng.sample(Open01)).collect(),
        InitialWeights::Fixed(w) => w.clone(),
    };
    let mut state = RunState::new(weights, &config.bias, lobby_end);
    let ctx = StepContext {
        graph: &graph,
        bias: config.bias,
        models: config.models,
        lobbyists,
    };

    let mut trajectory = config.trajectory.map(|_| Trajectory {
        n: config.n,
        samples: Vec::new(),
    });
    if let Some(tr) = trajectory.as_mut() {
        tr.record(0, &state.probabilities(&config.models));
    }

    let criterion = config.convergence.as_ref();
    let mut is_converged = false;
    loop {
        if let Some(c) = criterion {
            if converged(&state, c) {
                is_converged = true;
                break;
            }
        }
        if state.round >= config.max_rounds {
            break;
        }
        step(&mut state, &ctx, criterion, &mut rng);
        if let (Some(tr), Some(tc)) = (trajectory.as_mut(), config.trajectory.as_ref()) {
            if state.round.is_multiple_of(tc.stride) {
                tr.record(state.round, &state.probabilities(&config.models));
            }
        }
    }
    if let (Some(tr), Some(tc)) = (trajectory.as_mut(), config.trajectory.as_ref()) {
        if !state.round.is_multiple_of(tc.stride) {
            tr.record(state.round, &state.probabilities(&config.models));
        }
    }

    let final_probabilities = state.probabilities(&config.models);
    let mean_p = mean_probability(&final_probabilities)?;
    let effective = if config.bias.is_frozen() {
        None
    } else {
        let part = partition(&final_probabilities, config.cluster_epsilon)?;
        Some(effective_clusters(&part, config.n))
    };
    let payoffs = config
        .lobbyists
        .iter()
        .map(|s| realized_payoff(&final_probabilities, s.lobbyist.model, &config.models))
        .collect::<Result<_>>()?;

    Ok(RunResult {
        seed,
        final_weights: state.weights,
        final_probabilities,
        rounds: state.round,
        sweeps: state.round as f64 / config.n as f64,
        converged: is_converged,
        chosen_strategy_ids,
        mean_p,
        effective_clusters: effective,
        payoffs,
        trajectory,
    })
}
