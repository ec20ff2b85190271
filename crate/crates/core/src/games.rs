//! Closed-form lobbying games and an exhaustive expectation oracle.
//!
//! Two special cases admit exact answers: a single agent facing a single
//! lobbyist, where spending the whole budget is optimal, and two unbiased
//! agents facing two opposing lobbyists with one signal each over a single
//! round, a 2x2 game in which both lobbyists randomize uniformly over their
//! two targets at equilibrium. For any sufficiently
//! small scenario [`brute_force_expectation`] enumerates every branch of the
//! round timeline and returns exact expectations, which the Monte Carlo
//! engine must reproduce.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    clamp_weight, lobby_update, peer_update, subjective_probability, BiasProfile, ModelPair,
    Signal, SupportedModel,
};
use crate::engine::{InitialWeights, PoolSource, ScenarioConfig};
use crate::error::{Error, Result};
use crate::lobbying::StrategyMatrix;

/// Payoff differences at or below this size count as zero.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Largest outcome tree [`brute_force_expectation`] will walk.
pub const MAX_LEAVES: f64 = 1e6;

/// Evidence summarized by how many 0- and 1-signals were received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SignalMultiset {
    pub t0: u32,
    pub t1: u32,
}

impl SignalMultiset {
    pub fn new(t0: u32, t1: u32) -> Self {
        SignalMultiset { t0, t1 }
    }
}

/// Bayes weight on the optimistic model after the given evidence, starting
/// from a uniform prior.
pub fn posterior_weight_from_counts(counts: SignalMultiset, models: &ModelPair) -> f64 {
    let (t0, t1) = (counts.t0 as i32, counts.t1 as i32);
    let like_o = models.pi_o.powi(t1) * (1.0 - models.pi_o).powi(t0);
    let like_p = models.pi_p.powi(t1) * (1.0 - models.pi_p).powi(t0);
    like_o / (like_o + like_p)
}

fn prob_from_counts(t0: u32, t1: u32, models: &ModelPair) -> f64 {
    subjective_probability(
        posterior_weight_from_counts(SignalMultiset::new(t0, t1), models),
        models,
    )
}

/// Payoffs of the two-agent, two-lobbyist game, indexed by lobbyist
/// (0 = pessimistic, 1 = optimistic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoByTwoGame {
    /// Payoff when both lobbyists target the same agent.
    pub same_target: [f64; 2],
    /// Payoff when they target different agents.
    pub different_target: [f64; 2],
}

impl TwoByTwoGame {
    /// Payoff of `lobbyist` when lobbyist 0 targets agent `a` and lobbyist 1
    /// targets agent `b`.
    pub fn payoff(&self, lobbyist: usize, a: usize, b: usize) -> f64 {
        if a == b {
            self.same_target[lobbyist]
        } else {
            self.different_target[lobbyist]
        }
    }

    /// Expected payoff of `lobbyist` when lobbyist 0 plays `sigma0` and
    /// lobbyist 1 plays `sigma1` (probabilities of targeting agent 0 and 1).
    pub fn expected_payoff(&self, lobbyist: usize, sigma0: [f64; 2], sigma1: [f64; 2]) -> f64 {
        let mut total = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                total += sigma0[a] * sigma1[b] * self.payoff(lobbyist, a, b);
            }
        }
        total
    }

    /// `u(same) - u(different)` for each lobbyist.
    pub fn differences(&self) -> [f64; 2] {
        [
            self.same_target[0] - self.different_target[0],
            self.same_target[1] - self.different_target[1],
        ]
    }

    /// No lobbyist gains more than `tol` by a pure deviation.
    pub fn is_equilibrium(&self, sigma0: [f64; 2], sigma1: [f64; 2], tol: f64) -> bool {
        let pure = [[1.0, 0.0], [0.0, 1.0]];
        let u0 = self.expected_payoff(0, sigma0, sigma1);
        let u1 = self.expected_payoff(1, sigma0, sigma1);
        pure.iter()
            .all(|&d| self.expected_payoff(0, d, sigma1) <= u0 + tol)
            && pure
                .iter()
                .all(|&d| self.expected_payoff(1, sigma0, d) <= u1 + tol)
    }
}

/// Exact payoffs for two Bayesian agents with uniform priors, one round, and
/// two lobbyists (pessimistic, optimistic) with one signal each.
pub fn example2_payoffs(models: &ModelPair) -> TwoByTwoGame {
    let p = |t0, t1| prob_from_counts(t0, t1, models);
    // Both lobbyists hit the same agent: it holds {0,1}, the other nothing.
    let p01 = p(1, 1);
    let p_none = p(0, 0);
    let same = 0.25
        * (p01 * (1.0 + p(0, 1))
            + (1.0 - p01) * p(1, 0)
            + p_none * (1.0 + p(1, 2))
            + (1.0 - p_none) * p(2, 1));
    // Different agents: one holds {1}, the other {0}.
    let p1 = p(0, 1);
    let p0 = p(1, 0);
    let different = 0.25
        * (p1 * (1.0 + p01) + (1.0 - p1) * p(2, 0) + p0 * (1.0 + p(0, 2)) + (1.0 - p0) * p01);
    let payoff = |mean: f64, target: f64| -(mean - target).abs();
    TwoByTwoGame {
        same_target: [payoff(same, models.pi_p), payoff(same, models.pi_o)],
        different_target: [payoff(different, models.pi_p), payoff(different, models.pi_o)],
    }
}

/// Shape of the equilibrium set of a target-matching game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumSet {
    /// The uniform mixture is the only equilibrium.
    Unique,
    /// Both lobbyists prefer the same coordination outcome: the listed pure
    /// profiles are equilibria alongside the uniform mixture.
    Multiple { pure_profiles: Vec<[[f64; 2]; 2]> },
    /// Some lobbyist is indifferent between its pure strategies. When both
    /// are, every profile is an equilibrium.
    Degenerate { all_profiles: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// `sigma[l]` is lobbyist `l`'s probability of targeting agent 0 and
    /// agent 1. The uniform mixture is an equilibrium of every
    /// target-matching game.
    pub sigma: [[f64; 2]; 2],
    pub equilibria: EquilibriumSet,
}

/// Nash equilibria of a target-matching game.
pub fn example2_equilibrium(game: &TwoByTwoGame) -> GameSolution {
    let [d0, d1] = game.differences();
    let sigma = [[0.5, 0.5], [0.5, 0.5]];
    debug_assert!(game.is_equilibrium(sigma[0], sigma[1], 1e-12));
    let (flat0, flat1) = (d0.abs() <= DEGENERACY_TOL, d1.abs() <= DEGENERACY_TOL);
    let equilibria = if flat0 || flat1 {
        EquilibriumSet::Degenerate {
            all_profiles: flat0 && flat1,
        }
    } else if d0 * d1 < 0.0 {
        EquilibriumSet::Unique
    } else if d0 > 0.0 {
        EquilibriumSet::Multiple {
            pure_profiles: vec![[[1.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]],
        }
    } else {
        EquilibriumSet::Multiple {
            pure_profiles: vec![[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]],
        }
    };
    GameSolution { sigma, equilibria }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example1Strategy {
    /// Signal in every round.
    AllOnes { rounds: usize },
    /// Any schedule over `rounds` rounds with exactly `signals` ones.
    AnyWithSignals { rounds: usize, signals: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example1Solution {
    pub strategy: Example1Strategy,
    /// Weight after 0, 1, ..., k pessimistic signals.
    pub weight_path: Vec<f64>,
    /// Every extra signal strictly lowered the weight on the optimistic
    /// model.
    pub strictly_decreasing: bool,
    /// `-|p - pi_p|` at the end of the optimal schedule.
    pub payoff: f64,
}

/// Optimal schedule for one pessimistic lobbyist facing a single agent.
pub fn example1_optimal_strategy(
    tau: usize,
    budget: f64,
    initial_weight: f64,
    bias: &BiasProfile,
    models: &ModelPair,
) -> Result<Example1Solution> {
    if !(budget >= 0.0) || !(initial_weight > 0.0 && initial_weight < 1.0) {
        return Err(Error::InvalidConfig(
            "needs budget >= 0 and an initial weight in (0,1)".into(),
        ));
    }
    let affordable = budget.floor() as usize;
    let strategy = if tau <= affordable {
        Example1Strategy::AllOnes { rounds: tau }
    } else {
        Example1Strategy::AnyWithSignals {
            rounds: tau,
            signals: affordable,
        }
    };
    let used = tau.min(affordable);
    let mut weight_path = Vec::with_capacity(used + 1);
    weight_path.push(initial_weight);
    let mut w = initial_weight;
    for _ in 0..used {
        w = lobby_update(w, SupportedModel::Pessimistic, bias, models);
        weight_path.push(w);
    }
    let strictly_decreasing = weight_path.windows(2).all(|p| p[1] < p[0]);
    let payoff = -(subjective_probability(w, models) - models.pi_p).abs();
    Ok(Example1Solution {
        strategy,
        weight_path,
        strictly_decreasing,
        payoff,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutcome {
    /// Expected population-mean final probability.
    pub mean_p: f64,
    /// Expected realized payoff of each lobbyist.
    pub payoffs: Vec<f64>,
    pub leaves: u64,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

struct Enumerator<'a> {
    config: &'a ScenarioConfig,
    graph: crate::network::DirectedGraph,
    orderings: Vec<Vec<usize>>,
    lobby_horizon: usize,
    mean_p: f64,
    payoffs: Vec<f64>,
    leaves: u64,
}

impl Enumerator<'_> {
    fn leaf(&mut self, weights: &[f64], prob: f64, models: &ModelPair) {
        let n = weights.len() as f64;
        let mean = weights
            .iter()
            .map(|&w| subjective_probability(w, models))
            .sum::<f64>()
            / n;
        self.mean_p += prob * mean;
        for (acc, setup) in self.payoffs.iter_mut().zip(&self.config.lobbyists) {
            *acc -= prob * (mean - models.probability_of(setup.lobbyist.model)).abs();
        }
        self.leaves += 1;
    }

    fn walk(&mut self, weights: &mut [f64], strategies: &[&StrategyMatrix], t: usize, prob: f64) {
        let cfg = self.config;
        let (bias, models) = (cfg.bias, cfg.models);
        if t as u64 > cfg.max_rounds {
            self.leaf(weights, prob, &models);
            return;
        }
        let orderings = if t <= self.lobby_horizon {
            self.orderings.clone()
        } else {
            vec![Vec::new()]
        };
        let p_order = prob / orderings.len() as f64;
        let n = weights.len();
        for order in &orderings {
            let mut after_lobby = weights.to_vec();
            for &l in order {
                let lobbyist = &cfg.lobbyists[l].lobbyist;
                if t > lobbyist.horizon {
                    continue;
                }
                for &i in strategies[l].targets(t) {
                    after_lobby[i] = clamp_weight(lobby_update(after_lobby[i], lobbyist.model, &bias, &models));
                }
            }
            for speaker in 0..n {
                let p_speak = p_order / n as f64;
                let p1 = subjective_probability(after_lobby[speaker], &models);
                for (signal, p_signal) in [(Signal::Pessimistic, p1), (Signal::Optimistic, 1.0 - p1)] {
                    let mut next = after_lobby.clone();
                    for j in self.graph.out_neighbors(speaker) {
                        next[j] = clamp_weight(peer_update(next[j], signal, &bias, &models));
                    }
                    self.walk(&mut next, strategies, t + 1, p_speak * p_signal);
                }
            }
        }
    }
}

/// Exact expectations over every pool draw, lobbyist ordering, speaker and
/// peer signal for a fixed-horizon scenario.
///
/// The scenario must use fixed initial weights, explicit pools and no
/// convergence test (it runs exactly `max_rounds` rounds).
pub fn brute_force_expectation(config: &ScenarioConfig) -> Result<ExactOutcome> {
    config.validate()?;
    let InitialWeights::Fixed(initial) = &config.initial_weights else {
        return Err(Error::InvalidConfig("oracle needs fixed initial weights".into()));
    };
    if config.convergence.is_some() {
        return Err(Error::InvalidConfig(
            "oracle needs a fixed horizon (no convergence test)".into(),
        ));
    }
    let pools = config
        .lobbyists
        .iter()
        .map(|s| match &s.pool {
            PoolSource::Explicit(p) => Ok(p),
            PoolSource::Uniform { .. } => Err(Error::InvalidConfig(
                "oracle needs explicit strategy pools".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;

    let lobbies = config.lobbyists.len();
    let orderings = permutations(lobbies);
    let lobby_horizon = config
        .lobbyists
        .iter()
        .map(|s| s.lobbyist.horizon)
        .max()
        .unwrap_or(0);
    let rounds = config.max_rounds;
    let pool_product: f64 = pools.iter().map(|p| p.len() as f64).product();
    let mut leaves = pool_product;
    for t in 1..=rounds {
        let per_round = if t as usize <= lobby_horizon {
            orderings.len() as f64
        } else {
            1.0
        } * config.n as f64
            * 2.0;
        leaves *= per_round;
        if leaves > MAX_LEAVES {
            break;
        }
    }
    if leaves > MAX_LEAVES {
        return Err(Error::TreeTooLarge {
            leaves,
            limit: MAX_LEAVES,
        });
    }

    let mut e = Enumerator {
        config,
        graph: config.build_graph()?,
        orderings,
        lobby_horizon,
        mean_p: 0.0,
        payoffs: vec![0.0; lobbies],
        leaves: 0,
    };
    // Odometer over the joint pool draw.
    let mut draw = vec![0usize; lobbies];
    loop {
        let strategies: Vec<&StrategyMatrix> = draw
            .iter()
            .zip(&pools)
            .map(|(&k, p)| p.get(k).unwrap())
            .collect();
        let mut w = initial.clone();
        e.walk(&mut w, &strategies, 1, 1.0 / pool_product);
        let mut l = 0;
        while l < lobbies {
            draw[l] += 1;
            if draw[l] < pools[l].len() {
                break;
            }
            draw[l] = 0;
            l += 1;
        }
        if l == lobbies {
            break;
        }
    }
    Ok(ExactOutcome {
        mean_p: e.mean_p,
        payoffs: e.payoffs,
        leaves: e.leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LobbyistSetup;
    use crate::lobbying::{Lobbyist, StrategyPool};

    const TOL: f64 = 1e-12;

    fn paper_models() -> ModelPair {
        ModelPair::default()
    }

    #[test]
    fn posterior_from_counts_examples() {
        let m = paper_models();
        assert!((posterior_weight_from_counts(SignalMultiset::new(0, 0), &m) - 0.5).abs() < TOL);
        assert!((posterior_weight_from_counts(SignalMultiset::new(1, 1), &m) - 0.5).abs() < TOL);
        assert!((posterior_weight_from_counts(SignalMultiset::new(1, 0), &m) - 0.99).abs() < TOL);
    }

    #[test]
    fn posterior_from_counts_matches_sequential_bayes() {
        let m = ModelPair::new(0.2, 0.7).unwrap();
        let b = BiasProfile::new(0.0, 0.0).unwrap();
        let mut w = 0.5;
        for s in [1, 0, 0, 1, 0] {
            w = peer_update(w, Signal::from_value(s).unwrap(), &b, &m);
        }
        let counted = posterior_weight_from_counts(SignalMultiset::new(3, 2), &m);
        assert!((w - counted).abs() < TOL);
    }

    #[test]
    fn example2_identity_and_bounds() {
        let m = paper_models();
        let g = example2_payoffs(&m);
        let lhs = g.same_target[0] - g.different_target[0];
        let rhs = g.different_target[1] - g.same_target[1];
        assert!((lhs - rhs).abs() <= 1e-14);
        for u in g.same_target.iter().chain(&g.different_target) {
            assert!(*u <= 0.0 && *u >= -m.spread());
        }
        // Symmetric models: each lobbyist's payoff mirrors the other's.
        assert!((g.same_target[0].abs() - g.same_target[1].abs()).abs() < TOL);
        assert!((g.different_target[0].abs() - g.different_target[1].abs()).abs() < TOL);
    }

    #[test]
    fn example2_equilibrium_symmetric_models() {
        // With pi_p = 1 - pi_o both conditional payoffs coincide, so every
        // profile is an equilibrium; the uniform mixture is among them.
        let g = example2_payoffs(&paper_models());
        let sol = example2_equilibrium(&g);
        assert_eq!(sol.sigma, [[0.5, 0.5], [0.5, 0.5]]);
        assert_eq!(sol.equilibria, EquilibriumSet::Degenerate { all_profiles: true });
        assert!(g.is_equilibrium([0.5, 0.5], [0.5, 0.5], 1e-15));
    }

    #[test]
    fn example2_equilibrium_asymmetric_models() {
        for (po, pp) in [(0.1, 0.6), (0.3, 0.95), (0.05, 0.5), (0.01, 0.9)] {
            let g = example2_payoffs(&ModelPair::new(po, pp).unwrap());
            let [d0, d1] = g.differences();
            assert!(d0.abs() > DEGENERACY_TOL, "{po} {pp}");
            assert!((d0 + d1).abs() <= 1e-14);
            let sol = example2_equilibrium(&g);
            assert_eq!(sol.sigma, [[0.5, 0.5], [0.5, 0.5]]);
            assert_eq!(sol.equilibria, EquilibriumSet::Unique);
            assert!(g.is_equilibrium([0.5, 0.5], [0.5, 0.5], 1e-15));
            assert!(!g.is_equilibrium([1.0, 0.0], [1.0, 0.0], 0.0));
            assert!(!g.is_equilibrium([1.0, 0.0], [0.0, 1.0], 0.0));
        }
    }

    #[test]
    fn equilibrium_invariant_to_agent_relabeling() {
        let g = example2_payoffs(&ModelPair::new(0.1, 0.6).unwrap());
        let sol = example2_equilibrium(&g);
        let swapped = sol.sigma.map(|[a, b]| [b, a]);
        assert_eq!(swapped, sol.sigma);
    }

    #[test]
    fn example1_cases() {
        let m = paper_models();
        let b = BiasProfile::new(0.4, 0.3).unwrap();
        let s = example1_optimal_strategy(5, 10.0, 0.6, &b, &m).unwrap();
        assert_eq!(s.strategy, Example1Strategy::AllOnes { rounds: 5 });
        assert!(s.strictly_decreasing);
        assert_eq!(s.weight_path.len(), 6);

        let s = example1_optimal_strategy(10, 3.7, 0.6, &b, &m).unwrap();
        assert_eq!(
            s.strategy,
            Example1Strategy::AnyWithSignals {
                rounds: 10,
                signals: 3
            }
        );
        assert!(s.strictly_decreasing);

        let s = example1_optimal_strategy(10, 0.0, 0.6, &b, &m).unwrap();
        assert_eq!(s.weight_path, vec![0.6]);
        let p0 = subjective_probability(0.6, &m);
        assert!((s.payoff + (m.pi_p - p0)).abs() < TOL);

        // More signals never hurt the lobbyist.
        let payoffs: Vec<f64> = (0..8)
            .map(|k| example1_optimal_strategy(10, k as f64, 0.6, &b, &m).unwrap().payoff)
            .collect();
        assert!(payoffs.windows(2).all(|p| p[1] > p[0]));
    }

    fn example2_config(pools: [StrategyPool; 2]) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(2, paper_models(), BiasProfile::new(0.0, 0.0).unwrap());
        cfg.initial_weights = InitialWeights::Fixed(vec![0.5, 0.5]);
        cfg.convergence = None;
        cfg.max_rounds = 1;
        let [p0, p1] = pools;
        cfg.lobbyists = vec![
            LobbyistSetup {
                lobbyist: Lobbyist {
                    model: SupportedModel::Pessimistic,
                    budget: 1,
                    horizon: 1,
                },
                pool: PoolSource::Explicit(p0),
            },
            LobbyistSetup {
                lobbyist: Lobbyist {
                    model: SupportedModel::Optimistic,
                    budget: 1,
                    horizon: 1,
                },
                pool: PoolSource::Explicit(p1),
            },
        ];
        cfg
    }

    fn target(agent: usize) -> StrategyMatrix {
        StrategyMatrix::from_signals(2, 1, 1, &[(1, agent)]).unwrap()
    }

    #[test]
    fn oracle_reproduces_example2_payoffs() {
        let g = example2_payoffs(&paper_models());
        let single = |a| StrategyPool::new(vec![target(a)]).unwrap();

        let same = brute_force_expectation(&example2_config([single(0), single(0)])).unwrap();
        assert!((same.payoffs[0] - g.same_target[0]).abs() <= 1e-12);
        assert!((same.payoffs[1] - g.same_target[1]).abs() <= 1e-12);

        let diff = brute_force_expectation(&example2_config([single(0), single(1)])).unwrap();
        assert!((diff.payoffs[0] - g.different_target[0]).abs() <= 1e-12);
        assert!((diff.payoffs[1] - g.different_target[1]).abs() <= 1e-12);

        let mixed = StrategyPool::new(vec![target(0), target(1)]).unwrap();
        let both = brute_force_expectation(&example2_config([mixed.clone(), mixed])).unwrap();
        for l in 0..2 {
            let u = g.expected_payoff(l, [0.5, 0.5], [0.5, 0.5]);
            assert!((both.payoffs[l] - u).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_single_branch_case() {
        let m = paper_models();
        let b = BiasProfile::new(0.0, 0.0).unwrap();
        let mut cfg = ScenarioConfig::baseline(1, m, b);
        cfg.initial_weights = InitialWeights::Fixed(vec![0.5]);
        cfg.convergence = None;
        cfg.max_rounds = 2;
        let all_ones = StrategyMatrix::from_signals(1, 2, 2, &[(1, 0), (2, 0)]).unwrap();
        cfg.lobbyists = vec![LobbyistSetup {
            lobbyist: Lobbyist {
                model: SupportedModel::Pessimistic,
                budget: 2,
                horizon: 2,
            },
            pool: PoolSource::Explicit(StrategyPool::new(vec![all_ones]).unwrap()),
        }];
        let out = brute_force_expectation(&cfg).unwrap();
        let w = lobby_update(lobby_update(0.5, SupportedModel::Pessimistic, &b, &m), SupportedModel::Pessimistic, &b, &m);
        assert!((out.mean_p - subjective_probability(w, &m)).abs() < TOL);
    }

    #[test]
    fn oracle_rejects_unsupported_configs() {
        let mut cfg = ScenarioConfig::baseline(3, paper_models(), BiasProfile::new(0.2, 0.1).unwrap());
        assert!(brute_force_expectation(&cfg).is_err());
        cfg.initial_weights = InitialWeights::Fixed(vec![0.5; 3]);
        assert!(brute_force_expectation(&cfg).is_err());
        cfg.convergence = None;
        cfg.max_rounds = 20;
        assert!(matches!(
            brute_force_expectation(&cfg),
            Err(Error::TreeTooLarge { .. })
        ));
        cfg.max_rounds = 3;
        assert_eq!(brute_force_expectation(&cfg).unwrap().leaves, 216);
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(2).len(), 2);
        assert_eq!(permutations(3).len(), 6);
    }
}
