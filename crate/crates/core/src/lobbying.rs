//! Lobbyists, their feasible signal schedules and per-round delivery order.

use std::fmt::Write as _;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelPair, SupportedModel};
use crate::error::{Error, Result};

/// A lobbyist sends unit-cost signals for `model` during rounds
/// `1..=horizon`, at most `budget` of them in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lobbyist {
    pub model: SupportedModel,
    pub budget: u64,
    pub horizon: usize,
}

/// Binary agent-by-round signal schedule, stored as the sorted list of
/// targeted agents for each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyMatrix {
    n: usize,
    budget: u64,
    rounds: Vec<Vec<usize>>,
}

impl StrategyMatrix {
    /// Builds a matrix from `(round, agent)` pairs with 1-based rounds.
    pub fn from_signals(
        n: usize,
        horizon: usize,
        budget: u64,
        signals: &[(usize, usize)],
    ) -> Result<Self> {
        let mut rounds = vec![Vec::new(); horizon];
        for &(t, i) in signals {
            if t == 0 || t > horizon {
                return Err(Error::IndexOutOfRange { index: t, n: horizon });
            }
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            rounds[t - 1].push(i);
        }
        for round in &mut rounds {
            round.sort_unstable();
            let before = round.len();
            round.dedup();
            if round.len() != before {
                return Err(Error::InvalidConfig(
                    "a lobbyist can signal an agent at most once per round".into(),
                ));
            }
        }
        let m = StrategyMatrix { n, budget, rounds };
        if m.total() > budget {
            return Err(Error::InvalidConfig(format!(
                "strategy sends {} signals but the budget is {budget}",
                m.total()
            )));
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Agents targeted in round `t` (1-based); empty past the horizon.
    pub fn targets(&self, t: usize) -> &[usize] {
        if t == 0 || t > self.rounds.len() {
            &[]
        } else {
            &self.rounds[t - 1]
        }
    }

    pub fn get(&self, agent: usize, t: usize) -> bool {
        self.targets(t).binary_search(&agent).is_ok()
    }

    pub fn total(&self) -> u64 {
        self.rounds.iter().map(|r| r.len() as u64).sum()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        self.rounds.iter().map(Vec::len).collect()
    }

    /// Header `n=<N> horizon=<T> budget=<B>`, then one `t i` line per
    /// signal, sorted by round then agent.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n={} horizon={} budget={}\n",
            self.n,
            self.horizon(),
            self.budget
        );
        for (t, agents) in self.rounds.iter().enumerate() {
            for i in agents {
                let _ = writeln!(out, "{} {i}", t + 1);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pool = parse_matrices(text)?;
        match pool.len() {
            1 => Ok(pool.pop().unwrap()),
            0 => Err(Error::Empty("strategy matrix")),
            k => Err(Error::InvalidConfig(format!(
                "expected one strategy matrix, found {k}"
            ))),
        }
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, usize, u64)> {
    let bad = || Error::Parse {
        line: line_no,
        msg: format!("expected `n=<N> horizon=<T> budget=<B>`, got `{line}`"),
    };
    let fields: Vec<_> = line.split_whitespace().collect();
    let [n, h, b] = fields.as_slice() else {
        return Err(bad());
    };
    let value = |field: &str, key: &str| -> Result<u64> {
        field
            .strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)
    };
    Ok((
        value(n, "n=")? as usize,
        value(h, "horizon=")? as usize,
        value(b, "budget=")?,
    ))
}

fn parse_matrices(text: &str) -> Result<Vec<StrategyMatrix>> {
    struct Pending {
        header: (usize, usize, u64),
        signals: Vec<(usize, usize)>,
    }
    let finish = |p: Pending| {
        let (n, horizon, budget) = p.header;
        StrategyMatrix::from_signals(n, horizon, budget, &p.signals)
    };

    let mut out = Vec::new();
    let mut pending: Option<Pending> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("n=") {
            if let Some(p) = pending.take() {
                out.push(finish(p)?);
            }
            pending = Some(Pending {
                header: parse_header(line_no, line)?,
                signals: Vec::new(),
            });
            continue;
        }
        let Some(p) = pending.as_mut() else {
            return Err(Error::Parse {
                line: line_no,
                msg: "signal before header".into(),
            });
        };
        let parsed: Vec<_> = line.split_whitespace().map(str::parse::<usize>).collect();
        match parsed.as_slice() {
            [Ok(t), Ok(i)] => p.signals.push((*t, *i)),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `t i`, got `{line}`"),
                })
            }
        }
    }
    if let Some(p) = pending {
        out.push(finish(p)?);
    }
    Ok(out)
}

/// Random feasible strategy spending the whole budget.
///
/// Every round gets `budget / horizon` signals; the remainder adds one extra
/// signal to that many distinct rounds. Targets within a round are drawn
/// without replacement.
pub fn generate_uniform_strategy<R: Rng + ?Sized>(
    n: usize,
    horizon: usize,
    budget: u64,
    rng: &mut R,
) -> Result<StrategyMatrix> {
    let capacity = (n as u64).saturating_mul(horizon as u64);
    if budget > capacity {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} exceeds n * horizon = {capacity}"
        )));
    }
    if horizon == 0 {
        return Ok(StrategyMatrix {
            n,
            budget,
            rounds: Vec::new(),
        });
    }
    let base = (budget / horizon as u64) as usize;
    let extra = (budget % horizon as u64) as usize;
    let mut counts = vec![base; horizon];
    for t in index::sample(rng, horizon, extra) {
        counts[t] += 1;
    }
    let rounds = counts
        .into_iter()
        .map(|k| {
            let mut agents = index::sample(rng, n, k).into_vec();
            agents.sort_unstable();
            agents
        })
        .collect();
    Ok(StrategyMatrix { n, budget, rounds })
}

/// The finite set of strategies a lobbyist randomizes over uniformly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPool {
    matrices: Vec<StrategyMatrix>,
}

impl StrategyPool {
    pub fn new(matrices: Vec<StrategyMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Empty("strategy pool"));
        }
        Ok(StrategyPool { matrices })
    }

    pub fn generate<R: Rng + ?Sized>(
        count: usize,
        n: usize,
        horizon: usize,
        budget: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Empty("strategy pool"));
        }
        let matrices = (0..count)
            .map(|_| generate_uniform_strategy(n, horizon, budget, rng))
            .collect::<Result<_>>()?;
        Ok(StrategyPool { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[StrategyMatrix] {
        &self.matrices
    }

    pub fn get(&self, index: usize) -> Option<&StrategyMatrix> {
        self.matrices.get(index)
    }

    /// Uniform draw; returns the index alongside the matrix.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, &StrategyMatrix) {
        let idx = rng.gen_range(0..self.matrices.len());
        (idx, &self.matrices[idx])
    }

    /// Every member is feasible for `lobbyist` and sized for `n` agents.
    pub fn check_feasible(&self, lobbyist: &Lobbyist, n: usize) -> Result<()> {
        for m in &self.matrices {
            if m.n != n || m.horizon() > lobbyist.horizon || m.total() > lobbyist.budget {
                return Err(Error::InvalidConfig(format!(
                    "pool matrix (n={}, horizon={}, signals={}) infeasible for lobbyist (n={n}, horizon={}, budget={})",
                    m.n,
                    m.horizon(),
                    m.total(),
                    lobbyist.horizon,
                    lobbyist.budget
                )));
            }
        }
        Ok(())
    }

    /// Matrices joined by blank lines.
    pub fn to_text(&self) -> String {
        self.matrices
            .iter()
            .map(StrategyMatrix::to_text)
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_matrices(text)?)
    }
}

impl Serialize for StrategyPool {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for StrategyPool {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        StrategyPool::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Lobby signals delivered at the start of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLobbySchedule {
    pub round: usize,
    /// Lobbyist indices in the order their signals arrive.
    pub order: Vec<usize>,
    /// `(agent, model)` pairs grouped by lobbyist in `order`, agents
    /// ascending within a lobbyist.
    pub deliveries: Vec<(usize, SupportedModel)>,
}

impl RoundLobbySchedule {
    pub fn is_empty(&self) -> bool {
        self.deliveries.is_empty()
    }

    /// Signals received by `agent` this round, in arrival order.
    pub fn signals_for(&self, agent: usize) -> Vec<SupportedModel> {
        self.deliveries
            .iter()
            .filter(|(a, _)| *a == agent)
            .map(|&(_, m)| m)
            .collect()
    }
}

/// Draws a uniform ordering of the lobbyists and lists the round-`t`
/// deliveries in that order.
pub fn schedule_round<R: Rng + ?Sized>(
    lobbyists: &[(Lobbyist, &StrategyMatrix)],
    t: usize,
    rng: &mut R,
) -> RoundLobbySchedule {
    let mut order: Vec<usize> = (0..lobbyists.len()).collect();
    let active = lobbyists
        .iter()
        .any(|(l, m)| t <= l.horizon && !m.targets(t).is_empty());
    if !active {
        return RoundLobbySchedule {
            round: t,
            order,
            deliveries: Vec::new(),
        };
    }
    if order.len() > 1 {
        order.shuffle(rng);
    }
    let mut deliveries = Vec::new();
    for &l in &order {
        let (lobbyist, matrix) = &lobbyists[l];
        if t > lobbyist.horizon {
            continue;
        }
        deliveries.extend(matrix.targets(t).iter().map(|&i| (i, lobbyist.model)));
    }
    RoundLobbySchedule {
        round: t,
        order,
        deliveries,
    }
}

/// `-|mean(p) - pi_m|` for the model the lobbyist supports.
pub fn realized_payoff(
    final_probabilities: &[f64],
    model: SupportedModel,
    models: &ModelPair,
) -> Result<f64> {
    if final_probabilities.is_empty() {
        return Err(Error::Empty("population"));
    }
    let mean = final_probabilities.iter().sum::<f64>() / final_probabilities.len() as f64;
    Ok(-(mean - models.probability_of(model)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn uniform_strategy_paper_scale() {
        let mut rng = rng_from_seed(1);
        let m = generate_uniform_strategy(500, 100, 10_000, &mut rng).unwrap();
        assert_eq!(m.total(), 10_000);
        assert!(m.column_sums().iter().all(|&c| c == 100));
    }

    #[test]
    fn uniform_strategy_edges() {
        let mut rng = rng_from_seed(2);
        let m = generate_uniform_strategy(5, 2, 0, &mut rng).unwrap();
        assert_eq!(m.total(), 0);

        let m = generate_uniform_strategy(3, 2, 6, &mut rng).unwrap();
        for t in 1..=2 {
            for i in 0..3 {
                assert!(m.get(i, t));
            }
        }

        assert!(generate_uniform_strategy(3, 2, 7, &mut rng).is_err());

        let m = generate_uniform_strategy(10, 7, 23, &mut rng).unwrap();
        assert_eq!(m.total(), 23);
        let sums = m.column_sums();
        assert_eq!(sums.iter().filter(|&&c| c == 4).count(), 2);
        assert_eq!(sums.iter().filter(|&&c| c == 3).count(), 5);
    }

    #[test]
    fn pool_sizes() {
        let mut rng = rng_from_seed(3);
        let pool = StrategyPool::generate(100, 50, 10, 100, &mut rng).unwrap();
        assert_eq!(pool.len(), 100);
        let lobbyist = Lobbyist {
            model: SupportedModel::Pessimistic,
            budget: 100,
            horizon: 10,
        };
        pool.check_feasible(&lobbyist, 50).unwrap();
        assert_eq!(StrategyPool::generate(1, 5, 2, 3, &mut rng).unwrap().len(), 1);
        assert!(StrategyPool::generate(0, 5, 2, 3, &mut rng).is_err());
        assert!(StrategyPool::new(Vec::new()).is_err());
    }

    #[test]
    fn draws_are_seeded_and_uniform() {
        let mut rng = rng_from_seed(4);
        let single = StrategyPool::generate(1, 4, 2, 3, &mut rng).unwrap();
        for _ in 0..10 {
            assert_eq!(single.draw(&mut rng).0, 0);
        }

        let pool = StrategyPool::generate(100, 4, 2, 3, &mut rng).unwrap();
        let a = pool.draw(&mut rng_from_seed(99)).0;
        let b = pool.draw(&mut rng_from_seed(99)).0;
        assert_eq!(a, b);

        // Binomial(10000, 1/2): sd = 50, 3 sd < 300.
        let pair = StrategyPool::generate(2, 4, 2, 3, &mut rng).unwrap();
        let zeros = (0..10_000).filter(|_| pair.draw(&mut rng).0 == 0).count();
        assert!((4700..=5300).contains(&zeros), "{zeros}");
    }

    fn lobbyist(model: SupportedModel, budget: u64, horizon: usize) -> Lobbyist {
        Lobbyist {
            model,
            budget,
            horizon,
        }
    }

    #[test]
    fn schedule_single_lobbyist() {
        let l = lobbyist(SupportedModel::Pessimistic, 2, 2);
        let m = StrategyMatrix::from_signals(4, 2, 2, &[(1, 2), (2, 0)]).unwrap();
        let mut rng = rng_from_seed(5);
        let s = schedule_round(&[(l, &m)], 1, &mut rng);
        assert_eq!(s.order, vec![0]);
        assert_eq!(s.deliveries, vec![(2, SupportedModel::Pessimistic)]);
        assert!(schedule_round(&[(l, &m)], 3, &mut rng).is_empty());
    }

    #[test]
    fn schedule_two_lobbyists_same_target() {
        let p = lobbyist(SupportedModel::Pessimistic, 1, 5);
        let o = lobbyist(SupportedModel::Optimistic, 1, 5);
        let mp = StrategyMatrix::from_signals(6, 5, 1, &[(5, 3)]).unwrap();
        let mo = StrategyMatrix::from_signals(6, 5, 1, &[(5, 3)]).unwrap();
        let mut rng = rng_from_seed(6);
        let s = schedule_round(&[(p, &mp), (o, &mo)], 5, &mut rng);
        let expected: Vec<_> = s
            .order
            .iter()
            .map(|&l| if l == 0 { SupportedModel::Pessimistic } else { SupportedModel::Optimistic })
            .collect();
        assert_eq!(s.signals_for(3), expected);
        for agent in [0, 1, 2, 4, 5] {
            assert!(s.signals_for(agent).is_empty());
        }
    }

    #[test]
    fn schedule_ordering_is_uniform() {
        let p = lobbyist(SupportedModel::Pessimistic, 1, 1);
        let o = lobbyist(SupportedModel::Optimistic, 1, 1);
        let m = StrategyMatrix::from_signals(2, 1, 1, &[(1, 0)]).unwrap();
        let mut rng = rng_from_seed(7);
        let rounds = 10_000;
        let identity = (0..rounds)
            .filter(|_| schedule_round(&[(p, &m), (o, &m)], 1, &mut rng).order == vec![0, 1])
            .count();
        assert!((4850..=5150).contains(&identity), "{identity}");
    }

    #[test]
    fn payoff_examples() {
        let models = ModelPair::default();
        let p = realized_payoff(&[0.99; 10], SupportedModel::Pessimistic, &models).unwrap();
        assert!(p.abs() < 1e-12);
        let p = realized_payoff(&[0.01; 10], SupportedModel::Pessimistic, &models).unwrap();
        assert!((p + 0.98).abs() < 1e-12);
        let p = realized_payoff(&[0.01, 0.99], SupportedModel::Optimistic, &models).unwrap();
        assert!((p + 0.49).abs() < 1e-12);
        assert!(realized_payoff(&[], SupportedModel::Optimistic, &models).is_err());
    }

    #[test]
    fn text_format() {
        let m = StrategyMatrix::from_signals(4, 3, 5, &[(2, 3), (1, 1), (2, 0)]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "n=4 horizon=3 budget=5\n1 1\n2 0\n2 3\n");
        assert_eq!(StrategyMatrix::parse(&text).unwrap(), m);

        assert!(StrategyMatrix::from_signals(4, 3, 1, &[(1, 0), (2, 0)]).is_err());
        assert!(StrategyMatrix::from_signals(4, 3, 5, &[(4, 0)]).is_err());
        assert!(StrategyMatrix::from_signals(4, 3, 5, &[(0, 0)]).is_err());
        assert!(StrategyMatrix::from_signals(4, 3, 5, &[(1, 4)]).is_err());
        assert!(StrategyMatrix::from_signals(4, 3, 5, &[(1, 2), (1, 2)]).is_err());
        assert!(StrategyMatrix::parse("1 1\n").is_err());
        assert!(StrategyMatrix::parse("n=4 horizon=3\n").is_err());

        let mut rng = rng_from_seed(8);
        let pool = StrategyPool::generate(3, 5, 4, 7, &mut rng).unwrap();
        assert_eq!(StrategyPool::parse(&pool.to_text()).unwrap(), pool);
    }
}
