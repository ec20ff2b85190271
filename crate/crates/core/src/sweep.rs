//! Monte Carlo replication over a grid of bias profiles.
//!
//! Every `(lambda, phi, run)` task gets its own seed derived from the master
//! seed and the task indices, so results do not depend on how tasks are
//! scheduled across workers.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::BiasProfile;
use crate::engine::{run, ScenarioConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub runs_per_cell: usize,
    /// Template scenario; its bias profile is replaced per cell.
    pub scenario: ScenarioConfig,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() || self.phi_grid.is_empty() {
            return Err(Error::Empty("sweep grid"));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::InvalidConfig("runs_per_cell must be at least 1".into()));
        }
        for &lambda in &self.lambda_grid {
            for &phi in &self.phi_grid {
                BiasProfile::new(lambda, phi)?;
            }
        }
        self.scenario.validate()
    }

    pub fn total_runs(&self) -> usize {
        self.lambda_grid.len() * self.phi_grid.len() * self.runs_per_cell
    }

    pub fn run_seed(&self, lambda_idx: usize, phi_idx: usize, run: usize) -> u64 {
        derive_seed(
            self.master_seed,
            &[lambda_idx as u64, phi_idx as u64, run as u64],
        )
    }

    pub fn cell_config(&self, lambda_idx: usize, phi_idx: usize) -> ScenarioConfig {
        let mut cfg = self.scenario.clone();
        cfg.bias = BiasProfile {
            lambda_base: self.lambda_grid[lambda_idx],
            phi: self.phi_grid[phi_idx],
        };
        cfg.trajectory = None;
        cfg
    }
}

/// Per-run numbers kept for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub effective_clusters: Option<f64>,
    pub mean_p: f64,
    pub rounds: u64,
    pub sweeps: f64,
    pub converged: bool,
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub lambda: f64,
    pub phi: f64,
    pub runs: usize,
    /// `None` for frozen dynamics, where clusters are meaningless.
    pub mean_c: Option<f64>,
    pub mean_p: f64,
    pub mean_rounds: f64,
    pub mean_rounds_sweeps: f64,
    pub mean_payoffs: Vec<f64>,
    pub converged_fraction: f64,
}

impl CellAggregate {
    /// Folds run summaries in the order given.
    pub fn from_runs(lambda: f64, phi: f64, runs: &[RunSummary]) -> Self {
        let k = runs.len() as f64;
        let mean = |f: &dyn Fn(&RunSummary) -> f64| runs.iter().map(f).sum::<f64>() / k;
        let mean_c = if runs.iter().all(|r| r.effective_clusters.is_some()) {
            Some(mean(&|r| r.effective_clusters.unwrap()))
        } else {
            None
        };
        let lobbies = runs.first().map_or(0, |r| r.payoffs.len());
        CellAggregate {
            lambda,
            phi,
            runs: runs.len(),
            mean_c,
            mean_p: mean(&|r| r.mean_p),
            mean_rounds: mean(&|r| r.rounds as f64),
            mean_rounds_sweeps: mean(&|r| r.sweeps),
            mean_payoffs: (0..lobbies).map(|l| mean(&|r| r.payoffs[l])).collect(),
            converged_fraction: runs.iter().filter(|r| r.converged).count() as f64 / k,
        }
    }
}

/// Runs every cell of the grid. `workers = None` uses the global rayon pool.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<CellAggregate>> {
    spec.validate()?;
    let tasks: Vec<(usize, usize, usize)> = (0..spec.lambda_grid.len())
        .flat_map(|li| {
            (0..spec.phi_grid.len())
                .flat_map(move |pi| (0..spec.runs_per_cell).map(move |r| (li, pi, r)))
        })
        .collect();
    let configs: Vec<Vec<ScenarioConfig>> = (0..spec.lambda_grid.len())
        .map(|li| {
            (0..spec.phi_grid.len())
                .map(|pi| spec.cell_config(li, pi))
                .collect()
        })
        .collect();

    let execute = || -> Result<Vec<RunSummary>> {
        tasks
            .par_iter()
            .map(|&(li, pi, r)| {
                let res = run(&configs[li][pi], spec.run_seed(li, pi, r))?;
                Ok(RunSummary {
                    effective_clusters: res.effective_clusters,
                    mean_p: res.mean_p,
                    rounds: res.rounds,
                    sweeps: res.sweeps,
                    converged: res.converged,
                    payoffs: res.payoffs,
                })
            })
            .collect()
    };
    let summaries = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(execute)?,
        None => execute()?,
    };

    let mut cells = Vec::with_capacity(spec.lambda_grid.len() * spec.phi_grid.len());
    for (cell, chunk) in summaries.chunks(spec.runs_per_cell).enumerate() {
        let li = cell / spec.phi_grid.len();
        let pi = cell % spec.phi_grid.len();
        cells.push(CellAggregate::from_runs(
            spec.lambda_grid[li],
            spec.phi_grid[pi],
            chunk,
        ));
    }
    Ok(cells)
}

pub const CSV_HEADER: &str =
    "lambda,phi,mean_C,mean_p,mean_rounds_sweeps,converged_fraction,mean_payoff_1,mean_payoff_2";

/// Heatmap CSV, rows sorted by `(lambda, phi)`.
pub fn emit_csv(aggregates: &[CellAggregate]) -> String {
    let mut rows: Vec<&CellAggregate> = aggregates.iter().collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.phi.total_cmp(&b.phi)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for a in rows {
        let c = a.mean_c.map_or_else(|| "NA".to_string(), |c| c.to_string());
        let payoff = |l: usize| a.mean_payoffs.get(l).map_or(String::new(), |u| u.to_string());
        let _ = writeln!(
            out,
            "{},{},{c},{},{},{},{},{}",
            a.lambda,
            a.phi,
            a.mean_p,
            a.mean_rounds_sweeps,
            a.converged_fraction,
            payoff(0),
            payoff(1)
        );
    }
    out
}

/// Parses `start:end:step` into an inclusive, evenly spaced grid.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("grid range must be `start:end:step`, got `{text}`"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, end, step] = parts.as_slice() else {
        return Err(bad());
    };
    if !(*step > 0.0) || end < start {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// `"a:b:step,a:b:step"` giving the lambda and phi grids.
pub fn parse_grid(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    match text.split_once(',') {
        Some((l, p)) => Ok((parse_range(l)?, parse_range(p)?)),
        None => Err(Error::InvalidConfig(format!(
            "grid must be `lambda_range,phi_range`, got `{text}`"
        ))),
    }
}

pub fn default_grid() -> Vec<f64> {
    parse_range("0:1:0.1").expect("static grid")
}
