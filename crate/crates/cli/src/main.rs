mod args;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use lobbynet_core::games::{example1_optimal_strategy, example2_equilibrium, example2_payoffs};
use lobbynet_core::rng::rng_from_seed;
use lobbynet_core::sweep::{emit_csv, run_sweep};
use lobbynet_core::{run, BiasProfile, ModelPair, StrategyPool};
use serde::Serialize;

use args::{Cli, Command};

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| e.to_string())
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
        } => {
            let manifest = config::resolve_run(&scenario, seed)?;
            let result = run(&manifest.scenario, manifest.seed).map_err(|e| e.to_string())?;
            if let Some(traj) = &result.trajectory {
                write(&sibling(&out, ".trajectory.csv"), &traj.to_csv())?;
            }
            write(&out, &to_json(&result)?)?;
            write(&sibling(&out, ".manifest.json"), &to_json(&manifest)?)?;
            eprintln!(
                "rounds={} sweeps={:.3} converged={} mean_p={:.6}",
                result.rounds, result.sweeps, result.converged, result.mean_p
            );
        }
        Command::Sweep {
            scenario,
            seed,
            runs,
            grid,
            workers,
            out,
        } => {
            if workers == Some(0) {
                return Err("--workers must be at least 1".into());
            }
            let spec = config::resolve_sweep(&scenario, seed, runs, grid.as_deref())?;
            let cells = run_sweep(&spec, workers).map_err(|e| e.to_string())?;
            write(&out, &emit_csv(&cells))?;
            write(&sibling(&out, ".manifest.json"), &to_json(&spec)?)?;
            eprintln!("{} cells, {} runs", cells.len(), spec.total_runs());
        }
        Command::Nash {
            pi_o,
            pi_p,
            tau,
            budget,
            initial_weight,
            lambda,
            phi,
            out,
        } => {
            let models = ModelPair::new(pi_o, pi_p).map_err(|e| e.to_string())?;
            let bias = BiasProfile::new(lambda, phi).map_err(|e| e.to_string())?;
            let single = example1_optimal_strategy(tau, budget, initial_weight, &bias, &models)
                .map_err(|e| e.to_string())?;
            let game = example2_payoffs(&models);
            let solution = example2_equilibrium(&game);

            println!("single agent, one pessimistic lobbyist");
            println!("  strategy            {:?}", single.strategy);
            println!("  weight path         {:?}", single.weight_path);
            println!("  strictly decreasing {}", single.strictly_decreasing);
            println!("  payoff              {:.6}", single.payoff);
            println!();
            println!("two agents, two lobbyists (rows: pessimistic, optimistic)");
            println!("  {:<14}{:>14}{:>14}", "", "same", "different");
            for (l, name) in ["pessimistic", "optimistic"].iter().enumerate() {
                println!(
                    "  {:<14}{:>14.10}{:>14.10}",
                    name, game.same_target[l], game.different_target[l]
                );
            }
            println!("  sigma      {:?}", solution.sigma);
            println!("  equilibria {:?}", solution.equilibria);

            #[derive(Serialize)]
            struct NashReport<'a> {
                models: ModelPair,
                bias: BiasProfile,
                single_agent: &'a lobbynet_core::games::Example1Solution,
                game: &'a lobbynet_core::games::TwoByTwoGame,
                solution: &'a lobbynet_core::games::GameSolution,
            }
            let json = to_json(&NashReport {
                models,
                bias,
                single_agent: &single,
                game: &game,
                solution: &solution,
            })?;
            println!();
            print!("{json}");
            if let Some(out) = out {
                write(&out, &json)?;
            }
        }
        Command::PoolGen { pool, out } => {
            let m = config::resolve_pool(&pool)?;
            let mut rng = rng_from_seed(m.seed);
            let generated = StrategyPool::generate(m.pool_size, m.n, m.horizon, m.budget, &mut rng)
                .map_err(|e| e.to_string())?;
            write(&out, &generated.to_text())?;
            write(&sibling(&out, ".manifest.json"), &to_json(&m)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
