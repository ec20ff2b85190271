use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lobbynet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lobbynet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_result_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = lobbynet(&[
        "run", "--scenario", "one-lobbyist", "--agents", "20", "--budget", "200",
        "--horizon", "20", "--pool-size", "5", "--seed", "9", "--trajectory", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(result["seed"], 9);
    assert_eq!(result["final_weights"].as_array().unwrap().len(), 20);
    assert_eq!(result["chosen_strategy_ids"].as_array().unwrap().len(), 1);
    let csv = fs::read_to_string(dir.path().join("run.json.trajectory.csv")).unwrap();
    assert!(csv.starts_with("sweep,agent_id,p\n"));
    assert!(dir.path().join("run.json.manifest.json").exists());
}

#[test]
fn run_manifest_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = lobbynet(&[
        "run", "--scenario", "two-lobbyists", "--agents", "30", "--budget", "300",
        "--horizon", "30", "--lambda", "0.6", "--phi", "0.3", "--seed", "4", "--out", p(&a),
    ]);
    assert!(o.status.success());
    let manifest = dir.path().join("a.json.manifest.json");
    let o = lobbynet(&["run", "--config", p(&manifest), "--out", p(&b)]);
    assert!(o.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "sweep", "--agents", "15", "--grid", "0.2:0.8:0.3,0:0.5:0.5", "--runs", "4", "--seed", "11",
    ];
    let mut args_a = common.to_vec();
    args_a.extend(["--workers", "1", "--out", p(&a)]);
    let mut args_b = common.to_vec();
    args_b.extend(["--workers", "3", "--out", p(&b)]);
    assert!(lobbynet(&args_a).status.success());
    assert!(lobbynet(&args_b).status.success());
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(csv.starts_with("lambda,phi,mean_C,mean_p,mean_rounds_sweeps,converged_fraction"));

    let c = dir.path().join("c.csv");
    let manifest = dir.path().join("a.csv.manifest.json");
    assert!(lobbynet(&["sweep", "--config", p(&manifest), "--out", p(&c)]).status.success());
    assert_eq!(csv, fs::read_to_string(&c).unwrap());
}

#[test]
fn nash_reports_degenerate_symmetric_game() {
    let o = lobbynet(&["nash"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("AllOnes"));
    assert!(text.contains("all_profiles: true"));
    let json_start = text.find("\n{").unwrap() + 1;
    let v: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(v["solution"]["sigma"][0][0], 0.5);
}

#[test]
fn pool_gen_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pool.txt");
    let o = lobbynet(&[
        "pool-gen", "--agents", "6", "--horizon", "4", "--budget", "10", "--pool-size", "3",
        "--out", p(&out),
    ]);
    assert!(o.status.success());
    let pool = lobbynet_core::StrategyPool::parse(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(pool.len(), 3);
    assert!(pool.matrices().iter().all(|m| m.total() == 10));
}

#[test]
fn edge_list_topology_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    fs::write(&edges, "n=3\n0 1\n1 2\n2 0\n").unwrap();
    let out = dir.path().join("r.json");
    let o = lobbynet(&["run", "--agents", "3", "--edge-list", p(&edges), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let bad_edges = dir.path().join("bad.txt");
    fs::write(&bad_edges, "n=3\n1 1\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--agents", "10", "--lambda", "1.5", "--out", p(&out)],
        vec!["run", "--agents", "10", "--pi-o", "0.9", "--pi-p", "0.1", "--out", p(&out)],
        vec!["run", "--agents", "10", "--scenario", "one-lobbyist", "--out", p(&out)],
        vec!["run", "--agents", "3", "--edge-list", p(&bad_edges), "--out", p(&out)],
        vec!["run", "--config", "/nonexistent/config.json", "--out", p(&out)],
        vec!["sweep", "--grid", "0:1", "--out", p(&out)],
        vec!["sweep", "--agents", "5", "--workers", "0", "--out", p(&out)],
        vec!["run", "--bogus-flag"],
    ];
    for args in cases {
        let o = lobbynet(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
