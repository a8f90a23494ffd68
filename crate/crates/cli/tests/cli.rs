use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("spawn lab")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "lab failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn sample_then_scc_and_explore() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let g = g.to_str().unwrap();
    ok(lab(&["sample", "--n", "500", "--lambda", "1.5", "--seed", "4", "--out", g]));
    let again = ok(lab(&["sample", "--n", "500", "--lambda", "1.5", "--seed", "4"]));
    assert_eq!(fs::read_to_string(g).unwrap(), again);

    let scc = json(&ok(lab(&["scc", g, "--top-k", "3"])));
    assert!(scc["nontrivial"].as_u64().unwrap() <= scc["surplus_plus_ancestral"].as_u64().unwrap());
    assert!(scc["ranked"].as_array().unwrap().len() <= 3);

    let ex = json(&ok(lab(&["explore", g])));
    assert_eq!(ex["exploration"]["order"].as_array().unwrap().len(), 500);
}

#[test]
fn explore_undirected() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("u.txt");
    let g = g.to_str().unwrap();
    ok(lab(&["sample", "--n", "100", "--p", "0.02", "--undirected", "--seed", "1", "--out", g]));
    let ex = json(&ok(lab(&["explore", g])));
    assert_eq!(ex["directed"], false);
    assert!(lab(&["scc", g]).status.code() == Some(1));
}

#[test]
fn continuum_and_limit_lines() {
    let text = ok(lab(&["continuum-sample", "--sigma", "1", "--grid", "256", "--replicas", "3", "--seed", "2"]));
    let rows: Vec<_> = text.lines().map(json).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let n = r["n"].as_u64().unwrap();
        assert_eq!(n, r["n_ancestral"].as_u64().unwrap() + r["n_nonancestral"].as_u64().unwrap());
    }
    let text = ok(lab(&["limit-sample", "--horizon", "2", "--step", "1e-3", "--replicas", "2", "--seed", "2"]));
    for r in text.lines().map(json) {
        assert_eq!(r["components"].as_array().unwrap().len(), 5);
    }
}

#[test]
fn realize_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lab"))
        .arg("realize")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"vertices":[0,1],"edges":[[0,1,0.5],[0,1,0.2],[1,0,0.25]]}"#)
        .unwrap();
    let tp = json(&ok(child.wait_with_output().unwrap()));
    assert_eq!(tp["pairs"].as_array().unwrap().len(), 2);
}

#[test]
fn experiment_subcommand_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"star-equivalence\"\nseed = 1\nn = 20\nreplicas = 30\n").unwrap();
    let out = dir.path().join("res");
    let summary =
        json(&ok(lab(&["star-equivalence", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])));
    assert_eq!(summary["summary"]["partition_mismatches"], 0.0);
    let csv = fs::read_to_string(out.join("replicas.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert!(out.join("summary.json").exists());

    fs::write(&cfg, "experiment = \"star-equivalence\"\nseed = 1\nbogus = 3\n").unwrap();
    assert!(!lab(&["star-equivalence", "--config", cfg.to_str().unwrap()]).status.success());
}
