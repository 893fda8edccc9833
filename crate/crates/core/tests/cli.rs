use std::path::PathBuf;
use std::process::{Command, Output};

use abelnet::cli::parse_network;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn abelnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abelnet")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

#[test]
fn run_exit_codes() {
    let grid = abelnet(&["run", &path("sandpile_grid.toml")]);
    assert_eq!(code(&grid), 0, "{}", String::from_utf8_lossy(&grid.stderr));
    assert!(stdout(&grid).contains("odometer:"));

    let cycle = abelnet(&["run", &path("two_cycle.toml")]);
    assert_eq!(code(&cycle), 2);
    assert!(stdout(&cycle).contains("repeating word: a:0 b:0"));

    let growth = abelnet(&["run", &path("growth.toml"), "--budget", "100"]);
    assert_eq!(code(&growth), 3);
    let zero_budget = abelnet(&["run", &path("counter.toml"), "--budget", "0"]);
    assert_eq!(code(&zero_budget), 3);
}

#[test]
fn run_json_report() {
    let o = abelnet(&["run", &path("sandpile_grid.toml"), "--json"]);
    let v = json(&o);
    assert_eq!(v["status"], "halted");
    assert_eq!(v["steps"], 20);
    assert_eq!(v["odometer"]["nw:0"], 6);
    assert_eq!(v["odometer"]["sink:0"], 6);

    let o = abelnet(&["run", &path("two_cycle.toml"), "--json"]);
    let v = json(&o);
    assert_eq!(v["status"], "non-halting");
    assert!(v["certificate"].is_object());
}

#[test]
fn every_scheduler_reports_the_same_odometer() {
    let reference = json(&abelnet(&["run", &path("sandpile_grid.toml"), "--json"]));
    for s in ["lifo", "rr", "greedy", "random:7", "random:8"] {
        let v = json(&abelnet(&["run", &path("sandpile_grid.toml"), "--json", "--scheduler", s]));
        assert_eq!(v["odometer"], reference["odometer"], "{s}");
        assert_eq!(v["states"], reference["states"], "{s}");
        assert!(v["states"].is_object());
    }
}

#[test]
fn parallel_output_matches_sequential() {
    for file in ["sandpile_grid.toml", "two_cycle.toml", "rotor_chain.toml"] {
        let seq = abelnet(&["run", &path(file)]);
        for k in ["1", "2", "4"] {
            let par = abelnet(&["run", &path(file), "--parallel", k, "--seed", "3"]);
            assert_eq!(code(&par), code(&seq));
            assert_eq!(par.stdout, seq.stdout, "{file} with {k} workers");
        }
    }
    let bad = abelnet(&["run", &path("two_cycle.toml"), "--parallel", "2", "--trace", "/dev/null"]);
    assert_eq!(code(&bad), 1);
    let bad = abelnet(&["run", &path("two_cycle.toml"), "--parallel", "2", "--scheduler", "lifo"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn traces_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let o = abelnet(&["run", &path("sandpile_grid.toml"), "--trace", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 20);
    assert_eq!(lines[0]["step"], 0);
    assert!(lines[0].get("counts").is_none());

    let full = dir.path().join("full.jsonl");
    abelnet(&["run", &path("sandpile_grid.toml"), "--trace", full.to_str().unwrap(), "--trace-full"]);
    let first: Value = serde_json::from_str(std::fs::read_to_string(&full).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["counts"].as_array().unwrap().len(), 5);
    assert_eq!(first["digest"], lines[0]["digest"]);
}

#[test]
fn check_passes_and_fails() {
    let ok = abelnet(&["check", &path("sandpile_grid.toml"), "--trials", "200"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).ends_with("result: pass\n"));

    let bad = abelnet(&["check", &path("mutant.toml"), "--trials", "200"]);
    assert_eq!(code(&bad), 4);
    assert!(stdout(&bad).contains("witness from state"));
    let v = json(&abelnet(&["check", &path("mutant.toml"), "--trials", "200", "--json"]));
    assert_eq!(v["passed"], false);
    assert_eq!(v["schedulers"]["agree"], false);
}

#[test]
fn solve_reports() {
    let o = abelnet(&["solve", &path("half_plus_one.toml"), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["Feasible"]["minimizer"], serde_json::json!([1]));

    let o = abelnet(&["solve", &path("zero.toml")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("minimizer: [0, 0]"));

    let o = abelnet(&["solve", &path("successor.toml")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("[6]"));

    let o = abelnet(&["solve", &path("toppling_path.toml")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("topplings v: [2, 2, 2]"));

    assert_eq!(code(&abelnet(&["solve", &path("closed_pair.toml")])), 2);
    assert_eq!(code(&abelnet(&["solve", &path("toppling_path.toml"), "--budget", "2"])), 3);
}

#[test]
fn aggregate_writes_identical_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    let o = abelnet(&["aggregate", "-n", "1000", "-o", a.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["visited"], 1000);
    assert!(v["ratio"].as_f64().unwrap() <= 1.5);
    assert_eq!(v["order"], "NESW");
    let o = abelnet(&["aggregate", "-n", "1000", "-o", b.to_str().unwrap(), "--json", "--scheduler", "lifo"]);
    assert_eq!(code(&o), 0);
    let pgm = std::fs::read(&a).unwrap();
    assert_eq!(pgm, std::fs::read(&b).unwrap());
    assert!(pgm.starts_with(b"P2\n"));

    let cramped = abelnet(&["aggregate", "-n", "1000", "--radius", "5"]);
    assert_eq!(code(&cramped), 1);
    assert!(String::from_utf8_lossy(&cramped.stderr).contains("radius"));
}

#[test]
fn errors_exit_with_one() {
    let missing = abelnet(&["run", "/nonexistent/net.toml"]);
    assert_eq!(code(&missing), 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[vertex]]\nname = \"a\"\nprocessor = { family = \"teleporter\" }\n").unwrap();
    let o = abelnet(&["run", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("teleporter"));

    std::fs::write(&bad, "[[vertex]]\nname = \"a\"\nprocessor = { family = \"sink\"\n").unwrap();
    let o = abelnet(&["run", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    assert_eq!(code(&abelnet(&["run", &path("counter.toml"), "--scheduler", "sideways"])), 1);
    assert_eq!(code(&abelnet(&["frobnicate"])), 1);
}

#[test]
fn network_files_round_trip() {
    for entry in std::fs::read_dir(data("")).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        if text.starts_with("kind") {
            continue;
        }
        let b = parse_network(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let canonical = b.to_toml();
        let again = parse_network(&canonical).unwrap();
        assert_eq!(again.to_document(), b.to_document(), "{}", p.display());
        assert_eq!(again.to_toml(), canonical);
        assert_eq!(again.input, b.input);
        assert_eq!(again.states, b.states);
    }
}
