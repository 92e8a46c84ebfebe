use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn zoo(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../zoo").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsolive")).args(args).env_remove("TSOLIVE_BUDGET").output().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}\nstdout: {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn spin_violates_lock_freedom_and_witness_replays() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("spin.lasso");
    let spin = zoo("spin.lib");
    let o = run(&["check", "--property", "lock-freedom", "--procs", "1", "--buffer-bound", "1", "--witness", p(&w), p(&spin)]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert_eq!(r["result"]["verdict"], "VIOLATED");
    assert_eq!(r["result"]["bound"], 1);
    assert!(!r["result"]["loop"].as_array().unwrap().is_empty());

    let o = run(&["replay", p(&spin), p(&w)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["result"]["verdict"], "REPLAYS");
    assert!(r["result"]["violates"].as_array().unwrap().iter().any(|v| v == "lock-freedom"));
}

#[test]
fn trivial_is_obstruction_free() {
    let o = run(&["check", "--property", "obstruction-freedom", p(&zoo("trivial.lib"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["verdict"], "SATISFIED");
}

#[test]
fn no_violation_at_bound_exits_zero() {
    let o = run(&["check", "--property", "wait-freedom", "--buffer-bound", "2", p(&zoo("sb.lib"))]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["result"]["verdict"], "NO_VIOLATION_AT_BOUND");
    assert_eq!(r["parameters"]["buffer_bound"], 2);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["check", p(&zoo("trivial.lib"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lib");
    std::fs::write(&bad, "values: a\nmethod m { return b }\n").unwrap();
    let o = run(&["check", "--property", "lock-freedom", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.lib:2:"), "{err}");
}

#[test]
fn help_lists_exit_codes() {
    let o = run(&["check", "--help"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("Exit codes:"));
    assert!(out.contains("3  node budget exceeded"));
}

#[test]
fn budget_exceeded_exits_three() {
    let o = run(&["check", "--property", "lock-freedom", "--budget", "10", p(&zoo("sb.lib"))]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(&o)["result"]["verdict"], "BUDGET_EXCEEDED");

    let o = Command::new(env!("CARGO_BIN_EXE_tsolive"))
        .args(["explore", p(&zoo("sb.lib"))])
        .env("TSOLIVE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(&o)["parameters"]["budget"], 10);
}

#[test]
fn reports_are_stable() {
    let args = ["check", "--property", "starvation-freedom", "--buffer-bound", "2", "--witness", "/dev/null"];
    let lib = zoo("cas_counter.lib");
    let mut a = report(&run(&[&args[..], &[p(&lib)]].concat()));
    let mut b = report(&run(&[&args[..], &[p(&lib)]].concat()));
    a["wall_ms"] = Value::Null;
    b["wall_ms"] = Value::Null;
    assert_eq!(a, b);
    assert_eq!(a["inputs"].as_object().unwrap().len(), 1);
}

fn observables(model: &str) -> (u64, BTreeSet<String>) {
    let o = run(&["explore", "--model", model, "--buffer-bound", "2", "--observables", p(&zoo("sb.lib"))]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let set = r["result"]["observable_configs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    (r["result"]["nodes"].as_u64().unwrap(), set)
}

#[test]
fn store_buffering_tso_extends_sc() {
    let (n_sc, sc) = observables("sc");
    let (n_tso, tso) = observables("tso");
    assert_ne!(n_sc, n_tso);
    assert!(sc.is_subset(&tso));
    assert!(tso.len() > sc.len());
}

#[test]
fn explore_export_writes_graph() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    let o = run(&["explore", "--procs", "1", "--export", p(&prefix), p(&zoo("flag_handoff.lib"))]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let edges = std::fs::read_to_string(prefix.with_extension("edges")).unwrap();
    let nodes = std::fs::read_to_string(prefix.with_extension("nodes")).unwrap();
    assert_eq!(edges.lines().count() as u64, r["result"]["edges"].as_u64().unwrap());
    assert_eq!(nodes.lines().count() as u64, r["result"]["nodes"].as_u64().unwrap());
}

#[test]
fn cpcp_solve() {
    let o = run(&["cpcp", "solve", "--a", "ab,b", "--b", "a,bb"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["solution"], serde_json::json!([1, 2]));

    let o = run(&["cpcp", "solve", "--a", "a", "--b", "b"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(report(&o)["result"]["verdict"], "NONE_UP_TO");
}

#[test]
fn cpcp_witness_without_solution_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["cpcp", "witness", "--a", "a", "--b", "b", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn cpcp_witness_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("aa.cpcp");
    std::fs::write(&inst, "a\nA: a\nB: a\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["cpcp", "witness", p(&inst), "--out-dir", p(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    let v = &r["result"]["verdicts"];
    for prop in ["lock-freedom", "wait-freedom", "deadlock-freedom", "starvation-freedom"] {
        assert_eq!(v[prop], "VIOLATED", "{prop}");
    }
    assert_eq!(r["result"]["trace_replays"], true);
    let bound = r["result"]["bound"].as_u64().unwrap().to_string();

    let lib = out.join("witness.lib");
    for file in ["witness.lasso", "witness.trace"] {
        let o = run(&["replay", "--buffer-bound", &bound, p(&lib), p(&out.join(file))]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn replay_rejects_a_broken_trace() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.trace");
    std::fs::write(&t, "call(1, m, ok)\ntau(1)\nreturn(1, m, ok)\nreturn(1, m, ok)\n").unwrap();
    let o = run(&["replay", p(&zoo("trivial.lib")), p(&t)]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&o)["result"]["index"], 4);
}

#[test]
fn channel_machine_commands() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.cm");
    std::fs::write(&two, "states q0 q1\nchannels c\nalphabet a\ninit q0\nq0 --[c!a]--> q1\n").unwrap();
    let o = run(&["lcm", "reach", p(&two), "--from", "q0", "--to", "q1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&o)["result"]["reachable"], true);
    let o = run(&["lcm", "reach", p(&two), "--from", "q1", "--to", "q0"]);
    assert_eq!(report(&o)["result"]["reachable"], false);

    let cm = dir.path().join("aa.cm");
    let single = dir.path().join("aa1.cm");
    assert_eq!(run(&["cpcp", "build-cm", "--a", "a", "--b", "a", "-o", p(&cm)]).status.code(), Some(0));
    assert_eq!(run(&["cpcp", "to-single", p(&cm), "-o", p(&single)]).status.code(), Some(0));
    let o = run(&["lcm", "lasso", p(&single), "--through", "s1", "--channel-bound", "8", "--depth", "200000"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["result"]["verdict"], "WITNESS");
    assert!(!r["result"]["loop"].as_array().unwrap().is_empty());

    let lib = dir.path().join("aa.lib");
    let o = run(&["cpcp", "compile-lib", "--a", "a", "--b", "a", "-o", p(&lib)]);
    assert_eq!(report(&o)["result"]["methods"], 2);
    assert_eq!(report(&o)["result"]["locations"], 7);
}
