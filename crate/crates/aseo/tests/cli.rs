//! End-to-end tests of the `aseo` binary: exit codes, the text and JSON
//! output contracts, generator determinism, and benchmark CSV shape.

mod common;

use std::process::{Command, Output};

use aseo::{eval_cost, is_answer_set, parse_program, AnswerSet};

fn aseo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aseo")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_text_golden_output() {
    let fixture = common::fixture("example1.lp");
    for mode in ["naive", "weight"] {
        let out = aseo(&["solve", fixture.to_str().unwrap(), "--mode", mode, "--all"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(stdout(&out), "<1,4,1> s1\n<1,4,7> s2\n<1,7,4> s3\n", "mode {mode}");
    }
    let out = aseo(&["solve", common::fixture("example1.lp").to_str().unwrap(), "--mode", "smart", "-k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "<1,4,1> s1\n<1,4,7> s2\n<1,7,4> s3\n");
}

#[test]
fn solve_exit_codes() {
    // zero models -> 2
    let out = aseo(&["solve", common::fixture("inconsistent.lp").to_str().unwrap(), "--mode", "naive", "--all"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());

    // parse error -> 1
    let bad = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(bad.path(), "a :-").unwrap();
    let out = aseo(&["solve", bad.path().to_str().unwrap(), "--mode", "naive", "--all"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parse error"));

    // missing file -> 1
    let out = aseo(&["solve", "/nonexistent.lp", "--mode", "naive", "--all"]);
    assert_eq!(out.status.code(), Some(1));

    // smart with --all -> usage error
    let out = aseo(&["solve", common::fixture("example1.lp").to_str().unwrap(), "--mode", "smart", "--all"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("smart"));
}

#[test]
fn solve_json_records_reverify() {
    let fixture = common::fixture("example1.lp");
    let out = aseo(&["solve", fixture.to_str().unwrap(), "--mode", "weight", "--all", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["mode"], "weight");
    assert_eq!(report["count"], 3);
    assert_eq!(report["timed_out"], false);
    assert!(report["summary"]["decisions"].as_u64().is_some());
    assert!(report["wall_ms"]["solve"].as_f64().is_some());
    // every record re-verifies against the reference semantics
    let program = parse_program(&std::fs::read_to_string(&fixture).unwrap()).unwrap();
    for record in report["models"].as_array().unwrap() {
        let model: AnswerSet = record["atoms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|name| program.signature.lookup(name.as_str().unwrap()).unwrap())
            .collect();
        assert!(is_answer_set(&program, &model));
        let cost: Vec<u64> =
            record["cost"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        assert_eq!(eval_cost(&program, &model).unwrap().values(), cost.as_slice());
    }
    // weight mode reports its constraint evolution
    assert!(report["frames"].as_array().is_some_and(|f| !f.is_empty()));
}

#[test]
fn generators_are_deterministic_and_counted() {
    let a = aseo(&["gen", "pn", "--n", "2"]);
    let b = aseo(&["gen", "pn", "--n", "2"]);
    assert_eq!(stdout(&a), stdout(&b));

    let pn2 = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(pn2.path(), stdout(&a)).unwrap();
    let out = aseo(&["solve", pn2.path().to_str().unwrap(), "--mode", "naive", "--all"]);
    assert_eq!(stdout(&out).lines().count(), 8);

    let r1 = aseo(&["gen", "random", "--atoms", "10", "--rules", "12", "--levels", "2", "--seed", "7"]);
    let r2 = aseo(&["gen", "random", "--atoms", "10", "--rules", "12", "--levels", "2", "--seed", "7"]);
    assert_eq!(stdout(&r1), stdout(&r2));
    assert!(parse_program(&stdout(&r1)).is_ok());

    let out = aseo(&["gen", "pn", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_timeout_flags_partial_output() {
    let pn = tempfile::NamedTempFile::new().unwrap();
    let gen = aseo(&["gen", "pn", "--n", "8"]);
    std::fs::write(pn.path(), stdout(&gen)).unwrap();
    let out = aseo(&[
        "solve",
        pn.path().to_str().unwrap(),
        "--mode",
        "naive",
        "--all",
        "--timeout",
        "0.000001",
    ]);
    assert!(stderr(&out).contains("timeout"), "{}", stderr(&out));
    // nothing was emitted before the deadline, so this counts as no models
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_seed_reorders_deterministically() {
    let pn2 = tempfile::NamedTempFile::new().unwrap();
    let gen = aseo(&["gen", "pn", "--n", "2"]);
    std::fs::write(pn2.path(), stdout(&gen)).unwrap();
    let path = pn2.path().to_str().unwrap();
    let a = aseo(&["solve", path, "--mode", "naive", "--all", "--seed", "5"]);
    let b = aseo(&["solve", path, "--mode", "naive", "--all", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
    // cost order is preserved regardless of the branching order
    let costs: Vec<String> = stdout(&a)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(costs, ["<0>", "<0>", "<1>", "<1>", "<2>", "<2>", "<3>", "<3>"]);
}

#[test]
fn bayes_single_node_posterior() {
    let out = aseo(&[
        "bayes",
        common::fixture("single.json").to_str().unwrap(),
        "--query",
        "q",
        "-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let est: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let posterior = est["posterior"].as_f64().unwrap();
    assert!((posterior - 0.7).abs() < 1e-4, "posterior {posterior}");
    assert_eq!(est["k"], 1);
    assert_eq!(est["scale"], 1_000_000);
    assert_eq!(est["assignments_true"], 1);
    assert_eq!(est["assignments_false"], 1);
}

#[test]
fn bayes_chain_matches_direct_summation() {
    let source = std::fs::read_to_string(common::fixture("chain.json")).unwrap();
    let net = aseo::bayes::load_network(&source).unwrap();
    let spec = aseo::bayes::QuerySpec::new(
        "z",
        std::collections::BTreeMap::from([("x".to_string(), true)]),
    );
    let exact = common::posterior_by_summation(&net, &spec);
    let out = aseo(&[
        "bayes",
        common::fixture("chain.json").to_str().unwrap(),
        "--query",
        "z",
        "--evidence",
        "x=true",
        "-k",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let est: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let posterior = est["posterior"].as_f64().unwrap();
    assert!((posterior - exact).abs() < 1e-4, "posterior {posterior} vs exact {exact}");
}

#[test]
fn bayes_text_format() {
    let out = aseo(&[
        "bayes",
        common::fixture("single.json").to_str().unwrap(),
        "--query",
        "q",
        "-k",
        "1",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    assert!(body.starts_with("posterior: 0.70000"), "{body}");
    assert!(body.contains("assignments: true 1 false 1"), "{body}");
}

#[test]
fn bayes_error_cases() {
    let out = aseo(&[
        "bayes",
        common::fixture("single.json").to_str().unwrap(),
        "--query",
        "nosuch",
        "-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown variable"));

    let out = aseo(&[
        "bayes",
        common::fixture("single.json").to_str().unwrap(),
        "--query",
        "q",
        "--evidence",
        "q=maybe",
        "-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_empty_directory_yields_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = aseo(&["bench", dir.path().to_str().unwrap(), "--k-sweep", "10,100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "instance,mode,atoms,k10,k100,timeouts\n");
}

#[test]
fn bench_marks_timeouts_and_continues() {
    let out = aseo(&[
        "bench",
        "pn:8",
        "--modes",
        "smart",
        "--k-sweep",
        "1000",
        "--timeout",
        "0.000001",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    let row = body.lines().nth(1).unwrap();
    assert!(row.contains(",TO,"), "row: {row}");
    assert!(row.ends_with(",1"), "row: {row}");
}

#[test]
fn bench_directory_source() {
    let dir = tempfile::tempdir().unwrap();
    for n in [1u32, 2] {
        let text = aseo::generate::pn_program(n).unwrap();
        std::fs::write(dir.path().join(format!("pn{n}.lp")), text).unwrap();
    }
    let out = aseo(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--modes",
        "naive,weight",
        "--k-sweep",
        "4",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body = stdout(&out);
    let lines: Vec<&str> = body.lines().collect();
    // header + 2 instances x 2 modes + 2 avg rows
    assert_eq!(lines.len(), 7, "{body}");
    assert!(lines[1].starts_with("pn1,naive,"));
    assert!(lines[4].starts_with("pn2,weight,"));
    assert!(lines[5].starts_with("avg,naive,"));
}
