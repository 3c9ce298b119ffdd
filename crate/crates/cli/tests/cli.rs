//! End-to-end tests of the `amk` binary.

use std::process::{Command, Output};

fn amk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amk"))
        .args(args)
        .env("AMK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn encode_shape_summary_and_dimacs() {
    let out = amk(&["encode", "--shape", "2x2,2x2;m=2;k=2;ff=0;ft=0"]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("vars=28 aux=12 clauses=58 literals=168 k=8 n=16"),
        "unexpected summary: {err}"
    );
    let text = stdout(&out);
    assert!(text.starts_with("c target 1 2 3"), "missing target comment: {text}");
    assert!(text.contains("p cnf 28 58\n"));
}

#[test]
fn encode_counter_baseline() {
    let out = amk(&["encode", "--encoding", "counter", "--n", "10", "--k", "5"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("literals=216 k=5 n=10"), "{}", stderr(&out));
}

#[test]
fn encode_binomial_baseline() {
    let out = amk(&["encode", "--encoding", "binomial", "--n", "3", "--k", "1"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("clauses=3"), "{}", stderr(&out));
}

#[test]
fn encode_rejects_missing_selection() {
    let out = amk(&["encode"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn encode_rejects_invalid_shape() {
    let out = amk(&["encode", "--shape", "4x1,2x3;m=1;k=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn analyze_chain_16() {
    let out = amk(&["analyze", "--shape", "2x2,2x2;m=2;k=2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("k=8 n=16"), "{text}");
    assert!(text.contains("approx_literals=168 counter_literals=585"), "{text}");
    assert!(text.contains("overall_coverage=44.4%"), "{text}");
    assert!(text.contains("maxcount_coverage=11.2%"), "{text}");
}

#[test]
fn analyze_oracle_agreement() {
    let out = amk(&["analyze", "--shape", "2x3;m=2;k=3;ff=1;ft=1", "--oracle", "both"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("overall_coverage=64.9%"), "{text}");
    assert!(text.contains("oracles_agree=true"), "{text}");
}

#[test]
fn analyze_find_probability() {
    let out = amk(&["analyze", "--shape", "2x3;m=2;k=3;ff=1;ft=1", "--samples", "10"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("find_probability[s=10]="), "{}", stdout(&out));
}

#[test]
fn search_5_of_10() {
    let out = amk(&["search", "--k", "5", "--n", "10", "--top", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rank,shape,approx_literals,counter_literals,literal_rate,coverage,efficiency"
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,\"2x3;m=2;k=3;ff=1;ft=1\",140,216,"), "{first}");
}

#[test]
fn search_is_deterministic() {
    let a = amk(&["search", "--k", "5", "--n", "10"]);
    let b = amk(&["search", "--k", "5", "--n", "10"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn search_empty_space_exits_4() {
    let out = amk(&[
        "search", "--k", "1", "--n", "3", "--max-levels", "1", "--max-h", "2", "--max-w", "1",
        "--max-leaf-m", "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reproduce_fig4() {
    let out = amk(&["reproduce", "fig4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,approx_literals,counter_literals,literal_rate\n"), "{text}");
    assert!(text.contains("\n32,376,2449,0.153532053900"), "{text}");
    assert!(text.contains("\n128,1624,40513,"), "{text}");
}

#[test]
fn reproduce_sec31() {
    let out = amk(&["reproduce", "sec31"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains(",12,58,168,"), "{text}");
}

#[test]
fn rejects_bad_thread_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_amk"))
        .args(["encode", "--encoding", "binomial", "--n", "3", "--k", "1"])
        .env("AMK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
