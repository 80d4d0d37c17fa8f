//! End-to-end checks of the `tlk` binary: exit codes, pinned output, and
//! byte-level determinism across repeated invocations.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn tlk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn err(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

/// Writes a fixture into the target tmpdir and returns its path as a string.
fn fixture(name: &str, contents: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    p.push(name);
    fs::write(&p, contents).expect("tmpdir is writable");
    p.to_str().expect("utf-8 path").to_owned()
}

fn model2() -> String {
    fixture("m2.json", r#"{"domain":2}"#)
}

fn sig_abcd() -> String {
    fixture(
        "sig_abcd.json",
        r#"{"relations":{"a":1,"b":1,"c":1,"d":1},"functions":{},"constants":[]}"#,
    )
}

fn sig_f() -> String {
    fixture(
        "sig_f.json",
        r#"{"relations":{},"functions":{"f":1},"constants":[]}"#,
    )
}

#[test]
fn parse_prints_the_canonical_form() {
    let o = tlk(&["parse", "--logic", "bid", "-e", "A x. E y. x=y"]);
    assert_eq!(code(&o), 0);
    assert_eq!(out(&o), "(A x. (E y. x=y))\n");
}

#[test]
fn parse_rejects_formulas_outside_the_fragment() {
    let o = tlk(&["parse", "--logic", "d", "-e", "dep(x) -> bot"]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("least fragment: id"), "{}", err(&o));
}

#[test]
fn parse_reads_second_order_formulas() {
    let o = tlk(&["parse", "--logic", "so", "-e", "Ef f:1. A x. f(x)=x"]);
    assert_eq!(code(&o), 0);
    assert!(out(&o).contains("Ef f:1"), "{}", out(&o));
}

#[test]
fn parse_errors_exit_with_the_usage_code() {
    let o = tlk(&["parse", "--logic", "bid", "-e", "A x. ("]);
    assert_eq!(code(&o), 2);
    let o = tlk(&["parse", "--logic", "bid"]);
    assert_eq!(code(&o), 2, "one of -e or FILE is required");
    let o = tlk(&["parse", "--logic", "nosuch", "-e", "x=x"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_answers_sentences_with_matching_exit_codes() {
    let m = model2();
    let o = tlk(&["eval", "-m", &m, "-e", "A x. E y. x=y"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("true\n", 0));
    let o = tlk(&["eval", "-m", &m, "-e", "A x. A y. x=y"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("false\n", 1));
}

#[test]
fn eval_accepts_a_team_file() {
    let m = model2();
    let t = fixture("team_x2.json", r#"{"vars":["x"],"rows":[[0],[1]]}"#);
    let o = tlk(&["eval", "-m", &m, "-t", &t, "-e", "dep(x)"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("false\n", 1));
    let o = tlk(&["eval", "-m", &m, "-t", &t, "-e", "x=x"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("true\n", 0));
}

#[test]
fn truthvalue_distinguishes_all_three_verdicts() {
    let m = model2();
    let o = tlk(&["truthvalue", "-m", &m, "-e", "A x. x=x"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("TRUE\n", 0));
    let o = tlk(&["truthvalue", "-m", &m, "-e", "A x. (x=x -> bot)"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("EMPTY_ONLY\n", 1));
    let o = tlk(&["truthvalue", "-m", &m, "-e", "A x. ((x=x) -* (x=x -> bot))"]);
    assert_eq!((out(&o).as_str(), code(&o)), ("FALSE\n", 1));
}

#[test]
fn translate_reproduces_the_disjunction_elimination_example() {
    let sig = sig_abcd();
    let o = tlk(&[
        "translate",
        "--route",
        "fo2id",
        "--sig",
        &sig,
        "-e",
        "(a(x) | (~b(x) | c(x))) & d(x)",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        out(&o),
        "(((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c(x))) & d(x))\n"
    );
}

#[test]
fn translate_trace_lines_carry_rule_names_and_citations() {
    let sig = sig_abcd();
    let o = tlk(&[
        "translate",
        "--route",
        "fo2id",
        "--sig",
        &sig,
        "-e",
        "(a(x) | (~b(x) | c(x))) & d(x)",
        "--trace",
    ]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 2, "trace then formula: {text}");
    for line in &lines[..lines.len() - 1] {
        assert!(line.starts_with("RULE "), "rule name first: {line}");
        assert!(line.contains('['), "citation bracket: {line}");
        assert!(line.contains("==>"), "before/after arrow: {line}");
    }
    assert_eq!(
        lines[lines.len() - 1],
        "(((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c(x))) & d(x))"
    );
}

#[test]
fn translate_rejects_input_outside_the_route_fragment() {
    let o = tlk(&["translate", "--route", "fo2id", "-e", "dep(x,y)"]);
    assert_eq!(code(&o), 2);
    assert!(err(&o).contains("first-order"), "{}", err(&o));
}

#[test]
fn verify_passes_correct_translations() {
    let o = tlk(&["verify", "--route", "novee", "-e", "dep(x) || dep(y)", "--max-size", "2"]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert_eq!(out(&o), "PASS (2 models, 18 teams)\n");
}

#[test]
fn verify_checks_sentence_routes_against_the_second_order_oracle() {
    let o = tlk(&[
        "verify",
        "--route",
        "so2id",
        "-e",
        "Af f:1. Ef g:1. A x. f(x)=g(x)",
        "--max-size",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", err(&o));
    assert_eq!(out(&o), "PASS (2 models, 2 teams)\n");
}

#[test]
fn timeouts_exit_with_the_budget_code() {
    let o = tlk(&[
        "verify",
        "--route",
        "so2id",
        "-e",
        "Af f:1. Ef g:1. A x. f(x)=g(x)",
        "--max-size",
        "3",
        "--timeout-s",
        "0",
    ]);
    assert_eq!(code(&o), 3);
    assert!(err(&o).contains("timeout"), "{}", err(&o));
}

#[test]
fn laws_reports_text_then_json() {
    let o = tlk(&["laws", "--suite", "empty", "--max-size", "2", "--cases", "5", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    assert!(
        text.starts_with("suite empty: 6 cases, 6 passed, 0 failed, 0 budget (seed 3, max size 2)\n"),
        "{text}"
    );
    let json_start = text.find('{').expect("JSON section");
    let v: serde_json::Value = serde_json::from_str(&text[json_start..]).expect("valid JSON");
    assert_eq!(v["suite"], "empty");
    assert_eq!(v["passed"], 6);
    assert_eq!(v["seed"], 3);
}

#[test]
fn unknown_suites_exit_with_the_usage_code() {
    let o = tlk(&["laws", "--suite", "nosuch", "--max-size", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn models_prints_one_model_per_line_in_order() {
    let sig = sig_f();
    let o = tlk(&["models", "--sig", &sig, "--size", "2"]);
    assert_eq!(code(&o), 0);
    let text = out(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "2^2 unary functions on two elements");
    assert_eq!(
        lines[0],
        r#"{"domain":2,"functions":{"f":{"arity":1,"table":[[0,0],[1,0]]}}}"#
    );
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).expect("model JSON");
        assert_eq!(v["domain"], 2);
    }
}

#[test]
fn missing_files_exit_with_the_usage_code() {
    let o = tlk(&["eval", "-m", "/nonexistent/m.json", "-e", "x=x"]);
    assert_eq!(code(&o), 2);
    assert!(!err(&o).is_empty());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let sig = sig_f();
    for args in [
        vec!["laws", "--suite", "downward", "--sig", sig.as_str(), "--max-size", "2", "--cases", "20", "--seed", "9"],
        vec!["models", "--sig", sig.as_str(), "--size", "2"],
        vec!["translate", "--route", "novee", "-e", "dep(x) || dep(y)"],
    ] {
        let a = tlk(&args);
        let b = tlk(&args);
        assert_eq!(a.stdout, b.stdout, "stdout must be reproducible: {args:?}");
        assert_eq!(code(&a), code(&b));
    }
}
