//! End-to-end tests of the `pll` binary: exit codes, stdout/stderr text,
//! and flag handling, driven through real process invocations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn grammars_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../grammars")
}

fn pll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pll"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pll_on(grammar: &str, rest: &[&str]) -> Output {
    let path = grammars_dir().join(grammar);
    let mut args = vec!["parse", "--grammar", path.to_str().expect("utf-8 path")];
    args.extend_from_slice(rest);
    pll(&args)
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn accepted_input_prints_outputs_and_exits_zero() {
    let out = pll_on("count.pll", &["--text", "aaa"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), "accepted, outputs {3}\n");
}

#[test]
fn rejected_input_prints_rejected_and_exits_one() {
    let out = pll_on("count.pll", &["--text", "aab"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_of(&out), "rejected\n");
}

#[test]
fn empty_input_counts_to_zero() {
    let out = pll_on("count.pll", &["--text", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out), "accepted, outputs {0}\n");
}

#[test]
fn json_report_carries_outputs_and_stats() {
    let out = pll_on("count.pll", &["--text", "aaaa", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(stdout_of(&out).trim_end()).expect("one JSON object");
    assert_eq!(report["accepted"], serde_json::json!(true));
    assert_eq!(report["outputs"], serde_json::json!([4]));
    assert!(report["stats"]["items"].as_u64().is_some_and(|n| n > 0));
    assert_eq!(report["stats"]["positions"], serde_json::json!(5));
}

#[test]
fn input_file_has_one_trailing_newline_trimmed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("input.txt");
    std::fs::write(&path, "aaa\n").expect("write input file");
    let out = pll_on(
        "count.pll",
        &["--input", path.to_str().expect("utf-8 path")],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), "accepted, outputs {3}\n");
}

#[test]
fn text_and_input_together_is_a_usage_error() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("input.txt");
    std::fs::write(&path, "aaa").expect("write input");
    let out = pll_on(
        "count.pll",
        &["--text", "aaa", "--input", path.to_str().expect("utf-8 path")],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("exactly one of --text or --input"));
}

#[test]
fn neither_text_nor_input_is_a_usage_error() {
    let out = pll_on("count.pll", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("exactly one of --text or --input"));
}

#[test]
fn missing_grammar_file_is_a_usage_error() {
    let out = pll(&[
        "parse",
        "--grammar",
        "no/such/file.pll",
        "--text",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("cannot read no/such/file.pll"));
}

#[test]
fn grammar_diagnostics_go_to_stderr_with_positions() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.pll");
    std::fs::write(&path, "domain 0..3\nstart S 0\nterminal t = char 'a' out b7\n")
        .expect("write grammar");
    let out = pll(&[
        "parse",
        "--grammar",
        path.to_str().expect("utf-8 path"),
        "--text",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = stderr_of(&out);
    assert!(
        stderr.contains("broken.pll") && stderr.contains("line 3"),
        "diagnostic must name the file and line: {stderr}"
    );
    assert!(stdout_of(&out).is_empty());
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = pll(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chart_dump_lists_tokens_and_items() {
    let out = pll_on("count.pll", &["--text", "a", "--dump-chart"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = stdout_of(&out);
    assert!(stdout.starts_with("accepted, outputs {1}\n"));
    assert!(stdout.contains("tokens:\n"));
    assert!(
        stdout.contains("@0 a in=0 out=1 text=\"a\""),
        "token line missing from:\n{stdout}"
    );
    assert!(stdout.contains("items:\n"));
    assert!(
        stdout.contains("0..1 r1 dot=1"),
        "completed item for the one-token rule missing from:\n{stdout}"
    );
}

#[test]
fn verified_mode_parses_like_normal_mode() {
    let plain = pll_on("staircase.pll", &["--text", "abaab", "--json"]);
    let verified = pll_on("staircase.pll", &["--text", "abaab", "--json", "--verify"]);
    assert_eq!(plain.status.code(), verified.status.code());
    assert_eq!(stdout_of(&plain), stdout_of(&verified));
}

#[test]
fn induce_prints_the_flattened_grammar() {
    let path = grammars_dir().join("count.pll");
    let out = pll(&["induce", "--grammar", path.to_str().expect("utf-8 path")]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = stdout_of(&out);
    assert!(stdout.starts_with("TOP -> S[0->0]\n"));
    assert!(
        stdout.contains("S[0->3] -> a[0->1] S[1->3]"),
        "expected a flattened counting rule in:\n{stdout}"
    );
}

#[test]
fn diff_agrees_on_every_bundled_grammar() {
    for grammar in ["count.pll", "staircase.pll", "blocks.pll", "keywords.pll"] {
        let path = grammars_dir().join(grammar);
        let out = pll(&[
            "diff",
            "--grammar",
            path.to_str().expect("utf-8 path"),
            "--max-len",
            "3",
            "--deep",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{grammar}: stdout {} stderr {}",
            stdout_of(&out),
            stderr_of(&out)
        );
        assert!(stdout_of(&out).contains("engine and oracle agree"));
    }
}

#[test]
fn shallow_diff_reports_zero_checkpoints() {
    let path = grammars_dir().join("count.pll");
    let out = pll(&[
        "diff",
        "--grammar",
        path.to_str().expect("utf-8 path"),
        "--max-len",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_of(&out),
        "3 input(s) checked, engine and oracle agree (0 internal checkpoint(s))\n"
    );
}

#[test]
fn fuzz_run_summarizes_and_exits_zero() {
    let out = pll(&["fuzz", "--seed", "7", "--count", "3", "--max-len", "3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout {} stderr {}",
        stdout_of(&out),
        stderr_of(&out)
    );
    let stdout = stdout_of(&out);
    assert!(stdout.contains("3 grammar(s) from seed 7"));
    assert!(stdout.contains("engine and oracle agree"));
}

#[test]
fn diff_with_an_explicit_alphabet_counts_all_enumerated_inputs() {
    let path = grammars_dir().join("count.pll");
    let out = pll(&[
        "diff",
        "--grammar",
        path.to_str().expect("utf-8 path"),
        "--max-len",
        "3",
        "--alphabet",
        "ab",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // 1 + 2 + 4 + 8 strings over {a, b} up to length 3.
    assert_eq!(
        stdout_of(&out),
        "15 input(s) checked, engine and oracle agree (0 internal checkpoint(s))\n"
    );
}

#[test]
fn diff_at_length_zero_checks_only_the_empty_input() {
    let path = grammars_dir().join("count.pll");
    let out = pll(&[
        "diff",
        "--grammar",
        path.to_str().expect("utf-8 path"),
        "--max-len",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).starts_with("1 input(s) checked, engine and oracle agree"));
}

#[test]
fn ten_generated_grammars_agree_with_the_oracle() {
    let out = pll(&["fuzz", "--seed", "1", "--count", "10"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout {} stderr {}",
        stdout_of(&out),
        stderr_of(&out)
    );
    let stdout = stdout_of(&out);
    assert!(stdout.contains("10 grammar(s) from seed 1"));
    assert!(stdout.contains("engine and oracle agree"));
}

#[test]
fn fuzz_with_count_zero_vacuously_agrees() {
    let out = pll(&["fuzz", "--seed", "5", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_of(&out),
        "0 grammar(s) from seed 5: 0 input(s) checked, engine and oracle agree\n"
    );
}

#[test]
fn fuzz_is_deterministic_for_a_fixed_seed() {
    let args = ["fuzz", "--seed", "11", "--count", "4", "--max-len", "3"];
    let first = pll(&args);
    let second = pll(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}
