//! Behavioural tests of the command-line driver: exit codes, output
//! streams, and the flags.

use std::path::PathBuf;
use std::process::{Command, Output};

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn pegfail(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pegfail"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should run")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn valid_program_is_silent_and_exits_zero() {
    let out = pegfail(
        &assets(),
        &[
            "--grammar",
            "tiny.peg",
            "--input",
            "factorial-ok.tiny",
            "--mode",
            "plain",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(out.stderr.is_empty());
}

#[test]
fn plain_mode_reports_the_suffix_without_expectations() {
    let out = pegfail(
        &assets(),
        &[
            "--grammar",
            "tiny.peg",
            "--input",
            "factorial.tiny",
            "--mode",
            "plain",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stderr(&out),
        "factorial.tiny:3:1: syntax error, unexpected 'repeat'\n"
    );
}

#[test]
fn syntax_error_prints_one_diagnostic_and_exits_one() {
    let out = pegfail(
        &assets(),
        &[
            "--grammar",
            "tiny.peg",
            "--input",
            "factorial.tiny",
            "--mode",
            "expected",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("syntax error"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let run = || {
        pegfail(
            &assets(),
            &[
                "--grammar",
                "tiny.peg",
                "--input",
                "factorial.tiny",
                "--mode",
                "expected",
            ],
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn missing_grammar_file_exits_two() {
    let out = pegfail(
        &assets(),
        &[
            "--grammar",
            "no-such.peg",
            "--input",
            "factorial.tiny",
            "--mode",
            "plain",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grammar_parse_error_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.peg"), "S <- 'a'\nT <- '\\q'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "a").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "bad.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.peg:2:7"), "{}", stderr(&out));
}

#[test]
fn validation_issue_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("rec.peg"), "A <- A 'a'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "a").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "rec.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("left-recursion"));
}

#[test]
fn validate_only_checks_the_grammar_alone() {
    let out = pegfail(&assets(), &["--grammar", "tiny.peg", "--validate-only"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
}

#[test]
fn input_and_mode_are_required_without_validate_only() {
    let out = pegfail(&assets(), &["--grammar", "tiny.peg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_require_eof_accepts_a_prefix_match() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.peg"), "S <- 'a' 'b'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "abzzz").unwrap();
    let strict = pegfail(
        dir.path(),
        &["--grammar", "g.peg", "--input", "in.txt", "--mode", "plain"],
    );
    assert_eq!(strict.status.code(), Some(1));
    let lenient = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
            "--no-require-eof",
        ],
    );
    assert_eq!(lenient.status.code(), Some(0));
}

#[test]
fn start_rule_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.peg"), "S <- 'a'\nT <- 'b'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "b").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
            "--start",
            "T",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let missing = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
            "--start",
            "Nope",
        ],
    );
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn exhausted_step_budget_exits_two() {
    let out = pegfail(
        &assets(),
        &[
            "--grammar",
            "tiny.peg",
            "--input",
            "factorial-ok.tiny",
            "--mode",
            "plain",
            "--steps",
            "10",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("step budget"));
}

#[test]
fn var_strategy_changes_the_expected_list() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("factor.peg"),
        "Factor <- '(' Exp ')' / Digit Digit*\n\
         Digit  <- '0' / '1' / '2' / '3' / '4' / '5' / '6' / '7' / '8' / '9'\n\
         Exp    <- Factor\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("in.txt"), "id").unwrap();
    let join = pegfail(
        dir.path(),
        &[
            "--grammar",
            "factor.peg",
            "--input",
            "in.txt",
            "--mode",
            "expected",
        ],
    );
    assert_eq!(join.status.code(), Some(1));
    assert_eq!(
        stderr(&join),
        "in.txt:1:1: syntax error, unexpected 'id', expecting Factor\n"
    );
    let prop = pegfail(
        dir.path(),
        &[
            "--grammar",
            "factor.peg",
            "--input",
            "in.txt",
            "--mode",
            "expected",
            "--var-strategy",
            "propagate",
        ],
    );
    assert_eq!(prop.status.code(), Some(1));
    assert_eq!(
        stderr(&prop),
        "in.txt:1:1: syntax error, unexpected 'id', \
         expecting '9', '8', '7', '6', '5', '4', '3', '2', '1', '0', '('\n"
    );
}

#[test]
fn labeled_mode_falls_back_to_the_expected_list_on_plain_failure() {
    // A partially annotated grammar: the failing region has no labels, so
    // the raise is `fail` and the diagnostic comes from the farthest
    // record gathered in parallel.
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.peg"),
        "S <- 'z' ('a' expect('b', bee) / 'c')\nlabel bee = \"b must follow a\"\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("in.txt"), "zx").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "labeled",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stderr(&out),
        "in.txt:1:2: syntax error, unexpected 'x', expecting 'c', 'a'\n"
    );

    // The annotated region still reports through its label.
    std::fs::write(dir.path().join("in.txt"), "zaz").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "labeled",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out), "in.txt:1:3: syntax error, b must follow a\n");
}

#[test]
fn throwing_grammar_is_rejected_in_farthest_and_expected_modes() {
    for mode in ["farthest", "expected"] {
        let out = pegfail(
            &assets(),
            &[
                "--grammar",
                "tiny-labeled.peg",
                "--input",
                "factorial.tiny",
                "--mode",
                mode,
            ],
        );
        assert_eq!(out.status.code(), Some(2), "mode {}", mode);
        assert!(stderr(&out).contains("throw-free"));
    }
}

#[test]
fn four_values_transform_requires_labeled_mode() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.peg"), "S <- 'a' / 'b'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "b").unwrap();
    let wrong = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "plain",
            "--transform",
            "four-values",
        ],
    );
    assert_eq!(wrong.status.code(), Some(2));
    let ok = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "labeled",
            "--transform",
            "four-values",
        ],
    );
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
}

#[test]
fn four_values_transform_desugars_stars_first() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.peg"), "S <- 'a'* 'b'\n").unwrap();
    std::fs::write(dir.path().join("in.txt"), "aaab").unwrap();
    let out = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "labeled",
            "--transform",
            "four-values",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    std::fs::write(dir.path().join("in.txt"), "aaaz").unwrap();
    let bad = pegfail(
        dir.path(),
        &[
            "--grammar",
            "g.peg",
            "--input",
            "in.txt",
            "--mode",
            "labeled",
            "--transform",
            "four-values",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}
