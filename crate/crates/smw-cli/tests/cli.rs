use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smw::hardware::{sigma_w, sigma_w_bar, EEPresentation, Hardware};
use smw::symbol::parse_word;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ee() -> String {
    root().join("data/sample.ee").display().to_string()
}

fn smw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smw"))
        .args(args)
        .env_remove("SMW_SEED")
        .output()
        .expect("spawn smw")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn golden(rel: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)).expect("golden file")
}

fn hardware() -> Hardware {
    Hardware::new(EEPresentation::load(Path::new(&ee())).unwrap(), 8).unwrap()
}

fn sigma_text(bar: bool, w: &str) -> String {
    let hw = hardware();
    let w = parse_word(w).unwrap();
    let s = if bar {
        sigma_w_bar(&hw, &w).unwrap()
    } else {
        sigma_w(&hw, &w).unwrap()
    };
    s.display(&hw).to_string()
}

#[test]
fn present_stats_matches_library_golden() {
    let o = smw(&["present", "--ee", &ee(), "--stats"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("../smw/tests/golden/present_stats.txt"));
}

#[test]
fn present_writes_a_readable_file() {
    let dir = std::env::temp_dir().join(format!("smw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("p.txt");
    let o = smw(&["present", "--ee", &ee(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let p = smw::presentation::Presentation::read_from(text.as_bytes()).unwrap();
    assert_eq!(p.relations.len(), 28021);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn brief_golden_and_verdicts() {
    let o = smw(&["brief", "--history", "t12(r1) t2(r1,1) t2(r1,2) t23(r1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("tests/golden/brief.txt"));
    let o = smw(&["brief", "--history", "t34(r1) t4(r1,1) t34(r1)^-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("historical form: no\n"));
}

#[test]
fn dyck_golden_and_negative_answers() {
    let o = smw(&["dyck", "--word", "a b b^-1 a^-1 a a^-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("tests/golden/dyck.txt"));
    assert_eq!(smw(&["dyck", "--word", "a b a^-1 b^-1"]).status.code(), Some(1));
    assert_eq!(smw(&["dyck", "--word", "a a^-1 b b^-1", "--minus"]).status.code(), Some(1));
    assert_eq!(smw(&["dyck", "--word", "a b^-2"]).status.code(), Some(2));
}

#[test]
fn derive_insert_verifies_against_its_trace() {
    let o = smw(&["derive", "insert", "--ee", &ee(), "--word", "a1 a2", "--pos", "1", "--relator", "r1", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let history_len = text.lines().take_while(|l| !l.is_empty()).count();
    let trace_len = text.lines().filter(|l| l.split_once(": ").is_some_and(|(t, _)| t.parse::<usize>().is_ok())).count();
    assert_eq!(trace_len, history_len + 1);
    assert!(text.starts_with("t"));
    assert!(text.contains(&format!("0: {}\n", sigma_text(false, "a1 a2"))));
}

#[test]
fn derive_chain_round_trip() {
    let o = smw(&["derive", "chain", "--ee", &ee(), "--word", "a1", "--step", "+0:r1", "--step", "-0:r1", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("final word: a1\n"));
    let bad = smw(&["derive", "chain", "--ee", &ee(), "--word", "a1", "--step", "0:r1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn band_and_trapezium_verify() {
    let w = sigma_text(true, "a1 a2");
    let o = smw(&["band", "--ee", &ee(), "--word", &w, "--rule", "~t12(r2)", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("band 0 ~t12(r2)\n"));
    assert!(text.ends_with("verified: ok\n"));
    let o = smw(&["band", "--ee", &ee(), "--word", &w, "--rule", "~t3(r2,1)"]);
    assert_eq!(o.status.code(), Some(1));
    let o = smw(&["trapezium", "--ee", &ee(), "--word", &w, "--history", "~t12(r2) ~t2(r2,1)", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("verified: ok\n"));
}

#[test]
fn run_reports_failures_and_walks_reproducibly() {
    let w = sigma_text(true, "a1 a2");
    let o = smw(&["run", "--ee", &ee(), "--word", &w, "--history", "~t3(r2,1)", "--flavor", "bar"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("step 0 (~t3(r2,1))"));
    let walk = |seed: &str| stdout(&smw(&["run", "--ee", &ee(), "--word", &w, "--walk", "6", "--seed", seed, "--flavor", "bar"]));
    assert_eq!(walk("3"), walk("3"));
    assert!(walk("3").starts_with("history: "));
}

#[test]
fn accept_finds_the_empty_computation() {
    let o = smw(&["accept", "--ee", &ee(), "--word", &sigma_text(false, "")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn xconj_decides_both_ways() {
    let w1 = "x(a1(L2),t2(r1,1)) x(a2(L2),t2(r2,1))";
    let w2 = "x(a2(L2),t2(r2,1)) x(a1(L2),t2(r1,1))";
    let o = smw(&["xconj", "--ee", &ee(), "--w1", w1, "--w2", w2]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("conjugate: "));
    let o = smw(&["xconj", "--ee", &ee(), "--w1", "x(a1(L2),t2(r1,1))", "--w2", "x(a2(L2),t2(r2,1))"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "not conjugate\n");
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(smw(&["brief", "--history", "t1(r1,1)"]).status.code(), Some(2));
    assert_eq!(smw(&["stats", "--ee", "/nonexistent.ee"]).status.code(), Some(2));
    assert_eq!(smw(&["xconj", "--ee", &ee(), "--w1", "x", "--w2", "y"]).status.code(), Some(2));
}
