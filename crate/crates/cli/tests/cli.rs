use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).display().to_string()
}

fn cohwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohwork")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn prove_prints_a_trace_and_exits_zero() {
    let o = cohwork(&["prove", &fixture("eq.th"), "A(x,y) & A(y,z) |- A(x,z)"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("== trace"));
    assert!(out.contains("apply trans"));
    assert!(out.contains("budget: 10,4,4"));
    assert!(out.ends_with("overall: Proved\n"));
}

#[test]
fn unprovable_sequent_is_refuted() {
    let o = cohwork(&["prove", &fixture("eq.th"), "|- A(x,y)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[Failed]"));
}

#[test]
fn identity_translation_checks_at_small_budget() {
    let o = cohwork(&["check-translation", &fixture("translations.tr"), "--translation", "ID_EQ", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("budget: 5,5,5"));
}

#[test]
fn non_translation_fails() {
    let o = cohwork(&["check-translation", &fixture("translations.tr"), "--translation", "EMPTY"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn two_is_not_propositional() {
    let o = cohwork(&["classify-prop", &fixture("two.th"), "--depth", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("propositional"));
    assert!(out.contains("x1 = a"));
}

#[test]
fn p2_is_propositional() {
    let o = cohwork(&["classify-prop", &fixture("p2.th")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["classify-prop".to_string(), fixture("two.th")],
        vec!["check-model".to_string(), fixture("models.mdl"), "--model".into(), "EQ_BLOCKS".into()],
        vec!["classify-equiv".to_string(), fixture("translations.tr"), fixture("certificates.cert"), "--certificate".into(), "SWAPPED".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = cohwork(&args);
        let b = cohwork(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn text_and_structured_agree_on_verdicts() {
    let base = ["check-translation", &fixture("translations.tr")];
    let text = stdout(&cohwork(&base));
    let mut args = base.to_vec();
    args.extend(["--format", "structured"]);
    let structured = stdout(&cohwork(&args));
    let from_text: Vec<(String, String)> = text
        .lines()
        .filter_map(|l| l.strip_prefix("- "))
        .filter_map(|l| {
            let (name, rest) = l.split_once(" [")?;
            let (verdict, _) = rest.split_once(']')?;
            Some((name.to_string(), verdict.to_string()))
        })
        .collect();
    let records: Vec<Value> = structured.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let from_json: Vec<(String, String)> = records
        .iter()
        .filter(|r| r["record"] == "obligation")
        .map(|r| (r["name"].as_str().unwrap().to_string(), r["verdict"].as_str().unwrap().to_string()))
        .collect();
    assert!(!from_text.is_empty());
    assert_eq!(from_text, from_json);
    assert_eq!(records.last().unwrap()["record"], "overall");
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("cohwork-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.txt");
    let o = cohwork(&["check-theory", &fixture("eq.th"), "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().contains("overall: Proved"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn missing_file_is_an_input_error() {
    let o = cohwork(&["check-theory", "/nonexistent/none.th"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn malformed_sequent_is_an_input_error() {
    let o = cohwork(&["prove", &fixture("eq.th"), "A(x |- "]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_name_is_an_input_error() {
    let o = cohwork(&["check-model", &fixture("models.mdl"), "--model", "NOPE"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_budget_is_rejected() {
    let o = cohwork(&["check-theory", &fixture("eq.th"), "--budget", "1,2"]);
    assert_ne!(o.status.code(), Some(0));
}
