use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qfilter::filter::load_model;
use qfilter::{load_dataset, CalibrationResult, FilterReport};

fn qfilter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfilter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qfilter(dir, args);
    assert!(
        out.status.success(),
        "qfilter {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const CORPUS: &str = r#"{"doc_id":"d1","text":"Paris is the capital of France. It lies on the Seine."}
{"doc_id":"d2","text":"Rome is the capital of Italy. The Tiber runs through it."}
{"doc_id":"d3","text":"Mount Everest is the highest mountain. It is in Nepal."}
"#;

const QUESTIONS: &str = r#"{"id":"q1","question":"What is the capital of France?","gold_answers":["Paris"]}
{"id":"q2","question":"Which river runs through Rome?","gold_answers":["Tiber"]}
{"id":"q3","question":"How tall is the highest mountain?","gold_answers":["8849"]}
{"id":"q4","question":"zzz qqq?"}
"#;

fn lexical_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("corpus.jsonl"), CORPUS).unwrap();
    fs::write(dir.path().join("questions.jsonl"), QUESTIONS).unwrap();
    dir
}

fn synthetic_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--n", "600", "--seed", "3", "--out", "all.jsonl", "--params", "t.json"]);
    ok(d, &["split", "--input", "all.jsonl", "--out", "s", "--fractions", "0.5,0.25,0.25"]);
    ok(d, &["train", "--input", "s.train.jsonl", "--strategy", "distill-regression", "--dim", "4096", "--out", "m.json"]);
    dir
}

#[test]
fn lexical_scores_are_in_range_and_reproducible() {
    let dir = lexical_fixture();
    let d = dir.path();
    let args = ["score", "--input", "questions.jsonl", "--teacher", "lexical", "--corpus", "corpus.jsonl", "--k", "2"];
    ok(d, &[&args[..], &["--out", "a.jsonl"]].concat());
    ok(d, &[&args[..], &["--out", "b.jsonl"]].concat());
    assert_eq!(fs::read(d.join("a.jsonl")).unwrap(), fs::read(d.join("b.jsonl")).unwrap());

    let scored = load_dataset(d.join("a.jsonl")).unwrap();
    assert_eq!(scored.len(), 4);
    for q in &scored {
        assert!((0.0..=1.0).contains(&q.teacher_score.unwrap()));
    }
    let q1 = &scored.records()[0];
    assert_eq!(q1.correct, Some(true));
    assert_eq!(scored.records()[3].teacher_score, Some(0.0));
    assert_eq!(scored.records()[3].correct, None);
}

#[test]
fn missing_corpus_is_an_io_error_naming_the_path() {
    let dir = lexical_fixture();
    let out = qfilter(
        dir.path(),
        &["score", "--input", "questions.jsonl", "--teacher", "lexical", "--corpus", "no-such-corpus.jsonl", "--out", "x.jsonl"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-corpus.jsonl"), "{}", stderr(&out));
}

#[test]
fn replay_teacher_cannot_score() {
    let dir = lexical_fixture();
    let out = qfilter(dir.path(), &["score", "--input", "questions.jsonl", "--teacher", "replay", "--out", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("replay"));
}

#[test]
fn unknown_keys_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"id\":\"a\",\"question\":\"x\",\"score\":1}\n").unwrap();
    let out = qfilter(
        dir.path(),
        &["train", "--input", "bad.jsonl", "--strategy", "distill-regression", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bad.jsonl") && err.contains("line 1") && err.contains("score"), "{err}");
}

#[test]
fn classification_model_records_tau1() {
    let dir = synthetic_fixture();
    let d = dir.path();
    let stdout = ok(
        d,
        &["train", "--input", "s.train.jsonl", "--strategy", "distill-classification", "--tau1", "0.5", "--dim", "4096", "--out", "c.json"],
    );
    assert!(stdout.contains("final loss"));
    let m = load_model(d.join("c.json")).unwrap();
    assert_eq!(m.tau1_trained, Some(0.5));
    assert_eq!(m.head, qfilter::Head::Classification);

    let out = qfilter(d, &["train", "--input", "s.train.jsonl", "--strategy", "distill-classification", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wellformed_strategy_needs_the_field() {
    let dir = lexical_fixture();
    let d = dir.path();
    ok(d, &["score", "--input", "questions.jsonl", "--teacher", "lexical", "--corpus", "corpus.jsonl", "--out", "s.jsonl"]);
    let out = qfilter(d, &["train", "--input", "s.jsonl", "--strategy", "wellformed", "--dim", "1024", "--out", "w.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("wellformed"), "{}", stderr(&out));
}

#[test]
fn sequential_training_continues_the_epoch_count() {
    let dir = synthetic_fixture();
    let d = dir.path();
    ok(
        d,
        &["train", "--input", "s.dev.jsonl", "--strategy", "distill-regression", "--dim", "4096", "--lr", "1", "--init", "m.json", "--out", "m2.json"],
    );
    assert_eq!(load_model(d.join("m2.json")).unwrap().epochs_trained, 6);

    let out = qfilter(
        d,
        &["train", "--input", "s.dev.jsonl", "--strategy", "distill-regression", "--dim", "1024", "--init", "m.json", "--out", "m3.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibration_json_matches_printout() {
    let dir = synthetic_fixture();
    let d = dir.path();
    let stdout = ok(d, &["calibrate", "--model", "m.json", "--input", "s.dev.jsonl", "--tau1", "0.5", "--out", "cal.json"]);
    let r: CalibrationResult = serde_json::from_str(&fs::read_to_string(d.join("cal.json")).unwrap()).unwrap();
    assert_eq!(r.tau1, Some(0.5));
    assert!(stdout.contains(&format!("{:.6}", r.tau2_star)), "{stdout}");
    assert!(stdout.contains(&format!("{:.4}", r.dev_agreement_f1)), "{stdout}");

    let out = qfilter(d, &["calibrate", "--model", "m.json", "--input", "s.dev.jsonl", "--tau1", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibrating_on_unscored_data_fails() {
    let dir = synthetic_fixture();
    let d = dir.path();
    fs::write(d.join("raw.jsonl"), "{\"id\":\"a\",\"question\":\"what\"}\n").unwrap();
    let out = qfilter(d, &["calibrate", "--model", "m.json", "--input", "raw.jsonl", "--tau1", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("teacher_score"));
}

#[test]
fn evaluate_writes_a_report() {
    let dir = synthetic_fixture();
    let d = dir.path();
    let stdout = ok(
        d,
        &["evaluate", "--model", "m.json", "--input", "s.test.jsonl", "--tau1", "0.5", "--tau2", "0.5", "--out", "r.json"],
    );
    assert!(stdout.contains("F -> M"));
    let r: FilterReport = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!((r.tau1, r.tau2), (0.5, 0.5));
    assert!(r.filtered.recall <= r.base.recall);
    assert_eq!(r.base.total, 150);

    let out = qfilter(d, &["evaluate", "--model", "m.json", "--input", "s.test.jsonl", "--tau1", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluating_unlabeled_data_fails() {
    let dir = synthetic_fixture();
    let d = dir.path();
    fs::write(d.join("u.jsonl"), "{\"id\":\"a\",\"question\":\"what\",\"teacher_score\":0.9}\n").unwrap();
    let out = qfilter(d, &["evaluate", "--model", "m.json", "--input", "u.jsonl", "--tau1", "0.5", "--tau2", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("correct"), "{}", stderr(&out));
}

#[test]
fn sweep_modes_write_curves() {
    let dir = synthetic_fixture();
    let d = dir.path();
    for mode in ["model", "filter", "joint"] {
        let out = format!("{mode}.csv");
        ok(d, &["sweep", "--input", "s.test.jsonl", "--mode", mode, "--model", "m.json", "--grid", "11", "--out", &out]);
        let csv = fs::read_to_string(d.join(&out)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "tau,precision,recall,f1,filtered_fraction");
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0.000000,"));
        assert_eq!(lines[1].ends_with(','), mode == "model", "{mode}: {}", lines[1]);
    }
    let out = qfilter(d, &["sweep", "--input", "s.test.jsonl", "--mode", "joint", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cost_reproduces_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["cost"]);
    assert!(stdout.contains("baseline M-batches   4000"));
    assert!(stdout.contains("filtered M-batches   3200"));
    assert!(stdout.contains("F-batches            10"));
    assert!(stdout.contains("19.9844%"));
    assert!(stdout.contains("retrieval"));

    let none = ok(dir.path(), &["cost", "--filter-fraction", "0"]);
    assert!(none.contains("filtered M-batches   4000") && none.contains("-0.0156%"), "{none}");
    let all = ok(dir.path(), &["cost", "--filter-fraction", "1"]);
    assert!(all.contains("filtered M-batches   0") && all.contains("99.9844%"), "{all}");
}
