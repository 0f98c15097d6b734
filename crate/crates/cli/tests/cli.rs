//! End-to-end tests of the `politelex` binary: exit codes, output headers,
//! and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_politelex"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn politelex")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

/// Small bilingual-style English fixture with clearly polite/rude extremes.
fn demo_corpus(dir: &Path) -> (String, String) {
    let corpus = dir.join("corpus.jsonl");
    let annotations = dir.join("annotations.csv");
    let mut posts = String::new();
    let mut ann = String::from("post_id,annotator_id,score\n");
    for i in 0..40 {
        let (text, score) = match i % 4 {
            0 => ("thanks so much mr. smith have a great day", 3),
            1 => ("fuck this damn train shit happens", -3),
            2 => ("the weather report arrives tomorrow morning", 1),
            _ => ("coffee meeting moved to the main office", -1),
        };
        posts.push_str(&format!(
            "{{\"id\":\"p{i:02}\",\"lang\":\"en\",\"text\":\"{text} run {i}\"}}\n"
        ));
        for a in 0..2 {
            // deterministic mild disagreement between the two annotators
            let jitter = ((i + a) % 2) as i32;
            let s = (score + jitter).clamp(-3, 3);
            ann.push_str(&format!("p{i:02},a{a},{s}\n"));
        }
    }
    write(&corpus, &posts);
    write(&annotations, &ann);
    (
        corpus.to_string_lossy().into_owned(),
        annotations.to_string_lossy().into_owned(),
    )
}

#[test]
fn extract_writes_features_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = demo_corpus(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");

    for out in [&out_a, &out_b] {
        let result = run(&[
            "extract",
            "--input",
            &corpus,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert!(result.status.success(), "{}", stderr(&result));
    }
    let a = fs::read(out_a.join("features.tsv")).unwrap();
    let b = fs::read(out_b.join("features.tsv")).unwrap();
    assert_eq!(a, b, "same config must be byte-identical");

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# command: extract"));
    assert!(text.contains("# seed: 42"));
    let header = text
        .lines()
        .find(|l| l.starts_with("post_id"))
        .expect("column header");
    assert_eq!(header.split('\t').count(), 27, "post_id + 26 categories");
}

#[test]
fn missing_lexicon_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = demo_corpus(dir.path());
    let result = run(&[
        "extract",
        "--input",
        &corpus,
        "--lexicon",
        "no/such/lexicon.json",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("lexicon not found"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let result = run(&["frobnicate"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let result = run(&["--help"]);
    assert_eq!(result.status.code(), Some(0));
    assert!(stdout(&result).contains("extract"));
}

#[test]
fn reliability_perfect_agreement() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ann.csv");
    let mut csv = String::from("post_id,annotator_id,score\n");
    for i in 0..10 {
        let score = (i % 7) as i32 - 3;
        csv.push_str(&format!("p{i},a0,{score}\np{i},a1,{score}\n"));
    }
    write(&path, &csv);
    let result = run(&[
        "reliability",
        "--annotations",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    assert!(stdout(&result).contains("krippendorff_alpha_interval\t1.000000"));
    assert!(stdout(&result).contains("icc2k\t1.000000"));
}

#[test]
fn reliability_empty_file_is_data_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.csv");
    write(&path, "");
    let result = run(&["reliability", "--annotations", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn corrupt_corpus_is_data_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.jsonl");
    write(&path, "{\"id\":\"x\",\"lang\":\"en\",\"text\":\"   \"}\n");
    let result = run(&["extract", "--input", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn full_pipeline_round_trip() {
    let dir = TempDir::new().unwrap();
    let (corpus, annotations) = demo_corpus(dir.path());
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    let result = run(&["extract", "--input", &corpus, "--out", out_s]);
    assert!(result.status.success(), "{}", stderr(&result));
    let features = out.join("features.tsv");
    let features_s = features.to_str().unwrap();

    let result = run(&[
        "correlate",
        "--features",
        features_s,
        "--annotations",
        &annotations,
        "--out",
        out_s,
        "--alpha",
        "0.05",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let report = fs::read_to_string(out.join("correlations.tsv")).unwrap();
    assert!(report.contains("alpha=0.05"));
    let gratitude = report
        .lines()
        .find(|l| l.starts_with("gratitude\t"))
        .expect("gratitude row");
    let r: f64 = gratitude.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(r > 0.0, "gratitude should correlate positively: {gratitude}");
    let taboo = report
        .lines()
        .find(|l| l.starts_with("taboo\t"))
        .expect("taboo row");
    let r: f64 = taboo.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(r < 0.0, "taboo should correlate negatively: {taboo}");
    let svg = fs::read_to_string(out.join("correlations.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("gratitude"));

    let result = run(&[
        "train",
        "--features",
        features_s,
        "--annotations",
        &annotations,
        "--out",
        out_s,
        "--seed",
        "7",
        "--folds",
        "2",
        "--c-grid",
        "0.01,0.1",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let model = out.join("model.json");
    assert!(model.exists());
    let metrics = fs::read_to_string(out.join("metrics.tsv")).unwrap();
    assert!(metrics.contains("feature_set\tf1\tprecision\trecall\trocauc\taccuracy"));

    let result = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--features",
        features_s,
        "--out",
        out_s,
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let predictions = fs::read_to_string(out.join("predictions.tsv")).unwrap();
    assert!(predictions.contains("post_id\tlabel\tmargin"));
    assert_eq!(
        predictions.lines().filter(|l| !l.starts_with('#')).count(),
        41,
        "header + one row per post"
    );

    let result = run(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--features",
        features_s,
        "--annotations",
        &annotations,
        "--out",
        out_s,
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let row = fs::read_to_string(out.join("metrics.tsv")).unwrap();
    let data_row = row.lines().last().unwrap();
    let f1: f64 = data_row.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(f1 >= 0.9, "clearly separated fixture should score high: {data_row}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = demo_corpus(dir.path());
    let cfg = dir.path().join("run.json");
    write(&cfg, "{\"seed\": 1, \"out\": \"ignored\"}");
    let out = dir.path().join("real");
    let result = run(&[
        "extract",
        "--input",
        &corpus,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let text = fs::read_to_string(out.join("features.tsv")).unwrap();
    assert!(text.contains("# seed: 99"), "flag must beat config file");
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn predict_with_mismatched_features_zero_fills() {
    let dir = TempDir::new().unwrap();
    let (corpus, annotations) = demo_corpus(dir.path());
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    assert!(run(&["extract", "--input", &corpus, "--out", out_s])
        .status
        .success());
    let features = out.join("features.tsv");
    assert!(run(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--annotations",
        &annotations,
        "--out",
        out_s,
        "--folds",
        "2",
        "--c-grid",
        "0.1",
    ])
    .status
    .success());

    // a feature file with one shared and one alien column
    let sparse = dir.path().join("sparse.tsv");
    write(&sparse, "post_id\tgratitude\tmystery\np00\t0.5\t0.1\n");
    let result = run(&[
        "predict",
        "--model",
        out.join("model.json").to_str().unwrap(),
        "--features",
        sparse.to_str().unwrap(),
        "--out",
        out_s,
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    assert!(
        stderr(&result).contains("zero-filled"),
        "expected a warning about missing model features"
    );
}
