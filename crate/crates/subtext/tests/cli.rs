//! End-to-end tests of the `subtext` binary: every subcommand exercised
//! through real files in a temp directory, asserting on exit codes, stdout,
//! stderr, and the artifacts left on disk.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use subtext::model_io::load_model;

fn subtext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subtext"))
        .args(args)
        .output()
        .expect("spawn subtext binary")
}

fn run_ok(args: &[&str]) -> String {
    let out = subtext(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn run_err(args: &[&str]) -> String {
    let out = subtext(args);
    assert!(!out.status.success(), "expected failure for {args:?}");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Two classes over disjoint vocabularies, `text<TAB>label` per line.
fn separable_tsv(per_class: usize) -> String {
    let mut out = String::new();
    for i in 0..per_class {
        out.push_str(&format!(
            "good{} fine{} calm{}\tpos\n",
            i % 7,
            (i + 2) % 7,
            (i + 4) % 7
        ));
        out.push_str(&format!(
            "vile{} foul{} grim{}\tneg\n",
            i % 7,
            (i + 3) % 7,
            (i + 5) % 7
        ));
    }
    out
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).expect("write fixture");
}

#[test]
fn train_bpe_writes_the_merge_table() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let merges = dir.path().join("codes.merges");
    write(&corpus, "aaab aaab\naaab\n");

    let stdout = run_ok(&[
        "train-bpe",
        "--data",
        corpus.to_str().unwrap(),
        "--num-merges",
        "3",
        "--out",
        merges.to_str().unwrap(),
    ]);
    assert!(stdout.contains("learned 3 merges"));

    let content = fs::read_to_string(&merges).unwrap();
    let lines: Vec<&str> = content.lines().collect();
    assert_eq!(lines[0], "#bpe v1 merges=3");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "a a");
}

#[test]
fn train_bpe_with_zero_merges_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let merges = dir.path().join("codes.merges");
    write(&corpus, "aaab aaab\n");

    run_ok(&[
        "train-bpe",
        "--data",
        corpus.to_str().unwrap(),
        "--num-merges",
        "0",
        "--out",
        merges.to_str().unwrap(),
    ]);
    assert_eq!(fs::read_to_string(&merges).unwrap(), "#bpe v1 merges=0\n");
}

#[test]
fn train_bpe_fails_on_a_missing_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let stderr = run_err(&[
        "train-bpe",
        "--data",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("codes.merges").to_str().unwrap(),
    ]);
    assert!(stderr.contains("error:"));
    assert!(stderr.contains("nope.txt"));
}

#[test]
fn encode_applies_wordpiece_markers() {
    let dir = tempfile::tempdir().unwrap();
    let vocab = dir.path().join("vocab.txt");
    let input = dir.path().join("input.txt");
    write(&vocab, "[UNK]\nun\n##aff\n##able\n");
    write(&input, "Unaffable!\n");

    let stdout = run_ok(&[
        "encode",
        "--strategy",
        &format!("wordpiece:{}", vocab.display()),
        "--data",
        input.to_str().unwrap(),
    ]);
    assert_eq!(stdout, "un ##aff ##able [UNK]\n");
}

#[test]
fn encode_word_strategy_emits_normalized_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write(&input, "Hello @Bob http://x.io WORLD\n");

    let stdout = run_ok(&[
        "encode",
        "--strategy",
        "word",
        "--tweet-mode",
        "--data",
        input.to_str().unwrap(),
    ]);
    assert_eq!(stdout, "hello <user> <url> world\n");

    // Feeding the output back through changes nothing: sentinels stay whole.
    let echoed = dir.path().join("echoed.txt");
    write(&echoed, &stdout);
    let again = run_ok(&[
        "encode",
        "--strategy",
        "word",
        "--tweet-mode",
        "--data",
        echoed.to_str().unwrap(),
    ]);
    assert_eq!(again, stdout);
}

#[test]
fn encode_with_bpe_requires_a_merge_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    write(&input, "anything\n");

    let stderr = run_err(&[
        "encode",
        "--strategy",
        "bpe",
        "--data",
        input.to_str().unwrap(),
    ]);
    assert!(stderr.contains("--merges"));
}

#[test]
fn encode_of_an_empty_file_is_an_empty_success() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.txt");
    write(&input, "");

    let stdout = run_ok(&[
        "encode",
        "--strategy",
        "word",
        "--data",
        input.to_str().unwrap(),
    ]);
    assert_eq!(stdout, "");
}

#[test]
fn train_predict_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.tsv");
    let model = dir.path().join("model.stxt");
    let probes = dir.path().join("probes.txt");
    let preds = dir.path().join("preds.tsv");
    let report = dir.path().join("report.json");
    write(&data, &separable_tsv(20));
    write(&probes, "good1 fine3 calm5\n\nvile2 foul5 grim6\n");

    let stdout = run_ok(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--dim",
        "16",
        "--epochs",
        "5",
        "--lr",
        "0.5",
        "--buckets",
        "2000",
        "--seed",
        "3",
    ]);
    assert!(stdout.contains("trained on 40 documents (2 classes"));
    assert!(stdout.contains("epoch 0 mean loss"));
    assert!(stdout.contains("saved model ->"));
    assert!(model.exists());

    run_ok(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        probes.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    let lines: Vec<String> = fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("pos\t"));
    assert!(lines[2].starts_with("neg\t"));
    // The empty middle line has no features, so the tie rule picks the first
    // label at uniform probability.
    assert_eq!(lines[1], "pos\t0.500000");
    for line in &lines {
        let prob: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
        assert!(prob > 0.0 && prob <= 1.0);
    }

    let eval_out = run_ok(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--report-json",
        report.to_str().unwrap(),
    ]);
    assert!(eval_out.contains("accuracy"));
    assert!(eval_out.contains("weighted F1"));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["accuracy"].as_f64().unwrap() >= 0.99);
    assert!(parsed["weighted_f1"].as_f64().unwrap() >= 0.99);
}

#[test]
fn evaluate_rejects_labels_missing_from_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.tsv");
    let model = dir.path().join("model.stxt");
    write(&data, &separable_tsv(10));
    run_ok(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--dim",
        "8",
        "--buckets",
        "2000",
    ]);

    let alien = dir.path().join("alien.tsv");
    write(&alien, "good1 fine2\tzebra\n");
    let stderr = run_err(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--data",
        alien.to_str().unwrap(),
    ]);
    assert!(stderr.contains("zebra"));
}

#[test]
fn malformed_dataset_lines_are_reported_with_their_number() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.tsv");
    write(&data, "ok fine\tpos\nno-tab-here\n");

    let stderr = run_err(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("model.stxt").to_str().unwrap(),
    ]);
    assert!(stderr.contains("line 2"));
}

#[test]
fn cv_writes_report_and_splits() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.tsv");
    let report = dir.path().join("cv.json");
    let splits = dir.path().join("splits.txt");
    write(&data, &separable_tsv(30));

    let stdout = run_ok(&[
        "cv",
        "--data",
        data.to_str().unwrap(),
        "--k",
        "5",
        "--dim",
        "16",
        "--buckets",
        "2000",
        "--seed",
        "9",
        "--report-json",
        report.to_str().unwrap(),
        "--splits-out",
        splits.to_str().unwrap(),
    ]);
    assert!(stdout.contains("split  weighted F1  macro F1"));
    assert!(stdout.contains("±"));

    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["k"], 5);
    assert_eq!(parsed["seed"], 9);
    assert_eq!(parsed["splits"].as_array().unwrap().len(), 5);
    // Disjoint vocabularies make every held-out fold near-perfect.
    assert!(parsed["weighted_f1"]["mean"].as_f64().unwrap() >= 0.99);

    let split_text = fs::read_to_string(&splits).unwrap();
    let mut lines = split_text.lines();
    assert_eq!(lines.next(), Some("k=5 seed=9"));
    let mut ids: Vec<usize> = lines
        .flat_map(|l| l.split(',').map(|id| id.parse().unwrap()))
        .collect();
    ids.sort_unstable();
    assert_eq!(ids, (0..60).collect::<Vec<_>>());
}

#[test]
fn cv_rejects_more_folds_than_documents() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.tsv");
    write(&data, "good1 fine2\tpos\nvile1 foul2\tneg\n");

    let stderr = run_err(&[
        "cv",
        "--data",
        data.to_str().unwrap(),
        "--k",
        "5",
        "--buckets",
        "2000",
    ]);
    assert!(stderr.contains("k=5"));
}

#[test]
fn config_file_fills_gaps_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.tsv");
    let config = dir.path().join("run.json");
    let model = dir.path().join("model.stxt");
    write(&data, &separable_tsv(10));
    write(
        &config,
        r#"{"dim": 8, "seed": 11, "epochs": 2, "buckets": 2000}"#,
    );

    run_ok(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--dim",
        "4",
    ]);
    let pipeline = load_model(&model).unwrap();
    assert_eq!(pipeline.model.dim(), 4, "flag overrides the config file");
    assert_eq!(pipeline.seed, 11, "unset flags fall back to the file");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.tsv");
    let config = dir.path().join("run.json");
    write(&data, &separable_tsv(5));
    write(&config, r#"{"dims": 8}"#);

    let stderr = run_err(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("model.stxt").to_str().unwrap(),
    ]);
    assert!(stderr.contains("dims"));
}
