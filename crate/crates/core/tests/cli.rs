use std::path::{Path, PathBuf};

use clap::Parser;
use sketchqa::gateway::cli::{run, Cli};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn sketchqa(args: &[&str]) -> sketchqa::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("sketchqa").chain(args.iter().copied())).expect("valid arguments");
    run(cli)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn match_single_pair_and_fixture_file() {
    let lex = data().join("lexicon");
    let out = sketchqa(&["match", "--guess", "firearm", "--truth", "revolver", "--lexicon-dir", path(&lex)]).unwrap();
    assert!(out.contains("accuracy") && out.trim_end().ends_with('0'), "{out}");
    let out = sketchqa(&[
        "match",
        "--guess",
        "firearm",
        "--truth",
        "revolver",
        "--lexicon-dir",
        path(&lex),
        "--criteria",
        "EM|SUB|SYN|HY-PC",
    ])
    .unwrap();
    assert!(out.trim_end().ends_with('1'), "{out}");

    let pairs = data().join("fixtures/criteria_pairs.tsv");
    let out = sketchqa(&["--format", "machine", "match", "--pairs", path(&pairs), "--lexicon-dir", path(&lex)]).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("match\t")).count(), 25);
}

#[test]
fn preprocess_reproduces_the_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("clean.jsonl");
    let out = sketchqa(&[
        "preprocess",
        "--input",
        path(&data().join("fixtures/raw_30.jsonl")),
        "--output",
        path(&out_file),
        "--lexicon-dir",
        path(&data().join("lexicon")),
    ])
    .unwrap();
    assert!(out.contains("removed"), "{out}");
    assert_eq!(
        std::fs::read(&out_file).unwrap(),
        std::fs::read(data().join("fixtures/golden_30.jsonl")).unwrap()
    );
}

#[test]
fn split_writes_three_disjoint_files() {
    let dir = tempfile::tempdir().unwrap();
    sketchqa(&["split", "--input", path(&data().join("mini_corpus.jsonl")), "--out-dir", path(dir.path())]).unwrap();
    let mut ids = Vec::new();
    let mut sizes = Vec::new();
    for part in ["train", "val", "test"] {
        let c = sketchqa::corpus::parse_corpus(&dir.path().join(format!("{part}.jsonl")), true).unwrap().corpus;
        sizes.push(c.len());
        ids.extend(c.records().iter().map(|r| r.id().to_string()));
    }
    assert_eq!(sizes, [24, 10, 6]);
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 40);
}

#[test]
fn analyze_reports_histogram_and_criteria() {
    let out = sketchqa(&[
        "analyze",
        "--input",
        path(&data().join("mini_corpus.jsonl")),
        "--lexicon-dir",
        path(&data().join("lexicon")),
    ])
    .unwrap();
    assert!(out.contains("guess_count"), "{out}");
    assert!(out.contains("first_guess_median"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("criteria_accuracy")).count(), 6);
}

#[test]
fn knn_of_a_word_starts_with_itself() {
    let out = sketchqa(&[
        "--format",
        "machine",
        "knn",
        "--lexicon-dir",
        path(&data().join("lexicon")),
        "--word",
        "revolver",
        "--k",
        "3",
    ])
    .unwrap();
    let first = out.lines().next().unwrap();
    assert!(first.contains("revolver"), "{out}");
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn train_then_eval_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.toml");
    std::fs::write(
        &manifest,
        format!(
            "seed = 1\ncorpus = {:?}\nlexicon_dir = {:?}\noutput_dir = \"out\"\nmemorize = true\nhidden_sizes = [8]\nepochs = 3\n",
            path(&data().join("mini_corpus.jsonl")),
            path(&data().join("lexicon")),
        ),
    )
    .unwrap();
    let out = sketchqa(&["train", "--manifest", path(&manifest)]).unwrap();
    assert!(out.contains("best_hidden"), "{out}");
    let checkpoint = dir.path().join("out/model-h8.pgm");
    assert!(dir.path().join("out/run-h8.log").exists());

    let out = sketchqa(&[
        "--format",
        "machine",
        "eval",
        "--checkpoint",
        path(&checkpoint),
        "--corpus",
        path(&data().join("mini_corpus.jsonl")),
        "--lexicon-dir",
        path(&data().join("lexicon")),
    ])
    .unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("accuracy\t")).count(), 3, "{out}");
}

#[test]
fn bad_inputs_are_errors() {
    let lex = data().join("lexicon");
    assert!(sketchqa(&["match", "--guess", "a", "--truth", "b", "--lexicon-dir", path(&lex), "--criteria", "XX"]).is_err());
    assert!(sketchqa(&["analyze", "--input", "/nonexistent/corpus.jsonl"]).is_err());
    assert!(Cli::try_parse_from(["sketchqa", "match", "--guess", "a"]).is_err());
}
