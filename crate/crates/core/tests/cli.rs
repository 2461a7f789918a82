mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cctm::synthetic::{planted, PlantedConfig};
use tempfile::TempDir;

fn cctm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cctm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self {
            dir: TempDir::new().unwrap(),
        };
        let p = planted(&PlantedConfig {
            documents: 60,
            doc_len: 40,
            vocab_size: 200,
            topics: 3,
            specific_token_share: 0.3,
            leakage: 0.0,
            word_concentration: 10.0,
            seed: 4,
            ..PlantedConfig::default()
        })
        .unwrap();
        common::write_jsonl(&p.corpus, &ws.path("corpus.jsonl"));
        let config = format!(
            "corpus = {:?}\ntopics = 3\nburn_in = 20\nsamples = 2\nlag = 5\nfolds = 3\nseed = 7\nk = 5\nsweep_points = 4\n",
            ws.path("corpus.jsonl")
        );
        fs::write(ws.path("run.toml"), config).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn train(&self, model: &str, extra: &[&str]) -> Output {
        let (cfg, out) = (self.arg("run.toml"), self.arg(model));
        let mut args = vec!["train", "--config", &cfg, "--output", &out];
        args.extend_from_slice(extra);
        cctm(&args)
    }
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap()
}

#[test]
fn train_entropy_prints_threshold_and_gamma() {
    let ws = Workspace::new();
    let o = ws.train("m.bin", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "C\tV\tthreshold\tgamma\tT");
    let fields: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(fields[0], "2");
    assert_eq!(fields[2], "0.918");
    assert_eq!(fields[4], "3");
    let progress = fs::read_to_string(ws.path("m.bin.progress.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(progress.lines().next().unwrap()).unwrap();
    assert_eq!(first["record"], "config");
    assert_eq!(progress.lines().count(), 1 + 30);
    let model = cctm::model::load_model(&ws.path("m.bin")).unwrap();
    assert!(model.config.unwrap().contains("topics = 3"));
}

#[test]
fn train_cclda_omits_partition_fields() {
    let ws = Workspace::new();
    let o = ws.train("c.bin", &["--variant", "cclda", "--progress", &ws.arg("c.log")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "C\tV\tT");
    assert!(ws.path("c.log").exists());
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let ws = Workspace::new();
    let o = cctm(&["train", "--output", &ws.arg("m.bin")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corpus"));
    let o = cctm(&["train"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreadable_corpus_is_a_data_error() {
    let ws = Workspace::new();
    let o = cctm(&["rank", "--corpus", &ws.arg("nope.jsonl")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_key_is_a_usage_error() {
    let ws = Workspace::new();
    fs::write(ws.path("bad.toml"), "topicz = 4\n").unwrap();
    let o = cctm(&["rank", "--config", &ws.arg("bad.toml")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_lists_k_words_per_distribution() {
    let ws = Workspace::new();
    assert!(ws.train("m.bin", &[]).status.success());
    let o = cctm(&["report", "--model", &ws.arg("m.bin"), "--k", "5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').collect())
        .collect();
    for topic in 0..3 {
        for dist in ["independent", "c0", "c1"] {
            let n = rows.iter().filter(|r| r[0] == topic.to_string() && r[1] == dist).count();
            assert_eq!(n, 5, "topic {topic} {dist}");
        }
    }
    let table = cctm(&["report", "--model", &ws.arg("m.bin"), "--k", "5", "--format", "table"]);
    assert!(table.status.success());
}

#[test]
fn rank_is_sorted_by_termhood() {
    let ws = Workspace::new();
    let o = cctm(&["rank", "--config", &ws.arg("run.toml")]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let col = header.iter().position(|h| *h == "termhood").unwrap();
    let values: Vec<f64> = lines.map(|l| l.split('\t').nth(col).unwrap().parse().unwrap()).collect();
    assert!(values.len() > 10);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn eval_on_training_set_beats_chance() {
    let ws = Workspace::new();
    assert!(ws.train("m.bin", &[]).status.success());
    let o = cctm(&[
        "eval",
        "--model",
        &ws.arg("m.bin"),
        "--test",
        &ws.arg("corpus.jsonl"),
        "--output",
        &ws.arg("eval.jsonl"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("entropy\t")).unwrap();
    let acc: f64 = row.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(acc > 0.5, "accuracy {acc}");
    let records = fs::read_to_string(ws.path("eval.jsonl")).unwrap();
    assert!(records.lines().any(|l| l.contains("\"record\":\"fold\"")));
}

#[test]
fn eval_cross_validation_reports_both_models() {
    let ws = Workspace::new();
    let o = cctm(&["eval", "--cv", "--config", &ws.arg("run.toml")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "model\tAcc\tTC\tPerpl"));
    assert!(out.lines().any(|l| l.starts_with("entropy\t")));
    assert!(out.lines().any(|l| l.starts_with("cclda\t")));
}

#[test]
fn sweep_rows_sorted_by_gamma() {
    let ws = Workspace::new();
    let o = cctm(&["sweep", "--config", &ws.arg("run.toml")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "threshold,gamma,accuracy");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
    assert_eq!(rows.last().unwrap()[1], 1.0);
}

#[test]
fn histogram_reports_hapax_threshold() {
    let ws = Workspace::new();
    let o = cctm(&["histogram", "--config", &ws.arg("run.toml"), "--bins", "10"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("# hapax_threshold = 0.918"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn commands_are_reproducible() {
    let ws = Workspace::new();
    for name in ["a.bin", "b.bin"] {
        assert!(ws.train(name, &[]).status.success());
    }
    assert_eq!(read(&ws.path("a.bin")), read(&ws.path("b.bin")));
    let sequential = ws.train("s.bin", &["--sequential"]);
    assert!(sequential.status.success());
    assert_eq!(read(&ws.path("a.bin")), read(&ws.path("s.bin")));

    let eval = |out: &str| {
        cctm(&["eval", "--cv", "--config", &ws.arg("run.toml"), "--output", &ws.arg(out)]).stdout
    };
    assert_eq!(eval("e1.jsonl"), eval("e2.jsonl"));
    assert_eq!(read(&ws.path("e1.jsonl")), read(&ws.path("e2.jsonl")));

    let sweep = || cctm(&["sweep", "--config", &ws.arg("run.toml")]).stdout;
    assert_eq!(sweep(), sweep());
}
