use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tscv-bench")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn folds_prints_one_json_line_per_fold() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&bin(&["folds", "--length", "1500", "--k", "9", "--strategy", "sw"], dir.path()));
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0]["test"], serde_json::json!([151, 300]));
    assert_eq!(lines[0]["train"], serde_json::json!([1, 150]));
    assert_eq!(lines[8]["test"], serde_json::json!([1351, 1500]));
}

#[test]
fn synth_run_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&bin(&["synth", "--seed", "2", "--length", "900", "--zones", "3", "--max-len", "120", "--out", "s.csv"], d));
    let header = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert!(header.lines().next().unwrap().ends_with("Fault Status"));

    let run = [
        "run", "--dataset", "s.csv", "--dataset", "synth:seed=5,length=900,zones=3,max_len=120", "--k", "3,4", "--delta", "100",
        "--classifiers", "majority,logistic", "--seed", "7", "--out", "r.jsonl",
    ];
    ok(&bin(&run, d));
    let records = std::fs::read_to_string(d.join("r.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 2 * 2 * 2 * 2);

    ok(&bin(&["summarize", "r.jsonl", "--out", "tables"], d));
    let table = std::fs::read_to_string(d.join("tables/classifier_auc_pr.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "classifier,M_WF,M_SW,p_value");
    assert_eq!(table.lines().count(), 3);
    assert!(d.join("tables/kfold_sensitivity_by_dataset.csv").exists());

    let plot = ok(&bin(&["plotdata", "r.jsonl"], d));
    assert_eq!(plot.lines().next().unwrap(), "strategy,classifier,K,fold,auc_pr,positive_ratio");

    let metrics = ok(&bin(&["metrics", "r.jsonl", "--group-by", "classifier"], d));
    assert_eq!(metrics.lines().count(), 3);

    let cmp = ok(&bin(&["stats", "compare", "r.jsonl", "r.jsonl", "--by", "classifier", "--alternative", "two-sided"], d));
    for line in cmp.lines().skip(1) {
        let p: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.9..=1.0).contains(&p), "{line}");
    }
}

#[test]
fn stationarity_reports_every_channel() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&bin(&["stats", "stationarity", "--dataset", "synth:channels=3,seed=1"], dir.path()));
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("channel,adf_stat"));
}

#[test]
fn unplannable_grid_skips_cells_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "--dataset", "synth", "--k", "12", "--classifiers", "majority"], dir.path());
    assert_eq!(ok(&out), "");
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!bin(&["run", "--dataset", "synth", "--classifiers", "svm"], dir.path()).status.success());
    assert!(!bin(&["run", "--dataset", "synth:bogus=1"], dir.path()).status.success());
    assert!(!bin(&["run", "--dataset", "missing.csv"], dir.path()).status.success());
    assert!(!bin(&["folds", "--length", "100", "--k", "9"], dir.path()).status.success());
    assert!(!bin(&["run"], dir.path()).status.success());
}
