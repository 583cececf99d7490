//! Record streams in and out, summary tables, plot points and group comparisons.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, TscvError};
use crate::metrics::{aggregate, median, Summary};
use crate::stats::{mann_whitney_u, Alternative};
use crate::types::{ExperimentRecord, Strategy};

/// One JSON object per line.
pub fn write_jsonl<W: Write>(records: &[ExperimentRecord], mut writer: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_jsonl<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| TscvError::Input(format!("record on line {}: {e}", i + 1)))?;
        records.push(record);
    }
    Ok(records)
}

/// Record attribute usable as a grouping key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupField {
    Dataset,
    Classifier,
    Strategy,
    K,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::Dataset => "dataset",
            GroupField::Classifier => "classifier",
            GroupField::Strategy => "strategy",
            GroupField::K => "K",
        }
    }

    pub fn value(self, record: &ExperimentRecord) -> KeyValue {
        match self {
            GroupField::Dataset => KeyValue::Text(record.dataset_name.clone()),
            GroupField::Classifier => KeyValue::Text(record.classifier_id.clone()),
            GroupField::Strategy => KeyValue::Text(record.strategy.to_string()),
            GroupField::K => KeyValue::Number(record.k_folds),
        }
    }
}

impl FromStr for GroupField {
    type Err = TscvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dataset" => Ok(GroupField::Dataset),
            "classifier" => Ok(GroupField::Classifier),
            "strategy" => Ok(GroupField::Strategy),
            "k" => Ok(GroupField::K),
            other => Err(TscvError::Config(format!(
                "unknown grouping key {other:?}; expected dataset, classifier, strategy or K"
            ))),
        }
    }
}

/// Group label that sorts numbers numerically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyValue {
    Number(usize),
    Text(String),
}

impl fmt::Display for KeyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyValue::Number(n) => write!(f, "{n}"),
            KeyValue::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for KeyValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KeyValue::Number(n) => s.serialize_u64(*n as u64),
            KeyValue::Text(t) => s.serialize_str(t),
        }
    }
}

fn key_of(record: &ExperimentRecord, fields: &[GroupField]) -> Vec<KeyValue> {
    fields.iter().map(|f| f.value(record)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub key: Vec<KeyValue>,
    /// `None` when the group has no valid fold.
    pub summary: Option<Summary>,
}

/// Median, population sigma and count of valid-fold AUC-PR per group.
pub fn group_auc_pr(records: &[ExperimentRecord], fields: &[GroupField]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<Vec<KeyValue>, Vec<f64>> = BTreeMap::new();
    for record in records {
        groups.entry(key_of(record, fields)).or_default().extend(record.valid_auc_pr());
    }
    groups.into_iter().map(|(key, values)| GroupSummary { key, summary: aggregate(&values) }).collect()
}

/// Pooled WF vs SW medians of one row group, with the one-sided p-value for
/// WF scoring below SW.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRow {
    pub key: Vec<KeyValue>,
    pub median_wf: Option<f64>,
    pub median_sw: Option<f64>,
    pub p_value: Option<f64>,
}

fn split_by_strategy<'a>(
    records: &'a [ExperimentRecord],
    fields: &[GroupField],
) -> BTreeMap<Vec<KeyValue>, [Vec<&'a ExperimentRecord>; 2]> {
    let mut groups: BTreeMap<Vec<KeyValue>, [Vec<&ExperimentRecord>; 2]> = BTreeMap::new();
    for record in records {
        let slot = match record.strategy {
            Strategy::WalkForward => 0,
            Strategy::SlidingWindow => 1,
        };
        groups.entry(key_of(record, fields)).or_default()[slot].push(record);
    }
    groups
}

fn wf_below_sw(wf: &[f64], sw: &[f64]) -> Option<f64> {
    if wf.is_empty() || sw.is_empty() {
        return None;
    }
    mann_whitney_u(wf, sw, Alternative::Less).ok().map(|r| r.p_value)
}

/// AUC-PR medians by strategy per group of `fields`, over every valid fold.
pub fn strategy_auc_pr_table(records: &[ExperimentRecord], fields: &[GroupField]) -> Vec<StrategyRow> {
    split_by_strategy(records, fields)
        .into_iter()
        .map(|(key, [wf, sw])| {
            let wf: Vec<f64> = wf.iter().flat_map(|r| r.valid_auc_pr()).collect();
            let sw: Vec<f64> = sw.iter().flat_map(|r| r.valid_auc_pr()).collect();
            StrategyRow { key, median_wf: median(&wf), median_sw: median(&sw), p_value: wf_below_sw(&wf, &sw) }
        })
        .collect()
}

/// Median and sigma of per-record sensitivity AUC by strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub key: Vec<KeyValue>,
    pub wf: Option<Summary>,
    pub sw: Option<Summary>,
}

pub fn strategy_sensitivity_table(records: &[ExperimentRecord], fields: &[GroupField]) -> Vec<SensitivityRow> {
    split_by_strategy(records, fields)
        .into_iter()
        .map(|(key, [wf, sw])| {
            let collect = |rs: &[&ExperimentRecord]| -> Vec<f64> { rs.iter().filter_map(|r| r.sensitivity_auc).collect() };
            SensitivityRow { key, wf: aggregate(&collect(&wf)), sw: aggregate(&collect(&sw)) }
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn header(fields: &[GroupField], rest: &[&str]) -> Vec<String> {
    fields.iter().map(|f| f.name().to_string()).chain(rest.iter().map(|s| s.to_string())).collect()
}

fn write_strategy_rows(path: &Path, fields: &[GroupField], rows: &[StrategyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header(fields, &["M_WF", "M_SW", "p_value"]))?;
    for row in rows {
        let mut out: Vec<String> = row.key.iter().map(|k| k.to_string()).collect();
        out.extend([cell(row.median_wf), cell(row.median_sw), cell(row.p_value)]);
        w.write_record(out)?;
    }
    w.flush()?;
    Ok(())
}

fn write_sensitivity_rows(path: &Path, fields: &[GroupField], rows: &[SensitivityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header(fields, &["M_WF", "sigma_WF", "M_SW", "sigma_SW"]))?;
    for row in rows {
        let mut out: Vec<String> = row.key.iter().map(|k| k.to_string()).collect();
        for s in [&row.wf, &row.sw] {
            out.push(cell(s.map(|s| s.median)));
            out.push(cell(s.map(|s| s.sigma)));
        }
        w.write_record(out)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the four strategy summaries, pooled and per dataset, into `dir`:
/// `classifier_auc_pr`, `kfold_auc_pr`, `classifier_sensitivity` and
/// `kfold_sensitivity`, each also as `*_by_dataset.csv`.
pub fn write_summary_tables(records: &[ExperimentRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(TscvError::Input("no records to summarize".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (stem, field) in [("classifier", GroupField::Classifier), ("kfold", GroupField::K)] {
        for (suffix, fields) in [("", vec![field]), ("_by_dataset", vec![GroupField::Dataset, field])] {
            let path = dir.join(format!("{stem}_auc_pr{suffix}.csv"));
            write_strategy_rows(&path, &fields, &strategy_auc_pr_table(records, &fields))?;
            written.push(path);
            let path = dir.join(format!("{stem}_sensitivity{suffix}.csv"));
            write_sensitivity_rows(&path, &fields, &strategy_sensitivity_table(records, &fields))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct PlotRow<'a> {
    strategy: Strategy,
    classifier: &'a str,
    #[serde(rename = "K")]
    k_folds: usize,
    fold: usize,
    auc_pr: f64,
    positive_ratio: f64,
}

/// One CSV row per valid fold, sorted by (strategy, classifier, K, fold).
pub fn emit_plotdata<W: Write>(records: &[ExperimentRecord], writer: W) -> Result<()> {
    let mut rows: Vec<PlotRow> = records
        .iter()
        .flat_map(|r| {
            r.scored_folds.iter().filter_map(move |f| {
                f.auc_pr.map(|auc_pr| PlotRow {
                    strategy: r.strategy,
                    classifier: &r.classifier_id,
                    k_folds: r.k_folds,
                    fold: f.fold.k,
                    auc_pr,
                    positive_ratio: f.positive_ratio,
                })
            })
        })
        .collect();
    rows.sort_by(|a, b| (a.strategy, a.classifier, a.k_folds, a.fold).cmp(&(b.strategy, b.classifier, b.k_folds, b.fold)));
    let mut w = csv::Writer::from_writer(writer);
    for row in &rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["strategy", "classifier", "K", "fold", "auc_pr", "positive_ratio"])?;
    }
    w.flush()?;
    Ok(())
}

/// A rank test between the valid-fold AUC-PR of two record sets in one
/// condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub comparison: String,
    pub condition: String,
    pub p_value: Option<f64>,
}

/// Compares `a` against `b` within each group of `by` present in either set.
/// With no fields the whole sets are compared under condition `all`.
pub fn compare_groups(
    label_a: &str,
    a: &[ExperimentRecord],
    label_b: &str,
    b: &[ExperimentRecord],
    by: &[GroupField],
    alternative: Alternative,
) -> Vec<ComparisonRow> {
    let mut groups: BTreeMap<Vec<KeyValue>, [Vec<f64>; 2]> = BTreeMap::new();
    for (slot, set) in [a, b].into_iter().enumerate() {
        for record in set {
            groups.entry(key_of(record, by)).or_default()[slot].extend(record.valid_auc_pr());
        }
    }
    groups
        .into_iter()
        .map(|(key, [xa, xb])| {
            let condition = if key.is_empty() {
                "all".to_string()
            } else {
                key.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/")
            };
            let p_value = if xa.is_empty() || xb.is_empty() {
                None
            } else {
                mann_whitney_u(&xa, &xb, alternative).ok().map(|r| r.p_value)
            };
            ComparisonRow { comparison: format!("{label_a} vs {label_b}"), condition, p_value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Fold, ScoredFold};

    fn record(classifier: &str, strategy: Strategy, k_folds: usize, aucs: &[Option<f64>]) -> ExperimentRecord {
        let folds = aucs
            .iter()
            .enumerate()
            .map(|(i, auc)| ScoredFold {
                fold: Fold::new(i + 1, (1, 20), (21 + i, 21 + i)).unwrap(),
                scores: vec![0.5],
                positive_ratio: 0.1 * (i + 1) as f64,
                valid: auc.is_some(),
                auc_pr: *auc,
            })
            .collect();
        ExperimentRecord::assemble("d", classifier, strategy, k_folds, 150, 0, folds, Vec::new())
    }

    #[test]
    fn jsonl_round_trip() {
        let records = vec![
            record("rf", Strategy::WalkForward, 3, &[Some(0.5), None, Some(0.75)]),
            record("rocket", Strategy::SlidingWindow, 4, &[None]),
        ];
        let mut buf = Vec::new();
        write_jsonl(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"K\":3"));
        assert_eq!(read_jsonl(&buf[..]).unwrap(), records);
    }

    #[test]
    fn single_group_single_row() {
        let records = vec![record("rf", Strategy::WalkForward, 3, &[Some(0.2), Some(0.4)])];
        let rows = strategy_auc_pr_table(&records, &[GroupField::Classifier]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_wf, Some(0.30000000000000004));
        assert_eq!(rows[0].median_sw, None);
        assert_eq!(rows[0].p_value, None);
    }

    #[test]
    fn k_groups_sort_numerically() {
        let records: Vec<_> = [10, 9, 3].iter().map(|&k| record("rf", Strategy::SlidingWindow, k, &[Some(0.5)])).collect();
        let rows = group_auc_pr(&records, &[GroupField::K]);
        let keys: Vec<_> = rows.iter().map(|r| r.key[0].clone()).collect();
        assert_eq!(keys, vec![KeyValue::Number(3), KeyValue::Number(9), KeyValue::Number(10)]);
    }

    #[test]
    fn plotdata_projects_valid_folds() {
        let records = vec![
            record("rf", Strategy::SlidingWindow, 3, &[Some(0.9), None, Some(0.7)]),
            record("rf", Strategy::WalkForward, 3, &[Some(0.1), Some(0.2), Some(0.3)]),
        ];
        let mut buf = Vec::new();
        emit_plotdata(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "strategy,classifier,K,fold,auc_pr,positive_ratio");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "WalkForward,rf,3,1,0.1,0.1");
        assert_eq!(lines[5], "SlidingWindow,rf,3,3,0.7,0.30000000000000004");
    }

    #[test]
    fn separated_strategies_give_small_p() {
        let wf: Vec<Option<f64>> = (0..6).map(|i| Some(0.1 + 0.01 * i as f64)).collect();
        let sw: Vec<Option<f64>> = (0..6).map(|i| Some(0.8 + 0.01 * i as f64)).collect();
        let records = vec![record("rf", Strategy::WalkForward, 3, &wf), record("rf", Strategy::SlidingWindow, 3, &sw)];
        let rows = strategy_auc_pr_table(&records, &[]);
        // one favorable arrangement out of C(12, 6)
        assert!((rows[0].p_value.unwrap() - 1.0 / 924.0).abs() < 1e-12);

        let cmp = compare_groups("wf", &records[..1], "sw", &records[1..], &[], Alternative::Less);
        assert_eq!(cmp.len(), 1);
        assert_eq!(cmp[0].condition, "all");
        assert_eq!(cmp[0].p_value, rows[0].p_value);
    }
}
