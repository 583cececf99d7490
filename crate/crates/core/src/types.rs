//! Domain types shared by every stage of the benchmark: the uniform time grid,
//! labeled multivariate series, fold plans and the per-run result records.
//!
//! Time indices are 1-based and every range is inclusive on both ends. Storage
//! is 0-based internally; conversions happen at the accessor boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};
use crate::metrics;

/// Uniformly spaced timestamps `origin_s + i / rate_hz` for `i in 0..length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    rate_hz: f64,
    length: usize,
    origin_s: f64,
}

impl TimeGrid {
    pub fn new(rate_hz: f64, length: usize, origin_s: f64) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(TscvError::Config(format!(
                "sampling rate must be positive, got {rate_hz}"
            )));
        }
        if length == 0 {
            return Err(TscvError::Config("time grid must hold at least one point".into()));
        }
        if !origin_s.is_finite() {
            return Err(TscvError::Config("grid origin must be finite".into()));
        }
        Ok(Self { rate_hz, length, origin_s })
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn origin_s(&self) -> f64 {
        self.origin_s
    }

    /// Timestamp in seconds of the 0-based grid position `i`.
    pub fn timestamp(&self, i: usize) -> f64 {
        self.origin_s + i as f64 / self.rate_hz
    }
}

/// An `m`-channel real-valued series on a shared uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    grid: TimeGrid,
    channels: Vec<String>,
    /// One row per channel, each of grid length.
    values: Vec<Vec<f64>>,
}

impl MultivariateSeries {
    pub fn new(grid: TimeGrid, channels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(TscvError::Input("series needs at least one channel".into()));
        }
        if channels.len() != values.len() {
            return Err(TscvError::Shape(format!(
                "{} channel names but {} value rows",
                channels.len(),
                values.len()
            )));
        }
        for (name, row) in channels.iter().zip(&values) {
            if row.len() != grid.len() {
                return Err(TscvError::Shape(format!(
                    "channel {name:?} has {} values, grid has {}",
                    row.len(),
                    grid.len()
                )));
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(TscvError::Input(format!(
                    "channel {name:?} has a missing or non-finite value at index {}",
                    pos + 1
                )));
            }
        }
        Ok(Self { grid, channels, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    /// Row of values for channel `c` (0-based channel position).
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Observation of channel `c` at 1-based time index `t`.
    pub fn at(&self, c: usize, t: usize) -> f64 {
        self.values[c][t - 1]
    }

    /// Contiguous subsequence `x_p, ..., x_{p+n-1}` (1-based `p`).
    pub fn subsequence(&self, p: usize, n: usize) -> Result<SubsequenceView<'_>> {
        subsequence_view(self, p, n)
    }
}

/// Borrowed `m x n` window into a [`MultivariateSeries`].
#[derive(Debug, Clone, Copy)]
pub struct SubsequenceView<'a> {
    series: &'a MultivariateSeries,
    start: usize,
    len: usize,
}

impl<'a> SubsequenceView<'a> {
    /// 1-based index of the first column.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_channels(&self) -> usize {
        self.series.n_channels()
    }

    pub fn channel(&self, c: usize) -> &'a [f64] {
        &self.series.values[c][self.start - 1..self.start - 1 + self.len]
    }

    /// Column `j` (0-based within the view) as an owned `m`-vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_channels()).map(|c| self.channel(c)[j]).collect()
    }
}

pub fn subsequence_view(series: &MultivariateSeries, p: usize, n: usize) -> Result<SubsequenceView<'_>> {
    let total = series.len();
    if p == 0 {
        return Err(TscvError::Bounds("subsequence start p=0; indices are 1-based".into()));
    }
    if n == 0 {
        return Err(TscvError::Bounds(format!("subsequence at p={p} has zero length")));
    }
    let last = p + n - 1;
    if last > total {
        return Err(TscvError::Bounds(format!(
            "subsequence end index {last} (p={p}, n={n}) exceeds series length {total}"
        )));
    }
    Ok(SubsequenceView { series, start: p, len: n })
}

/// Binary per-timestamp labels, 1 = fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct LabelTrack(Vec<u8>);

impl LabelTrack {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(pos) = labels.iter().position(|&y| y > 1) {
            return Err(TscvError::Input(format!(
                "label at index {} is {}, expected 0 or 1",
                pos + 1,
                labels[pos]
            )));
        }
        Ok(Self(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Labels over the inclusive 1-based range `[start, end]`.
    pub fn range(&self, start: usize, end: usize) -> Result<&[u8]> {
        if start == 0 || start > end || end > self.0.len() {
            return Err(TscvError::Bounds(format!(
                "label range [{start}, {end}] outside [1, {}]",
                self.0.len()
            )));
        }
        Ok(&self.0[start - 1..end])
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&y| y == 1).count()
    }
}

impl TryFrom<Vec<u8>> for LabelTrack {
    type Error = TscvError;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LabelTrack> for Vec<u8> {
    fn from(t: LabelTrack) -> Self {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub series: MultivariateSeries,
    pub labels: LabelTrack,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, series: MultivariateSeries, labels: LabelTrack) -> Result<Self> {
        if labels.len() != series.len() {
            return Err(TscvError::Shape(format!(
                "{} labels for a series of length {}",
                labels.len(),
                series.len()
            )));
        }
        Ok(Self { name: name.into(), series, labels })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    WalkForward,
    SlidingWindow,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::WalkForward, Strategy::SlidingWindow];

    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::WalkForward => "wf",
            Strategy::SlidingWindow => "sw",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::WalkForward => "WalkForward",
            Strategy::SlidingWindow => "SlidingWindow",
        })
    }
}

impl FromStr for Strategy {
    type Err = TscvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wf" | "walkforward" | "walk-forward" | "walk_forward" => Ok(Strategy::WalkForward),
            "sw" | "slidingwindow" | "sliding-window" | "sliding_window" => Ok(Strategy::SlidingWindow),
            other => Err(TscvError::Config(format!("unknown strategy {other:?} (expected wf or sw)"))),
        }
    }
}

/// One train/test split. All bounds are inclusive and 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FoldRepr", into = "FoldRepr")]
pub struct Fold {
    pub k: usize,
    pub train_start: usize,
    pub train_end: usize,
    pub test_start: usize,
    pub test_end: usize,
}

impl Fold {
    pub fn new(k: usize, train: (usize, usize), test: (usize, usize)) -> Result<Self> {
        let fold = Self {
            k,
            train_start: train.0,
            train_end: train.1,
            test_start: test.0,
            test_end: test.1,
        };
        fold.check()?;
        Ok(fold)
    }

    fn check(&self) -> Result<()> {
        let ordered = self.k >= 1
            && self.train_start >= 1
            && self.train_start <= self.train_end
            && self.train_end < self.test_start
            && self.test_start <= self.test_end;
        if ordered {
            Ok(())
        } else {
            Err(TscvError::Bounds(format!(
                "fold {} has train [{}, {}] and test [{}, {}], which are not temporally ordered",
                self.k, self.train_start, self.train_end, self.test_start, self.test_end
            )))
        }
    }

    pub fn train_len(&self) -> usize {
        self.train_end - self.train_start + 1
    }

    pub fn test_len(&self) -> usize {
        self.test_end - self.test_start + 1
    }
}

#[derive(Serialize, Deserialize)]
struct FoldRepr {
    k: usize,
    train: [usize; 2],
    test: [usize; 2],
}

impl From<Fold> for FoldRepr {
    fn from(f: Fold) -> Self {
        Self { k: f.k, train: [f.train_start, f.train_end], test: [f.test_start, f.test_end] }
    }
}

impl TryFrom<FoldRepr> for Fold {
    type Error = TscvError;

    fn try_from(r: FoldRepr) -> Result<Self> {
        Fold::new(r.k, (r.train[0], r.train[1]), (r.test[0], r.test[1]))
    }
}

/// A strategy instantiated into `K` concrete folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub strategy: Strategy,
    #[serde(rename = "K")]
    pub k_folds: usize,
    pub omega: usize,
    pub delta: usize,
    pub folds: Vec<Fold>,
}

/// Classifier output on one fold's test block, with its validity and AUC-PR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredFold {
    pub fold: Fold,
    pub scores: Vec<f64>,
    pub positive_ratio: f64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc_pr: Option<f64>,
}

impl ScoredFold {
    /// Scores a fold against its test labels. AUC-PR is only attached when the
    /// test block contains both classes.
    pub fn evaluate(fold: Fold, scores: Vec<f64>, test_labels: &[u8]) -> Result<Self> {
        if scores.len() != fold.test_len() || test_labels.len() != fold.test_len() {
            return Err(TscvError::Shape(format!(
                "fold {}: test block has {} samples, got {} scores and {} labels",
                fold.k,
                fold.test_len(),
                scores.len(),
                test_labels.len()
            )));
        }
        let (positive_ratio, valid) = crate::folds::positive_ratio_validity(test_labels);
        let auc_pr = if valid {
            let curve = metrics::pr_curve(&scores, test_labels)?;
            Some(metrics::average_precision(&curve))
        } else {
            None
        };
        Ok(Self { fold, scores, positive_ratio, valid, auc_pr })
    }
}

/// Why a fold produced no scores (e.g. a single-class training block).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSkip {
    pub k: usize,
    pub reason: String,
}

/// One (dataset, classifier, strategy, K) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset_name: String,
    pub classifier_id: String,
    pub strategy: Strategy,
    #[serde(rename = "K")]
    pub k_folds: usize,
    pub delta: usize,
    pub seed: u64,
    pub scored_folds: Vec<ScoredFold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_auc_pr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_folds: Vec<FoldSkip>,
}

impl ExperimentRecord {
    /// Assembles a record, deriving the median AUC-PR and the sensitivity AUC
    /// from the valid folds.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        dataset_name: impl Into<String>,
        classifier_id: impl Into<String>,
        strategy: Strategy,
        k_folds: usize,
        delta: usize,
        seed: u64,
        scored_folds: Vec<ScoredFold>,
        skipped_folds: Vec<FoldSkip>,
    ) -> Self {
        let valid: Vec<f64> = scored_folds.iter().filter_map(|f| f.auc_pr).collect();
        let median_auc_pr = metrics::median(&valid);
        let sensitivity_auc = metrics::sensitivity_auc(&scored_folds).ok();
        Self {
            dataset_name: dataset_name.into(),
            classifier_id: classifier_id.into(),
            strategy,
            k_folds,
            delta,
            seed,
            scored_folds,
            median_auc_pr,
            sensitivity_auc,
            skipped_folds,
        }
    }

    pub fn valid_auc_pr(&self) -> impl Iterator<Item = f64> + '_ {
        self.scored_folds.iter().filter_map(|f| f.auc_pr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(len: usize) -> MultivariateSeries {
        let grid = TimeGrid::new(1.0, len, 0.0).unwrap();
        let a: Vec<f64> = (1..=len).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        MultivariateSeries::new(grid, vec!["a".into(), "b".into()], vec![a, b]).unwrap()
    }

    #[test]
    fn whole_series_view() {
        let s = ramp(10);
        let v = subsequence_view(&s, 1, 10).unwrap();
        assert_eq!(v.channel(0), s.channel(0));
        assert_eq!(v.channel(1), s.channel(1));
    }

    #[test]
    fn interior_view_columns() {
        let s = ramp(10);
        let v = subsequence_view(&s, 3, 4).unwrap();
        assert_eq!(v.channel(0), &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(v.column(0), vec![3.0, -3.0]);
    }

    #[test]
    fn view_past_end_names_index() {
        let s = ramp(10);
        let err = subsequence_view(&s, 8, 4).unwrap_err();
        assert!(matches!(err, TscvError::Bounds(_)));
        assert!(err.to_string().contains("11"), "{err}");
        assert!(subsequence_view(&s, 0, 1).is_err());
    }

    #[test]
    fn grid_rejects_bad_rate() {
        assert!(TimeGrid::new(0.0, 5, 0.0).is_err());
        assert!(TimeGrid::new(-1.0, 5, 0.0).is_err());
        assert!(TimeGrid::new(10.0, 0, 0.0).is_err());
        let g = TimeGrid::new(100.0, 3, 1.0).unwrap();
        assert!((g.timestamp(2) - 1.02).abs() < 1e-12);
    }

    #[test]
    fn series_rejects_ragged_rows() {
        let grid = TimeGrid::new(1.0, 3, 0.0).unwrap();
        assert!(MultivariateSeries::new(grid, vec!["a".into()], vec![vec![1.0, 2.0]]).is_err());
        assert!(MultivariateSeries::new(grid, vec![], vec![]).is_err());
        assert!(MultivariateSeries::new(grid, vec!["a".into()], vec![vec![1.0, f64::NAN, 2.0]]).is_err());
    }

    #[test]
    fn labels_are_binary() {
        assert!(LabelTrack::new(vec![0, 1, 2]).is_err());
        let t = LabelTrack::new(vec![0, 1, 1, 0]).unwrap();
        assert_eq!(t.range(2, 3).unwrap(), &[1, 1]);
        assert!(t.range(3, 5).is_err());
    }

    #[test]
    fn fold_json_shape() {
        let f = Fold::new(2, (1, 1200), (1201, 1350)).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"k":2,"train":[1,1200],"test":[1201,1350]}"#);
        let back: Fold = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<Fold>(r#"{"k":1,"train":[1,10],"test":[10,12]}"#).is_err());
    }

    #[test]
    fn scored_fold_validity_tracks_ratio() {
        let fold = Fold::new(1, (1, 4), (5, 8)).unwrap();
        let sf = ScoredFold::evaluate(fold, vec![0.1; 4], &[0, 0, 0, 0]).unwrap();
        assert!(!sf.valid && sf.auc_pr.is_none() && sf.positive_ratio == 0.0);
        let sf = ScoredFold::evaluate(fold, vec![0.9, 0.1, 0.2, 0.8], &[1, 0, 0, 1]).unwrap();
        assert!(sf.valid && sf.auc_pr == Some(1.0));
    }

    #[test]
    fn record_field_names() {
        let fold = Fold::new(1, (1, 4), (5, 6)).unwrap();
        let sf = ScoredFold::evaluate(fold, vec![0.9, 0.1], &[1, 0]).unwrap();
        let rec = ExperimentRecord::assemble("d", "rf", Strategy::WalkForward, 3, 150, 7, vec![sf], vec![]);
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        for key in ["dataset_name", "classifier_id", "strategy", "K", "delta", "seed", "scored_folds", "median_auc_pr"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        // one valid fold: no interval to integrate
        assert!(v.get("sensitivity_auc").is_none());
    }
}
