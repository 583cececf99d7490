//! Expands a dataset x strategy x K x classifier grid into per-fold jobs,
//! runs them on a thread pool and restores grid order.

mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{BuiltinScorer, ClassifierConfig, ClassifierKind, Samples, Scorer};
use crate::data::minmax_normalize;
use crate::error::{Result, TscvError};
use crate::folds;
use crate::types::{ExperimentRecord, Fold, FoldSkip, LabeledDataset, ScoredFold, Strategy};

pub use report::{
    compare_groups, emit_plotdata, group_auc_pr, read_jsonl, strategy_auc_pr_table,
    strategy_sensitivity_table, write_jsonl, write_summary_tables, ComparisonRow, GroupField,
    GroupSummary, KeyValue, SensitivityRow, StrategyRow,
};

/// Samples per classifier window.
pub const DEFAULT_LOOKBACK: usize = 16;
pub const DEFAULT_DELTA: usize = 150;

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub datasets: Vec<LabeledDataset>,
    pub strategies: Vec<Strategy>,
    pub k_values: Vec<usize>,
    pub delta: usize,
    pub classifiers: Vec<ClassifierKind>,
    pub seed: u64,
    pub rocket_kernels: usize,
    pub lookback: usize,
    /// Worker threads; 0 uses rayon's default.
    pub parallelism: usize,
    /// Min-max scale every dataset before planning folds.
    pub normalize: bool,
}

impl ExperimentGrid {
    pub fn new(datasets: Vec<LabeledDataset>) -> Self {
        Self {
            datasets,
            strategies: Strategy::ALL.to_vec(),
            k_values: (3..=9).collect(),
            delta: DEFAULT_DELTA,
            classifiers: ClassifierKind::ALL.to_vec(),
            seed: 0,
            rocket_kernels: ClassifierConfig::default().rocket_kernels,
            lookback: DEFAULT_LOOKBACK,
            parallelism: 0,
            normalize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(TscvError::Config(format!("experiment grid has no {what}")));
        if self.datasets.is_empty() {
            return empty("datasets");
        }
        if self.strategies.is_empty() {
            return empty("strategies");
        }
        if self.k_values.is_empty() {
            return empty("K values");
        }
        if self.classifiers.is_empty() {
            return empty("classifiers");
        }
        if self.delta == 0 {
            return Err(TscvError::Config("delta must be at least 1".into()));
        }
        if self.lookback == 0 {
            return Err(TscvError::Config("lookback must be at least 1".into()));
        }
        Ok(())
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig { rocket_kernels: self.rocket_kernels, ..ClassifierConfig::default() }
    }

    fn builtin_scorers(&self) -> Vec<Box<dyn Scorer>> {
        let config = self.classifier_config();
        self.classifiers
            .iter()
            .map(|&kind| Box::new(BuiltinScorer { kind, config: config.clone() }) as Box<dyn Scorer>)
            .collect()
    }
}

/// A (dataset, strategy, K, classifier) cell that produced no record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub dataset_name: String,
    pub strategy: Strategy,
    #[serde(rename = "K")]
    pub k_folds: usize,
    pub classifier_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridOutput {
    pub records: Vec<ExperimentRecord>,
    pub skipped_cells: Vec<SkippedCell>,
}

/// Stable 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Seed of one fold job: FNV-1a over `"seed|dataset|strategy|K|k|classifier"`
/// with the strategy written as `wf` or `sw`.
pub fn job_seed(seed: u64, dataset: &str, strategy: Strategy, k_folds: usize, k: usize, classifier: &str) -> u64 {
    let key = format!("{seed}|{dataset}|{}|{k_folds}|{k}|{classifier}", strategy.short_name());
    fnv1a64(key.as_bytes())
}

/// Fits on the fold's training block and scores its test block. Only the
/// training labels are read.
pub fn run_fold(dataset: &LabeledDataset, fold: &Fold, scorer: &dyn Scorer, lookback: usize, seed: u64) -> Result<Vec<f64>> {
    let train = Samples::from_series(&dataset.series, fold.train_start, fold.train_end, lookback)?;
    let train_labels = dataset.labels.range(fold.train_start, fold.train_end)?;
    let test = Samples::from_series(&dataset.series, fold.test_start, fold.test_end, lookback)?;
    let scores = scorer.score_fold(&train, train_labels, &test, seed)?;
    if scores.len() != test.len() {
        return Err(TscvError::Shape(format!(
            "{} returned {} scores for {} test samples",
            scorer.id(),
            scores.len(),
            test.len()
        )));
    }
    Ok(scores)
}

pub fn run_grid(grid: &ExperimentGrid) -> Result<GridOutput> {
    let scorers = grid.builtin_scorers();
    run_grid_with_scorers(grid, &scorers)
}

struct Cell {
    dataset: usize,
    strategy: Strategy,
    k_folds: usize,
    scorer: usize,
    folds: Vec<Fold>,
}

struct Job {
    cell: usize,
    fold: usize,
}

/// Like [`run_grid`] with caller-supplied scorers in place of
/// `grid.classifiers`.
pub fn run_grid_with_scorers(grid: &ExperimentGrid, scorers: &[Box<dyn Scorer>]) -> Result<GridOutput> {
    grid.validate()?;
    if scorers.is_empty() {
        return Err(TscvError::Config("experiment grid has no classifiers".into()));
    }
    let datasets: Vec<LabeledDataset> = grid
        .datasets
        .iter()
        .map(|d| {
            if grid.normalize {
                LabeledDataset { series: minmax_normalize(&d.series), ..d.clone() }
            } else {
                d.clone()
            }
        })
        .collect();

    let mut cells = Vec::new();
    let mut skipped_cells = Vec::new();
    for (di, dataset) in datasets.iter().enumerate() {
        for &strategy in &grid.strategies {
            for &k_folds in &grid.k_values {
                let plan = folds::plan(strategy, dataset.len(), k_folds, grid.delta);
                for (si, scorer) in scorers.iter().enumerate() {
                    match &plan {
                        Ok(plan) => cells.push(Cell { dataset: di, strategy, k_folds, scorer: si, folds: plan.folds.clone() }),
                        Err(e) => {
                            log::warn!("{} {strategy} K={k_folds} {}: {e}", dataset.name, scorer.id());
                            skipped_cells.push(SkippedCell {
                                dataset_name: dataset.name.clone(),
                                strategy,
                                k_folds,
                                classifier_id: scorer.id().to_string(),
                                reason: e.to_string(),
                            });
                        }
                    }
                }
            }
        }
    }

    let jobs: Vec<Job> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, cell)| (0..cell.folds.len()).map(move |fi| Job { cell: ci, fold: fi }))
        .collect();

    let execute = |job: &Job| -> Result<Vec<f64>> {
        let cell = &cells[job.cell];
        let dataset = &datasets[cell.dataset];
        let scorer = scorers[cell.scorer].as_ref();
        let fold = &cell.folds[job.fold];
        let seed = job_seed(grid.seed, &dataset.name, cell.strategy, cell.k_folds, fold.k, scorer.id());
        run_fold(dataset, fold, scorer, grid.lookback, seed)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.parallelism)
        .build()
        .map_err(|e| TscvError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<Vec<f64>>> = pool.install(|| jobs.par_iter().map(execute).collect());

    let mut outcomes = outcomes.into_iter();
    let mut records = Vec::with_capacity(cells.len());
    for cell in &cells {
        let dataset = &datasets[cell.dataset];
        let scorer_id = scorers[cell.scorer].id();
        let mut scored = Vec::with_capacity(cell.folds.len());
        let mut skipped = Vec::new();
        for fold in &cell.folds {
            match outcomes.next().expect("one outcome per job") {
                Ok(scores) => {
                    let test_labels = dataset.labels.range(fold.test_start, fold.test_end)?;
                    scored.push(ScoredFold::evaluate(*fold, scores, test_labels)?);
                }
                Err(TscvError::Training(msg)) => {
                    log::info!("{} {} K={} {scorer_id} fold {}: {msg}", dataset.name, cell.strategy, cell.k_folds, fold.k);
                    skipped.push(FoldSkip { k: fold.k, reason: format!("fold {}: {msg}", fold.k) });
                }
                Err(e) => return Err(e),
            }
        }
        records.push(ExperimentRecord::assemble(
            dataset.name.clone(),
            scorer_id,
            cell.strategy,
            cell.k_folds,
            grid.delta,
            grid.seed,
            scored,
            skipped,
        ));
    }
    Ok(GridOutput { records, skipped_cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{LabelTrack, MultivariateSeries, TimeGrid};

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn job_seeds_differ_by_component() {
        let base = job_seed(7, "d", Strategy::WalkForward, 3, 1, "rf");
        assert_ne!(base, job_seed(8, "d", Strategy::WalkForward, 3, 1, "rf"));
        assert_ne!(base, job_seed(7, "d", Strategy::SlidingWindow, 3, 1, "rf"));
        assert_ne!(base, job_seed(7, "d", Strategy::WalkForward, 3, 2, "rf"));
        assert_ne!(base, job_seed(7, "d", Strategy::WalkForward, 3, 1, "logistic"));
    }

    fn tiny_dataset(len: usize) -> LabeledDataset {
        let grid = TimeGrid::new(1.0, len, 0.0).unwrap();
        let values: Vec<f64> = (0..len).map(|i| (i as f64 * 0.3).sin()).collect();
        let series = MultivariateSeries::new(grid, vec!["x".into()], vec![values]).unwrap();
        let labels = LabelTrack::new((0..len).map(|i| u8::from(i % 10 < 3)).collect()).unwrap();
        LabeledDataset::new("tiny", series, labels).unwrap()
    }

    #[test]
    fn unplannable_cell_is_skipped_not_fatal() {
        let mut grid = ExperimentGrid::new(vec![tiny_dataset(100)]);
        grid.k_values = vec![2, 9];
        grid.delta = 20;
        grid.classifiers = vec![ClassifierKind::Majority];
        let out = run_grid(&grid).unwrap();
        // K=2 leaves omega 60; K=9 needs 200 samples
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.skipped_cells.len(), 2);
        assert!(out.skipped_cells.iter().all(|c| c.k_folds == 9));
    }

    #[test]
    fn grid_validation() {
        let mut grid = ExperimentGrid::new(vec![tiny_dataset(100)]);
        grid.delta = 0;
        assert!(run_grid(&grid).is_err());
        assert!(run_grid(&ExperimentGrid::new(Vec::new())).is_err());
    }
}
