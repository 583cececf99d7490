//! Temporal cross-validation benchmarking for fault detection in
//! multivariate time series.
//!
//! Walk-forward and sliding-window fold plans, per-fold classifiers scored by
//! average precision, rank tests between strategies, stationarity screening,
//! and a parallel experiment runner with deterministic output.

pub mod classify;
pub mod data;
pub mod error;
pub mod folds;
pub mod metrics;
pub mod runner;
pub mod stats;
pub mod types;

pub use classify::{ClassifierConfig, ClassifierKind, ClassifierModel, Samples, Scorer};
pub use error::{Result, TscvError};
pub use runner::{ExperimentGrid, GridOutput, SkippedCell};
pub use types::{
    ExperimentRecord, Fold, FoldPlan, FoldSkip, LabelTrack, LabeledDataset, MultivariateSeries,
    ScoredFold, Strategy, SubsequenceView, TimeGrid,
};
