//! Binary scorers trained per fold on windowed samples.

pub mod forest;
pub mod logistic;
pub mod residual;
pub mod rocket;
pub mod samples;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};

pub use forest::{ForestConfig, MaxFeatures, RandomForest};
pub use logistic::{LogisticConfig, LogisticHead, Standardizer};
pub use residual::{is_outlier, residual_score, ResidualDetector};
pub use rocket::{rocket_generate, rocket_transform, RocketKernel};
pub use samples::Samples;

/// Smallest training set accepted by every classifier except the majority prior.
pub const MIN_TRAIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Majority,
    Residual,
    #[serde(rename = "rf")]
    RandomForest,
    Logistic,
    Rocket,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Majority,
        ClassifierKind::Residual,
        ClassifierKind::RandomForest,
        ClassifierKind::Logistic,
        ClassifierKind::Rocket,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ClassifierKind::Majority => "majority",
            ClassifierKind::Residual => "residual",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Rocket => "rocket",
        }
    }

    /// Discriminative classifiers need both classes in the training set.
    pub fn needs_both_classes(self) -> bool {
        matches!(self, ClassifierKind::RandomForest | ClassifierKind::Logistic | ClassifierKind::Rocket)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ClassifierKind {
    type Err = TscvError;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.id() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                TscvError::Config(format!("unknown classifier {s:?}; expected majority, residual, rf, logistic or rocket"))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub forest: ForestConfig,
    pub head: LogisticConfig,
    pub rocket_kernels: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { forest: ForestConfig::default(), head: LogisticConfig::default(), rocket_kernels: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FittedState {
    Majority { prior: f64 },
    Residual(ResidualDetector),
    Forest(RandomForest),
    Logistic { standardizer: Standardizer, head: LogisticHead },
    Rocket { kernels: Vec<RocketKernel>, standardizer: Standardizer, head: LogisticHead },
}

/// A fitted classifier; `predict_scores` is a pure function of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    pub seed: u64,
    channels: usize,
    width: usize,
    state: FittedState,
}

fn rocket_features(samples: &Samples, kernels: &[RocketKernel]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len() * 2 * kernels.len());
    for i in 0..samples.len() {
        out.extend(rocket_transform(samples.sample(i), samples.channels(), kernels)?);
    }
    Ok(out)
}

/// Trains `kind` on `train` with one label per sample.
pub fn fit(kind: ClassifierKind, train: &Samples, labels: &[u8], seed: u64, config: &ClassifierConfig) -> Result<ClassifierModel> {
    if labels.len() != train.len() {
        return Err(TscvError::Shape(format!("{} labels for {} training samples", labels.len(), train.len())));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(TscvError::Input(format!("training label {bad} is not binary")));
    }
    if kind == ClassifierKind::Majority {
        if train.is_empty() {
            return Err(TscvError::Training("majority prior needs at least one training label".into()));
        }
    } else if train.len() < MIN_TRAIN_SAMPLES {
        return Err(TscvError::Training(format!(
            "{kind} needs at least {MIN_TRAIN_SAMPLES} training samples, got {}",
            train.len()
        )));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if kind.needs_both_classes() && (positives == 0 || positives == labels.len()) {
        let class = if positives == 0 { 0 } else { 1 };
        return Err(TscvError::Training(format!("{kind} training set holds only class {class}")));
    }

    let d = train.feature_len();
    let state = match kind {
        ClassifierKind::Majority => FittedState::Majority { prior: positives as f64 / labels.len() as f64 },
        ClassifierKind::Residual => FittedState::Residual(ResidualDetector::fit(train)?),
        ClassifierKind::RandomForest => {
            FittedState::Forest(RandomForest::fit(train.as_matrix(), d, labels, &config.forest, seed)?)
        }
        ClassifierKind::Logistic => {
            let mut rows = train.as_matrix().to_vec();
            let standardizer = Standardizer::fit(&rows, d);
            standardizer.transform_in_place(&mut rows);
            let (head, _) = LogisticHead::train(&rows, d, labels, &config.head);
            FittedState::Logistic { standardizer, head }
        }
        ClassifierKind::Rocket => {
            let kernels = rocket_generate(config.rocket_kernels, train.width(), seed)?;
            let mut rows = rocket_features(train, &kernels)?;
            let fd = 2 * kernels.len();
            let standardizer = Standardizer::fit(&rows, fd);
            standardizer.transform_in_place(&mut rows);
            let (head, _) = LogisticHead::train(&rows, fd, labels, &config.head);
            FittedState::Rocket { kernels, standardizer, head }
        }
    };
    Ok(ClassifierModel { kind, seed, channels: train.channels(), width: train.width(), state })
}

impl ClassifierModel {
    pub fn classifier_id(&self) -> &'static str {
        self.kind.id()
    }

    /// Class-1 prior, for the majority model.
    pub fn prior(&self) -> Option<f64> {
        match self.state {
            FittedState::Majority { prior } => Some(prior),
            _ => None,
        }
    }

    /// One score in `[0, 1]` per sample.
    pub fn predict_scores(&self, test: &Samples) -> Result<Vec<f64>> {
        if test.channels() != self.channels || test.width() != self.width {
            return Err(TscvError::Shape(format!(
                "model expects {}x{} windows, got {}x{}",
                self.channels,
                self.width,
                test.channels(),
                test.width()
            )));
        }
        let n = test.len();
        let scores = match &self.state {
            FittedState::Majority { prior } => vec![*prior; n],
            FittedState::Residual(det) => (0..n).map(|i| det.score(test.sample(i), self.channels)).collect(),
            FittedState::Forest(rf) => (0..n).map(|i| rf.score(test.sample(i))).collect(),
            FittedState::Logistic { standardizer, head } => {
                let mut rows = test.as_matrix().to_vec();
                standardizer.transform_in_place(&mut rows);
                rows.chunks_exact(test.feature_len()).map(|r| head.score(r)).collect()
            }
            FittedState::Rocket { kernels, standardizer, head } => {
                let mut rows = rocket_features(test, kernels)?;
                standardizer.transform_in_place(&mut rows);
                rows.chunks_exact(2 * kernels.len()).map(|r| head.score(r)).collect()
            }
        };
        Ok(scores)
    }
}

/// Anything that can turn a training block and a test block into test scores.
/// The experiment runner accepts custom scorers through this trait.
pub trait Scorer: Send + Sync {
    fn id(&self) -> &str;

    fn score_fold(&self, train: &Samples, train_labels: &[u8], test: &Samples, seed: u64) -> Result<Vec<f64>>;
}

/// Adapter running one of the built-in classifiers as a [`Scorer`].
#[derive(Debug, Clone)]
pub struct BuiltinScorer {
    pub kind: ClassifierKind,
    pub config: ClassifierConfig,
}

impl Scorer for BuiltinScorer {
    fn id(&self) -> &str {
        self.kind.id()
    }

    fn score_fold(&self, train: &Samples, train_labels: &[u8], test: &Samples, seed: u64) -> Result<Vec<f64>> {
        fit(self.kind, train, train_labels, seed, &self.config)?.predict_scores(test)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, width: usize) -> (Samples, Vec<u8>) {
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 3)).collect();
        let data: Vec<f64> = (0..n)
            .flat_map(|i| (0..2 * width).map(move |j| f64::from(labels_at(i)) + 0.01 * ((i * 31 + j * 7) % 13) as f64))
            .collect();
        (Samples::new(2, width, data, (1..=n).collect()).unwrap(), labels)
    }

    fn labels_at(i: usize) -> u8 {
        u8::from(i % 4 == 3)
    }

    #[test]
    fn majority_prior() {
        let train = Samples::new(1, 1, vec![0.0; 4], vec![1, 2, 3, 4]).unwrap();
        let model = fit(ClassifierKind::Majority, &train, &[0, 0, 0, 1], 0, &ClassifierConfig::default()).unwrap();
        assert_eq!(model.prior(), Some(0.25));
        let test = Samples::new(1, 1, vec![9.0, -1.0, 0.3], vec![5, 6, 7]).unwrap();
        assert_eq!(model.predict_scores(&test).unwrap(), vec![0.25; 3]);
    }

    #[test]
    fn ids_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.id().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.id()));
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn single_class_is_a_training_error_for_discriminative_models() {
        let (train, _) = toy(20, 16);
        let cfg = ClassifierConfig { rocket_kernels: 20, ..Default::default() };
        for kind in [ClassifierKind::RandomForest, ClassifierKind::Logistic, ClassifierKind::Rocket] {
            assert!(matches!(fit(kind, &train, &[0; 20], 1, &cfg), Err(TscvError::Training(_))));
        }
        assert!(fit(ClassifierKind::Majority, &train, &[0; 20], 1, &cfg).is_ok());
        assert!(fit(ClassifierKind::Residual, &train, &[0; 20], 1, &cfg).is_ok());
    }

    #[test]
    fn too_few_samples() {
        let (train, labels) = toy(8, 16);
        let err = fit(ClassifierKind::Logistic, &train, &labels, 0, &ClassifierConfig::default());
        assert!(matches!(err, Err(TscvError::Training(_))));
    }

    #[test]
    fn every_classifier_scores_in_unit_interval_and_separates_toy() {
        let (train, labels) = toy(40, 16);
        let cfg = ClassifierConfig { rocket_kernels: 50, forest: ForestConfig { n_trees: 10, ..Default::default() }, ..Default::default() };
        for kind in ClassifierKind::ALL {
            let model = fit(kind, &train, &labels, 7, &cfg).unwrap();
            let scores = model.predict_scores(&train).unwrap();
            assert_eq!(scores.len(), 40);
            assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)), "{kind}: {scores:?}");
            if kind.needs_both_classes() {
                let pos = scores.iter().zip(&labels).filter(|(_, &y)| y == 1).map(|(s, _)| *s).fold(f64::INFINITY, f64::min);
                let neg = scores.iter().zip(&labels).filter(|(_, &y)| y == 0).map(|(s, _)| *s).fold(0.0, f64::max);
                assert!(pos > neg, "{kind} failed to separate the toy");
            }
            assert_eq!(fit(kind, &train, &labels, 7, &cfg).unwrap(), model);
        }
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let (train, labels) = toy(20, 16);
        let model = fit(ClassifierKind::Logistic, &train, &labels, 0, &ClassifierConfig::default()).unwrap();
        let (narrow, _) = toy(5, 8);
        assert!(matches!(model.predict_scores(&narrow), Err(TscvError::Shape(_))));
    }
}
