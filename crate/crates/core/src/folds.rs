//! Walk-forward and sliding-window fold plans.
//!
//! Both strategies share the same test blocks: fold `k` tests on
//! `[omega + (k-1)*delta + 1, omega + k*delta]`. Walk-forward trains on the
//! whole prefix before that block; sliding-window trains on the `omega`
//! samples immediately before it.

use log::warn;

use crate::error::{Result, TscvError};
use crate::types::{Fold, FoldPlan, LabelTrack, Strategy};

/// Smallest usable block size; the training window must hold at least
/// `2 * MIN_TRAIN_BLOCK` samples.
pub const MIN_TRAIN_BLOCK: usize = 10;

pub const MIN_TRAIN_WINDOW: usize = 2 * MIN_TRAIN_BLOCK;

fn check_k_delta(k_folds: usize, delta: usize) -> Result<()> {
    if k_folds < 2 {
        return Err(TscvError::Config(format!("K must be at least 2, got {k_folds}")));
    }
    if delta == 0 {
        return Err(TscvError::Config("delta must be at least 1".into()));
    }
    Ok(())
}

/// Training window length `omega = N - K*delta`, the largest window whose
/// K-th test block ends exactly at the last sample.
pub fn derive_omega(series_length: usize, k_folds: usize, delta: usize) -> Result<usize> {
    check_k_delta(k_folds, delta)?;
    let needed = k_folds * delta + MIN_TRAIN_WINDOW;
    if series_length < needed {
        return Err(TscvError::Config(format!(
            "series of length {series_length} is too short for K={k_folds}, delta={delta}: \
             need at least {needed} samples (K*delta plus a {MIN_TRAIN_WINDOW}-sample training window)"
        )));
    }
    Ok(series_length - k_folds * delta)
}

pub fn plan_walk_forward(series_length: usize, k_folds: usize, delta: usize) -> Result<FoldPlan> {
    let omega = derive_omega(series_length, k_folds, delta)?;
    build(Strategy::WalkForward, k_folds, omega, delta)
}

pub fn plan_sliding_window(series_length: usize, k_folds: usize, delta: usize) -> Result<FoldPlan> {
    let omega = derive_omega(series_length, k_folds, delta)?;
    build(Strategy::SlidingWindow, k_folds, omega, delta)
}

pub fn plan(strategy: Strategy, series_length: usize, k_folds: usize, delta: usize) -> Result<FoldPlan> {
    match strategy {
        Strategy::WalkForward => plan_walk_forward(series_length, k_folds, delta),
        Strategy::SlidingWindow => plan_sliding_window(series_length, k_folds, delta),
    }
}

/// Plan with a caller-chosen `omega`. Samples after `omega + K*delta` are
/// never tested and are dropped with a warning.
pub fn plan_with_omega(
    strategy: Strategy,
    series_length: usize,
    k_folds: usize,
    delta: usize,
    omega: usize,
) -> Result<FoldPlan> {
    check_k_delta(k_folds, delta)?;
    if omega < MIN_TRAIN_WINDOW {
        return Err(TscvError::Config(format!(
            "training window omega={omega} is below the minimum of {MIN_TRAIN_WINDOW}"
        )));
    }
    let used = omega + k_folds * delta;
    if used > series_length {
        return Err(TscvError::Config(format!(
            "omega + K*delta = {used} exceeds series length {series_length}"
        )));
    }
    if used < series_length {
        warn!(
            "discarding {} trailing samples beyond index {used} (omega={omega}, K={k_folds}, delta={delta})",
            series_length - used
        );
    }
    build(strategy, k_folds, omega, delta)
}

fn build(strategy: Strategy, k_folds: usize, omega: usize, delta: usize) -> Result<FoldPlan> {
    let folds = (1..=k_folds)
        .map(|k| {
            let test_start = omega + (k - 1) * delta + 1;
            let test_end = omega + k * delta;
            let train_start = match strategy {
                Strategy::WalkForward => 1,
                Strategy::SlidingWindow => 1 + (k - 1) * delta,
            };
            Fold::new(k, (train_start, test_start - 1), (test_start, test_end))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldPlan { strategy, k_folds, omega, delta, folds })
}

/// Share of positives in a test block and whether both classes are present.
pub fn positive_ratio_validity(test_labels: &[u8]) -> (f64, bool) {
    if test_labels.is_empty() {
        return (0.0, false);
    }
    let positives = test_labels.iter().filter(|&&y| y == 1).count();
    let ratio = positives as f64 / test_labels.len() as f64;
    (ratio, positives > 0 && positives < test_labels.len())
}

pub fn fold_validity(labels: &LabelTrack, fold: &Fold) -> Result<(f64, bool)> {
    let test = labels.range(fold.test_start, fold.test_end)?;
    Ok(positive_ratio_validity(test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::types::Strategy;

    #[test]
    fn omega_examples() {
        assert_eq!(derive_omega(1500, 9, 150).unwrap(), 150);
        assert_eq!(derive_omega(2490, 3, 150).unwrap(), 2040);
        let err = derive_omega(1000, 9, 150).unwrap_err();
        assert!(err.to_string().contains("1370"), "{err}");
    }

    #[test]
    fn omega_rejects_degenerate_inputs() {
        assert!(derive_omega(1500, 1, 150).is_err());
        assert!(derive_omega(1500, 3, 0).is_err());
        // omega = 19 is one short of the minimum window
        assert!(derive_omega(3 * 10 + 19, 3, 10).is_err());
        assert_eq!(derive_omega(3 * 10 + 20, 3, 10).unwrap(), 20);
    }

    fn ranges(plan: &FoldPlan) -> Vec<((usize, usize), (usize, usize))> {
        plan.folds.iter().map(|f| ((f.train_start, f.train_end), (f.test_start, f.test_end))).collect()
    }

    #[test]
    fn walk_forward_example() {
        let plan = plan_walk_forward(1500, 3, 150).unwrap();
        assert_eq!(plan.omega, 1050);
        assert_eq!(
            ranges(&plan),
            vec![((1, 1050), (1051, 1200)), ((1, 1200), (1201, 1350)), ((1, 1350), (1351, 1500))]
        );
    }

    #[test]
    fn sliding_window_example() {
        let plan = plan_sliding_window(1500, 3, 150).unwrap();
        assert_eq!(
            ranges(&plan),
            vec![((1, 1050), (1051, 1200)), ((151, 1200), (1201, 1350)), ((301, 1350), (1351, 1500))]
        );
    }

    #[test]
    fn explicit_omega_drops_tail() {
        let plan = plan_with_omega(Strategy::WalkForward, 1500, 3, 150, 1000).unwrap();
        assert_eq!(plan.folds.last().unwrap().test_end, 1450);
        assert!(plan_with_omega(Strategy::WalkForward, 1500, 3, 150, 1100).is_err());
        assert!(plan_with_omega(Strategy::WalkForward, 1500, 3, 150, 5).is_err());
    }

    #[test]
    fn validity_examples() {
        assert_eq!(positive_ratio_validity(&[0, 0, 0, 0]), (0.0, false));
        assert_eq!(positive_ratio_validity(&[1, 1, 1, 1]), (1.0, false));
        assert_eq!(positive_ratio_validity(&[1, 0, 0, 1]), (0.5, true));
        let labels = LabelTrack::new(vec![0, 0, 1, 0, 0, 1]).unwrap();
        let fold = Fold::new(1, (1, 2), (3, 6)).unwrap();
        assert_eq!(fold_validity(&labels, &fold).unwrap(), (0.5, true));
        let out_of_range = Fold::new(1, (1, 4), (5, 9)).unwrap();
        assert!(fold_validity(&labels, &out_of_range).is_err());
    }

    proptest! {
        #[test]
        fn plan_invariants(k in 2usize..10, delta in 1usize..40, omega in 20usize..300) {
            let n = omega + k * delta;
            let wf = plan_walk_forward(n, k, delta).unwrap();
            let sw = plan_sliding_window(n, k, delta).unwrap();
            prop_assert_eq!(wf.folds.len(), k);
            prop_assert_eq!(wf.omega, omega);
            for (a, b) in wf.folds.iter().zip(&sw.folds) {
                prop_assert_eq!((a.test_start, a.test_end), (b.test_start, b.test_end));
                prop_assert!(a.train_end < a.test_start && b.train_end < b.test_start);
                prop_assert_eq!(b.train_len(), omega);
                prop_assert_eq!(a.test_len(), delta);
            }
            for pair in wf.folds.windows(2) {
                prop_assert_eq!(pair[0].train_start, pair[1].train_start);
                prop_assert!(pair[0].train_end < pair[1].train_end);
                prop_assert_eq!(pair[0].test_end + 1, pair[1].test_start);
            }
            if delta < omega {
                for pair in sw.folds.windows(2) {
                    let overlap = pair[0].train_end + 1 - pair[1].train_start;
                    prop_assert_eq!(overlap, omega - delta);
                }
            }
            prop_assert_eq!(wf.folds.last().unwrap().test_end, n);
        }
    }
}
