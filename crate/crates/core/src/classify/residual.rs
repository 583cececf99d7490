//! Model-based subsequence detector: cumulative Euclidean deviation of the
//! observations from a one-step persistence forecast.

use crate::error::{Result, TscvError};

use super::samples::Samples;

/// Training-residual quantile used as the score scale.
pub const REFERENCE_QUANTILE: f64 = 0.95;

/// `sum_i ||x_i - xhat_i||` over the columns of two `m x n` matrices given as
/// channel rows.
pub fn residual_score<R: AsRef<[f64]>>(observed: &[R], predicted: &[R]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(TscvError::Shape(format!(
            "{} observed channels vs {} predicted",
            observed.len(),
            predicted.len()
        )));
    }
    let n = observed.first().map_or(0, |r| r.as_ref().len());
    for (o, p) in observed.iter().zip(predicted) {
        if o.as_ref().len() != n || p.as_ref().len() != n {
            return Err(TscvError::Shape("observed and predicted rows differ in length".into()));
        }
    }
    Ok((0..n)
        .map(|i| {
            observed
                .iter()
                .zip(predicted)
                .map(|(o, p)| (o.as_ref()[i] - p.as_ref()[i]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum())
}

/// True when the cumulative deviation exceeds `tau`.
pub fn is_outlier(score: f64, tau: f64) -> bool {
    score > tau
}

/// Deviation of a window from the persistence forecast `xhat_t = x_{t-1}`,
/// taken over the window's last `width - 1` columns.
pub fn persistence_residual(window: &[f64], channels: usize) -> f64 {
    let width = window.len() / channels;
    let (observed, predicted): (Vec<&[f64]>, Vec<&[f64]>) = window
        .chunks_exact(width)
        .map(|row| (&row[1..], &row[..width - 1]))
        .unzip();
    residual_score(&observed, &predicted).expect("rows share a width")
}

/// Linear-interpolation quantile of an unsorted slice.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDetector {
    /// 95th percentile of training residuals.
    pub tau_ref: f64,
}

impl ResidualDetector {
    pub fn fit(train: &Samples) -> Result<Self> {
        if train.is_empty() {
            return Err(TscvError::Training("residual detector needs training samples".into()));
        }
        let residuals: Vec<f64> =
            (0..train.len()).map(|i| persistence_residual(train.sample(i), train.channels())).collect();
        Ok(Self { tau_ref: quantile(&residuals, REFERENCE_QUANTILE) })
    }

    /// `min(1, residual / tau_ref)`.
    pub fn score(&self, window: &[f64], channels: usize) -> f64 {
        let r = persistence_residual(window, channels);
        if self.tau_ref > 0.0 {
            (r / self.tau_ref).min(1.0)
        } else if r > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_score_zero() {
        let x = vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.5, 0.5]];
        assert_eq!(residual_score(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn unit_deviations_accumulate() {
        // five steps, each deviation (0.6, 0.8) has norm 1
        let observed = vec![vec![0.6; 5], vec![0.8; 5]];
        let predicted = vec![vec![0.0; 5], vec![0.0; 5]];
        let s = residual_score(&observed, &predicted).unwrap();
        assert!((s - 5.0).abs() < 1e-12);
        assert!(is_outlier(s, 4.0));
        assert!(!is_outlier(s, 5.0));
    }

    #[test]
    fn shape_mismatch() {
        let a = vec![vec![0.0; 3]];
        let b = vec![vec![0.0; 3], vec![0.0; 3]];
        assert!(residual_score(&a, &b).is_err());
        assert!(residual_score(&a, &[vec![0.0; 2]]).is_err());
    }

    #[test]
    fn persistence_window() {
        // one channel 0,1,3: steps of 1 and 2
        assert_eq!(persistence_residual(&[0.0, 1.0, 3.0], 1), 3.0);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0, 5.0], 0.5), 3.0);
        assert!((quantile(&[0.0, 10.0], 0.95) - 9.5).abs() < 1e-12);
    }

    #[test]
    fn detector_scores_clip_at_one() {
        let train = Samples::new(1, 3, vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0], vec![1, 2]).unwrap();
        let det = ResidualDetector::fit(&train).unwrap();
        assert!((det.tau_ref - 1.9).abs() < 1e-12);
        assert_eq!(det.score(&[0.0, 5.0, 10.0], 1), 1.0);
        assert_eq!(det.score(&[0.0, 0.0, 0.0], 1), 0.0);
    }
}
