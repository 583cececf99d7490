use crate::error::{Result, TscvError};
use crate::types::MultivariateSeries;

/// Per-timestamp samples: each is the `channels x width` window of
/// observations ending at its timestamp, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    channels: usize,
    width: usize,
    data: Vec<f64>,
    times: Vec<usize>,
}

impl Samples {
    pub fn new(channels: usize, width: usize, data: Vec<f64>, times: Vec<usize>) -> Result<Self> {
        if channels == 0 || width == 0 {
            return Err(TscvError::Shape("samples need at least one channel and one column".into()));
        }
        if data.len() != channels * width * times.len() {
            return Err(TscvError::Shape(format!(
                "{} values for {} samples of {channels}x{width}",
                data.len(),
                times.len()
            )));
        }
        Ok(Self { channels, width, data, times })
    }

    /// Windows for every timestamp in the inclusive 1-based range
    /// `[start, end]`. Columns before the first timestamp repeat the first
    /// observation.
    pub fn from_series(series: &MultivariateSeries, start: usize, end: usize, lookback: usize) -> Result<Self> {
        if lookback == 0 {
            return Err(TscvError::Config("lookback must be at least 1".into()));
        }
        if start == 0 || start > end || end > series.len() {
            return Err(TscvError::Bounds(format!(
                "sample range [{start}, {end}] outside [1, {}]",
                series.len()
            )));
        }
        let m = series.n_channels();
        let times: Vec<usize> = (start..=end).collect();
        let mut data = Vec::with_capacity(times.len() * m * lookback);
        for &t in &times {
            for row in series.rows() {
                // window covers 1-based columns t-lookback+1 ..= t, clamped at 1
                for j in 0..lookback {
                    let col = (t + j + 1).saturating_sub(lookback).max(1);
                    data.push(row[col - 1]);
                }
            }
        }
        Self::new(m, lookback, data, times)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn feature_len(&self) -> usize {
        self.channels * self.width
    }

    /// 1-based timestamp of each sample.
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    /// Flattened window of sample `i`; channel `c` occupies `c*width..(c+1)*width`.
    pub fn sample(&self, i: usize) -> &[f64] {
        let d = self.feature_len();
        &self.data[i * d..(i + 1) * d]
    }

    /// Row-major `len x feature_len` matrix.
    pub fn as_matrix(&self) -> &[f64] {
        &self.data
    }
}
