use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};
use crate::types::LabeledDataset;

pub const MIN_STATIONARITY_LENGTH: usize = 20;

/// 5% critical value of the level-stationarity KPSS statistic.
pub const KPSS_LEVEL_CRITICAL_5PCT: f64 = 0.463;

/// 5% critical values of the Dickey-Fuller t-ratio with a constant and no
/// trend, indexed by effective sample size. Interpolated linearly in `1/n`.
const ADF_CONSTANT_5PCT: [(f64, f64); 6] = [
    (25.0, -3.00),
    (50.0, -2.93),
    (100.0, -2.89),
    (250.0, -2.88),
    (500.0, -2.87),
    (f64::INFINITY, -2.86),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitRootOutcome {
    pub statistic: f64,
    pub critical_value_5pct: f64,
    pub reject_5pct: bool,
    pub lags: usize,
}

/// `floor(12 * (n/100)^(1/4))`.
pub fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn adf_critical_value_5pct(nobs: usize) -> f64 {
    let n = nobs as f64;
    if n <= ADF_CONSTANT_5PCT[0].0 {
        return ADF_CONSTANT_5PCT[0].1;
    }
    let inv = 1.0 / n;
    for w in ADF_CONSTANT_5PCT.windows(2) {
        let ((n0, c0), (n1, c1)) = (w[0], w[1]);
        if n <= n1 {
            let (x0, x1) = (1.0 / n0, 1.0 / n1);
            return c0 + (c1 - c0) * (inv - x0) / (x1 - x0);
        }
    }
    ADF_CONSTANT_5PCT[ADF_CONSTANT_5PCT.len() - 1].1
}

fn check_series(values: &[f64]) -> Result<()> {
    if values.len() < MIN_STATIONARITY_LENGTH {
        return Err(TscvError::NotComputable(format!(
            "series of length {} is shorter than {MIN_STATIONARITY_LENGTH}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TscvError::NotComputable("series contains non-finite values".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Err(TscvError::NotComputable("series is constant".into()));
    }
    Ok(())
}

/// Augmented Dickey-Fuller test with a constant term. Regresses
/// `dy_t = a + b*y_{t-1} + sum_i g_i*dy_{t-i}` by OLS and compares the t-ratio
/// of `b` to the 5% critical value. `lags = None` uses [`schwert_lag`].
pub fn adf_test(values: &[f64], lags: Option<usize>) -> Result<UnitRootOutcome> {
    check_series(values)?;
    let n = values.len();
    let lags = lags.unwrap_or_else(|| schwert_lag(n));
    let diff: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // diff[t-1] = y_t - y_{t-1}; the regression uses t in lags+1..n
    let nobs = n.saturating_sub(lags + 1);
    let k = 2 + lags;
    if nobs <= k + 1 {
        return Err(TscvError::NotComputable(format!(
            "{nobs} usable observations for {k} regressors (lag {lags})"
        )));
    }

    let x = DMatrix::from_fn(nobs, k, |row, col| {
        let t = row + lags + 1;
        match col {
            0 => 1.0,
            1 => values[t - 1],
            j => diff[t - 1 - (j - 1)],
        }
    });
    let y = DVector::from_fn(nobs, |row, _| diff[row + lags]);

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag) {
        return Err(TscvError::NotComputable("ADF regression is singular".into()));
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| TscvError::NotComputable("ADF regression is singular".into()))?;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let sigma2 = rss / (nobs - k) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| TscvError::NotComputable("ADF regression is singular".into()))?;
    // (X'X)^-1 = R^-1 R^-T, so var(b) = sigma2 * |row 1 of R^-1|^2
    let var_b = sigma2 * r_inv.row(1).norm_squared();
    if !(var_b > 0.0 && var_b.is_finite()) {
        return Err(TscvError::NotComputable("ADF coefficient variance is degenerate".into()));
    }
    let statistic = beta[1] / var_b.sqrt();
    let critical_value_5pct = adf_critical_value_5pct(nobs);
    Ok(UnitRootOutcome { statistic, critical_value_5pct, reject_5pct: statistic < critical_value_5pct, lags })
}

/// KPSS level-stationarity test with a Bartlett-kernel Newey-West long-run
/// variance and bandwidth [`schwert_lag`].
pub fn kpss_test(values: &[f64]) -> Result<UnitRootOutcome> {
    check_series(values)?;
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let resid: Vec<f64> = values.iter().map(|v| v - mean).collect();

    let mut partial = 0.0;
    let mut eta = 0.0;
    for e in &resid {
        partial += e;
        eta += partial * partial;
    }
    eta /= nf * nf;

    let lags = schwert_lag(n).min(n - 1);
    let mut lrv = resid.iter().map(|e| e * e).sum::<f64>() / nf;
    for s in 1..=lags {
        let gamma: f64 = resid[s..].iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / nf;
        lrv += 2.0 * (1.0 - s as f64 / (lags as f64 + 1.0)) * gamma;
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(lrv > 0.0) {
        return Err(TscvError::NotComputable("long-run variance is not positive".into()));
    }
    let statistic = eta / lrv;
    Ok(UnitRootOutcome {
        statistic,
        critical_value_5pct: KPSS_LEVEL_CRITICAL_5PCT,
        reject_5pct: statistic > KPSS_LEVEL_CRITICAL_5PCT,
        lags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStationarity {
    pub channel: String,
    /// `None` when the statistic is not computable for this channel.
    pub adf: Option<UnitRootOutcome>,
    pub kpss: Option<UnitRootOutcome>,
}

impl ChannelStationarity {
    /// ADF fails to reject a unit root, or KPSS rejects stationarity.
    pub fn fails_stationarity(&self) -> bool {
        self.adf.is_some_and(|a| !a.reject_5pct) || self.kpss.is_some_and(|k| k.reject_5pct)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub channels: Vec<ChannelStationarity>,
    pub overall_nonstationary: bool,
}

pub fn dataset_stationarity(dataset: &LabeledDataset) -> StationarityReport {
    let series = &dataset.series;
    let channels: Vec<ChannelStationarity> = (0..series.n_channels())
        .map(|c| {
            let values = series.channel(c);
            ChannelStationarity {
                channel: series.channels()[c].clone(),
                adf: adf_test(values, None).ok(),
                kpss: kpss_test(values).ok(),
            }
        })
        .collect();
    let overall_nonstationary = channels.iter().any(ChannelStationarity::fails_stationarity);
    StationarityReport { channels, overall_nonstationary }
}
