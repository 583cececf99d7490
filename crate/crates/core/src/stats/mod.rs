//! Rank-based comparison of score distributions and unit-root / stationarity
//! screening of individual channels.

mod mann_whitney;
mod stationarity;

pub use mann_whitney::{
    exact_eligible, mann_whitney_u, mann_whitney_u_with, Alternative, MethodChoice, UMethod,
    UTestResult, EXACT_MAX_SAMPLE,
};
pub use stationarity::{
    adf_critical_value_5pct, adf_test, dataset_stationarity, kpss_test, schwert_lag,
    ChannelStationarity, StationarityReport, UnitRootOutcome, KPSS_LEVEL_CRITICAL_5PCT,
    MIN_STATIONARITY_LENGTH,
};
