use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};
use crate::types::{LabelTrack, LabeledDataset, MultivariateSeries, TimeGrid};

/// Largest deviation from a perfectly uniform grid accepted without resampling.
pub const GRID_JITTER_S: f64 = 1e-6;

// Absorbs float error when comparing observation times against grid points.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub timestamp_s: f64,
    pub channel: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub timestamp_s: f64,
    pub state: u8,
}

/// Irregularly timed signal observations plus fault-state transitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawSignalLog {
    pub observations: Vec<Observation>,
    pub fault_events: Vec<FaultEvent>,
}

impl RawSignalLog {
    /// Channel names in order of first appearance.
    pub fn channel_names(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.observations
            .iter()
            .filter(|o| seen.insert(o.channel.as_str()))
            .map(|o| o.channel.clone())
            .collect()
    }
}

/// Resamples every channel onto a uniform grid spanning the earliest to the
/// latest observation, holding the last observed value forward.
pub fn resample_uniform(log: &RawSignalLog, rate_hz: f64) -> Result<MultivariateSeries> {
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(TscvError::Config(format!("resampling rate must be positive, got {rate_hz}")));
    }
    let names = log.channel_names();
    if names.is_empty() {
        return Err(TscvError::Ingestion("signal log has no observations".into()));
    }
    let mut per_channel: HashMap<&str, Vec<(f64, f64)>> = HashMap::new();
    for obs in &log.observations {
        if !obs.timestamp_s.is_finite() {
            return Err(TscvError::Ingestion(format!(
                "channel {:?} has a non-finite timestamp",
                obs.channel
            )));
        }
        per_channel.entry(obs.channel.as_str()).or_default().push((obs.timestamp_s, obs.value));
    }
    let origin = log.observations.iter().map(|o| o.timestamp_s).fold(f64::INFINITY, f64::min);
    let end = log.observations.iter().map(|o| o.timestamp_s).fold(f64::NEG_INFINITY, f64::max);
    let length = ((end - origin) * rate_hz + TIME_EPS).floor() as usize + 1;
    let grid = TimeGrid::new(rate_hz, length, origin)?;

    let mut rows = Vec::with_capacity(names.len());
    for name in &names {
        let obs = &per_channel[name.as_str()];
        if let Some(w) = obs.windows(2).find(|w| w[1].0 < w[0].0) {
            return Err(TscvError::Ingestion(format!(
                "channel {name:?} timestamps decrease ({} after {})",
                w[1].0, w[0].0
            )));
        }
        if obs[0].0 > origin + TIME_EPS {
            return Err(TscvError::Ingestion(format!(
                "channel {name:?} has no observation at or before the grid origin {origin} s \
                 (first at {} s)",
                obs[0].0
            )));
        }
        let mut row = Vec::with_capacity(length);
        let mut cursor = 0;
        for i in 0..length {
            let t = grid.timestamp(i);
            while cursor + 1 < obs.len() && obs[cursor + 1].0 <= t + TIME_EPS {
                cursor += 1;
            }
            row.push(obs[cursor].1);
        }
        rows.push(row);
    }
    MultivariateSeries::new(grid, names, rows)
}

/// Scales each channel to `[0, 1]`. Constant channels become all zeros.
pub fn minmax_normalize(series: &MultivariateSeries) -> MultivariateSeries {
    let rows = series
        .rows()
        .iter()
        .zip(series.channels())
        .map(|(row, name)| {
            let (lo, hi) = row
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if hi > lo {
                let span = hi - lo;
                row.iter().map(|v| (v - lo) / span).collect()
            } else {
                warn!("channel {name:?} is constant; normalizing it to zeros");
                vec![0.0; row.len()]
            }
        })
        .collect();
    MultivariateSeries::new(*series.grid(), series.channels().to_vec(), rows)
        .expect("normalization preserves shape and finiteness")
}

/// Zero-order hold of the fault state onto the grid. The state is 0 before
/// the first event; events after the grid end have no effect.
pub fn align_labels(events: &[FaultEvent], grid: &TimeGrid) -> Result<LabelTrack> {
    if let Some(w) = events.windows(2).find(|w| w[1].timestamp_s < w[0].timestamp_s) {
        return Err(TscvError::Ingestion(format!(
            "fault events out of order: {} s follows {} s",
            w[1].timestamp_s, w[0].timestamp_s
        )));
    }
    if let Some(e) = events.iter().find(|e| e.state > 1) {
        return Err(TscvError::Ingestion(format!("fault state {} at {} s is not 0/1", e.state, e.timestamp_s)));
    }
    let mut labels = Vec::with_capacity(grid.len());
    let mut state = 0u8;
    let mut next = 0;
    for i in 0..grid.len() {
        let t = grid.timestamp(i);
        while next < events.len() && events[next].timestamp_s <= t + TIME_EPS {
            state = events[next].state;
            next += 1;
        }
        labels.push(state);
    }
    LabelTrack::new(labels)
}

/// Column mapping for labeled CSV exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub time_col: String,
    pub label_col: String,
    /// Target rate when the file's grid is not uniform (and for single-row files).
    pub rate_hz: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { time_col: "time".into(), label_col: "Fault Status".into(), rate_hz: 100.0 }
    }
}

pub fn load_labeled_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
    let file = File::open(path)?;
    read_labeled_csv(file, name, opts)
}

fn parse_cell(cell: &str, row: usize, col: &str) -> Result<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
        TscvError::Ingestion(format!("row {row}, column {col:?}: {cell:?} is not a finite number"))
    })
}

/// Reads a headed CSV with one time column, one 0/1 label column and numeric
/// channels. Uniform files keep their native rate; irregular ones are
/// resampled at `opts.rate_hz`.
pub fn read_labeled_csv<R: Read>(reader: R, name: impl Into<String>, opts: &CsvOptions) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(TscvError::Ingestion("CSV file is empty".into()));
    }
    let find = |col: &str| headers.iter().position(|h| h.trim() == col);
    let time_idx = find(&opts.time_col)
        .ok_or_else(|| TscvError::Ingestion(format!("missing time column {:?}", opts.time_col)))?;
    let label_idx = find(&opts.label_col)
        .ok_or_else(|| TscvError::Ingestion(format!("missing label column {:?}", opts.label_col)))?;
    let channel_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != time_idx && i != label_idx).collect();
    if channel_idx.is_empty() {
        return Err(TscvError::Ingestion("CSV has no signal channels".into()));
    }
    let channels: Vec<String> = channel_idx.iter().map(|&i| headers[i].trim().to_string()).collect();

    let mut times = Vec::new();
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); channel_idx.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = r + 2;
        times.push(parse_cell(&record[time_idx], line, &opts.time_col)?);
        let y = parse_cell(&record[label_idx], line, &opts.label_col)?;
        if y != 0.0 && y != 1.0 {
            return Err(TscvError::Ingestion(format!(
                "row {line}, column {:?}: label {y} is not 0 or 1",
                opts.label_col
            )));
        }
        labels.push(y as u8);
        for (slot, &i) in rows.iter_mut().zip(&channel_idx) {
            slot.push(parse_cell(&record[i], line, &headers[i])?);
        }
    }
    if times.is_empty() {
        return Err(TscvError::Ingestion("CSV has a header but no data rows".into()));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
        return Err(TscvError::Ingestion(format!("time column decreases ({} after {})", w[1], w[0])));
    }

    let n = times.len();
    let step = if n > 1 { (times[n - 1] - times[0]) / (n - 1) as f64 } else { 0.0 };
    let uniform = n == 1
        || (step > 0.0 && times.iter().enumerate().all(|(i, t)| (t - (times[0] + i as f64 * step)).abs() <= GRID_JITTER_S));

    if uniform {
        let rate = if n == 1 { opts.rate_hz } else { 1.0 / step };
        let grid = TimeGrid::new(rate, n, times[0])?;
        let series = MultivariateSeries::new(grid, channels, rows)?;
        return LabeledDataset::new(name, series, LabelTrack::new(labels)?);
    }

    warn!("time column is not uniform within {GRID_JITTER_S} s; resampling at {} Hz", opts.rate_hz);
    let mut log = RawSignalLog::default();
    for (i, t) in times.iter().enumerate() {
        for (c, row) in channels.iter().zip(&rows) {
            log.observations.push(Observation { timestamp_s: *t, channel: c.clone(), value: row[i] });
        }
    }
    // only transitions matter for the hold; keep the first row so state is set at origin
    let mut prev = None;
    for (t, &y) in times.iter().zip(&labels) {
        if prev != Some(y) {
            log.fault_events.push(FaultEvent { timestamp_s: *t, state: y });
            prev = Some(y);
        }
    }
    let series = resample_uniform(&log, opts.rate_hz)?;
    let labels = align_labels(&log.fault_events, series.grid())?;
    LabeledDataset::new(name, series, labels)
}

/// Writes a dataset in the layout [`read_labeled_csv`] expects.
pub fn write_labeled_csv<W: Write>(dataset: &LabeledDataset, writer: W, opts: &CsvOptions) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let series = &dataset.series;
    let mut header = vec![opts.time_col.clone()];
    header.extend(series.channels().iter().cloned());
    header.push(opts.label_col.clone());
    w.write_record(&header)?;
    let labels = dataset.labels.as_slice();
    for i in 0..series.len() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push(series.grid().timestamp(i).to_string());
        rec.extend(series.rows().iter().map(|row| row[i].to_string()));
        rec.push(labels[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
