//! Getting labeled series into memory: CSV exports of decoded CAN signals,
//! uniform resampling, min-max scaling, fault-state alignment, and a seeded
//! generator of intermittent-fault series for desk-scale runs.

mod ingest;
mod synth;

pub use ingest::{
    align_labels, load_labeled_csv, minmax_normalize, read_labeled_csv, resample_uniform,
    write_labeled_csv, CsvOptions, FaultEvent, Observation, RawSignalLog, GRID_JITTER_S,
};
pub use synth::{synthesize, SynthConfig};
