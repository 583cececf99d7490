//! Dataset arguments: a CSV path, or `synth:` followed by `key=value` pairs.

use anyhow::{bail, Context, Result};
use tscv_core::data::{load_labeled_csv, synthesize, CsvOptions, SynthConfig};
use tscv_core::LabeledDataset;

pub const SYNTH_KEYS: &str =
    "channels, length, rate, phi, sigma, zones, min_len, max_len, fraction, shift, seed";

pub fn parse_synth(spec: &str) -> Result<SynthConfig> {
    let mut cfg = SynthConfig::default();
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("synthetic option {pair:?} is not key=value"))?;
        let value = value.trim();
        let bad = || format!("synthetic option {key}={value:?} has a bad value");
        match key.trim() {
            "channels" => cfg.channels = value.parse().with_context(bad)?,
            "length" => cfg.length = value.parse().with_context(bad)?,
            "rate" => cfg.rate_hz = value.parse().with_context(bad)?,
            "phi" => cfg.ar_coefficient = value.parse().with_context(bad)?,
            "sigma" => cfg.noise_sigma = value.parse().with_context(bad)?,
            "zones" => cfg.n_fault_zones = value.parse().with_context(bad)?,
            "min_len" => cfg.zone_length_range.0 = value.parse().with_context(bad)?,
            "max_len" => cfg.zone_length_range.1 = value.parse().with_context(bad)?,
            "fraction" => cfg.affected_channel_fraction = value.parse().with_context(bad)?,
            "shift" => cfg.shift_magnitude = value.parse().with_context(bad)?,
            "seed" => cfg.seed = value.parse().with_context(bad)?,
            other => bail!("unknown synthetic option {other:?}; known: {SYNTH_KEYS}"),
        }
    }
    Ok(cfg)
}

pub fn load(spec: &str, csv: &CsvOptions) -> Result<LabeledDataset> {
    if let Some(rest) = spec.strip_prefix("synth:").or_else(|| (spec == "synth").then_some("")) {
        let cfg = parse_synth(rest)?;
        return synthesize(&cfg).with_context(|| format!("generating {spec}"));
    }
    load_labeled_csv(spec, csv).with_context(|| format!("loading {spec}"))
}
