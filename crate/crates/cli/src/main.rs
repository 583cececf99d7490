mod dataset;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tscv_core::classify::ClassifierKind;
use tscv_core::data::{synthesize, write_labeled_csv, CsvOptions, SynthConfig};
use tscv_core::folds;
use tscv_core::runner::{
    compare_groups, emit_plotdata, group_auc_pr, read_jsonl, run_grid, write_jsonl, write_summary_tables, GroupField,
};
use tscv_core::stats::{dataset_stationarity, Alternative};
use tscv_core::{ExperimentGrid, ExperimentRecord, Strategy};

#[derive(Parser)]
#[command(name = "tscv-bench", version, about = "Walk-forward vs sliding-window cross-validation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write one JSON record per line.
    Run(RunArgs),
    /// Write strategy summary tables as CSV files.
    Summarize {
        records: PathBuf,
        #[arg(long, default_value = "tables")]
        out: PathBuf,
    },
    /// Print one CSV row per valid fold for plotting.
    Plotdata {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a fold plan as JSON lines.
    Folds {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 150)]
        delta: usize,
        #[arg(long, default_value = "wf")]
        strategy: Strategy,
        /// Explicit training window; defaults to length - K*delta.
        #[arg(long)]
        omega: Option<usize>,
    },
    /// Median, sigma and count of valid-fold AUC-PR per group.
    Metrics {
        records: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "classifier,strategy")]
        group_by: Vec<GroupField>,
    },
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Write a synthetic intermittent-fault dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Mann-Whitney U between the valid-fold AUC-PR of two record files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_delimiter = ',')]
        by: Vec<GroupField>,
        #[arg(long, default_value = "less")]
        alternative: Alternative,
    },
    /// ADF and KPSS verdicts per channel.
    Stationarity {
        #[arg(long)]
        dataset: String,
        #[command(flatten)]
        csv: CsvArgs,
    },
}

#[derive(Args, Clone)]
struct CsvArgs {
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "Fault Status")]
    label_col: String,
    /// Resampling rate for CSV files without a uniform time grid.
    #[arg(long, default_value_t = 100.0)]
    rate_hz: f64,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions { time_col: self.time_col.clone(), label_col: self.label_col.clone(), rate_hz: self.rate_hz }
    }
}

#[derive(Args)]
struct RunArgs {
    /// CSV path or `synth:key=value,...`; repeatable.
    #[arg(long, required = true)]
    dataset: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "wf,sw")]
    strategies: Vec<Strategy>,
    /// Fold counts as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "3..9")]
    k: String,
    #[arg(long, default_value_t = 150)]
    delta: usize,
    #[arg(long, value_delimiter = ',', default_value = "majority,residual,rf,logistic,rocket")]
    classifiers: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    rocket_kernels: usize,
    #[arg(long, default_value_t = 16)]
    lookback: usize,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Skip min-max scaling of the datasets.
    #[arg(long)]
    no_normalize: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    channels: usize,
    #[arg(long, default_value_t = 1500)]
    length: usize,
    #[arg(long, default_value_t = 100.0)]
    rate_hz: f64,
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 5)]
    zones: usize,
    #[arg(long, default_value_t = 40)]
    min_len: usize,
    #[arg(long, default_value_t = 250)]
    max_len: usize,
    #[arg(long, default_value_t = 0.25)]
    fraction: f64,
    #[arg(long, default_value_t = 1.5)]
    shift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "Fault Status")]
    label_col: String,
}

fn parse_k(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    let values: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad K range {spec:?}"))?;
        let b: usize = b.trim_start_matches('=').trim().parse().with_context(|| format!("bad K range {spec:?}"))?;
        (a..=b).collect()
    } else {
        spec.split(',').map(|s| s.trim().parse().with_context(|| format!("bad K value {s:?}"))).collect::<Result<_>>()?
    };
    if values.is_empty() {
        bail!("K range {spec:?} is empty");
    }
    Ok(values)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_jsonl(file).with_context(|| format!("reading {}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(args: RunArgs) -> Result<()> {
    let csv = args.csv.options();
    let datasets = args.dataset.iter().map(|d| dataset::load(d, &csv)).collect::<Result<Vec<_>>>()?;
    let mut grid = ExperimentGrid::new(datasets);
    grid.strategies = args.strategies;
    grid.k_values = parse_k(&args.k)?;
    grid.delta = args.delta;
    grid.classifiers = args.classifiers;
    grid.seed = args.seed;
    grid.rocket_kernels = args.rocket_kernels;
    grid.lookback = args.lookback;
    grid.parallelism = args.jobs;
    grid.normalize = !args.no_normalize;
    let out = run_grid(&grid)?;
    for cell in &out.skipped_cells {
        log::warn!(
            "skipped {} {} K={} {}: {}",
            cell.dataset_name,
            cell.strategy,
            cell.k_folds,
            cell.classifier_id,
            cell.reason
        );
    }
    write_jsonl(&out.records, output(args.out.as_deref())?)?;
    log::info!("{} records, {} skipped cells", out.records.len(), out.skipped_cells.len());
    Ok(())
}

fn metrics(records: &Path, group_by: &[GroupField]) -> Result<()> {
    let records = load_records(records)?;
    let mut w = csv::Writer::from_writer(output(None)?);
    let mut header: Vec<&str> = group_by.iter().map(|f| f.name()).collect();
    header.extend(["median", "sigma", "n_valid"]);
    w.write_record(&header)?;
    for group in group_auc_pr(&records, group_by) {
        let mut row: Vec<String> = group.key.iter().map(|k| k.to_string()).collect();
        row.push(fmt_opt(group.summary.map(|s| s.median)));
        row.push(fmt_opt(group.summary.map(|s| s.sigma)));
        row.push(group.summary.map_or(0, |s| s.n).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn stats(cmd: StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Compare { a, b, by, alternative } => {
            let rows = compare_groups(&stem(&a), &load_records(&a)?, &stem(&b), &load_records(&b)?, &by, alternative);
            let mut w = csv::Writer::from_writer(output(None)?);
            w.write_record(["comparison", "condition", "p_value"])?;
            for row in rows {
                w.write_record([row.comparison, row.condition, fmt_opt(row.p_value)])?;
            }
            w.flush()?;
        }
        StatsCommand::Stationarity { dataset, csv } => {
            let ds = dataset::load(&dataset, &csv.options())?;
            let report = dataset_stationarity(&ds);
            let mut w = csv::Writer::from_writer(output(None)?);
            w.write_record(["channel", "adf_stat", "adf_reject_5pct", "kpss_stat", "kpss_reject_5pct", "fails_stationarity"])?;
            for ch in &report.channels {
                let reject = |o: Option<bool>| o.map(|b| b.to_string()).unwrap_or_default();
                w.write_record([
                    ch.channel.clone(),
                    fmt_opt(ch.adf.map(|o| o.statistic)),
                    reject(ch.adf.map(|o| o.reject_5pct)),
                    fmt_opt(ch.kpss.map(|o| o.statistic)),
                    reject(ch.kpss.map(|o| o.reject_5pct)),
                    ch.fails_stationarity().to_string(),
                ])?;
            }
            w.flush()?;
            eprintln!("overall_nonstationary: {}", report.overall_nonstationary);
        }
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        channels: args.channels,
        length: args.length,
        rate_hz: args.rate_hz,
        ar_coefficient: args.phi,
        noise_sigma: args.sigma,
        n_fault_zones: args.zones,
        zone_length_range: (args.min_len, args.max_len),
        affected_channel_fraction: args.fraction,
        shift_magnitude: args.shift,
        seed: args.seed,
    };
    let ds = synthesize(&cfg)?;
    let csv = CsvOptions { time_col: args.time_col, label_col: args.label_col, ..CsvOptions::default() };
    write_labeled_csv(&ds, output(args.out.as_deref())?, &csv)?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Summarize { records, out } => {
            for path in write_summary_tables(&load_records(&records)?, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Plotdata { records, out } => {
            emit_plotdata(&load_records(&records)?, output(out.as_deref())?)?;
            Ok(())
        }
        Command::Folds { length, k, delta, strategy, omega } => {
            let plan = match omega {
                Some(omega) => folds::plan_with_omega(strategy, length, k, delta, omega)?,
                None => folds::plan(strategy, length, k, delta)?,
            };
            let mut w = output(None)?;
            for fold in &plan.folds {
                serde_json::to_writer(&mut w, fold)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Metrics { records, group_by } => metrics(&records, &group_by),
        Command::Stats(cmd) => stats(cmd),
        Command::Synth(args) => synth(args),
    }
}
