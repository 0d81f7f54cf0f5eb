//! The `tclf` command line.
//!
//! Exit status is 0 on success, 1 on an internal fault (including a training
//! fault) and 2 on any user or input error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tclf_core::eval::{cross_validate, plan_folds, sliding_eval, MetricReport};
use tclf_core::models::{baseline_config, train_with_progress, BaselineKind, ModelConfig, TargetSet, DEFAULT_EPOCHS};
use tclf_core::preprocess::grade_of;
use tclf_core::windows::build_dataset;
use tclf_core::CycloneTrack;

use crate::error::{Error, Result};

// Standard output writes that tolerate a closed pipe (`tclf ... | head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}
use crate::formats::{atomic_write, read_file, read_tracks, read_window, write_best_track, write_dataset, write_trace, write_tracks};
use crate::ingest::{clean, parse_best_track, Schema};
use crate::manifest::RunManifest;
use crate::model_file::{load_model, parameter_digest, save_model};
use crate::sst::{attach_sst, parse_sst_grid};
use crate::synth::{generate, SynthOptions};

pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_FOLDS: usize = 5;
pub const MODEL_KINDS: [&str; 4] = ["intensity-time", "location", "ann", "gru"];

#[derive(Debug, Parser)]
#[command(name = "tclf", version, about = "Tropical-cyclone landfall forecasting with recurrent networks")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a best-track file into landfall-truncated 3-hourly tracks.
    Ingest(IngestArgs),
    /// Train one model and save it.
    Train(TrainArgs),
    /// Cyclone-level k-fold cross-validation of one or more model kinds.
    Evaluate(EvaluateArgs),
    /// Forecast landfall from one observation window.
    Predict(PredictArgs),
    /// Forecast from every window position of one cyclone.
    SlidingEval(SlidingArgs),
    /// Write a deterministic synthetic best-track corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Best-track CSV (cyclone_id,timestamp,lat,lon,msws_kt,ecp_hpa[,sst_c][,landfall]).
    #[arg(long)]
    pub best_track: PathBuf,
    /// SST grid CSV (date,lat,lon,sst_c) used for records without SST.
    #[arg(long)]
    pub sst: Option<PathBuf>,
    /// Spacing of the SST grid in degrees.
    #[arg(long, default_value_t = 1.0)]
    pub sst_resolution: f64,
    /// Output path of the cleaned tracks.
    #[arg(long)]
    pub out: PathBuf,
}

/// Options shared by training and evaluation; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainingFlags {
    /// TOML file with defaults for these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Observations per window (T).
    #[arg(long)]
    pub window_length: Option<usize>,
    #[arg(long, env = "TCLF_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Units per recurrent layer (per direction for BiLSTM).
    #[arg(long)]
    pub hidden_width: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Cap on the global gradient norm.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Cyclone ids kept out of training (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub holdout: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Cleaned tracks file.
    #[arg(long)]
    pub tracks: PathBuf,
    /// intensity-time, location, ann or gru.
    #[arg(long)]
    pub model: String,
    /// Target set for the ann and gru baselines: intensity-time or location.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the training windows as CSV.
    #[arg(long)]
    pub export_dataset: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub tracks: PathBuf,
    /// Model kinds to evaluate; ann and gru are evaluated on both target sets.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    /// Number of folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub flags: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with one row per observation and the seven feature columns.
    #[arg(long)]
    pub window: PathBuf,
}

#[derive(Debug, Args)]
pub struct SlidingArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub cyclone_id: String,
    /// Must match the model's window length when given.
    #[arg(long)]
    pub window_length: Option<usize>,
    /// Trace CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 40)]
    pub cyclones: usize,
    #[arg(long, env = "TCLF_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Fewest records up to and including landfall.
    #[arg(long, default_value_t = 9)]
    pub min_points: usize,
    /// Most records up to and including landfall.
    #[arg(long, default_value_t = 14)]
    pub max_points: usize,
    /// Most inland records after landfall.
    #[arg(long, default_value_t = 3)]
    pub post_landfall: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Contents of a `--config` TOML file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub window_length: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub hidden_width: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub clip_norm: Option<f64>,
    #[serde(default)]
    pub holdout: Vec<String>,
    pub target: Option<String>,
    pub folds: Option<usize>,
    #[serde(default)]
    pub models: Vec<String>,
}

/// Flags merged over the config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub window_length: usize,
    pub seed: u64,
    pub epochs: usize,
    pub hidden_width: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub clip_norm: Option<f64>,
    pub holdout: BTreeSet<String>,
    #[serde(skip)]
    pub file: FileConfig,
}

impl TrainingFlags {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => {
                let text = String::from_utf8(read_file(path)?).map_err(|_| Error::Usage(format!("{} is not UTF-8", path.display())))?;
                toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let holdout = if self.holdout.is_empty() { file.holdout.clone() } else { self.holdout.clone() };
        Ok(Resolved {
            window_length: self.window_length.or(file.window_length).unwrap_or(DEFAULT_WINDOW),
            seed: self.seed.or(file.seed).unwrap_or(0),
            epochs: self.epochs.or(file.epochs).unwrap_or(DEFAULT_EPOCHS),
            hidden_width: self.hidden_width.or(file.hidden_width),
            batch_size: self.batch_size.or(file.batch_size),
            learning_rate: self.learning_rate.or(file.learning_rate),
            clip_norm: self.clip_norm.or(file.clip_norm),
            holdout: holdout.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            file,
        })
    }
}

/// Builds the configuration for a model kind with the resolved options applied.
pub fn model_config(kind: &str, target: TargetSet, r: &Resolved) -> Result<ModelConfig> {
    let t = r.window_length;
    let mut cfg = match kind {
        "intensity-time" => ModelConfig::intensity_time(t),
        "location" => ModelConfig::location(t),
        other => baseline_config(BaselineKind::from_str(other)?, target, t)?,
    };
    if let Some(h) = r.hidden_width {
        cfg = cfg.with_hidden_width(h);
    }
    cfg.epochs = r.epochs;
    cfg.seed = r.seed;
    if let Some(b) = r.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = r.learning_rate {
        cfg.learning_rate = lr;
    }
    cfg.clip_norm = r.clip_norm;
    cfg.validate()?;
    Ok(cfg)
}

fn json_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn json_text<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))
}

fn load_tracks(path: &Path) -> Result<Vec<CycloneTrack>> {
    let tracks = read_tracks(path)?;
    if tracks.is_empty() {
        return Err(Error::Usage(format!("{} contains no usable tracks", path.display())));
    }
    Ok(tracks)
}

#[derive(Debug, Clone, Serialize)]
struct IngestSummary {
    records_read: usize,
    row_errors: usize,
    duplicates_dropped: usize,
    cyclones_kept: usize,
    cyclones_rejected: BTreeMap<String, String>,
    records_written: usize,
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let mut manifest = RunManifest::new("ingest", json_value(&serde_json::json!({ "sst_resolution": a.sst_resolution })), None);
    let parsed = parse_best_track(read_file(&a.best_track)?.as_slice(), &Schema::default())?;
    manifest.input(&a.best_track)?;
    if !parsed.errors.is_empty() {
        return Err(Error::Rows { source_name: a.best_track.display().to_string(), errors: parsed.errors });
    }
    let records = match &a.sst {
        Some(path) => {
            let grid = parse_sst_grid(read_file(path)?.as_slice(), a.sst_resolution, &path.display().to_string())?;
            manifest.input(path)?;
            attach_sst(&parsed.records, &grid)?
        }
        None => parsed.records,
    };
    let cleaned = clean(&records);
    atomic_write(&a.out, |w| write_tracks(w, &cleaned.tracks))?;
    manifest.output(&a.out)?;
    let summary = IngestSummary {
        records_read: cleaned.records_in + parsed.duplicates,
        row_errors: 0,
        duplicates_dropped: parsed.duplicates,
        cyclones_kept: cleaned.tracks.len(),
        cyclones_rejected: cleaned.rejections.iter().map(|r| (r.cyclone_id.clone(), r.reason.to_string())).collect(),
        records_written: cleaned.records_out,
    };
    outln!(
        "read {} records ({} duplicates dropped); kept {} cyclones, rejected {}; wrote {} records to {}",
        summary.records_read,
        summary.duplicates_dropped,
        summary.cyclones_kept,
        summary.cyclones_rejected.len(),
        summary.records_written,
        a.out.display()
    );
    for (id, reason) in &summary.cyclones_rejected {
        outln!("  rejected {id}: {reason}");
    }
    manifest.config = serde_json::json!({ "sst_resolution": a.sst_resolution, "summary": json_value(&summary) });
    manifest.finish(&a.out)?;
    Ok(())
}

fn target_for(kind: &str, requested: Option<&str>) -> Result<TargetSet> {
    match (kind, requested) {
        ("intensity-time", None) => Ok(TargetSet::IntensityTime),
        ("location", None) => Ok(TargetSet::Location),
        ("intensity-time" | "location", Some(t)) => {
            let t = TargetSet::from_str(t)?;
            if t.to_string() != kind {
                return Err(Error::Usage(format!("model {kind} cannot predict target {t}")));
            }
            Ok(t)
        }
        ("ann" | "gru", t) => Ok(TargetSet::from_str(t.unwrap_or("intensity-time"))?),
        ("1d-cnn" | "cnn" | "cnn1d", _) => Err(Error::Core(tclf_core::Error::UnsupportedBaseline(kind.into()))),
        (other, _) => Err(Error::Usage(format!("unknown model kind '{other}' (expected one of {})", MODEL_KINDS.join(", ")))),
    }
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let r = a.flags.resolve()?;
    let target = target_for(&a.model, a.target.as_deref().or(r.file.target.as_deref()))?;
    let cfg = model_config(&a.model, target, &r)?;
    let tracks = load_tracks(&a.tracks)?;
    let mut manifest = RunManifest::new("train", serde_json::json!({ "model": cfg, "holdout": r.holdout }), Some(r.seed));
    manifest.input(&a.tracks)?;
    let build = build_dataset(&tracks, r.window_length, &r.holdout)?;
    outln!(
        "dataset size for T={}: {} windows from {} cyclones ({} too short, {} held out)",
        r.window_length,
        build.dataset.len(),
        build.dataset.cyclone_ids().len(),
        build.skipped.len(),
        build.holdout.len()
    );
    if let Some(path) = &a.export_dataset {
        atomic_write(path, |w| write_dataset(w, r.window_length, build.dataset.samples()))?;
        manifest.output(path)?;
    }
    let epochs = cfg.epochs;
    let model = train_with_progress(&cfg, &build.dataset, |e, loss| {
        if (e + 1) % 10 == 0 || e + 1 == epochs {
            log::info!("epoch {}/{epochs}: loss {loss:.6}", e + 1);
        }
    })?;
    let bytes = save_model(&model)?;
    atomic_write(&a.out, |w| w.write_all(&bytes))?;
    manifest.output(&a.out)?;
    match model.metadata.final_loss() {
        Some(l) => outln!("final training loss: {l:.6}"),
        None => outln!("no epochs run"),
    }
    outln!("parameter digest: {}", parameter_digest(&model));
    manifest.finish(&a.out)?;
    Ok(())
}

/// Everything `evaluate` writes to its JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub window_length: usize,
    pub folds: usize,
    pub seed: u64,
    /// Cyclone id to fold index, shared by every model.
    pub plan: BTreeMap<String, usize>,
    /// Cyclones with fewer records than the window length.
    pub too_short: Vec<String>,
    pub reports: Vec<MetricReport>,
}

/// Model kinds expanded into the configurations to cross-validate.
fn evaluation_configs(kinds: &[String], r: &Resolved) -> Result<Vec<ModelConfig>> {
    let mut out = Vec::new();
    for kind in kinds {
        match kind.as_str() {
            "intensity-time" => out.push(model_config(kind, TargetSet::IntensityTime, r)?),
            "location" => out.push(model_config(kind, TargetSet::Location, r)?),
            "ann" | "gru" => {
                out.push(model_config(kind, TargetSet::IntensityTime, r)?);
                out.push(model_config(kind, TargetSet::Location, r)?);
            }
            other => {
                target_for(other, None)?;
            }
        }
    }
    Ok(out)
}

pub fn format_table(report: &EvaluationReport) -> String {
    let mut s = format!(
        "{}-fold cross-validation, T = {} ({} hours), seed {}\n{:<16}{:<20}{:>22}{:>22}{:>10}\n",
        report.folds,
        report.window_length,
        3 * report.window_length,
        report.seed,
        "model",
        "target",
        "MAE (mean ± std)",
        "RMSE (mean ± std)",
        "samples"
    );
    for m in &report.reports {
        for (i, t) in m.targets.iter().enumerate() {
            let model = if i == 0 { m.model.as_str() } else { "" };
            let samples = if i == 0 { m.total_samples.to_string() } else { String::new() };
            s += &format!(
                "{:<16}{:<20}{:>22}{:>22}{:>10}\n",
                model,
                t.target,
                format!("{:.3} ± {:.3}", t.mae.mean, t.mae.std),
                format!("{:.3} ± {:.3}", t.rmse.mean, t.rmse.std),
                samples
            );
        }
        if let Some(d) = m.distance_km {
            s += &format!("{:<16}{:<20}{:>22}\n", "", "distance_km", format!("{:.2} ± {:.2}", d.mean, d.std));
        }
    }
    s
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let r = a.flags.resolve()?;
    let kinds: Vec<String> = if !a.models.is_empty() {
        a.models.clone()
    } else if !r.file.models.is_empty() {
        r.file.models.clone()
    } else {
        MODEL_KINDS.iter().map(|s| s.to_string()).collect()
    };
    let k = a.folds.or(r.file.folds).unwrap_or(DEFAULT_FOLDS);
    let configs = evaluation_configs(&kinds, &r)?;
    let tracks = load_tracks(&a.tracks)?;
    let (usable, short): (Vec<CycloneTrack>, Vec<CycloneTrack>) = tracks
        .into_iter()
        .filter(|t| !r.holdout.contains(t.cyclone_id()))
        .partition(|t| t.len() >= r.window_length);
    let too_short: Vec<String> = short.iter().map(|t| t.cyclone_id().to_string()).collect();
    if !too_short.is_empty() {
        log::warn!("{} cyclone(s) shorter than T = {} left out of the folds", too_short.len(), r.window_length);
    }
    let ids: Vec<&str> = usable.iter().map(|t| t.cyclone_id()).collect();
    let plan = plan_folds(&ids, k, r.seed)?;
    let mut manifest = RunManifest::new("evaluate", serde_json::json!({ "models": configs, "folds": k, "holdout": r.holdout }), Some(r.seed));
    manifest.input(&a.tracks)?;
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        log::info!("cross-validating {} ({})", cfg.kind_name(), cfg.target_set);
        reports.push(cross_validate(&usable, r.window_length, cfg, &plan)?);
    }
    let report = EvaluationReport {
        window_length: r.window_length,
        folds: k,
        seed: r.seed,
        plan: plan.assignment().clone(),
        too_short,
        reports,
    };
    let text = json_text(&report)?;
    atomic_write(&a.out, |w| writeln!(w, "{text}"))?;
    manifest.output(&a.out)?;
    out!("{}", format_table(&report));
    manifest.finish(&a.out)?;
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let model = load_model(&read_file(&a.model)?)?;
    let window = read_window(read_file(&a.window)?.as_slice(), &a.window.display().to_string())?;
    let t = model.window_len();
    if window.rows() != t {
        return Err(Error::Usage(format!("window has {} rows; the model expects T = {t}", window.rows())));
    }
    match model.target_set() {
        TargetSet::IntensityTime => {
            let (msws, hours) = model.predict_intensity_time(&window)?;
            let grade = grade_of(msws.max(0.0))?;
            outln!("intensity at landfall: {msws:.2} kt, grade {grade}");
            outln!("hours to landfall: {hours:.2}");
        }
        TargetSet::Location => {
            let (lat, lon) = model.predict_location(&window)?;
            outln!("landfall latitude: {lat:.2}");
            outln!("landfall longitude: {lon:.2}");
        }
    }
    Ok(())
}

fn cmd_sliding_eval(a: &SlidingArgs) -> Result<()> {
    let model = load_model(&read_file(&a.model)?)?;
    let t = model.window_len();
    if let Some(requested) = a.window_length {
        if requested != t {
            return Err(Error::Usage(format!("--window-length {requested} does not match the model's T = {t}")));
        }
    }
    let tracks = read_tracks(&a.tracks)?;
    let track = tracks
        .iter()
        .find(|tr| tr.cyclone_id() == a.cyclone_id)
        .ok_or_else(|| Error::Usage(format!("cyclone {} not found in {}", a.cyclone_id, a.tracks.display())))?;
    if track.len() < t {
        return Err(Error::Usage(format!("cyclone {} has {} records, fewer than T = {t}", a.cyclone_id, track.len())));
    }
    let mut manifest = RunManifest::new("sliding-eval", serde_json::json!({ "cyclone_id": a.cyclone_id, "window_length": t }), Some(model.config.seed));
    manifest.input(&a.model)?;
    manifest.input(&a.tracks)?;
    let report = sliding_eval(track, &model, t)?;
    atomic_write(&a.out, |w| write_trace(w, &report))?;
    manifest.output(&a.out)?;
    if report.seen_in_training {
        eprintln!("warning: cyclone {} was part of the model's training data", a.cyclone_id);
    }
    outln!("{} predictions for {} (T = {t})", report.trace.len(), a.cyclone_id);
    for (j, name) in report.target_set.names().iter().enumerate() {
        outln!("  {name}: MAE {:.3}, RMSE {:.3}", report.mae[j], report.rmse[j]);
    }
    if let Some(d) = report.mean_distance_km {
        outln!("  distance_km: {d:.2}");
    }
    manifest.finish(&a.out)?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let opts = SynthOptions {
        cyclones: a.cyclones,
        seed: a.seed,
        min_points: a.min_points,
        max_points: a.max_points,
        post_landfall: a.post_landfall,
    };
    let records = generate(&opts)?;
    atomic_write(&a.out, |w| write_best_track(w, &records))?;
    outln!("wrote {} records of {} cyclones to {}", records.len(), a.cyclones, a.out.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::SlidingEval(a) => cmd_sliding_eval(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
