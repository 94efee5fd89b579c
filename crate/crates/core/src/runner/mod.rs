//! Config-driven pipeline behind the `quantrl` CLI.

mod config;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{self, save_policy, AgentError};
use crate::backtest::{self, BacktestError, PerformanceReport, ReportFiles};
use crate::indicators::{compute_feature_matrix, FeatureMatrix, IndicatorError};
use crate::market_data::{load_csv, slice_by_date, DataError, OhlcvSeries};
use crate::normalize::{
    pearson_corr_matrix, select_uncorrelated, CorrelationMatrix, FeatureScaler, NormalizeError,
};
use crate::trading_env::{EnvError, EpisodeLedger, TradingEnv};

pub use config::{
    load_config, AgentConfig, BacktestConfig, DataConfig, ExperimentConfig, FeaturesConfig,
    NormalizationConfig,
};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config key `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Backtest(#[from] BacktestError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, RunnerError>;

impl RunnerError {
    /// 2 for config problems, 3 for bad input data, 4 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::ConfigIo { .. } | RunnerError::Schema { .. } => 2,
            RunnerError::Data(_) | RunnerError::Indicator(_) | RunnerError::Normalize(_) => 3,
            _ => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "data",
            _ => "runtime",
        }
    }

    /// Single-line JSON description for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(io_err(path))
}

/// Provenance record written next to a run's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub algorithm: String,
    /// Artifact name → file name inside the output directory.
    pub artifacts: BTreeMap<String, String>,
    /// Artifact name → SHA-256 of its bytes.
    pub artifact_sha256: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    fn new(command: &str, cfg: &ExperimentConfig, started_at: String) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            algorithm: cfg.agent.algorithm.as_str().to_string(),
            artifacts: BTreeMap::new(),
            artifact_sha256: BTreeMap::new(),
            started_at,
            finished_at: String::new(),
        }
    }

    fn add(&mut self, name: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        self.artifacts.insert(name.to_string(), file);
        self.artifact_sha256.insert(name.to_string(), config::hex(&Sha256::digest(&bytes)));
        Ok(())
    }

    fn finish(mut self, path: &Path) -> Result<Self> {
        self.finished_at = now();
        write_json(&self, path)?;
        Ok(self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Loads the configured CSV and keeps bars in `[start, end)`.
pub fn load_series(cfg: &ExperimentConfig) -> Result<OhlcvSeries> {
    let full = load_csv(&cfg.data.path)?;
    Ok(slice_by_date(&full, cfg.data.start, cfg.data.end)?)
}

/// Computes the configured indicators, pruning correlated columns when a threshold is set.
pub fn build_features(cfg: &ExperimentConfig, series: &OhlcvSeries) -> Result<FeatureMatrix> {
    let fm = compute_feature_matrix(series, &cfg.features.specs)?;
    match cfg.features.select_threshold {
        Some(t) => {
            let corr = pearson_corr_matrix(&fm, cfg.normalization.kind)?;
            Ok(fm.select(&select_uncorrelated(&corr, t))?)
        }
        None => Ok(fm),
    }
}

pub fn correlation(
    cfg: &ExperimentConfig,
    features: &FeatureMatrix,
    threshold: f64,
) -> Result<(CorrelationMatrix, Vec<String>)> {
    let corr = pearson_corr_matrix(features, cfg.normalization.kind)?;
    let keep = select_uncorrelated(&corr, threshold);
    Ok((corr, keep))
}

/// Series and features shared by every env of a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub series: Arc<OhlcvSeries>,
    pub features: Arc<FeatureMatrix>,
}

impl Prepared {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let series = load_series(cfg)?;
        let features = build_features(cfg, &series)?;
        Ok(Self { series: Arc::new(series), features: Arc::new(features) })
    }

    pub fn fit_scaler(&self, cfg: &ExperimentConfig) -> Result<FeatureScaler> {
        Ok(FeatureScaler::fit(
            &self.features,
            cfg.normalization.kind,
            &cfg.normalization.overrides,
            0..self.features.n_rows(),
        )?)
    }

    pub fn env(&self, cfg: &ExperimentConfig, scaler: &Arc<FeatureScaler>) -> Result<TradingEnv> {
        Ok(TradingEnv::with_scaler(
            self.series.clone(),
            self.features.clone(),
            scaler.clone(),
            cfg.env.clone(),
        )?)
    }
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub policy: PathBuf,
    pub value: Option<PathBuf>,
    pub scaler: PathBuf,
    pub training_log: PathBuf,
    pub config: PathBuf,
    pub manifest: PathBuf,
    pub run: RunManifest,
}

/// Trains the configured agent and writes its artifacts into `output_dir`.
pub fn train(cfg: &ExperimentConfig) -> Result<TrainArtifacts> {
    let started = now();
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let prep = Prepared::load(cfg)?;
    let scaler = Arc::new(prep.fit_scaler(cfg)?);
    log::info!(
        "training {} on {} bars, {} features",
        cfg.agent.algorithm.as_str(),
        prep.series.len(),
        prep.features.n_cols()
    );
    let outcome = agents::train(
        cfg.agent.algorithm,
        || TradingEnv::with_scaler(prep.series.clone(), prep.features.clone(), scaler.clone(), cfg.env.clone()),
        &cfg.agent.hyperparams,
        cfg.seed,
    )?;

    let mut run = RunManifest::new("train", cfg, started);
    let config = out.join("config.json");
    fs::write(&config, format!("{}\n", cfg.canonical_json())).map_err(io_err(&config))?;
    run.add("config", &config)?;
    let policy = out.join("policy.bin");
    save_policy(&outcome.policy, &policy)?;
    run.add("policy", &policy)?;
    let value = match &outcome.value {
        Some(v) => {
            let p = out.join("value.bin");
            save_policy(v, &p)?;
            run.add("value", &p)?;
            Some(p)
        }
        None => None,
    };
    let scaler_path = out.join("scaler.json");
    write_json(scaler.as_ref(), &scaler_path)?;
    run.add("scaler", &scaler_path)?;
    let training_log = out.join("training_log.csv");
    outcome
        .log
        .write_csv(create(&training_log)?)?;
    run.add("training_log", &training_log)?;
    let manifest = out.join("manifest.json");
    let run = run.finish(&manifest)?;
    Ok(TrainArtifacts { policy, value, scaler: scaler_path, training_log, config, manifest, run })
}

fn read_scaler(path: &Path) -> Result<FeatureScaler> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone)]
pub struct BacktestArtifacts {
    pub report: PerformanceReport,
    pub files: ReportFiles,
    pub manifest: PathBuf,
    pub run: RunManifest,
}

/// Greedy backtest of a trained policy; `policy` and `scaler` default to the files that
/// `train` writes into `output_dir`.
pub fn run_backtest(
    cfg: &ExperimentConfig,
    policy: Option<&Path>,
    scaler: Option<&Path>,
) -> Result<BacktestArtifacts> {
    let started = now();
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let policy_path = policy.map(Path::to_path_buf).unwrap_or_else(|| out.join("policy.bin"));
    let scaler_path = scaler.map(Path::to_path_buf).unwrap_or_else(|| out.join("scaler.json"));
    let net = agents::load_policy(&policy_path)?;
    let scaler = Arc::new(read_scaler(&scaler_path)?);
    let prep = Prepared::load(cfg)?;
    let mut env = prep.env(cfg, &scaler)?;
    let bt = backtest::run_policy(&mut env, &net, cfg.seed)?;
    let report = backtest::compute_report(
        &bt.curve,
        &bt.trades,
        cfg.backtest.risk_free,
        cfg.backtest.periods_per_year,
    )?;
    let files = backtest::render_report(&report, &bt, out)?;
    let mut run = RunManifest::new("backtest", cfg, started);
    for (name, path) in [
        ("report", &files.report),
        ("equity", &files.equity),
        ("trades", &files.trades),
        ("equity_svg", &files.svg),
        ("ledger", &files.ledger),
    ] {
        run.add(name, path)?;
    }
    let manifest = out.join("backtest_manifest.json");
    let run = run.finish(&manifest)?;
    Ok(BacktestArtifacts { report, files, manifest, run })
}

/// Rebuilds the report bundle from a saved episode ledger.
pub fn report_from_ledger(cfg: &ExperimentConfig, ledger: &Path) -> Result<(PerformanceReport, ReportFiles)> {
    let file = File::open(ledger).map_err(io_err(ledger))?;
    let ledger = EpisodeLedger::read_csv(file)?;
    let bt = backtest::Backtest::from_ledger(ledger, cfg.env.commission);
    let report = backtest::compute_report(
        &bt.curve,
        &bt.trades,
        cfg.backtest.risk_free,
        cfg.backtest.periods_per_year,
    )?;
    ensure_dir(&cfg.output_dir)?;
    let files = backtest::render_report(&report, &bt, &cfg.output_dir)?;
    Ok((report, files))
}

pub const COMPARE_COLUMNS: [&str; 9] = [
    "return_pct",
    "return_ann_pct",
    "vol_ann_pct",
    "sharpe",
    "sortino",
    "calmar",
    "win_rate_pct",
    "n_trades",
    "max_drawdown_pct",
];

/// Merges `report.json` files into one CSV table, one row per report. Labels default to
/// the name of each report's parent directory.
pub fn compare(reports: &[PathBuf], labels: &[String], out: &Path) -> Result<Vec<(String, PerformanceReport)>> {
    let mut rows = Vec::with_capacity(reports.len());
    for (i, path) in reports.iter().enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            path.parent()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string())
        });
        rows.push((label, backtest::read_report(path)?));
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let mut w = csv::Writer::from_writer(create(out)?);
    let mut header = vec!["run"];
    header.extend(COMPARE_COLUMNS);
    w.write_record(&header)?;
    for (label, r) in &rows {
        w.write_record([
            label.clone(),
            r.return_pct.to_string(),
            r.return_ann_pct.to_string(),
            r.vol_ann_pct.to_string(),
            r.sharpe.to_string(),
            r.sortino.to_string(),
            r.calmar.to_string(),
            r.win_rate_pct.to_string(),
            r.n_trades.to_string(),
            r.max_drawdown_pct.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(out))?;
    Ok(rows)
}
