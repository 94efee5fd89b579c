use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quantrl::market_data::{load_csv, save_csv, slice_by_date};
use quantrl::runner::{self, ExperimentConfig, Result, RunnerError};

#[derive(Parser, Debug)]
#[command(name = "quantrl", version, about = "Reinforcement-learning trading lab")]
struct Cli {
    /// Experiment config (JSON). Missing fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate OHLCV data and write the configured date range as canonical CSV.
    Ingest {
        /// Input CSV instead of the config's data path.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute the indicator feature matrix.
    Features,
    /// Write the Pearson correlation matrix and the greedily selected columns.
    Corr {
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
    },
    /// Train the configured agent.
    Train,
    /// Run a trained policy greedily and write the report bundle.
    Backtest {
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        scaler: Option<PathBuf>,
    },
    /// Rebuild the report bundle from a saved ledger.
    Report {
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Merge several report.json files into one table.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Row labels, in report order.
        #[arg(long = "label")]
        labels: Vec<String>,
        /// Output CSV; defaults to compare.csv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => runner::load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io { path: path.display().to_string(), source }
}

fn ensure_out(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli)?;
    match cli.command {
        Command::Ingest { input } => {
            let path = input.unwrap_or_else(|| cfg.data.path.clone());
            let series = slice_by_date(&load_csv(&path)?, cfg.data.start, cfg.data.end)?;
            ensure_out(&cfg)?;
            let dest = cfg.output_dir.join("ohlcv.csv");
            save_csv(&series, &dest)?;
            println!("{} bars {}..={} -> {}", series.len(), series.first_date(), series.last_date(), dest.display());
        }
        Command::Features => {
            let series = runner::load_series(&cfg)?;
            let fm = runner::build_features(&cfg, &series)?;
            ensure_out(&cfg)?;
            let dest = cfg.output_dir.join("features.csv");
            let file = fs::File::create(&dest).map_err(io_err(&dest))?;
            fm.write_csv(std::io::BufWriter::new(file))?;
            println!("{} rows x {} columns (warm-up {}) -> {}", fm.n_rows(), fm.n_cols(), fm.warmup(), dest.display());
        }
        Command::Corr { threshold } => {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(RunnerError::Schema {
                    key: "threshold".into(),
                    message: "must lie in (0, 1]".into(),
                });
            }
            let series = runner::load_series(&cfg)?;
            let fm = runner::build_features(&cfg, &series)?;
            let (corr, keep) = runner::correlation(&cfg, &fm, threshold)?;
            ensure_out(&cfg)?;
            let dest = cfg.output_dir.join("corr.csv");
            let file = fs::File::create(&dest).map_err(io_err(&dest))?;
            corr.write_csv(std::io::BufWriter::new(file))?;
            let sel = cfg.output_dir.join("selected.txt");
            fs::write(&sel, keep.iter().map(|k| format!("{k}\n")).collect::<String>()).map_err(io_err(&sel))?;
            println!("{}x{} matrix -> {}; kept {} columns -> {}", corr.len(), corr.len(), dest.display(), keep.len(), sel.display());
        }
        Command::Train => {
            let art = runner::train(&cfg)?;
            println!("policy -> {}", art.policy.display());
            println!("manifest -> {} (config {})", art.manifest.display(), art.run.config_hash);
        }
        Command::Backtest { policy, scaler } => {
            let art = runner::run_backtest(&cfg, policy.as_deref(), scaler.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&art.report)?);
            println!("report -> {}", art.files.report.display());
        }
        Command::Report { ledger } => {
            let path = ledger.unwrap_or_else(|| cfg.output_dir.join("ledger.csv"));
            let (report, files) = runner::report_from_ledger(&cfg, &path)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            println!("report -> {}", files.report.display());
        }
        Command::Compare { reports, labels, output } => {
            let dest = output.unwrap_or_else(|| cfg.output_dir.join("compare.csv"));
            let rows = runner::compare(&reports, &labels, &dest)?;
            println!("{:<16} {:>12} {:>10} {:>12} {:>9}", "run", "return_pct", "sharpe", "win_rate_pct", "n_trades");
            for (label, r) in rows {
                println!("{label:<16} {:>12.4} {:>10.4} {:>12.4} {:>9}", r.return_pct, r.sharpe, r.win_rate_pct, r.n_trades);
            }
            println!("table -> {}", dest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QUANTRL_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
