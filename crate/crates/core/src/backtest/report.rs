use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Backtest, BacktestError, Result, Trade};
use crate::trading_env::Position;

/// The report table. Percent fields are in percent; ratios are annualized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceReport {
    pub return_pct: f64,
    pub return_ann_pct: f64,
    pub vol_ann_pct: f64,
    pub sharpe: f64,
    pub sortino: f64,
    pub calmar: f64,
    pub win_rate_pct: f64,
    pub n_trades: usize,
    pub max_drawdown_pct: f64,
}

/// Paths written by [`render_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub equity: PathBuf,
    pub trades: PathBuf,
    pub svg: PathBuf,
    pub ledger: PathBuf,
}

impl ReportFiles {
    pub fn all(&self) -> [&Path; 5] {
        [&self.report, &self.equity, &self.trades, &self.svg, &self.ledger]
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BacktestError + '_ {
    move |source| BacktestError::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Writes `report.json`, `equity.csv`, `trades.csv`, `equity.svg` and `ledger.csv` into `dir`.
pub fn render_report(report: &PerformanceReport, bt: &Backtest, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = ReportFiles {
        report: dir.join("report.json"),
        equity: dir.join("equity.csv"),
        trades: dir.join("trades.csv"),
        svg: dir.join("equity.svg"),
        ledger: dir.join("ledger.csv"),
    };

    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(&files.report, json).map_err(io_err(&files.report))?;

    let mut w = csv::Writer::from_writer(create(&files.equity)?);
    w.write_record(["step", "equity"])?;
    for (i, e) in bt.curve.values.iter().enumerate() {
        w.write_record([i.to_string(), e.to_string()])?;
    }
    w.flush().map_err(io_err(&files.equity))?;

    let mut w = csv::Writer::from_writer(create(&files.trades)?);
    w.write_record(["direction", "entry_idx", "entry_px", "exit_idx", "exit_px", "ret", "win"])?;
    for t in &bt.trades {
        w.write_record([
            t.direction.as_str().to_string(),
            t.entry_idx.to_string(),
            t.entry_px.to_string(),
            t.exit_idx.to_string(),
            t.exit_px.to_string(),
            t.ret.to_string(),
            t.win.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&files.trades))?;

    fs::write(&files.svg, equity_svg(bt)).map_err(io_err(&files.svg))?;

    bt.ledger
        .write_csv(create(&files.ledger)?)
        .map_err(|e| BacktestError::BadTrades(e.to_string()))?;
    Ok(files)
}

pub fn read_report(path: &Path) -> Result<PerformanceReport> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(io_err(path))?;
    Ok(serde_json::from_str(&s)?)
}

pub fn read_trades(path: &Path) -> Result<Vec<Trade>> {
    let mut rdr = csv::Reader::from_reader(File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bad = |what: &str| BacktestError::BadTrades(format!("bad {what} in {rec:?}"));
        let direction = match &rec[0] {
            "long" => Position::Long,
            "short" => Position::Short,
            _ => return Err(bad("direction")),
        };
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad("number"));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|_| bad("index"));
        out.push(Trade {
            direction,
            entry_idx: u(1)?,
            entry_px: f(2)?,
            exit_idx: u(3)?,
            exit_px: f(4)?,
            ret: f(5)?,
            win: rec[6].parse().map_err(|_| bad("win flag"))?,
        });
    }
    Ok(out)
}

const W: f64 = 800.0;
const H: f64 = 300.0;
const PAD: f64 = 20.0;

fn equity_svg(bt: &Backtest) -> String {
    let v = &bt.curve.values;
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = v.len().max(2) - 1;
    let x = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / n as f64;
    let y = |e: f64| H - PAD - (H - 2.0 * PAD) * (e - lo) / span;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let pts: Vec<String> = v.iter().enumerate().map(|(i, &e)| format!("{:.2},{:.2}", x(i), y(e))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
    let start = bt.ledger.start_index;
    for t in &bt.trades {
        // curve position 0 is the reset bar
        let i = (t.entry_idx - start).min(v.len() - 1);
        let color = if t.direction == Position::Long { "green" } else { "red" };
        let _ = writeln!(
            s,
            r#"<circle class="trade" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
            x(i),
            y(v[i])
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Number of trade markers in an SVG produced by [`render_report`].
pub fn svg_marker_count(svg: &str) -> usize {
    svg.matches(r#"<circle class="trade""#).count()
}
