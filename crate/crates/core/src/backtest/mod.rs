//! Greedy policy evaluation, trade extraction and report metrics.

pub mod metrics;
mod report;

use thiserror::Error;

use crate::agents::{argmax, policy_io::check_io, AgentError, Mlp};
use crate::trading_env::{Action, EnvError, EpisodeLedger, Position, TradingEnv};

pub use metrics::{annualize, calmar, max_drawdown, period_returns, sharpe, sortino, win_rate};
pub use report::{
    read_report, read_trades, render_report, svg_marker_count, PerformanceReport, ReportFiles,
};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("equity curve must be positive and finite")]
    InvalidCurve,
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
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
    #[error("malformed trades file: {0}")]
    BadTrades(String),
}

pub type Result<T> = std::result::Result<T, BacktestError>;

/// One position held between two flips (or from the last flip to the final bar).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    pub direction: Position,
    pub entry_idx: usize,
    pub entry_px: f64,
    pub exit_idx: usize,
    pub exit_px: f64,
    /// `(1 − commission)·price_ratio − 1`; the entry flip pays the commission.
    pub ret: f64,
    pub win: bool,
}

impl Trade {
    fn new(direction: Position, entry: (usize, f64), exit: (usize, f64), commission: f64) -> Self {
        let ratio = match direction {
            Position::Long => exit.1 / entry.1,
            Position::Short => entry.1 / exit.1,
        };
        let ret = (1.0 - commission) * ratio - 1.0;
        Self {
            direction,
            entry_idx: entry.0,
            entry_px: entry.1,
            exit_idx: exit.0,
            exit_px: exit.1,
            ret,
            win: ret > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquityCurve {
    pub initial_cash: f64,
    /// Initial equity followed by equity after each step.
    pub values: Vec<f64>,
}

impl EquityCurve {
    pub fn from_ledger(ledger: &EpisodeLedger) -> Self {
        Self {
            initial_cash: ledger.initial_cash,
            values: ledger.equity_curve(),
        }
    }

    pub fn final_equity(&self) -> f64 {
        *self.values.last().unwrap_or(&self.initial_cash)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub ledger: EpisodeLedger,
    pub curve: EquityCurve,
    pub trades: Vec<Trade>,
}

impl Backtest {
    pub fn from_ledger(ledger: EpisodeLedger, commission: f64) -> Self {
        let trades = extract_trades(&ledger, commission);
        Self {
            curve: EquityCurve::from_ledger(&ledger),
            ledger,
            trades,
        }
    }

    /// Price ratio earned by the reset-time Short before the first flip (1 if it flips at once).
    pub fn pre_trade_ratio(&self) -> f64 {
        let first_flip = self.ledger.records.iter().position(|r| r.trade_executed);
        let end_px = match first_flip {
            Some(0) => return 1.0,
            Some(i) => self.ledger.records[i - 1].price,
            None => self.ledger.records.last().map_or(self.ledger.start_price, |r| r.price),
        };
        self.ledger.start_price / end_px
    }
}

/// Pairs consecutive flips into trades; the position still open at the end is closed at
/// the last bar. The Short held from reset until the first flip is not a trade.
pub fn extract_trades(ledger: &EpisodeLedger, commission: f64) -> Vec<Trade> {
    let mut trades = Vec::new();
    let mut open: Option<(Position, usize, f64)> = None;
    let mut prev_px = ledger.start_price;
    for r in &ledger.records {
        if r.trade_executed {
            // the flip executes at the close of the bar before `r.step`
            let at = (r.step - 1, prev_px);
            if let Some((dir, idx, px)) = open.take() {
                trades.push(Trade::new(dir, (idx, px), at, commission));
            }
            open = Some((r.position, at.0, at.1));
        }
        prev_px = r.price;
    }
    if let (Some((dir, idx, px)), Some(last)) = (open, ledger.records.last()) {
        trades.push(Trade::new(dir, (idx, px), (last.step, last.price), commission));
    }
    trades
}

/// Runs one episode choosing actions with `choose(observation)`.
pub fn run_with<F>(env: &mut TradingEnv, seed: u64, mut choose: F) -> Result<Backtest>
where
    F: FnMut(&[f64]) -> Result<Action>,
{
    let mut obs = env.reset(seed)?.flatten();
    loop {
        let step = env.step(choose(&obs)?)?;
        if step.done {
            break;
        }
        obs = step.observation.flatten();
    }
    let ledger = env.ledger().cloned().ok_or(EnvError::NotReset)?;
    Ok(Backtest::from_ledger(ledger, env.config().commission))
}

/// Greedy (argmax, ties to Sell) evaluation of `policy` over one episode.
pub fn run_policy(env: &mut TradingEnv, policy: &Mlp, seed: u64) -> Result<Backtest> {
    check_io(policy, env.observation_len(), Action::COUNT)?;
    run_with(env, seed, |obs| {
        let out = policy.forward(obs)?;
        Ok(Action::from_index(argmax(&out))?)
    })
}

/// Report over an equity curve and its trades.
pub fn compute_report(
    curve: &EquityCurve,
    trades: &[Trade],
    rf: f64,
    periods_per_year: f64,
) -> Result<PerformanceReport> {
    let v = &curve.values;
    if v.is_empty() || v.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(BacktestError::InvalidCurve);
    }
    let returns = period_returns(v);
    let total = v[v.len() - 1] / v[0] - 1.0;
    let return_ann_pct = annualize(total, returns.len(), periods_per_year)?;
    let mdd = max_drawdown(v);
    let vol = if returns.is_empty() {
        0.0
    } else {
        let m = returns.iter().sum::<f64>() / returns.len() as f64;
        (returns.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / returns.len() as f64).sqrt()
    };
    Ok(PerformanceReport {
        return_pct: 100.0 * (v[v.len() - 1] / v[0] - 1.0),
        return_ann_pct,
        vol_ann_pct: 100.0 * vol * periods_per_year.sqrt(),
        sharpe: sharpe(&returns, rf, periods_per_year)?,
        sortino: sortino(&returns, rf, periods_per_year)?,
        calmar: calmar(return_ann_pct / 100.0, mdd),
        win_rate_pct: win_rate(trades).unwrap_or(0.0),
        n_trades: trades.len(),
        max_drawdown_pct: 100.0 * mdd,
    })
}
