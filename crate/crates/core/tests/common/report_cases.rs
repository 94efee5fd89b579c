//! Equity curves with report values worked out by hand (exact rational returns, then one
//! square root), and helpers to build trades.

use quantrl::backtest::{EquityCurve, PerformanceReport, Trade};
use quantrl::trading_env::Position;

pub struct ReportCase {
    pub name: &'static str,
    pub curve: Vec<f64>,
    pub trades: Vec<Trade>,
    pub rf: f64,
    pub periods_per_year: f64,
    pub expect: PerformanceReport,
}

pub fn trade(ret: f64) -> Trade {
    Trade {
        direction: Position::Long,
        entry_idx: 0,
        entry_px: 100.0,
        exit_idx: 1,
        exit_px: 100.0 * (1.0 + ret),
        ret,
        win: ret > 0.0,
    }
}

pub fn curve(values: &[f64]) -> EquityCurve {
    EquityCurve { initial_cash: values[0], values: values.to_vec() }
}

pub fn cases() -> Vec<ReportCase> {
    vec![
        // returns +10%, −10%, +21.2121%, −1.6667%; monthly
        ReportCase {
            name: "up-and-down",
            curve: vec![100.0, 110.0, 99.0, 120.0, 118.0],
            trades: vec![trade(0.1), trade(-0.05)],
            rf: 0.0,
            periods_per_year: 12.0,
            expect: PerformanceReport {
                return_pct: 18.0,
                return_ann_pct: 64.30319999999998,
                vol_ann_pct: 40.88614676446264,
                sharpe: 1.4341376793014182,
                sortino: 3.339310403238338,
                calmar: 6.4303199999999965,
                win_rate_pct: 50.0,
                n_trades: 2,
                max_drawdown_pct: 10.0,
            },
        },
        ReportCase {
            name: "flat",
            curve: vec![1000.0, 1000.0, 1000.0],
            trades: vec![],
            rf: 0.0,
            periods_per_year: 252.0,
            expect: PerformanceReport {
                return_pct: 0.0,
                return_ann_pct: 0.0,
                vol_ann_pct: 0.0,
                sharpe: 0.0,
                sortino: 0.0,
                calmar: 0.0,
                win_rate_pct: 0.0,
                n_trades: 0,
                max_drawdown_pct: 0.0,
            },
        },
        // peak 60 then 30: 50% drawdown; risk-free 0.1% per period
        ReportCase {
            name: "crash",
            curve: vec![50.0, 45.0, 40.0, 48.0, 60.0, 30.0],
            trades: vec![trade(-0.2), trade(0.5), trade(-0.5)],
            rf: 0.001,
            periods_per_year: 12.0,
            expect: PerformanceReport {
                return_pct: -40.0,
                return_ann_pct: -70.65304805418678,
                vol_ann_pct: 93.10766368584831,
                sharpe: -0.6859442514008,
                sortino: -0.7879070498032154,
                calmar: -1.4130609610837357,
                win_rate_pct: 100.0 / 3.0,
                n_trades: 3,
                max_drawdown_pct: 50.0,
            },
        },
    ]
}

/// Largest absolute difference over the numeric report fields; `None` if `n_trades` differs.
pub fn report_diff(a: &PerformanceReport, b: &PerformanceReport) -> Option<f64> {
    if a.n_trades != b.n_trades {
        return None;
    }
    let pairs = [
        (a.return_pct, b.return_pct),
        (a.return_ann_pct, b.return_ann_pct),
        (a.vol_ann_pct, b.vol_ann_pct),
        (a.sharpe, b.sharpe),
        (a.sortino, b.sortino),
        (a.calmar, b.calmar),
        (a.win_rate_pct, b.win_rate_pct),
        (a.max_drawdown_pct, b.max_drawdown_pct),
    ];
    Some(pairs.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
