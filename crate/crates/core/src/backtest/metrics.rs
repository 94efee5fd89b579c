use super::{BacktestError, Result, Trade};

fn need(n: usize, got: usize) -> Result<()> {
    if got < n {
        return Err(BacktestError::TooFewSamples { needed: n, got });
    }
    Ok(())
}

/// Simple returns between consecutive equity values.
pub fn period_returns(curve: &[f64]) -> Vec<f64> {
    curve.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Annualized `mean(r − rf) / σ(r)` with population σ; 0 when σ is 0.
pub fn sharpe(returns: &[f64], rf: f64, periods_per_year: f64) -> Result<f64> {
    need(2, returns.len())?;
    let excess: Vec<f64> = returns.iter().map(|r| r - rf).collect();
    let sd = population_std(&excess);
    if sd == 0.0 {
        return Ok(0.0);
    }
    Ok(mean(&excess) * periods_per_year / (sd * periods_per_year.sqrt()))
}

/// Like [`sharpe`] but divides by the downside deviation `sqrt(mean(min(r − rf, 0)²))`.
pub fn sortino(returns: &[f64], rf: f64, periods_per_year: f64) -> Result<f64> {
    need(2, returns.len())?;
    let excess: Vec<f64> = returns.iter().map(|r| r - rf).collect();
    let dd = (excess.iter().map(|e| e.min(0.0).powi(2)).sum::<f64>() / excess.len() as f64).sqrt();
    if dd == 0.0 {
        return Ok(0.0);
    }
    Ok(mean(&excess) * periods_per_year / (dd * periods_per_year.sqrt()))
}

/// Largest peak-to-trough loss as a fraction of the peak.
pub fn max_drawdown(curve: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &e in curve {
        peak = peak.max(e);
        worst = worst.max((peak - e) / peak);
    }
    worst
}

/// `annual_return / max_drawdown` (both fractions); 0 when there is no drawdown.
pub fn calmar(annual_return: f64, max_drawdown: f64) -> f64 {
    if max_drawdown > 0.0 {
        annual_return / max_drawdown
    } else {
        0.0
    }
}

/// Percent of trades with strictly positive return; `None` without trades.
pub fn win_rate(trades: &[Trade]) -> Option<f64> {
    if trades.is_empty() {
        return None;
    }
    let wins = trades.iter().filter(|t| t.ret > 0.0).count();
    Some(100.0 * wins as f64 / trades.len() as f64)
}

/// Geometric annualization of a total return over `n_periods`, in percent.
pub fn annualize(total_return: f64, n_periods: usize, periods_per_year: f64) -> Result<f64> {
    need(1, n_periods)?;
    Ok(((1.0 + total_return).powf(periods_per_year / n_periods as f64) - 1.0) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharpe_examples() {
        let s = sharpe(&[0.01, 0.02, 0.03], 0.0, 1.0).unwrap();
        assert!((s - 0.02 / (2.0f64 / 3.0).sqrt() / 0.01).abs() < 1e-12);
        assert!((s - 2.449).abs() < 1e-3);
        assert_eq!(sharpe(&[0.0, 0.0], 0.0, 252.0).unwrap(), 0.0);
        assert_eq!(sharpe(&[0.001, 0.001, 0.001], 0.001, 252.0).unwrap(), 0.0);
        assert!(matches!(sharpe(&[0.1], 0.0, 1.0), Err(BacktestError::TooFewSamples { .. })));
    }

    #[test]
    fn drawdown_and_calmar() {
        assert!((max_drawdown(&[1.0, 1.2, 0.9, 1.1]) - 0.25).abs() < 1e-15);
        assert_eq!(max_drawdown(&[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(calmar(0.5, 0.0), 0.0);
        assert_eq!(calmar(0.5, 0.25), 2.0);
    }

    #[test]
    fn sortino_uses_downside_only() {
        // excess [0.02, −0.01]: mean 0.005, downside sqrt(0.0001/2)
        let s = sortino(&[0.02, -0.01], 0.0, 1.0).unwrap();
        assert!((s - 0.005 / (0.0001f64 / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(sortino(&[0.01, 0.02], 0.0, 252.0).unwrap(), 0.0);
    }

    #[test]
    fn annualization() {
        assert!((annualize(1.0, 252, 252.0).unwrap() - 100.0).abs() < 1e-12);
        assert!((annualize(0.21, 504, 252.0).unwrap() - 10.0).abs() < 1e-9);
    }
}
