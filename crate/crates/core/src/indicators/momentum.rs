//! Momentum oscillators: MOM, ROC, RSI, CMO, STOCHRSI, the stochastic oscillator and MACD.

use super::overlap::{ema_from, sma_from};
use super::{check_len, check_period, ratio_or_zero, FeatureColumn, Result};
use crate::market_data::OhlcvSeries;

pub fn mom(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("MOM", n)?;
    check_len("MOM", n, close.len())?;
    let mut out = vec![f64::NAN; close.len()];
    for t in n..close.len() {
        out[t] = close[t] - close[t - n];
    }
    Ok(FeatureColumn::new(format!("MOM_{n}"), n, out))
}

pub fn roc(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("ROC", n)?;
    check_len("ROC", n, close.len())?;
    let mut out = vec![f64::NAN; close.len()];
    for t in n..close.len() {
        out[t] = 100.0 * (close[t] - close[t - n]) / close[t - n];
    }
    Ok(FeatureColumn::new(format!("ROC_{n}"), n, out))
}

fn gains_losses(close: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut gains = vec![0.0; close.len()];
    let mut losses = vec![0.0; close.len()];
    for t in 1..close.len() {
        let d = close[t] - close[t - 1];
        if d > 0.0 {
            gains[t] = d;
        } else {
            losses[t] = -d;
        }
    }
    (gains, losses)
}

/// Wilder-smoothed RSI; 0 when there is no movement at all.
pub(crate) fn rsi_values(close: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; close.len()];
    if n >= close.len() {
        return out;
    }
    let (gains, losses) = gains_losses(close);
    let mut avg_g = gains[1..=n].iter().sum::<f64>() / n as f64;
    let mut avg_l = losses[1..=n].iter().sum::<f64>() / n as f64;
    out[n] = 100.0 * ratio_or_zero(avg_g, avg_g + avg_l);
    let nf = n as f64;
    for t in n + 1..close.len() {
        avg_g = (avg_g * (nf - 1.0) + gains[t]) / nf;
        avg_l = (avg_l * (nf - 1.0) + losses[t]) / nf;
        out[t] = 100.0 * ratio_or_zero(avg_g, avg_g + avg_l);
    }
    out
}

pub fn rsi(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("RSI", n)?;
    check_len("RSI", n, close.len())?;
    Ok(FeatureColumn::new(format!("RSI_{n}"), n, rsi_values(close, n)))
}

/// Chande momentum over plain trailing sums of gains and losses.
pub fn cmo(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("CMO", n)?;
    check_len("CMO", n, close.len())?;
    let (gains, losses) = gains_losses(close);
    let mut out = vec![f64::NAN; close.len()];
    for t in n..close.len() {
        let g: f64 = gains[t + 1 - n..=t].iter().sum();
        let l: f64 = losses[t + 1 - n..=t].iter().sum();
        out[t] = 100.0 * ratio_or_zero(g - l, g + l);
    }
    Ok(FeatureColumn::new(format!("CMO_{n}"), n, out))
}

/// Stochastic formula applied to RSI(n) over the trailing `n` RSI values, in [0, 1].
pub fn stoch_rsi(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("STOCHRSI", n)?;
    let warm = 2 * n - 1;
    check_len("STOCHRSI", warm, close.len())?;
    let r = rsi_values(close, n);
    let mut out = vec![f64::NAN; close.len()];
    for t in warm..close.len() {
        let w = &r[t + 1 - n..=t];
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out[t] = ratio_or_zero(r[t] - lo, hi - lo);
    }
    Ok(FeatureColumn::new(format!("STOCHRSI_{n}"), warm, out))
}

/// Raw %K over `n` bars and %D = SMA(%K, d).
pub fn stochastic(
    series: &OhlcvSeries,
    n: usize,
    d: usize,
) -> Result<(FeatureColumn, FeatureColumn)> {
    check_period("STOCH", n)?;
    check_period("STOCH", d)?;
    let bars = series.bars();
    check_len("STOCH_D", n + d - 2, bars.len())?;
    let mut k = vec![f64::NAN; bars.len()];
    for t in n - 1..bars.len() {
        let w = &bars[t + 1 - n..=t];
        let hh = w.iter().map(|b| b.high).fold(f64::NEG_INFINITY, f64::max);
        let ll = w.iter().map(|b| b.low).fold(f64::INFINITY, f64::min);
        k[t] = 100.0 * ratio_or_zero(bars[t].close - ll, hh - ll);
    }
    let dv = sma_from(&k, n - 1, d);
    Ok((
        FeatureColumn::new(format!("STOCH_K_{n}_{d}"), n - 1, k),
        FeatureColumn::new(format!("STOCH_D_{n}_{d}"), n + d - 2, dv),
    ))
}

/// MACD line (fast EMA − slow EMA) and its signal EMA.
pub fn macd(
    close: &[f64],
    fast: usize,
    slow: usize,
    signal: usize,
) -> Result<(FeatureColumn, FeatureColumn)> {
    check_period("MACD", fast)?;
    check_period("MACD", signal)?;
    if fast >= slow {
        return Err(super::IndicatorError::InvalidSpec(
            "MACD: fast period must be below slow period".into(),
        ));
    }
    let sig_warm = slow + signal - 2;
    check_len("MACD_SIGNAL", sig_warm, close.len())?;
    let ef = ema_from(close, 0, fast);
    let es = ema_from(close, 0, slow);
    let line: Vec<f64> = ef.iter().zip(&es).map(|(a, b)| a - b).collect();
    let sig = ema_from(&line, slow - 1, signal);
    Ok((
        FeatureColumn::new(format!("MACD_{fast}_{slow}_{signal}"), slow - 1, line),
        FeatureColumn::new(format!("MACD_SIGNAL_{fast}_{slow}_{signal}"), sig_warm, sig),
    ))
}
