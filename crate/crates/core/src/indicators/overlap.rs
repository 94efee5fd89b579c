//! Moving averages and their compositions.

use super::{check_len, check_period, FeatureColumn, Result};

/// EMA of `src[start..]`, seeded with the SMA of its first `n` values.
/// Entries before `start + n - 1` are NaN.
pub(crate) fn ema_from(src: &[f64], start: usize, n: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; src.len()];
    let first = start + n - 1;
    if first >= src.len() {
        return out;
    }
    let k = 2.0 / (n as f64 + 1.0);
    let seed = src[start..=first].iter().sum::<f64>() / n as f64;
    out[first] = seed;
    let mut prev = seed;
    for t in first + 1..src.len() {
        prev += k * (src[t] - prev);
        out[t] = prev;
    }
    out
}

/// Trailing mean of `src[start..]` over `n` values.
pub(crate) fn sma_from(src: &[f64], start: usize, n: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; src.len()];
    for t in (start + n - 1)..src.len() {
        out[t] = src[t + 1 - n..=t].iter().sum::<f64>() / n as f64;
    }
    out
}

pub fn ema(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("EMA", n)?;
    check_len("EMA", n - 1, close.len())?;
    Ok(FeatureColumn::new(format!("EMA_{n}"), n - 1, ema_from(close, 0, n)))
}

pub fn sma(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("SMA", n)?;
    check_len("SMA", n - 1, close.len())?;
    Ok(FeatureColumn::new(format!("SMA_{n}"), n - 1, sma_from(close, 0, n)))
}

/// Linearly weighted mean, newest value weighted `n`.
pub fn wma(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("WMA", n)?;
    check_len("WMA", n - 1, close.len())?;
    let denom = (n * (n + 1)) as f64 / 2.0;
    let mut out = vec![f64::NAN; close.len()];
    for t in n - 1..close.len() {
        let window = &close[t + 1 - n..=t];
        let num: f64 = window
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        out[t] = num / denom;
    }
    Ok(FeatureColumn::new(format!("WMA_{n}"), n - 1, out))
}

/// SMA of an SMA: first window `ceil((n+1)/2)`, second `floor((n+1)/2)`.
pub fn trima(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("TRIMA", n)?;
    check_len("TRIMA", n - 1, close.len())?;
    let first = (n + 2) / 2;
    let second = (n + 1) / 2;
    let inner = sma_from(close, 0, first);
    let out = sma_from(&inner, first - 1, second);
    Ok(FeatureColumn::new(format!("TRIMA_{n}"), n - 1, out))
}

/// 2·EMA − EMA(EMA)
pub fn dema(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("DEMA", n)?;
    let warm = 2 * (n - 1);
    check_len("DEMA", warm, close.len())?;
    let e1 = ema_from(close, 0, n);
    let e2 = ema_from(&e1, n - 1, n);
    let out = e1.iter().zip(&e2).map(|(a, b)| 2.0 * a - b).collect();
    Ok(FeatureColumn::new(format!("DEMA_{n}"), warm, out))
}

/// 3·EMA − 3·EMA(EMA) + EMA(EMA(EMA))
pub fn tema(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("TEMA", n)?;
    let warm = 3 * (n - 1);
    check_len("TEMA", warm, close.len())?;
    let e1 = ema_from(close, 0, n);
    let e2 = ema_from(&e1, n - 1, n);
    let e3 = ema_from(&e2, 2 * (n - 1), n);
    let out = (0..close.len())
        .map(|t| 3.0 * e1[t] - 3.0 * e2[t] + e3[t])
        .collect();
    Ok(FeatureColumn::new(format!("TEMA_{n}"), warm, out))
}

/// One-period percent rate of change of the triple-smoothed EMA.
pub fn trix(close: &[f64], n: usize) -> Result<FeatureColumn> {
    check_period("TRIX", n)?;
    let warm = 3 * (n - 1) + 1;
    check_len("TRIX", warm, close.len())?;
    let e1 = ema_from(close, 0, n);
    let e2 = ema_from(&e1, n - 1, n);
    let e3 = ema_from(&e2, 2 * (n - 1), n);
    let mut out = vec![f64::NAN; close.len()];
    for t in warm..close.len() {
        out[t] = 100.0 * super::ratio_or_zero(e3[t] - e3[t - 1], e3[t - 1]);
    }
    Ok(FeatureColumn::new(format!("TRIX_{n}"), warm, out))
}
