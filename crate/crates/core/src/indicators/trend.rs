//! Range and trend indicators: ATR, BOP, CCI, ADX, the ultimate oscillator and parabolic SAR.

use super::{check_len, check_period, ratio_or_zero, FeatureColumn, IndicatorError, Result};
use crate::market_data::{Bar, OhlcvSeries};

pub(crate) fn true_range(cur: &Bar, prev: &Bar) -> f64 {
    (cur.high - cur.low)
        .max((cur.high - prev.close).abs())
        .max((cur.low - prev.close).abs())
}

/// Wilder ATR: seeded with the mean of the first `n` true ranges, defined from bar `n`.
pub fn atr(series: &OhlcvSeries, n: usize) -> Result<FeatureColumn> {
    check_period("ATR", n)?;
    let bars = series.bars();
    check_len("ATR", n, bars.len())?;
    let tr: Vec<f64> = (1..bars.len())
        .map(|t| true_range(&bars[t], &bars[t - 1]))
        .collect();
    let mut out = vec![f64::NAN; bars.len()];
    let nf = n as f64;
    let mut prev = tr[..n].iter().sum::<f64>() / nf;
    out[n] = prev;
    for t in n + 1..bars.len() {
        prev = (prev * (nf - 1.0) + tr[t - 1]) / nf;
        out[t] = prev;
    }
    Ok(FeatureColumn::new(format!("ATR_{n}"), n, out))
}

/// (close − open) / (high − low), 0 on zero-range bars.
pub fn bop(series: &OhlcvSeries) -> FeatureColumn {
    let out = series
        .bars()
        .iter()
        .map(|b| ratio_or_zero(b.close - b.open, b.high - b.low))
        .collect();
    FeatureColumn::new("BOP", 0, out)
}

pub fn cci(series: &OhlcvSeries, n: usize) -> Result<FeatureColumn> {
    check_period("CCI", n)?;
    let bars = series.bars();
    check_len("CCI", n - 1, bars.len())?;
    let tp: Vec<f64> = bars.iter().map(|b| b.typical_price()).collect();
    let mut out = vec![f64::NAN; bars.len()];
    for t in n - 1..bars.len() {
        let w = &tp[t + 1 - n..=t];
        let mean = w.iter().sum::<f64>() / n as f64;
        let mad = w.iter().map(|v| (v - mean).abs()).sum::<f64>() / n as f64;
        out[t] = ratio_or_zero(tp[t] - mean, 0.015 * mad);
    }
    Ok(FeatureColumn::new(format!("CCI_{n}"), n - 1, out))
}

/// Average directional index with Wilder smoothing throughout; defined from bar `2n − 1`.
pub fn adx(series: &OhlcvSeries, n: usize) -> Result<FeatureColumn> {
    check_period("ADX", n)?;
    let bars = series.bars();
    let warm = 2 * n - 1;
    check_len("ADX", warm, bars.len())?;
    let len = bars.len();
    let mut plus_dm = vec![0.0; len];
    let mut minus_dm = vec![0.0; len];
    let mut tr = vec![0.0; len];
    for t in 1..len {
        let up = bars[t].high - bars[t - 1].high;
        let down = bars[t - 1].low - bars[t].low;
        if up > down && up > 0.0 {
            plus_dm[t] = up;
        }
        if down > up && down > 0.0 {
            minus_dm[t] = down;
        }
        tr[t] = true_range(&bars[t], &bars[t - 1]);
    }
    let nf = n as f64;
    let mut s_plus: f64 = plus_dm[1..=n].iter().sum();
    let mut s_minus: f64 = minus_dm[1..=n].iter().sum();
    let mut s_tr: f64 = tr[1..=n].iter().sum();
    let mut dx = vec![f64::NAN; len];
    for t in n..len {
        if t > n {
            s_plus = s_plus - s_plus / nf + plus_dm[t];
            s_minus = s_minus - s_minus / nf + minus_dm[t];
            s_tr = s_tr - s_tr / nf + tr[t];
        }
        let di_p = 100.0 * ratio_or_zero(s_plus, s_tr);
        let di_m = 100.0 * ratio_or_zero(s_minus, s_tr);
        dx[t] = 100.0 * ratio_or_zero((di_p - di_m).abs(), di_p + di_m);
    }
    let mut out = vec![f64::NAN; len];
    let mut prev = dx[n..=warm].iter().sum::<f64>() / nf;
    out[warm] = prev;
    for t in warm + 1..len {
        prev = (prev * (nf - 1.0) + dx[t]) / nf;
        out[t] = prev;
    }
    Ok(FeatureColumn::new(format!("ADX_{n}"), warm, out))
}

/// Ultimate oscillator: (4·A_short + 2·A_medium + A_long) / 7 × 100, where each A is
/// buying pressure over true range summed across its window.
pub fn ultimate_oscillator(
    series: &OhlcvSeries,
    short: usize,
    medium: usize,
    long: usize,
) -> Result<FeatureColumn> {
    if short == 0 || short >= medium || medium >= long {
        return Err(IndicatorError::InvalidSpec(
            "UO: periods must be strictly increasing and >= 1".into(),
        ));
    }
    let bars = series.bars();
    check_len("UO", long, bars.len())?;
    let len = bars.len();
    let mut bp = vec![0.0; len];
    let mut tr = vec![0.0; len];
    for t in 1..len {
        let pc = bars[t - 1].close;
        let lo = bars[t].low.min(pc);
        bp[t] = bars[t].close - lo;
        tr[t] = bars[t].high.max(pc) - lo;
    }
    let avg = |t: usize, k: usize| {
        let b: f64 = bp[t + 1 - k..=t].iter().sum();
        let r: f64 = tr[t + 1 - k..=t].iter().sum();
        ratio_or_zero(b, r)
    };
    let mut out = vec![f64::NAN; len];
    for t in long..len {
        out[t] = 100.0 * (4.0 * avg(t, short) + 2.0 * avg(t, medium) + avg(t, long)) / 7.0;
    }
    Ok(FeatureColumn::new(
        format!("UO_{short}_{medium}_{long}"),
        long,
        out,
    ))
}

/// Parabolic stop-and-reverse, defined from bar 1.
///
/// Initial direction is short only when bar 1's down-move exceeds its up-move (and is
/// positive). A long starts at `low[0]` with extreme point `high[1]`; a short at `high[0]`
/// with extreme point `low[1]`. Each later bar moves the stop toward the extreme point by the
/// acceleration factor, clamps it behind the previous two bars, and reverses when price
/// crosses it, placing the new stop at the old extreme point.
pub fn sar(series: &OhlcvSeries, start: f64, step: f64, max: f64) -> Result<FeatureColumn> {
    if !(start > 0.0 && step >= 0.0 && max >= start) {
        return Err(IndicatorError::InvalidSpec(
            "SAR: need 0 < start <= max, step >= 0".into(),
        ));
    }
    let bars = series.bars();
    let name = format!("SAR_{start}_{step}_{max}");
    check_len(&name, 1, bars.len())?;
    let mut out = vec![f64::NAN; bars.len()];

    let up = bars[1].high - bars[0].high;
    let down = bars[0].low - bars[1].low;
    let mut long = !(down > 0.0 && down > up);
    let (mut sar, mut ep) = if long {
        (bars[0].low, bars[1].high)
    } else {
        (bars[0].high, bars[1].low)
    };
    let mut af = start;
    out[1] = sar;

    for t in 2..bars.len() {
        let cand = sar + af * (ep - sar);
        let b = &bars[t];
        if long {
            let cand = cand.min(bars[t - 1].low).min(bars[t - 2].low);
            if b.low < cand {
                long = false;
                sar = ep;
                ep = b.low;
                af = start;
            } else {
                sar = cand;
                if b.high > ep {
                    ep = b.high;
                    af = (af + step).min(max);
                }
            }
        } else {
            let cand = cand.max(bars[t - 1].high).max(bars[t - 2].high);
            if b.high > cand {
                long = true;
                sar = ep;
                ep = b.high;
                af = start;
            } else {
                sar = cand;
                if b.low < ep {
                    ep = b.low;
                    af = (af + step).min(max);
                }
            }
        }
        out[t] = sar;
    }
    Ok(FeatureColumn::new(name, 1, out))
}
