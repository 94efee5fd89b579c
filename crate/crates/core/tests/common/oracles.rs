//! Direct-formula reference implementations. Nothing here carries incremental state between
//! output values: every value is recomputed from the raw inputs, so recurrences are checked
//! against their closed forms.
#![allow(dead_code)]

use quantrl::market_data::{Bar, OhlcvSeries};

pub type Col = Vec<Option<f64>>;

fn div0(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Closed form of `s_t = s_{t-1} + alpha * (x_t - s_{t-1})` seeded with `seed` at `seed_idx`.
fn smoothed(x: &[f64], seed_idx: usize, seed: f64, alpha: f64, t: usize) -> f64 {
    let decay = 1.0 - alpha;
    let mut v = decay.powi((t - seed_idx) as i32) * seed;
    for j in seed_idx + 1..=t {
        v += alpha * decay.powi((t - j) as i32) * x[j];
    }
    v
}

/// Closed form of the Wilder running sum `S_t = S_{t-1} - S_{t-1}/n + x_t`.
fn wilder_sum(x: &[f64], seed_idx: usize, seed: f64, n: usize, t: usize) -> f64 {
    let decay = 1.0 - 1.0 / n as f64;
    let mut v = decay.powi((t - seed_idx) as i32) * seed;
    for j in seed_idx + 1..=t {
        v += decay.powi((t - j) as i32) * x[j];
    }
    v
}

/// EMA over a column whose first defined index is `start`.
pub fn ema_col(x: &Col, n: usize) -> Col {
    let start = match x.iter().position(|v| v.is_some()) {
        Some(s) => s,
        None => return vec![None; x.len()],
    };
    let raw: Vec<f64> = x.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let first = start + n - 1;
    let alpha = 2.0 / (n as f64 + 1.0);
    (0..x.len())
        .map(|t| {
            if t < first {
                None
            } else {
                let seed = mean(&raw[start..=first]);
                Some(smoothed(&raw, first, seed, alpha, t))
            }
        })
        .collect()
}

pub fn defined(x: &[f64]) -> Col {
    x.iter().map(|&v| Some(v)).collect()
}

pub fn sma(x: &[f64], n: usize) -> Col {
    (0..x.len())
        .map(|t| (t + 1 >= n).then(|| mean(&x[t + 1 - n..=t])))
        .collect()
}

pub fn wma(x: &[f64], n: usize) -> Col {
    (0..x.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                let mut num = 0.0;
                let mut den = 0.0;
                for k in 0..n {
                    let w = (n - k) as f64;
                    num += w * x[t - k];
                    den += w;
                }
                num / den
            })
        })
        .collect()
}

/// Triangular weights: the convolution of two boxcars of widths ceil((n+1)/2), floor((n+1)/2).
pub fn trima(x: &[f64], n: usize) -> Col {
    let a = (n + 2) / 2;
    let b = (n + 1) / 2;
    let weights: Vec<f64> = (0..n)
        .map(|k| {
            (0..a)
                .filter(|&i| k >= i && k - i < b)
                .count() as f64
                / (a * b) as f64
        })
        .collect();
    (0..x.len())
        .map(|t| (t + 1 >= n).then(|| (0..n).map(|k| weights[k] * x[t - k]).sum()))
        .collect()
}

pub fn dema(x: &[f64], n: usize) -> Col {
    let e1 = ema_col(&defined(x), n);
    let e2 = ema_col(&e1, n);
    e1.iter()
        .zip(&e2)
        .map(|(a, b)| Some(2.0 * (*a)? - (*b)?))
        .collect()
}

pub fn tema(x: &[f64], n: usize) -> Col {
    let e1 = ema_col(&defined(x), n);
    let e2 = ema_col(&e1, n);
    let e3 = ema_col(&e2, n);
    (0..x.len())
        .map(|t| Some(3.0 * e1[t]? - 3.0 * e2[t]? + e3[t]?))
        .collect()
}

pub fn trix(x: &[f64], n: usize) -> Col {
    let e3 = ema_col(&ema_col(&ema_col(&defined(x), n), n), n);
    (0..x.len())
        .map(|t| {
            if t == 0 {
                return None;
            }
            let (cur, prev) = (e3[t]?, e3[t - 1]?);
            Some(100.0 * div0(cur - prev, prev))
        })
        .collect()
}

pub fn mom(x: &[f64], n: usize) -> Col {
    (0..x.len()).map(|t| (t >= n).then(|| x[t] - x[t - n])).collect()
}

pub fn roc(x: &[f64], n: usize) -> Col {
    (0..x.len())
        .map(|t| (t >= n).then(|| 100.0 * (x[t] / x[t - n] - 1.0)))
        .collect()
}

fn gains(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut g = vec![0.0; x.len()];
    let mut l = vec![0.0; x.len()];
    for t in 1..x.len() {
        g[t] = (x[t] - x[t - 1]).max(0.0);
        l[t] = (x[t - 1] - x[t]).max(0.0);
    }
    (g, l)
}

pub fn rsi(x: &[f64], n: usize) -> Col {
    let (g, l) = gains(x);
    let alpha = 1.0 / n as f64;
    (0..x.len())
        .map(|t| {
            (t >= n).then(|| {
                let ag = smoothed(&g, n, mean(&g[1..=n]), alpha, t);
                let al = smoothed(&l, n, mean(&l[1..=n]), alpha, t);
                100.0 * div0(ag, ag + al)
            })
        })
        .collect()
}

pub fn cmo(x: &[f64], n: usize) -> Col {
    (0..x.len())
        .map(|t| {
            (t >= n).then(|| {
                let mut up = 0.0;
                let mut dn = 0.0;
                for j in t + 1 - n..=t {
                    let d = x[j] - x[j - 1];
                    if d > 0.0 {
                        up += d;
                    } else {
                        dn -= d;
                    }
                }
                100.0 * div0(up - dn, up + dn)
            })
        })
        .collect()
}

pub fn stoch_rsi(x: &[f64], n: usize) -> Col {
    let r = rsi(x, n);
    (0..x.len())
        .map(|t| {
            if t + 1 < n {
                return None;
            }
            let w: Option<Vec<f64>> = r[t + 1 - n..=t].iter().copied().collect();
            let w = w?;
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(div0(r[t]? - lo, hi - lo))
        })
        .collect()
}

pub fn stoch(bars: &[Bar], n: usize, d: usize) -> (Col, Col) {
    let k: Col = (0..bars.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                let w = &bars[t + 1 - n..=t];
                let hh = w.iter().map(|b| b.high).fold(f64::NEG_INFINITY, f64::max);
                let ll = w.iter().map(|b| b.low).fold(f64::INFINITY, f64::min);
                100.0 * div0(bars[t].close - ll, hh - ll)
            })
        })
        .collect();
    let dcol = (0..bars.len())
        .map(|t| {
            if t + 1 < d {
                return None;
            }
            let w: Option<Vec<f64>> = k[t + 1 - d..=t].iter().copied().collect();
            Some(mean(&w?))
        })
        .collect();
    (k, dcol)
}

pub fn macd(x: &[f64], fast: usize, slow: usize, signal: usize) -> (Col, Col) {
    let ef = ema_col(&defined(x), fast);
    let es = ema_col(&defined(x), slow);
    let line: Col = ef.iter().zip(&es).map(|(a, b)| Some((*a)? - (*b)?)).collect();
    let sig = ema_col(&line, signal);
    (line, sig)
}

pub fn obv(bars: &[Bar]) -> Col {
    (0..bars.len())
        .map(|t| {
            Some(
                (1..=t)
                    .map(|j| {
                        let d = bars[j].close - bars[j - 1].close;
                        if d > 0.0 {
                            bars[j].volume
                        } else if d < 0.0 {
                            -bars[j].volume
                        } else {
                            0.0
                        }
                    })
                    .sum(),
            )
        })
        .collect()
}

fn tp(b: &Bar) -> f64 {
    (b.high + b.low + b.close) / 3.0
}

pub fn mfi(bars: &[Bar], n: usize) -> Col {
    (0..bars.len())
        .map(|t| {
            (t >= n).then(|| {
                let mut pos = 0.0;
                let mut neg = 0.0;
                for j in t + 1 - n..=t {
                    let flow = tp(&bars[j]) * bars[j].volume;
                    if tp(&bars[j]) > tp(&bars[j - 1]) {
                        pos += flow;
                    } else if tp(&bars[j]) < tp(&bars[j - 1]) {
                        neg += flow;
                    }
                }
                100.0 * div0(pos, pos + neg)
            })
        })
        .collect()
}

pub fn cci(bars: &[Bar], n: usize) -> Col {
    (0..bars.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                let w: Vec<f64> = bars[t + 1 - n..=t].iter().map(tp).collect();
                let m = mean(&w);
                let mad = w.iter().map(|v| (v - m).abs()).sum::<f64>() / n as f64;
                div0(tp(&bars[t]) - m, 0.015 * mad)
            })
        })
        .collect()
}

fn tr(bars: &[Bar], t: usize) -> f64 {
    let (b, pc) = (&bars[t], bars[t - 1].close);
    [b.high - b.low, (b.high - pc).abs(), (b.low - pc).abs()]
        .into_iter()
        .fold(0.0, f64::max)
}

pub fn atr(bars: &[Bar], n: usize) -> Col {
    let trs: Vec<f64> = (0..bars.len())
        .map(|t| if t == 0 { 0.0 } else { tr(bars, t) })
        .collect();
    (0..bars.len())
        .map(|t| (t >= n).then(|| smoothed(&trs, n, mean(&trs[1..=n]), 1.0 / n as f64, t)))
        .collect()
}

pub fn adx(bars: &[Bar], n: usize) -> Col {
    let len = bars.len();
    let mut pdm = vec![0.0; len];
    let mut mdm = vec![0.0; len];
    let mut trs = vec![0.0; len];
    for t in 1..len {
        let up = bars[t].high - bars[t - 1].high;
        let dn = bars[t - 1].low - bars[t].low;
        pdm[t] = if up > dn && up > 0.0 { up } else { 0.0 };
        mdm[t] = if dn > up && dn > 0.0 { dn } else { 0.0 };
        trs[t] = tr(bars, t);
    }
    let dx = |t: usize| {
        let sp = wilder_sum(&pdm, n, pdm[1..=n].iter().sum(), n, t);
        let sm = wilder_sum(&mdm, n, mdm[1..=n].iter().sum(), n, t);
        let st = wilder_sum(&trs, n, trs[1..=n].iter().sum(), n, t);
        let dp = 100.0 * div0(sp, st);
        let dm = 100.0 * div0(sm, st);
        100.0 * div0((dp - dm).abs(), dp + dm)
    };
    let dxs: Vec<f64> = (0..len).map(|t| if t >= n { dx(t) } else { 0.0 }).collect();
    let first = 2 * n - 1;
    (0..len)
        .map(|t| (t >= first).then(|| smoothed(&dxs, first, mean(&dxs[n..=first]), 1.0 / n as f64, t)))
        .collect()
}

pub fn uo(bars: &[Bar], p1: usize, p2: usize, p3: usize) -> Col {
    let avg = |t: usize, k: usize| {
        let mut bp = 0.0;
        let mut r = 0.0;
        for j in t + 1 - k..=t {
            let pc = bars[j - 1].close;
            let lo = bars[j].low.min(pc);
            bp += bars[j].close - lo;
            r += bars[j].high.max(pc) - lo;
        }
        div0(bp, r)
    };
    (0..bars.len())
        .map(|t| (t >= p3).then(|| 100.0 * (4.0 * avg(t, p1) + 2.0 * avg(t, p2) + avg(t, p3)) / 7.0))
        .collect()
}

pub fn bop(bars: &[Bar]) -> Col {
    bars.iter()
        .map(|b| Some(div0(b.close - b.open, b.high - b.low)))
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Trend {
    Up,
    Down,
}

/// Parabolic SAR written as an explicit state machine over (trend, stop, extreme, factor).
pub fn sar(bars: &[Bar], start: f64, step: f64, max: f64) -> Col {
    let mut out = vec![None; bars.len()];
    let rise = bars[1].high - bars[0].high;
    let fall = bars[0].low - bars[1].low;
    let mut trend = if fall > 0.0 && fall > rise { Trend::Down } else { Trend::Up };
    let mut stop = match trend {
        Trend::Up => bars[0].low,
        Trend::Down => bars[0].high,
    };
    let mut extreme = match trend {
        Trend::Up => bars[1].high,
        Trend::Down => bars[1].low,
    };
    let mut factor = start;
    out[1] = Some(stop);
    for t in 2..bars.len() {
        let mut next = stop + factor * (extreme - stop);
        match trend {
            Trend::Up => {
                next = [next, bars[t - 1].low, bars[t - 2].low].into_iter().fold(f64::INFINITY, f64::min);
                if bars[t].low < next {
                    trend = Trend::Down;
                    next = extreme;
                    extreme = bars[t].low;
                    factor = start;
                } else if bars[t].high > extreme {
                    extreme = bars[t].high;
                    factor = (factor + step).min(max);
                }
            }
            Trend::Down => {
                next = [next, bars[t - 1].high, bars[t - 2].high].into_iter().fold(f64::NEG_INFINITY, f64::max);
                if bars[t].high > next {
                    trend = Trend::Up;
                    next = extreme;
                    extreme = bars[t].high;
                    factor = start;
                } else if bars[t].low < extreme {
                    extreme = bars[t].low;
                    factor = (factor + step).min(max);
                }
            }
        }
        stop = next;
        out[t] = Some(stop);
    }
    out
}

/// Oracle column for a spec name as produced by the default parameterizations.
pub fn by_name(series: &OhlcvSeries, name: &str) -> Col {
    let c = series.closes();
    let b = series.bars();
    let parts: Vec<&str> = name.split('_').collect();
    let num = |i: usize| parts[i].parse::<usize>().unwrap();
    match parts[0] {
        "SMA" => sma(&c, num(1)),
        "WMA" => wma(&c, num(1)),
        "TRIMA" => trima(&c, num(1)),
        "DEMA" => dema(&c, num(1)),
        "TEMA" => tema(&c, num(1)),
        "TRIX" => trix(&c, num(1)),
        "MOM" => mom(&c, num(1)),
        "ROC" => roc(&c, num(1)),
        "RSI" => rsi(&c, num(1)),
        "CMO" => cmo(&c, num(1)),
        "STOCHRSI" => stoch_rsi(&c, num(1)),
        "STOCH" if parts[1] == "K" => stoch(b, num(2), num(3)).0,
        "STOCH" => stoch(b, num(2), num(3)).1,
        "MACD" if parts[1] == "SIGNAL" => macd(&c, num(2), num(3), num(4)).1,
        "MACD" => macd(&c, num(1), num(2), num(3)).0,
        "OBV" => obv(b),
        "MFI" => mfi(b, num(1)),
        "CCI" => cci(b, num(1)),
        "ADX" => adx(b, num(1)),
        "ATR" => atr(b, num(1)),
        "UO" => uo(b, num(1), num(2), num(3)),
        "SAR" => {
            let f = |i: usize| parts[i].parse::<f64>().unwrap();
            sar(b, f(1), f(2), f(3))
        }
        "BOP" => bop(b),
        other => panic!("no oracle for {other}"),
    }
}
