use super::{check_len, check_period, ratio_or_zero, FeatureColumn, Result};
use crate::market_data::OhlcvSeries;

/// On-balance volume starting at 0 on the first bar.
pub fn obv(series: &OhlcvSeries) -> FeatureColumn {
    let bars = series.bars();
    let mut out = vec![0.0; bars.len()];
    for t in 1..bars.len() {
        let (c, pc) = (bars[t].close, bars[t - 1].close);
        out[t] = if c > pc {
            out[t - 1] + bars[t].volume
        } else if c < pc {
            out[t - 1] - bars[t].volume
        } else {
            out[t - 1]
        };
    }
    FeatureColumn::new("OBV", 0, out)
}

/// Money flow index over `n` typical-price changes. 0 when no money flowed either way.
pub fn mfi(series: &OhlcvSeries, n: usize) -> Result<FeatureColumn> {
    check_period("MFI", n)?;
    let bars = series.bars();
    check_len("MFI", n, bars.len())?;
    let tp: Vec<f64> = bars.iter().map(|b| b.typical_price()).collect();
    let mut pos = vec![0.0; bars.len()];
    let mut neg = vec![0.0; bars.len()];
    for t in 1..bars.len() {
        let flow = tp[t] * bars[t].volume;
        if tp[t] > tp[t - 1] {
            pos[t] = flow;
        } else if tp[t] < tp[t - 1] {
            neg[t] = flow;
        }
    }
    let mut out = vec![f64::NAN; bars.len()];
    for t in n..bars.len() {
        let p: f64 = pos[t + 1 - n..=t].iter().sum();
        let m: f64 = neg[t + 1 - n..=t].iter().sum();
        out[t] = 100.0 * ratio_or_zero(p, p + m);
    }
    Ok(FeatureColumn::new(format!("MFI_{n}"), n, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn obv_small_case() {
        let s = synthetic::bars_from_closes(&[1.0, 2.0, 2.0, 1.0], 10.0);
        assert_eq!(obv(&s).values, vec![0.0, 10.0, 10.0, 0.0]);
        let flat = synthetic::bars_from_closes(&[3.0; 6], 10.0);
        assert!(obv(&flat).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mfi_one_sided() {
        let up = synthetic::uptrend(30, 10.0, 1.01);
        assert!(mfi(&up, 14).unwrap().defined().iter().all(|&v| v == 100.0));
        let down = synthetic::uptrend(30, 10.0, 0.99);
        assert!(mfi(&down, 14).unwrap().defined().iter().all(|&v| v == 0.0));
    }
}
