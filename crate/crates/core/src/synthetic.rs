//! Seeded synthetic market data used by tests, the acceptance suite and the bundled sample file.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market_data::{Bar, OhlcvSeries};

/// US equity market full-day closures that fall on weekdays in 2020 and 2021.
const HOLIDAYS_2020_2021: [(i32, u32, u32); 18] = [
    (2020, 1, 1),
    (2020, 1, 20),
    (2020, 2, 17),
    (2020, 4, 10),
    (2020, 5, 25),
    (2020, 7, 3),
    (2020, 9, 7),
    (2020, 11, 26),
    (2020, 12, 25),
    (2021, 1, 1),
    (2021, 1, 18),
    (2021, 2, 15),
    (2021, 4, 2),
    (2021, 5, 31),
    (2021, 7, 5),
    (2021, 9, 6),
    (2021, 11, 25),
    (2021, 12, 24),
];

/// Weekday trading dates in `[start, end)`, skipping the listed 2020–2021 market holidays.
pub fn trading_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let holidays: Vec<NaiveDate> = HOLIDAYS_2020_2021
        .iter()
        .filter_map(|&(y, m, d)| NaiveDate::from_ymd_opt(y, m, d))
        .collect();
    start
        .iter_days()
        .take_while(|d| *d < end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .filter(|d| !holidays.contains(d))
        .collect()
}

/// Consecutive calendar days starting at 2000-01-01, for series where dates are irrelevant.
pub fn calendar_days(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    start.iter_days().take(n).collect()
}

/// Builds flat bars (open = high = low = close) from a close path.
pub fn bars_from_closes(closes: &[f64], volume: f64) -> OhlcvSeries {
    let bars = calendar_days(closes.len())
        .into_iter()
        .zip(closes)
        .map(|(timestamp, &c)| Bar {
            timestamp,
            open: c,
            high: c,
            low: c,
            close: c,
            volume,
        })
        .collect();
    OhlcvSeries::new("SYNTH", bars).expect("synthetic closes must be positive")
}

/// Geometric random walk with realistic intrabar ranges and integer volumes.
pub fn random_walk_on(dates: &[NaiveDate], seed: u64, drift: f64, vol: f64) -> OhlcvSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev_close: f64 = 100.0;
    let mut bars = Vec::with_capacity(dates.len());
    for &timestamp in dates {
        let gap: f64 = rng.gen_range(-0.5..0.5) * vol;
        let open = prev_close * gap.exp();
        let shock: f64 = rng.gen_range(-1.0..1.0) * vol * 3f64.sqrt();
        let close = open * (drift + shock).exp();
        let wick_hi: f64 = rng.gen_range(0.0..1.0) * vol;
        let wick_lo: f64 = rng.gen_range(0.0..1.0) * vol;
        let high = open.max(close) * (1.0 + wick_hi);
        let low = open.min(close) * (1.0 - wick_lo);
        let volume = rng.gen_range(1_000..1_000_000) as f64;
        bars.push(Bar {
            timestamp,
            open,
            high,
            low,
            close,
            volume,
        });
        prev_close = close;
    }
    OhlcvSeries::new("SYNTH", bars).expect("random walk bars are valid")
}

/// `n` bars of a seeded random walk on consecutive calendar days.
pub fn random_walk(n: usize, seed: u64) -> OhlcvSeries {
    random_walk_on(&calendar_days(n), seed, 0.0, 0.015)
}

/// Two years of daily bars, 2020-01-01 to 2022-01-01 (505 sessions), with a mild upward drift.
pub fn two_year_daily(seed: u64) -> OhlcvSeries {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let end = NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date");
    random_walk_on(&trading_days(start, end), seed, 0.0008, 0.018)
}

/// Deterministic exponential uptrend `p_t = p0 * growth^t`.
pub fn uptrend(n: usize, p0: f64, growth: f64) -> OhlcvSeries {
    let closes: Vec<f64> = (0..n).map(|t| p0 * growth.powi(t as i32)).collect();
    bars_from_closes(&closes, 1_000.0)
}
