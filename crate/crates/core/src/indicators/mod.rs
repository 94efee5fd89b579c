//! Technical-indicator feature columns.
//!
//! Every column has the same length as its source series. The leading warm-up region, where
//! there is not yet enough history, holds NaN and is reported through [`FeatureColumn::warmup`];
//! values are never back-filled. Degenerate denominators (flat windows, `high == low`) yield 0.

mod momentum;
mod overlap;
mod trend;
mod volume;

use std::collections::HashSet;
use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::OhlcvSeries;

pub use momentum::{cmo, macd, mom, roc, rsi, stoch_rsi, stochastic};
pub use overlap::{dema, ema, sma, tema, trima, trix, wma};
pub use trend::{adx, atr, bop, cci, sar, ultimate_oscillator};
pub use volume::{mfi, obv};

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("{name}: needs {needed} bars before the first value, series has {available}")]
    PeriodTooLong {
        name: String,
        needed: usize,
        available: usize,
    },
    #[error("invalid indicator parameters: {0}")]
    InvalidSpec(String),
    #[error("duplicate feature column name `{0}`")]
    DuplicateName(String),
    #[error("no indicator specs given")]
    EmptySpecs,
    #[error("indicator {spec}: {source}")]
    Spec {
        spec: String,
        #[source]
        source: Box<IndicatorError>,
    },
    #[error("column length {found} does not match series length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IndicatorError>;

/// One indicator column. `values[..warmup]` is undefined (NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub warmup: usize,
    pub values: Vec<f64>,
}

impl FeatureColumn {
    pub(crate) fn new(name: impl Into<String>, warmup: usize, values: Vec<f64>) -> Self {
        debug_assert!(values[warmup.min(values.len())..].iter().all(|v| v.is_finite()));
        Self {
            name: name.into(),
            warmup,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        if i < self.warmup {
            None
        } else {
            self.values.get(i).copied()
        }
    }

    /// The defined suffix.
    pub fn defined(&self) -> &[f64] {
        &self.values[self.warmup..]
    }
}

/// Which scaling family a column belongs to; used for per-family normalization overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorFamily {
    /// Strictly positive, price-scaled columns (moving averages, SAR).
    Price,
    Momentum,
    Volume,
    Volatility,
}

fn p14() -> usize {
    14
}
fn p10() -> usize {
    10
}
fn p30() -> usize {
    30
}
fn p3() -> usize {
    3
}
fn fast12() -> usize {
    12
}
fn slow26() -> usize {
    26
}
fn signal9() -> usize {
    9
}
fn uo7() -> usize {
    7
}
fn uo28() -> usize {
    28
}
fn sar_start() -> f64 {
    0.02
}
fn sar_max() -> f64 {
    0.2
}

/// An indicator and its parameters. Serialized as `{"kind": "RSI", "period": 14}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum IndicatorSpec {
    #[serde(rename = "SMA")]
    Sma {
        #[serde(default = "p30")]
        period: usize,
    },
    #[serde(rename = "WMA")]
    Wma {
        #[serde(default = "p30")]
        period: usize,
    },
    #[serde(rename = "TRIMA")]
    Trima {
        #[serde(default = "p30")]
        period: usize,
    },
    #[serde(rename = "DEMA")]
    Dema {
        #[serde(default = "p30")]
        period: usize,
    },
    #[serde(rename = "TEMA")]
    Tema {
        #[serde(default = "p30")]
        period: usize,
    },
    #[serde(rename = "TRIX")]
    Trix {
        #[serde(default = "p10")]
        period: usize,
    },
    #[serde(rename = "MOM")]
    Mom {
        #[serde(default = "p10")]
        period: usize,
    },
    #[serde(rename = "ROC")]
    Roc {
        #[serde(default = "p10")]
        period: usize,
    },
    #[serde(rename = "RSI")]
    Rsi {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "CMO")]
    Cmo {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "STOCHRSI")]
    StochRsi {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "STOCH_K")]
    StochK {
        #[serde(default = "p14")]
        period: usize,
        #[serde(default = "p3")]
        d_period: usize,
    },
    #[serde(rename = "STOCH_D")]
    StochD {
        #[serde(default = "p14")]
        period: usize,
        #[serde(default = "p3")]
        d_period: usize,
    },
    #[serde(rename = "MACD")]
    Macd {
        #[serde(default = "fast12")]
        fast: usize,
        #[serde(default = "slow26")]
        slow: usize,
        #[serde(default = "signal9")]
        signal: usize,
    },
    #[serde(rename = "MACD_SIGNAL")]
    MacdSignal {
        #[serde(default = "fast12")]
        fast: usize,
        #[serde(default = "slow26")]
        slow: usize,
        #[serde(default = "signal9")]
        signal: usize,
    },
    #[serde(rename = "OBV")]
    Obv,
    #[serde(rename = "MFI")]
    Mfi {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "CCI")]
    Cci {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "ADX")]
    Adx {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "ATR")]
    Atr {
        #[serde(default = "p14")]
        period: usize,
    },
    #[serde(rename = "UO")]
    Uo {
        #[serde(default = "uo7")]
        short: usize,
        #[serde(default = "p14")]
        medium: usize,
        #[serde(default = "uo28")]
        long: usize,
    },
    #[serde(rename = "SAR")]
    Sar {
        #[serde(default = "sar_start")]
        start: f64,
        #[serde(default = "sar_start")]
        step: f64,
        #[serde(default = "sar_max")]
        max: f64,
    },
    #[serde(rename = "BOP")]
    Bop,
}

impl IndicatorSpec {
    /// Column name, e.g. `RSI_14` or `MACD_12_26_9`.
    pub fn name(&self) -> String {
        use IndicatorSpec::*;
        match self {
            Sma { period } => format!("SMA_{period}"),
            Wma { period } => format!("WMA_{period}"),
            Trima { period } => format!("TRIMA_{period}"),
            Dema { period } => format!("DEMA_{period}"),
            Tema { period } => format!("TEMA_{period}"),
            Trix { period } => format!("TRIX_{period}"),
            Mom { period } => format!("MOM_{period}"),
            Roc { period } => format!("ROC_{period}"),
            Rsi { period } => format!("RSI_{period}"),
            Cmo { period } => format!("CMO_{period}"),
            StochRsi { period } => format!("STOCHRSI_{period}"),
            StochK { period, d_period } => format!("STOCH_K_{period}_{d_period}"),
            StochD { period, d_period } => format!("STOCH_D_{period}_{d_period}"),
            Macd { fast, slow, signal } => format!("MACD_{fast}_{slow}_{signal}"),
            MacdSignal { fast, slow, signal } => format!("MACD_SIGNAL_{fast}_{slow}_{signal}"),
            Obv => "OBV".to_string(),
            Mfi { period } => format!("MFI_{period}"),
            Cci { period } => format!("CCI_{period}"),
            Adx { period } => format!("ADX_{period}"),
            Atr { period } => format!("ATR_{period}"),
            Uo {
                short,
                medium,
                long,
            } => format!("UO_{short}_{medium}_{long}"),
            Sar { start, step, max } => format!("SAR_{start}_{step}_{max}"),
            Bop => "BOP".to_string(),
        }
    }

    pub fn family(&self) -> IndicatorFamily {
        use IndicatorSpec::*;
        match self {
            Sma { .. } | Wma { .. } | Trima { .. } | Dema { .. } | Tema { .. } | Sar { .. } => {
                IndicatorFamily::Price
            }
            Obv | Mfi { .. } => IndicatorFamily::Volume,
            Atr { .. } => IndicatorFamily::Volatility,
            _ => IndicatorFamily::Momentum,
        }
    }

    /// Index of the first defined value.
    pub fn warmup(&self) -> usize {
        use IndicatorSpec::*;
        match *self {
            Sma { period } | Wma { period } | Trima { period } => period - 1,
            Dema { period } => 2 * (period - 1),
            Tema { period } => 3 * (period - 1),
            Trix { period } => 3 * (period - 1) + 1,
            Mom { period } | Roc { period } | Rsi { period } | Cmo { period } => period,
            StochRsi { period } => 2 * period - 1,
            StochK { period, .. } => period - 1,
            StochD { period, d_period } => period + d_period - 2,
            Macd { slow, .. } => slow - 1,
            MacdSignal { slow, signal, .. } => slow + signal - 2,
            Obv | Bop => 0,
            Mfi { period } | Atr { period } => period,
            Cci { period } => period - 1,
            Adx { period } => 2 * period - 1,
            Uo { long, .. } => long,
            Sar { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use IndicatorSpec::*;
        let bad = |msg: String| Err(IndicatorError::InvalidSpec(msg));
        match *self {
            Sma { period }
            | Wma { period }
            | Trima { period }
            | Dema { period }
            | Tema { period }
            | Trix { period }
            | Mom { period }
            | Roc { period }
            | Rsi { period }
            | Cmo { period }
            | StochRsi { period }
            | Mfi { period }
            | Cci { period }
            | Adx { period }
            | Atr { period } => {
                if period == 0 {
                    return bad(format!("{}: period must be >= 1", self.name()));
                }
            }
            StochK { period, d_period } | StochD { period, d_period } => {
                if period == 0 || d_period == 0 {
                    return bad(format!("{}: periods must be >= 1", self.name()));
                }
            }
            Macd { fast, slow, signal } | MacdSignal { fast, slow, signal } => {
                if fast == 0 || signal == 0 || fast >= slow {
                    return bad(format!(
                        "{}: need 1 <= fast < slow and signal >= 1",
                        self.name()
                    ));
                }
            }
            Uo {
                short,
                medium,
                long,
            } => {
                if short == 0 || short >= medium || medium >= long {
                    return bad(format!(
                        "{}: periods must be strictly increasing and >= 1",
                        self.name()
                    ));
                }
            }
            Sar { start, step, max } => {
                let ok = start > 0.0 && step >= 0.0 && max >= start && max.is_finite();
                if !ok {
                    return bad(format!("{}: need 0 < start <= max, step >= 0", self.name()));
                }
            }
            Obv | Bop => {}
        }
        Ok(())
    }

    /// Computes this indicator's column on `series`.
    pub fn compute(&self, series: &OhlcvSeries) -> Result<FeatureColumn> {
        use IndicatorSpec::*;
        self.validate()?;
        let close = series.closes();
        let col = match *self {
            Sma { period } => sma(&close, period)?,
            Wma { period } => wma(&close, period)?,
            Trima { period } => trima(&close, period)?,
            Dema { period } => dema(&close, period)?,
            Tema { period } => tema(&close, period)?,
            Trix { period } => trix(&close, period)?,
            Mom { period } => mom(&close, period)?,
            Roc { period } => roc(&close, period)?,
            Rsi { period } => rsi(&close, period)?,
            Cmo { period } => cmo(&close, period)?,
            StochRsi { period } => stoch_rsi(&close, period)?,
            StochK { period, d_period } => stochastic(series, period, d_period)?.0,
            StochD { period, d_period } => stochastic(series, period, d_period)?.1,
            Macd { fast, slow, signal } => macd(&close, fast, slow, signal)?.0,
            MacdSignal { fast, slow, signal } => macd(&close, fast, slow, signal)?.1,
            Obv => obv(series),
            Mfi { period } => mfi(series, period)?,
            Cci { period } => cci(series, period)?,
            Adx { period } => adx(series, period)?,
            Atr { period } => atr(series, period)?,
            Uo {
                short,
                medium,
                long,
            } => ultimate_oscillator(series, short, medium, long)?,
            Sar { start, step, max } => sar(series, start, step, max)?,
            Bop => bop(series),
        };
        debug_assert_eq!(col.warmup, self.warmup());
        Ok(FeatureColumn {
            name: self.name(),
            ..col
        })
    }
}

/// The default 20-indicator input set.
pub fn default_specs() -> Vec<IndicatorSpec> {
    use IndicatorSpec::*;
    vec![
        Sma { period: 30 },
        Obv,
        Mom { period: 10 },
        StochK {
            period: 14,
            d_period: 3,
        },
        Macd {
            fast: 12,
            slow: 26,
            signal: 9,
        },
        Cci { period: 14 },
        Adx { period: 14 },
        Trix { period: 10 },
        Roc { period: 10 },
        Sar {
            start: 0.02,
            step: 0.02,
            max: 0.2,
        },
        Tema { period: 30 },
        Trima { period: 30 },
        Wma { period: 30 },
        Dema { period: 30 },
        Mfi { period: 14 },
        Cmo { period: 14 },
        StochRsi { period: 14 },
        Uo {
            short: 7,
            medium: 14,
            long: 28,
        },
        Bop,
        Atr { period: 14 },
    ]
}

/// Indicator columns on one shared time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dates: Vec<NaiveDate>,
    columns: Vec<FeatureColumn>,
    families: Vec<IndicatorFamily>,
    warmup: usize,
}

impl FeatureMatrix {
    /// Assembles a matrix, checking lengths and name uniqueness.
    pub fn from_columns(
        dates: Vec<NaiveDate>,
        columns: Vec<(FeatureColumn, IndicatorFamily)>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(IndicatorError::EmptySpecs);
        }
        let mut seen = HashSet::new();
        for (c, _) in &columns {
            if c.len() != dates.len() {
                return Err(IndicatorError::LengthMismatch {
                    expected: dates.len(),
                    found: c.len(),
                });
            }
            if !seen.insert(c.name.clone()) {
                return Err(IndicatorError::DuplicateName(c.name.clone()));
            }
        }
        let warmup = columns.iter().map(|(c, _)| c.warmup).max().unwrap_or(0);
        let (columns, families) = columns.into_iter().unzip();
        Ok(Self {
            dates,
            columns,
            families,
            warmup,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn families(&self) -> &[IndicatorFamily] {
        &self.families
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// First row where every column is defined.
    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let cols = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .position(|c| &c.name == n)
                    .map(|i| (self.columns[i].clone(), self.families[i]))
                    .ok_or_else(|| IndicatorError::InvalidSpec(format!("unknown column `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(self.dates.clone(), cols)
    }

    /// CSV with a leading `Date` column; warm-up cells are empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["Date".to_string()];
        header.extend(self.names());
        w.write_record(&header)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut row = vec![d.format("%Y-%m-%d").to_string()];
            row.extend(
                self.columns
                    .iter()
                    .map(|c| c.get(i).map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One column per spec on the series' time axis.
pub fn compute_feature_matrix(
    series: &OhlcvSeries,
    specs: &[IndicatorSpec],
) -> Result<FeatureMatrix> {
    if specs.is_empty() {
        return Err(IndicatorError::EmptySpecs);
    }
    let mut cols = Vec::with_capacity(specs.len());
    for spec in specs {
        let col = spec.compute(series).map_err(|e| IndicatorError::Spec {
            spec: spec.name(),
            source: Box::new(e),
        })?;
        cols.push((col, spec.family()));
    }
    FeatureMatrix::from_columns(series.dates(), cols)
}

pub(crate) fn check_len(name: &str, needed_warmup: usize, available: usize) -> Result<()> {
    if needed_warmup >= available {
        return Err(IndicatorError::PeriodTooLong {
            name: name.to_string(),
            needed: needed_warmup + 1,
            available,
        });
    }
    Ok(())
}

pub(crate) fn check_period(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(IndicatorError::InvalidSpec(format!("{name}: period must be >= 1")));
    }
    Ok(())
}

/// `num / den`, or 0 when the denominator is zero.
pub(crate) fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
