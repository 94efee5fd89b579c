//! Daily OHLCV ingestion and validation.
//!
//! Files use the common vendor export layout: an exact `Date,Open,High,Low,Close,Volume`
//! header, `YYYY-MM-DD` dates and `.` as the decimal point. Extra trailing columns such as
//! `Adj Close` are ignored; `Close` is authoritative.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

/// Required leading header columns, in order.
pub const CSV_HEADER: [&str; 6] = ["Date", "Open", "High", "Low", "Close", "Volume"];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad header: expected `Date,Open,High,Low,Close,Volume`, found `{0}`")]
    BadHeader(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("invariant violated at line {line}: {rule}")]
    InvariantViolation { line: usize, rule: BarRule },
    #[error("duplicate date {date} at line {line}")]
    DuplicateDate { line: usize, date: NaiveDate },
    #[error("series has {0} valid bars, at least 2 are required")]
    EmptySeries(usize),
    #[error("slice start {start} is after end {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// The bar-level rule that a row broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarRule {
    NonPositivePrice,
    NegativeVolume,
    LowAboveOpenOrClose,
    HighBelowOpenOrClose,
    LowAboveHigh,
    NonFinite,
}

impl fmt::Display for BarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BarRule::NonPositivePrice => "prices must be strictly positive",
            BarRule::NegativeVolume => "volume must be non-negative",
            BarRule::LowAboveOpenOrClose => "low must be <= min(open, close)",
            BarRule::HighBelowOpenOrClose => "high must be >= max(open, close)",
            BarRule::LowAboveHigh => "low must be <= high",
            BarRule::NonFinite => "values must be finite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub timestamp: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Checks the OHLCV invariants, returning the first rule broken.
    pub fn validate(&self) -> Result<(), BarRule> {
        let all = [self.open, self.high, self.low, self.close, self.volume];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(BarRule::NonFinite);
        }
        if self.open <= 0.0 || self.high <= 0.0 || self.low <= 0.0 || self.close <= 0.0 {
            return Err(BarRule::NonPositivePrice);
        }
        if self.volume < 0.0 {
            return Err(BarRule::NegativeVolume);
        }
        if self.low > self.high {
            return Err(BarRule::LowAboveHigh);
        }
        if self.low > self.open.min(self.close) {
            return Err(BarRule::LowAboveOpenOrClose);
        }
        if self.high < self.open.max(self.close) {
            return Err(BarRule::HighBelowOpenOrClose);
        }
        Ok(())
    }

    /// (high + low + close) / 3
    pub fn typical_price(&self) -> f64 {
        (self.high + self.low + self.close) / 3.0
    }
}

/// A validated, strictly time-ordered daily series with at least two bars.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcvSeries {
    symbol: String,
    bars: Vec<Bar>,
}

impl OhlcvSeries {
    /// Validates `bars` (sorting by date first) and builds a series.
    ///
    /// Line numbers in errors are 1-based positions in the input slice plus one,
    /// matching file lines when the bars came from a file with a header.
    pub fn new(symbol: impl Into<String>, mut bars: Vec<Bar>) -> Result<Self, DataError> {
        for (i, bar) in bars.iter().enumerate() {
            bar.validate()
                .map_err(|rule| DataError::InvariantViolation { line: i + 2, rule })?;
        }
        if bars.len() < 2 {
            return Err(DataError::EmptySeries(bars.len()));
        }
        let mut order: Vec<usize> = (0..bars.len()).collect();
        order.sort_by_key(|&i| bars[i].timestamp);
        for w in order.windows(2) {
            if bars[w[0]].timestamp == bars[w[1]].timestamp {
                return Err(DataError::DuplicateDate {
                    line: w[1] + 2,
                    date: bars[w[1]].timestamp,
                });
            }
        }
        bars.sort_by_key(|b| b.timestamp);
        Ok(Self {
            symbol: symbol.into(),
            bars,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    /// Always false: a constructed series holds at least two bars.
    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.timestamp).collect()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.bars[0].timestamp
    }

    pub fn last_date(&self) -> NaiveDate {
        self.bars[self.bars.len() - 1].timestamp
    }
}

fn parse_field(record: &csv::StringRecord, idx: usize, line: usize) -> Result<f64, DataError> {
    let raw = record.get(idx).ok_or_else(|| DataError::MalformedRow {
        line,
        reason: format!("missing column {}", CSV_HEADER[idx]),
    })?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| DataError::MalformedRow {
            line,
            reason: format!("column {} is not a number: `{raw}`", CSV_HEADER[idx]),
        })
}

/// Reads a series from any reader holding the CSV format.
pub fn read_csv<R: Read>(symbol: &str, reader: R) -> Result<OhlcvSeries, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let leading: Vec<&str> = header.iter().take(CSV_HEADER.len()).map(str::trim).collect();
    if leading != CSV_HEADER {
        return Err(DataError::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }

    let mut bars = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| DataError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let date_raw = record.get(0).unwrap_or("").trim();
        let timestamp =
            NaiveDate::parse_from_str(date_raw, "%Y-%m-%d").map_err(|_| DataError::MalformedRow {
                line,
                reason: format!("bad date `{date_raw}`"),
            })?;
        let bar = Bar {
            timestamp,
            open: parse_field(&record, 1, line)?,
            high: parse_field(&record, 2, line)?,
            low: parse_field(&record, 3, line)?,
            close: parse_field(&record, 4, line)?,
            volume: parse_field(&record, 5, line)?,
        };
        bar.validate()
            .map_err(|rule| DataError::InvariantViolation { line, rule })?;
        bars.push(bar);
    }
    OhlcvSeries::new(symbol, bars)
}

/// Loads and validates a CSV file. The symbol is taken from the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<OhlcvSeries, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let symbol = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(&symbol, std::io::BufReader::new(file))
}

/// Writes the canonical CSV form. Floats use the shortest round-trip representation.
pub fn write_csv<W: Write>(series: &OhlcvSeries, writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for b in series.bars() {
        w.write_record([
            b.timestamp.format("%Y-%m-%d").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_csv(series: &OhlcvSeries, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(series, std::io::BufWriter::new(file))
}

/// Bars with `start <= timestamp < end`, order preserved.
pub fn slice_by_date(
    series: &OhlcvSeries,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<OhlcvSeries, DataError> {
    if start > end {
        return Err(DataError::InvalidRange { start, end });
    }
    let bars: Vec<Bar> = series
        .bars
        .iter()
        .filter(|b| b.timestamp >= start && b.timestamp < end)
        .copied()
        .collect();
    if bars.len() < 2 {
        return Err(DataError::EmptySeries(bars.len()));
    }
    Ok(OhlcvSeries {
        symbol: series.symbol.clone(),
        bars,
    })
}
