//! Feature scaling.
//!
//! Statistics are fitted once on a training segment ([`fit`]) and then applied frozen.
//! Degenerate statistics (σ = 0 or max = min) map to 0 for min-max and z-score and to 0.5
//! for the sigmoid. Logarithms are natural.

mod correlation;
mod scaler;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use correlation::{pearson_corr_matrix, select_uncorrelated, CorrelationMatrix};
pub use scaler::{FamilyOverrides, FeatureScaler};

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("cannot fit statistics on an empty segment")]
    EmptyInput,
    #[error("cannot L2-normalize an all-zero vector")]
    ZeroVector,
    #[error("window log normalization needs positive values; cell ({row}, {col}) is {value}")]
    NonPositiveValue { row: usize, col: usize, value: f64 },
    #[error("need at least 2 rows where every column is defined, found {0}")]
    TooFewRows(usize),
    #[error("scaler was fitted for {expected} columns, got {found}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("window of {window} rows ending at row {end} is outside the matrix")]
    WindowOutOfRange { end: usize, window: usize },
}

pub type Result<T> = std::result::Result<T, NormalizeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    #[default]
    MinMax,
    ZScore,
    Sigmoid,
    L2,
    /// `log(s_ij / s_00) * 10` over an observation window.
    WindowLog,
}

/// Population statistics of a fitted segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn fit(values: &[f64]) -> Result<NormalizationStats> {
    if values.is_empty() {
        return Err(NormalizeError::EmptyInput);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // an all-equal segment must report exactly zero spread
    let std = if min == max { 0.0 } else { var.sqrt() };
    Ok(NormalizationStats {
        mean,
        std,
        min,
        max,
    })
}

/// `(x − min) / (max − min)`; 0 for a constant column.
///
/// Values outside the fitted range (e.g. evaluation data) land outside [0, 1].
pub fn min_max(x: f64, stats: &NormalizationStats) -> f64 {
    let range = stats.max - stats.min;
    if range == 0.0 {
        0.0
    } else {
        (x - stats.min) / range
    }
}

/// `(x − μ) / σ`; 0 when σ = 0.
pub fn z_score(x: f64, stats: &NormalizationStats) -> f64 {
    if stats.std == 0.0 {
        0.0
    } else {
        (x - stats.mean) / stats.std
    }
}

/// `1 / (1 + e^{−(x − μ)/σ})`; 0.5 when σ = 0.
pub fn sigmoid_norm(x: f64, stats: &NormalizationStats) -> f64 {
    if stats.std == 0.0 {
        0.5
    } else {
        1.0 / (1.0 + (-(x - stats.mean) / stats.std).exp())
    }
}

pub fn l2_normalize(vector: &[f64]) -> Result<Vec<f64>> {
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(NormalizeError::ZeroVector);
    }
    Ok(vector.iter().map(|v| v / norm).collect())
}

/// `s'_ij = ln(s_ij / s_00) × 10` over a window given as rows (time offset) of columns.
pub fn window_log(window: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    for (row, r) in window.iter().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if !(value > 0.0) {
                return Err(NormalizeError::NonPositiveValue { row, col, value });
            }
        }
    }
    let origin = match window.first().and_then(|r| r.first()) {
        Some(&v) => v,
        None => return Ok(Vec::new()),
    };
    Ok(window
        .iter()
        .map(|r| r.iter().map(|&s| (s / origin).ln() * 10.0).collect())
        .collect())
}

/// Applies `kind` to a whole column in one pass, fitting on the column itself.
pub fn normalize_column(values: &[f64], kind: NormalizationKind) -> Result<Vec<f64>> {
    match kind {
        NormalizationKind::MinMax => {
            let s = fit(values)?;
            Ok(values.iter().map(|&x| min_max(x, &s)).collect())
        }
        NormalizationKind::ZScore => {
            let s = fit(values)?;
            Ok(values.iter().map(|&x| z_score(x, &s)).collect())
        }
        NormalizationKind::Sigmoid => {
            let s = fit(values)?;
            Ok(values.iter().map(|&x| sigmoid_norm(x, &s)).collect())
        }
        NormalizationKind::L2 => l2_normalize(values),
        NormalizationKind::WindowLog => {
            let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
            Ok(window_log(&rows)?.into_iter().map(|r| r[0]).collect())
        }
    }
}
