use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{fit, min_max, sigmoid_norm, z_score, NormalizationKind, NormalizationStats};
use super::{NormalizeError, Result};
use crate::indicators::{FeatureMatrix, IndicatorFamily};

/// Per-family replacements for the default normalization kind.
pub type FamilyOverrides = BTreeMap<IndicatorFamily, NormalizationKind>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub kind: NormalizationKind,
    pub stats: NormalizationStats,
}

/// Frozen per-column normalization fitted on a training segment.
///
/// Windows are transformed column by column: min-max, z-score and sigmoid use the frozen
/// statistics; L2 scales the column's slice of the window to unit norm (an all-zero slice
/// stays zero); window-log columns are grouped and share the origin cell `s_00`, the first
/// row of the first window-log column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub columns: Vec<ColumnScale>,
}

impl FeatureScaler {
    /// Fits statistics on `rows` (clipped to the matrix's defined region).
    pub fn fit(
        matrix: &FeatureMatrix,
        default: NormalizationKind,
        overrides: &FamilyOverrides,
        rows: Range<usize>,
    ) -> Result<Self> {
        let start = rows.start.max(matrix.warmup());
        let end = rows.end.min(matrix.n_rows());
        if start >= end {
            return Err(NormalizeError::EmptyInput);
        }
        let columns = matrix
            .columns()
            .iter()
            .zip(matrix.families())
            .map(|(col, family)| {
                Ok(ColumnScale {
                    name: col.name.clone(),
                    kind: overrides.get(family).copied().unwrap_or(default),
                    stats: fit(&col.values[start..end])?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { columns })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn check_matrix(&self, matrix: &FeatureMatrix) -> Result<()> {
        let names = matrix.names();
        if names.len() != self.columns.len()
            || names.iter().zip(&self.columns).any(|(n, c)| n != &c.name)
        {
            return Err(NormalizeError::ColumnMismatch {
                expected: self.columns.len(),
                found: names.len(),
            });
        }
        Ok(())
    }

    /// Normalized `window × K` block of rows `end + 1 − window ..= end`, row-major.
    pub fn transform_window(
        &self,
        matrix: &FeatureMatrix,
        end: usize,
        window: usize,
    ) -> Result<Vec<f64>> {
        if window == 0 || end + 1 < window || end >= matrix.n_rows() {
            return Err(NormalizeError::WindowOutOfRange { end, window });
        }
        let k = self.columns.len();
        if matrix.n_cols() != k {
            return Err(NormalizeError::ColumnMismatch {
                expected: k,
                found: matrix.n_cols(),
            });
        }
        let first = end + 1 - window;
        let mut out = vec![0.0; window * k];
        let mut log_origin: Option<f64> = None;
        for (j, (scale, col)) in self.columns.iter().zip(matrix.columns()).enumerate() {
            let slice = &col.values[first..=end];
            match scale.kind {
                NormalizationKind::MinMax => {
                    for (i, &x) in slice.iter().enumerate() {
                        out[i * k + j] = min_max(x, &scale.stats);
                    }
                }
                NormalizationKind::ZScore => {
                    for (i, &x) in slice.iter().enumerate() {
                        out[i * k + j] = z_score(x, &scale.stats);
                    }
                }
                NormalizationKind::Sigmoid => {
                    for (i, &x) in slice.iter().enumerate() {
                        out[i * k + j] = sigmoid_norm(x, &scale.stats);
                    }
                }
                NormalizationKind::L2 => {
                    let norm = slice.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for (i, &x) in slice.iter().enumerate() {
                        out[i * k + j] = if norm == 0.0 { 0.0 } else { x / norm };
                    }
                }
                NormalizationKind::WindowLog => {
                    for (i, &x) in slice.iter().enumerate() {
                        if !(x > 0.0) {
                            return Err(NormalizeError::NonPositiveValue {
                                row: i,
                                col: j,
                                value: x,
                            });
                        }
                    }
                    let origin = *log_origin.get_or_insert(slice[0]);
                    for (i, &x) in slice.iter().enumerate() {
                        out[i * k + j] = (x / origin).ln() * 10.0;
                    }
                }
            }
        }
        Ok(out)
    }
}
