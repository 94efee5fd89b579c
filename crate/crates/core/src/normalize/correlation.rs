use std::io::Write;

use super::{normalize_column, NormalizationKind, NormalizeError, Result};
use crate::indicators::FeatureMatrix;

/// Symmetric Pearson matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Zero-variance columns; their off-diagonal entries are 0.
    pub degenerate: Vec<String>,
}

impl CorrelationMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Square CSV with a header row and a leading name column.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    // sqrt of the product keeps corr(x, x) exactly 1
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson coefficients over the rows where every column is defined, after normalizing
/// each column with `kind`.
pub fn pearson_corr_matrix(
    features: &FeatureMatrix,
    kind: NormalizationKind,
) -> Result<CorrelationMatrix> {
    let start = features.warmup();
    let rows = features.n_rows().saturating_sub(start);
    if rows < 2 {
        return Err(NormalizeError::TooFewRows(rows));
    }
    let cols: Vec<Vec<f64>> = features
        .columns()
        .iter()
        .map(|c| normalize_column(&c.values[start..], kind))
        .collect::<Result<_>>()?;
    let k = cols.len();
    let names = features.names();
    let mut values = vec![vec![0.0; k]; k];
    let degenerate_col: Vec<bool> = cols
        .iter()
        .map(|c| c.iter().all(|&v| v == c[0]))
        .collect();
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            if degenerate_col[i] || degenerate_col[j] {
                continue;
            }
            let r = pearson(&cols[i], &cols[j]).unwrap_or(0.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    let degenerate = names
        .iter()
        .zip(&degenerate_col)
        .filter(|(_, &d)| d)
        .map(|(n, _)| n.clone())
        .collect();
    Ok(CorrelationMatrix {
        names,
        values,
        degenerate,
    })
}

/// Greedy pass in column order: keep a column iff `|corr| < threshold` against every kept one.
pub fn select_uncorrelated(matrix: &CorrelationMatrix, threshold: f64) -> Vec<String> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..matrix.len() {
        if kept.iter().all(|&j| matrix.values[i][j].abs() < threshold) {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| matrix.names[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicators::{FeatureColumn, IndicatorFamily};
    use crate::synthetic;

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> FeatureMatrix {
        let n = cols[0].1.len();
        FeatureMatrix::from_columns(
            synthetic::calendar_days(n),
            cols.into_iter()
                .map(|(name, v)| {
                    (
                        FeatureColumn {
                            name: name.into(),
                            warmup: 0,
                            values: v,
                        },
                        IndicatorFamily::Momentum,
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn self_and_negated_correlation() {
        let x = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = matrix(vec![("a", x.clone()), ("b", x), ("c", neg)]);
        let c = pearson_corr_matrix(&m, NormalizationKind::ZScore).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(0, 2), -1.0);
        assert_eq!(select_uncorrelated(&c, 1.0), vec!["a".to_string()]);
        assert_eq!(select_uncorrelated(&c, 0.5), vec!["a".to_string()]);
    }

    #[test]
    fn degenerate_column_reported() {
        let m = matrix(vec![("a", vec![1.0, 2.0, 3.0]), ("flat", vec![2.0; 3])]);
        let c = pearson_corr_matrix(&m, NormalizationKind::MinMax).unwrap();
        assert_eq!(c.degenerate, vec!["flat".to_string()]);
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(1, 1), 1.0);
    }

    #[test]
    fn threshold_one_keeps_distinct_columns() {
        let m = matrix(vec![
            ("a", vec![1.0, 2.0, 3.0, 4.0]),
            ("b", vec![1.0, 3.0, 2.0, 4.0]),
            ("c", vec![4.0, 1.0, 3.0, 2.0]),
        ]);
        let c = pearson_corr_matrix(&m, NormalizationKind::MinMax).unwrap();
        assert_eq!(select_uncorrelated(&c, 1.0).len(), 3);
    }

    #[test]
    fn csv_shape() {
        let m = matrix(vec![("a", vec![1.0, 2.0, 3.0]), ("b", vec![3.0, 1.0, 2.0])]);
        let c = pearson_corr_matrix(&m, NormalizationKind::MinMax).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), ",a,b");
        assert_eq!(text.lines().count(), 3);
    }
}
