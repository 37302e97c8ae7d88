//! Shared domain types and the line-space view of a data matrix.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};

/// Dense row-major `n x d` matrix of finite values. Rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_samples: usize,
    n_features: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n_samples: usize, n_features: usize, values: Vec<f64>) -> Result<Self> {
        if n_samples == 0 || n_features == 0 {
            return Err(LscError::InvalidInput(format!(
                "matrix must have at least one row and one column, got {n_samples}x{n_features}"
            )));
        }
        if values.len() != n_samples * n_features {
            return Err(LscError::DimensionMismatch {
                expected: n_samples * n_features,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(LscError::NonFinite {
                row: pos / n_features,
                col: pos % n_features,
            });
        }
        Ok(Self {
            n_samples,
            n_features,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_features = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(LscError::DimensionMismatch {
                    expected: n_features,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_features, values)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let rows: Vec<&[f64]> = indices.iter().map(|&i| self.row(i)).collect();
        Self::from_rows(&rows)
    }
}

/// One sample viewed as the sequence `(f_j, x_ij)` for `j = 1..d`.
///
/// Values are stored 0-based; [`LineSeries::points`] yields the 1-based
/// feature index used in every serialized artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSeries {
    index: usize,
    values: Vec<f64>,
}

impl LineSeries {
    pub fn new(index: usize, values: Vec<f64>) -> Self {
        Self { index, values }
    }

    /// Sample id this line was built from.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(j, &v)| (j + 1, v))
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            index: self.index,
            values,
        }
    }
}

pub fn to_line_space(m: &DataMatrix) -> Vec<LineSeries> {
    m.rows()
        .enumerate()
        .map(|(i, row)| LineSeries::new(i, row.to_vec()))
        .collect()
}

/// Rebuilds the matrix a set of lines was taken from. Lines are placed by
/// their position in the slice.
pub fn to_matrix(lines: &[LineSeries]) -> Result<DataMatrix> {
    let rows: Vec<&[f64]> = lines.iter().map(LineSeries::values).collect();
    DataMatrix::from_rows(&rows)
}

/// Cluster (or class) id per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_clusters) {
            return Err(LscError::InvalidInput(format!(
                "label {bad} out of range for {n_clusters} clusters"
            )));
        }
        Ok(Self { labels, n_clusters })
    }

    /// Takes `max + 1` as the cluster count.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
        Self { labels, n_clusters }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Symmetric pairwise distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    /// Builds from the strict upper triangle given row by row
    /// (`upper[i]` holds distances `(i, i+1..n)`).
    pub(crate) fn from_upper_rows(n: usize, upper: Vec<Vec<f64>>) -> Self {
        let mut values = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (off, d) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    pub fn from_square(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(LscError::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// One pass of the assign/update loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Largest distance between a center and its previous position, in the
    /// units of the clustering distance.
    pub max_center_shift: f64,
    /// Largest absolute change of any single center coordinate.
    pub max_coordinate_shift: f64,
    pub label_changes: usize,
    /// Time since the fit started.
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub standardize: Duration,
    pub smooth: Duration,
    pub distance: Duration,
    pub total: Duration,
}

/// Result of a clustering fit.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub centers: Vec<LineSeries>,
    pub labels: LabelVector,
    pub iterations_run: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub timings: PhaseTimings,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_line() {
        let m = DataMatrix::from_rows(&[[7.0]]).unwrap();
        let lines = to_line_space(&m);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].points().collect::<Vec<_>>(), vec![(1, 7.0)]);
    }

    #[test]
    fn rows_become_indexed_lines() {
        let m = DataMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let lines = to_line_space(&m);
        assert_eq!(
            lines[0].points().collect::<Vec<_>>(),
            vec![(1, 1.0), (2, 2.0), (3, 3.0)]
        );
        assert_eq!(
            lines[1].points().collect::<Vec<_>>(),
            vec![(1, 4.0), (2, 5.0), (3, 6.0)]
        );
        assert_eq!(lines[1].index(), 1);
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            DataMatrix::from_rows(&[[1.0, f64::NAN]]),
            Err(LscError::NonFinite { row: 0, col: 1 })
        ));
        assert!(DataMatrix::new(0, 3, vec![]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn label_vector_range_check() {
        assert!(LabelVector::new(vec![0, 1, 2], 2).is_err());
        let lv = LabelVector::new(vec![0, 1, 1], 2).unwrap();
        assert_eq!(lv.cluster_sizes(), vec![1, 2]);
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        proptest! {
            #[test]
            fn line_space_round_trip_is_bitwise(values in proptest::collection::vec(-1e6f64..1e6, 80)) {
                let m = DataMatrix::new(10, 8, values).unwrap();
                let lines = to_line_space(&m);
                // direct reconstruction, independent of to_matrix
                let mut rebuilt = vec![0.0; 80];
                for line in &lines {
                    for (j, v) in line.points() {
                        rebuilt[line.index() * 8 + (j - 1)] = v;
                    }
                }
                let direct = DataMatrix::new(10, 8, rebuilt).unwrap();
                prop_assert_eq!(&direct, &m);
                prop_assert_eq!(to_matrix(&lines).unwrap(), m);
            }
        }
    }
}
