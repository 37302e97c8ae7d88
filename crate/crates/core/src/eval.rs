//! Clustering quality scores: ARI, AMI, homogeneity, completeness,
//! V-measure and silhouette.
//!
//! Entropies use natural logarithms. AMI normalizes by the arithmetic mean
//! of the two label entropies and takes the expected mutual information
//! under the hypergeometric (fixed marginals) model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};
use crate::metric::euclidean;
use crate::types::{DataMatrix, DistanceMatrix};

/// Counts of samples per (true class, predicted cluster). Labels are
/// remapped to dense ids in ascending order, so unused ids never produce
/// empty rows or columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label is present"))
        .collect();
    (ids, distinct.len())
}

fn check_pair(truth: &[usize], pred: &[usize]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(LscError::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.len() < 2 {
        return Err(LscError::InvalidInput(
            "external metrics need at least two samples".into(),
        ));
    }
    Ok(())
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(LscError::DimensionMismatch {
                expected: truth.len(),
                found: pred.len(),
            });
        }
        let (t, rows) = dense_ids(truth);
        let (p, cols) = dense_ids(pred);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&i, &j) in t.iter().zip(&p) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: truth.len() as u64,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(j, &c)| (i, j, c))
        })
    }

    /// True when the two labelings are the same partition up to renaming.
    fn is_bijection(&self) -> bool {
        self.row_sums.len() == self.col_sums.len()
            && self
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
            && (0..self.col_sums.len())
                .all(|j| self.counts.iter().filter(|r| r[j] > 0).count() == 1)
    }
}

fn comb2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

pub fn adjusted_rand_index(truth: &[usize], pred: &[usize]) -> Result<f64> {
    check_pair(truth, pred)?;
    let table = ContingencyTable::new(truth, pred)?;
    let index: f64 = table.cells().map(|(_, _, c)| comb2(c)).sum();
    let sum_rows: f64 = table.row_sums.iter().map(|&a| comb2(a)).sum();
    let sum_cols: f64 = table.col_sums.iter().map(|&b| comb2(b)).sum();
    let expected = sum_rows * sum_cols / comb2(table.n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        // both partitions are a single cluster, or both are all singletons
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

fn entropy(sums: &[u64], n: u64) -> f64 {
    let n = n as f64;
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.n as f64;
    table
        .cells()
        .map(|(i, j, c)| {
            let c = c as f64;
            let outer = table.row_sums[i] as f64 * table.col_sums[j] as f64;
            (c / n) * (n * c / outer).ln()
        })
        .sum()
}

/// `ln(k!)` for `k = 0..=n`.
fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Expected mutual information of two labelings with the table's margins
/// under random permutation.
pub fn expected_mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.n;
    let nf = n as f64;
    let lf = ln_factorials(n);
    let mut emi = 0.0;
    for &a in &table.row_sums {
        for &b in &table.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lf[a as usize] + lf[b as usize] + lf[(n - a) as usize] + lf[(n - b) as usize]
                - lf[n as usize];
            for k in lo..=hi {
                let kf = k as f64;
                let term = (kf / nf) * (nf * kf / (a as f64 * b as f64)).ln();
                let ln_p = fixed
                    - lf[k as usize]
                    - lf[(a - k) as usize]
                    - lf[(b - k) as usize]
                    - lf[(n + k - a - b) as usize];
                emi += term * ln_p.exp();
            }
        }
    }
    emi
}

/// Tolerance under which AMI treats its denominator as zero.
const AMI_DEGENERATE_EPS: f64 = 1e-12;

/// AMI with arithmetic-mean normalization. When the denominator vanishes
/// (both labelings trivial) the score is 1 if `MI == E[MI]`, else 0.
pub fn adjusted_mutual_information(truth: &[usize], pred: &[usize]) -> Result<f64> {
    check_pair(truth, pred)?;
    let table = ContingencyTable::new(truth, pred)?;
    if table.is_bijection() {
        return Ok(1.0);
    }
    let mi = mutual_information(&table);
    let emi = expected_mutual_information(&table);
    let h_true = entropy(&table.row_sums, table.n);
    let h_pred = entropy(&table.col_sums, table.n);
    let denom = 0.5 * (h_true + h_pred) - emi;
    if denom.abs() < AMI_DEGENERATE_EPS {
        return Ok(if (mi - emi).abs() < AMI_DEGENERATE_EPS { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

/// Conditional entropy `H(row | col)` of the table.
fn conditional_entropy_rows_given_cols(table: &ContingencyTable) -> f64 {
    let n = table.n as f64;
    table
        .cells()
        .map(|(_, j, c)| {
            let c = c as f64;
            -(c / n) * (c / table.col_sums[j] as f64).ln()
        })
        .sum()
}

fn transpose(table: &ContingencyTable) -> ContingencyTable {
    let rows = table.row_sums.len();
    let cols = table.col_sums.len();
    let counts = (0..cols)
        .map(|j| (0..rows).map(|i| table.counts[i][j]).collect())
        .collect();
    ContingencyTable {
        counts,
        row_sums: table.col_sums.clone(),
        col_sums: table.row_sums.clone(),
        n: table.n,
    }
}

/// Homogeneity, completeness and V-measure.
pub fn homogeneity_completeness_v(truth: &[usize], pred: &[usize]) -> Result<(f64, f64, f64)> {
    check_pair(truth, pred)?;
    let table = ContingencyTable::new(truth, pred)?;
    let h_class = entropy(&table.row_sums, table.n);
    let h_cluster = entropy(&table.col_sums, table.n);
    let homogeneity = if h_class == 0.0 {
        1.0
    } else {
        (1.0 - conditional_entropy_rows_given_cols(&table) / h_class).clamp(0.0, 1.0)
    };
    let completeness = if h_cluster == 0.0 {
        1.0
    } else {
        (1.0 - conditional_entropy_rows_given_cols(&transpose(&table)) / h_cluster).clamp(0.0, 1.0)
    };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok((homogeneity, completeness, v))
}

/// Per-sample silhouette values under an arbitrary distance. Samples in
/// singleton clusters score 0.
pub fn silhouette_samples_with(
    n: usize,
    labels: &[usize],
    dist: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<Vec<f64>> {
    if labels.len() != n {
        return Err(LscError::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let (ids, k) = dense_ids(labels);
    if k < 2 {
        return Err(LscError::SingleCluster);
    }
    let mut sizes = vec![0usize; k];
    for &c in &ids {
        sizes[c] += 1;
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let own = ids[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[ids[j]] += dist(i, j);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let scale = a.max(b);
            if scale == 0.0 {
                0.0
            } else {
                (b - a) / scale
            }
        })
        .collect())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean silhouette with Euclidean distance between matrix rows.
pub fn silhouette(data: &DataMatrix, labels: &[usize]) -> Result<f64> {
    let samples = silhouette_samples_with(data.n_samples(), labels, |i, j| {
        euclidean(data.row(i), data.row(j)).expect("rows share a length")
    })?;
    Ok(mean(&samples))
}

/// Mean silhouette from a precomputed distance matrix.
pub fn silhouette_from_distances(dm: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    let samples = silhouette_samples_with(dm.len(), labels, |i, j| dm.get(i, j))?;
    Ok(mean(&samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SilhouetteDistance {
    Euclidean,
    Combined,
}

/// All six scores. External scores are absent without ground truth;
/// silhouette is absent without data (or when only one cluster exists).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ari: Option<f64>,
    pub ami: Option<f64>,
    pub homogeneity: Option<f64>,
    pub completeness: Option<f64>,
    pub v_measure: Option<f64>,
    pub silhouette: Option<f64>,
    pub silhouette_distance: Option<SilhouetteDistance>,
}

impl MetricReport {
    pub fn external(truth: &[usize], pred: &[usize]) -> Result<Self> {
        let (h, c, v) = homogeneity_completeness_v(truth, pred)?;
        Ok(Self {
            ari: Some(adjusted_rand_index(truth, pred)?),
            ami: Some(adjusted_mutual_information(truth, pred)?),
            homogeneity: Some(h),
            completeness: Some(c),
            v_measure: Some(v),
            silhouette: None,
            silhouette_distance: None,
        })
    }

    pub fn with_silhouette(mut self, value: f64, distance: SilhouetteDistance) -> Self {
        self.silhouette = Some(value);
        self.silhouette_distance = Some(distance);
        self
    }
}
