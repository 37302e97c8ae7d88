//! Dynamic Time Warping with absolute-difference local cost.
//!
//! [`dtw_exact`] fills the full cumulative cost matrix and backtracks an
//! optimal warping path. [`dtw_distance`] computes the same value with two
//! rolling rows. [`dtw_fast`] is the multiresolution FastDTW approximation:
//! coarsen both sequences by averaging adjacent pairs, solve the coarse
//! problem recursively, project its path back to full resolution, widen it
//! by `radius` cells and run the DP only inside that band.
//!
//! Backtracking prefers the diagonal step, then the vertical step
//! (`i - 1, j`), then the horizontal step (`i, j - 1`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};
use crate::types::{DistanceMatrix, LineSeries};

#[inline]
fn local_cost(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Start,
    Diagonal,
    Vertical,
    Horizontal,
}

/// Picks the cheapest predecessor with the documented tie order.
#[inline]
fn best_step(diag: f64, up: f64, left: f64) -> (f64, Step) {
    if diag <= up && diag <= left {
        (diag, Step::Diagonal)
    } else if up <= left {
        (up, Step::Vertical)
    } else {
        (left, Step::Horizontal)
    }
}

/// Sequence of 1-based index pairs `(i, j)` aligning `s_i` with `t_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath {
    pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks boundary, continuity and monotonicity for sequences of
    /// lengths `rows` and `cols`, and that every step advances.
    pub fn is_valid(&self, rows: usize, cols: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        if first != (1, 1) || last != (rows, cols) {
            return false;
        }
        self.pairs.windows(2).all(|w| {
            let (i0, j0) = w[0];
            let (i1, j1) = w[1];
            i1 >= i0 && j1 >= j0 && i1 - i0 <= 1 && j1 - j0 <= 1 && (i1, j1) != (i0, j0)
        })
    }

    /// Sum of local costs along the path.
    pub fn cost(&self, s: &[f64], t: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j)| local_cost(s[i - 1], t[j - 1]))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtwAlignment {
    pub distance: f64,
    pub path: WarpingPath,
}

fn check_non_empty(s: &[f64], t: &[f64]) -> Result<()> {
    if s.is_empty() || t.is_empty() {
        return Err(LscError::EmptySequence);
    }
    Ok(())
}

/// Exact DTW distance and one optimal warping path.
pub fn dtw_exact(s: &[f64], t: &[f64]) -> Result<DtwAlignment> {
    check_non_empty(s, t)?;
    let (n, m) = (s.len(), t.len());
    let mut cost = vec![0.0; n * m];
    let mut steps = vec![Step::Start; n * m];
    for i in 0..n {
        for j in 0..m {
            let d = local_cost(s[i], t[j]);
            let idx = i * m + j;
            let (prev, step) = match (i, j) {
                (0, 0) => (0.0, Step::Start),
                (0, _) => (cost[idx - 1], Step::Horizontal),
                (_, 0) => (cost[idx - m], Step::Vertical),
                _ => best_step(cost[idx - m - 1], cost[idx - m], cost[idx - 1]),
            };
            cost[idx] = d + prev;
            steps[idx] = step;
        }
    }
    let path = backtrack(n - 1, m - 1, |i, j| steps[i * m + j]);
    Ok(DtwAlignment {
        distance: cost[n * m - 1],
        path,
    })
}

/// Walks predecessor links from `(i, j)` back to the origin; returns the
/// 1-based path in forward order.
fn backtrack(mut i: usize, mut j: usize, step_at: impl Fn(usize, usize) -> Step) -> WarpingPath {
    let mut pairs = vec![(i + 1, j + 1)];
    loop {
        match step_at(i, j) {
            Step::Start => break,
            Step::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Step::Vertical => i -= 1,
            Step::Horizontal => j -= 1,
        }
        pairs.push((i + 1, j + 1));
    }
    pairs.reverse();
    WarpingPath::new(pairs)
}

/// Exact DTW distance using two rolling rows.
pub fn dtw_distance(s: &[f64], t: &[f64]) -> Result<f64> {
    Ok(dtw_distance_and_len(s, t)?.0)
}

/// Exact DTW distance plus the length of the path the backtracking rule
/// would pick.
pub(crate) fn dtw_distance_and_len(s: &[f64], t: &[f64]) -> Result<(f64, usize)> {
    check_non_empty(s, t)?;
    let m = t.len();
    let mut prev = vec![(0.0f64, 0usize); m];
    let mut curr = vec![(0.0f64, 0usize); m];
    for (i, &si) in s.iter().enumerate() {
        for j in 0..m {
            let d = local_cost(si, t[j]);
            curr[j] = match (i, j) {
                (0, 0) => (d, 1),
                (0, _) => (curr[j - 1].0 + d, curr[j - 1].1 + 1),
                (_, 0) => (prev[0].0 + d, prev[0].1 + 1),
                _ => {
                    let (c, step) = best_step(prev[j - 1].0, prev[j].0, curr[j - 1].0);
                    let len = match step {
                        Step::Diagonal => prev[j - 1].1,
                        Step::Vertical => prev[j].1,
                        _ => curr[j - 1].1,
                    };
                    (c + d, len + 1)
                }
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

/// FastDTW parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastDtwSpec {
    /// Half-width of the refinement band around the projected coarse path.
    pub radius: usize,
    /// Sequences of at most this length are solved exactly.
    pub min_size: usize,
}

impl Default for FastDtwSpec {
    fn default() -> Self {
        Self {
            radius: 1,
            min_size: 4,
        }
    }
}

impl FastDtwSpec {
    pub fn new(radius: usize, min_size: usize) -> Result<Self> {
        let spec = Self { radius, min_size };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_size < 2 {
            return Err(LscError::InvalidConfig(format!(
                "FastDTW min_size must be >= 2, got {}",
                self.min_size
            )));
        }
        Ok(())
    }
}

/// FastDTW distance. Always the cost of a valid warping path, so never
/// below the exact distance.
pub fn dtw_fast(s: &[f64], t: &[f64], spec: FastDtwSpec) -> Result<f64> {
    Ok(dtw_fast_with_path(s, t, spec)?.distance)
}

pub fn dtw_fast_with_path(s: &[f64], t: &[f64], spec: FastDtwSpec) -> Result<DtwAlignment> {
    check_non_empty(s, t)?;
    spec.validate()?;
    let (distance, path) = fast_recursive(s, t, spec);
    Ok(DtwAlignment {
        distance,
        path: WarpingPath::new(path.into_iter().map(|(i, j)| (i + 1, j + 1)).collect()),
    })
}

/// Halves a sequence by averaging adjacent pairs; an odd trailing element
/// becomes its own coarse cell.
fn coarsen(x: &[f64]) -> Vec<f64> {
    x.chunks(2)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Inclusive column range per row.
type Band = Vec<(usize, usize)>;

fn fast_recursive(s: &[f64], t: &[f64], spec: FastDtwSpec) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (s.len(), t.len());
    if n <= spec.min_size || m <= spec.min_size {
        let full: Band = vec![(0, m - 1); n];
        return banded_dtw(s, t, &full);
    }
    let (_, coarse_path) = fast_recursive(&coarsen(s), &coarsen(t), spec);
    let band = project_band(&coarse_path, n, m, spec.radius);
    banded_dtw(s, t, &band)
}

/// Maps each coarse cell to its 2x2 block at full resolution, then widens
/// every row range by `radius` in both directions.
fn project_band(coarse_path: &[(usize, usize)], n: usize, m: usize, radius: usize) -> Band {
    let mut band: Band = vec![(usize::MAX, 0); n];
    for &(ci, cj) in coarse_path {
        for i in (2 * ci)..(2 * ci + 2).min(n) {
            let lo = 2 * cj;
            let hi = (2 * cj + 1).min(m - 1);
            band[i].0 = band[i].0.min(lo);
            band[i].1 = band[i].1.max(hi);
        }
    }
    if radius == 0 {
        return band;
    }
    (0..n)
        .map(|i| {
            let rows = i.saturating_sub(radius)..(i + radius + 1).min(n);
            let lo = rows.clone().map(|r| band[r].0).min().unwrap_or(0);
            let hi = rows.map(|r| band[r].1).max().unwrap_or(m - 1);
            (lo.saturating_sub(radius), (hi + radius).min(m - 1))
        })
        .collect()
}

/// DP restricted to the band; cells outside it are unreachable.
fn banded_dtw(s: &[f64], t: &[f64], band: &[(usize, usize)]) -> (f64, Vec<(usize, usize)>) {
    let n = s.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for &(lo, hi) in band {
        offsets.push(offsets.last().unwrap() + (hi + 1 - lo));
    }
    let cells = offsets[n];
    let mut cost = vec![f64::INFINITY; cells];
    let mut steps = vec![Step::Start; cells];

    let lookup = |cost: &[f64], i: usize, j: usize| -> f64 {
        let (lo, hi) = band[i];
        if j < lo || j > hi {
            f64::INFINITY
        } else {
            cost[offsets[i] + j - lo]
        }
    };

    for i in 0..n {
        let (lo, hi) = band[i];
        for j in lo..=hi {
            let d = local_cost(s[i], t[j]);
            let (prev, step) = match (i, j) {
                (0, 0) => (0.0, Step::Start),
                (0, _) => (lookup(&cost, 0, j - 1), Step::Horizontal),
                (_, 0) => (lookup(&cost, i - 1, 0), Step::Vertical),
                _ => best_step(
                    lookup(&cost, i - 1, j - 1),
                    lookup(&cost, i - 1, j),
                    lookup(&cost, i, j - 1),
                ),
            };
            let idx = offsets[i] + j - lo;
            cost[idx] = d + prev;
            steps[idx] = step;
        }
    }

    let m = t.len();
    let distance = lookup(&cost, n - 1, m - 1);
    let path = backtrack(n - 1, m - 1, |i, j| steps[offsets[i] + j - band[i].0]);
    let path = path.pairs().iter().map(|&(i, j)| (i - 1, j - 1)).collect();
    (distance, path)
}

/// Which DTW routine a distance computation uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtwMode {
    #[default]
    Exact,
    Fast(FastDtwSpec),
}

impl DtwMode {
    pub fn distance(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        match self {
            DtwMode::Exact => dtw_distance(s, t),
            DtwMode::Fast(spec) => dtw_fast(s, t, *spec),
        }
    }

    /// Distance and the length of the warping path that realizes it.
    pub fn distance_and_path_len(&self, s: &[f64], t: &[f64]) -> Result<(f64, usize)> {
        match self {
            DtwMode::Exact => dtw_distance_and_len(s, t),
            DtwMode::Fast(spec) => {
                let a = dtw_fast_with_path(s, t, *spec)?;
                Ok((a.distance, a.path.len()))
            }
        }
    }
}

/// All-pairs DTW over equal-length lines. Rows are computed in parallel;
/// each entry depends only on its own pair.
pub fn pairwise_dtw(lines: &[LineSeries], mode: DtwMode) -> Result<DistanceMatrix> {
    if let Some(first) = lines.first() {
        if let Some(bad) = lines.iter().find(|l| l.len() != first.len()) {
            return Err(LscError::DimensionMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    let n = lines.len();
    let upper = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| mode.distance(lines[i].values(), lines[j].values()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceMatrix::from_upper_rows(n, upper))
}
