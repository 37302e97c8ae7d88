//! Line space clustering (K-medians under the combined distance) and the
//! K-means baseline.
//!
//! An LSC fit standardizes the data, optionally smooths every line, picks
//! `k` distinct lines as initial centers and then alternates:
//!
//! 1. assign each line to its nearest center (ties go to the lowest index),
//! 2. move each center to the coordinate-wise median of its members.
//!
//! The loop stops when no label changes, when no center coordinate moves by
//! `tol` or more, or after `max_iter` passes. A cluster that loses all its
//! members is reseeded with the line farthest from its own center.

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};
use crate::metric::{euclidean, median, CombinedMetric, CombinedMetricSpec};
use crate::preprocess::{apply_standardizer, fit_standardizer, savgol_kernel, smooth_line, SavGolSpec};
use crate::types::{
    to_line_space, ClusterModel, DataMatrix, IterationRecord, LabelVector, LineSeries, PhaseTimings,
};

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// `k` distinct lines drawn uniformly.
    #[default]
    Random,
    /// D^2-weighted seeding under the clustering distance.
    KMeansPlusPlus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyClusterPolicy {
    #[default]
    ReseedFarthest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    Off,
    On(SavGolSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LscConfig {
    pub k: usize,
    pub metric: CombinedMetricSpec,
    pub max_iter: usize,
    pub smoothing: Smoothing,
    pub seed: u64,
    pub tol: f64,
    pub init: InitStrategy,
    pub standardize: bool,
    pub empty_cluster_policy: EmptyClusterPolicy,
}

impl LscConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            metric: CombinedMetricSpec::default(),
            max_iter: DEFAULT_MAX_ITER,
            smoothing: Smoothing::default(),
            seed: 0,
            tol: DEFAULT_TOL,
            init: InitStrategy::default(),
            standardize: true,
            empty_cluster_policy: EmptyClusterPolicy::default(),
        }
    }

    pub fn validate(&self, n_samples: usize) -> Result<()> {
        if self.k == 0 {
            return Err(LscError::InvalidConfig("k must be at least 1".into()));
        }
        if self.k > n_samples {
            return Err(LscError::TooManyClusters {
                k: self.k,
                n: n_samples,
            });
        }
        if self.max_iter == 0 {
            return Err(LscError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(LscError::InvalidConfig(format!("tol must be >= 0, got {}", self.tol)));
        }
        if let Smoothing::On(spec) = self.smoothing {
            spec.validate()?;
        }
        self.metric.validate()
    }
}

/// Standardizes (if configured) and smooths (if configured) the data,
/// returning the lines the clustering loop works on.
pub fn prepare_lines(m: &DataMatrix, cfg: &LscConfig) -> Result<Vec<LineSeries>> {
    Ok(prepare_timed(m, cfg)?.0)
}

fn prepare_timed(m: &DataMatrix, cfg: &LscConfig) -> Result<(Vec<LineSeries>, PhaseTimings)> {
    let mut timings = PhaseTimings::default();
    let start = Instant::now();
    let standardized;
    let data = if cfg.standardize {
        standardized = apply_standardizer(m, &fit_standardizer(m))?;
        &standardized
    } else {
        m
    };
    let lines = to_line_space(data);
    timings.standardize = start.elapsed();

    let start = Instant::now();
    let lines = match cfg.smoothing {
        Smoothing::Off => lines,
        Smoothing::On(spec) => {
            let kernel = savgol_kernel(spec)?;
            lines
                .par_iter()
                .map(|l| smooth_line(l, &kernel))
                .collect::<Result<Vec<_>>>()?
        }
    };
    timings.smooth = start.elapsed();
    Ok((lines, timings))
}

/// Index and distance of the nearest center; ties go to the lowest index.
pub fn nearest_center(
    line: &[f64],
    centers: &[LineSeries],
    dist: &(impl Fn(&[f64], &[f64]) -> Result<f64> + Sync),
) -> Result<(usize, f64)> {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = dist(line, c.values())?;
        if d < best.1 {
            best = (j, d);
        }
    }
    Ok(best)
}

fn assign(
    lines: &[LineSeries],
    centers: &[LineSeries],
    dist: &(impl Fn(&[f64], &[f64]) -> Result<f64> + Sync),
) -> Result<(Vec<usize>, Vec<f64>)> {
    let pairs = lines
        .par_iter()
        .map(|l| nearest_center(l.values(), centers, dist))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Gives every empty cluster the line farthest from its assigned center,
/// taken from clusters that can spare a member.
fn reseed_empty(labels: &mut [usize], dists: &mut [f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        // k <= n guarantees some cluster has two or more members
        let p = donor.expect("k <= n leaves a cluster with a spare member");
        sizes[labels[p]] -= 1;
        sizes[j] = 1;
        labels[p] = j;
        dists[p] = 0.0;
    }
}

fn groups_of<'a>(lines: &'a [LineSeries], labels: &[usize], k: usize) -> Vec<Vec<&'a LineSeries>> {
    let mut groups = vec![Vec::new(); k];
    for (line, &l) in lines.iter().zip(labels) {
        groups[l].push(line);
    }
    groups
}

/// Coordinate-wise median of each group. Center `j` gets index `j`.
pub fn update_centers(groups: &[Vec<&LineSeries>]) -> Result<Vec<LineSeries>> {
    groups
        .iter()
        .enumerate()
        .map(|(j, group)| {
            let first = group.first().ok_or(LscError::EmptyGroup(j))?;
            let d = first.len();
            let mut column = Vec::with_capacity(group.len());
            let mut center = Vec::with_capacity(d);
            for f in 0..d {
                column.clear();
                for line in group {
                    if line.len() != d {
                        return Err(LscError::DimensionMismatch {
                            expected: d,
                            found: line.len(),
                        });
                    }
                    column.push(line.values()[f]);
                }
                center.push(median(&mut column).expect("group is non-empty"));
            }
            Ok(LineSeries::new(j, center))
        })
        .collect()
}

fn mean_centers(groups: &[Vec<&LineSeries>]) -> Result<Vec<LineSeries>> {
    groups
        .iter()
        .enumerate()
        .map(|(j, group)| {
            let first = group.first().ok_or(LscError::EmptyGroup(j))?;
            let mut center = vec![0.0; first.len()];
            for line in group {
                for (c, v) in center.iter_mut().zip(line.values()) {
                    *c += v;
                }
            }
            let n = group.len() as f64;
            center.iter_mut().for_each(|c| *c /= n);
            Ok(LineSeries::new(j, center))
        })
        .collect()
}

fn max_coordinate_shift(old: &[LineSeries], new: &[LineSeries]) -> f64 {
    old.iter()
        .zip(new)
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn random_init(lines: &[LineSeries], k: usize, rng: &mut ChaCha8Rng) -> Vec<LineSeries> {
    sample(rng, lines.len(), k)
        .into_iter()
        .enumerate()
        .map(|(j, i)| LineSeries::new(j, lines[i].values().to_vec()))
        .collect()
}

/// D^2 seeding: first center uniform, then each next center drawn with
/// probability proportional to the squared distance to the nearest chosen
/// center.
fn plus_plus_init(
    lines: &[LineSeries],
    k: usize,
    rng: &mut ChaCha8Rng,
    dist: &(impl Fn(&[f64], &[f64]) -> Result<f64> + Sync),
) -> Result<Vec<LineSeries>> {
    let n = lines.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = lines
        .par_iter()
        .map(|l| dist(l.values(), lines[chosen[0]].values()))
        .collect::<Result<_>>()?;
    while chosen.len() < k {
        let weights: Vec<f64> = nearest.iter().map(|d| d * d).collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| weights.iter().rposition(|w| *w > 0.0).unwrap())
        } else {
            // all remaining lines coincide with a chosen center
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        let c = lines[next].values();
        let fresh: Vec<f64> = lines
            .par_iter()
            .map(|l| dist(l.values(), c))
            .collect::<Result<_>>()?;
        for (d, f) in nearest.iter_mut().zip(fresh) {
            *d = d.min(f);
        }
    }
    Ok(chosen
        .into_iter()
        .enumerate()
        .map(|(j, i)| LineSeries::new(j, lines[i].values().to_vec()))
        .collect())
}

enum CenterUpdate {
    Median,
    Mean,
}

struct LoopOutput {
    centers: Vec<LineSeries>,
    labels: Vec<usize>,
    iterations_run: usize,
    converged: bool,
    trace: Vec<IterationRecord>,
}

fn run_loop(
    lines: &[LineSeries],
    mut centers: Vec<LineSeries>,
    max_iter: usize,
    tol: f64,
    update: CenterUpdate,
    dist: &(impl Fn(&[f64], &[f64]) -> Result<f64> + Sync),
    started: Instant,
    distance_time: &mut std::time::Duration,
) -> Result<LoopOutput> {
    let k = centers.len();
    let mut labels: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut last_shift = f64::INFINITY;

    for iteration in 1..=max_iter {
        let t = Instant::now();
        let (mut new_labels, mut dists) = assign(lines, &centers, dist)?;
        *distance_time += t.elapsed();
        reseed_empty(&mut new_labels, &mut dists, k);

        let label_changes = match &labels {
            None => lines.len(),
            Some(prev) => prev.iter().zip(&new_labels).filter(|(a, b)| a != b).count(),
        };
        let groups = groups_of(lines, &new_labels, k);
        let new_centers = match update {
            CenterUpdate::Median => update_centers(&groups)?,
            CenterUpdate::Mean => mean_centers(&groups)?,
        };
        let coord_shift = max_coordinate_shift(&centers, &new_centers);
        let mut center_shift: f64 = 0.0;
        for (a, b) in centers.iter().zip(&new_centers) {
            center_shift = center_shift.max(dist(a.values(), b.values())?);
        }
        trace.push(IterationRecord {
            iteration,
            max_center_shift: center_shift,
            max_coordinate_shift: coord_shift,
            label_changes,
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
        let stable = labels.is_some() && label_changes == 0;
        centers = new_centers;
        labels = Some(new_labels);
        last_shift = coord_shift;
        if stable || coord_shift < tol {
            converged = true;
            break;
        }
    }

    let mut labels = labels.expect("max_iter >= 1");
    if last_shift > 0.0 {
        // centers moved after the last assignment; report labels that match them
        let t = Instant::now();
        labels = assign(lines, &centers, dist)?.0;
        *distance_time += t.elapsed();
    }
    let iterations_run = trace.len();
    Ok(LoopOutput {
        centers,
        labels,
        iterations_run,
        converged,
        trace,
    })
}

/// Line space clustering fit.
pub fn lsc_fit(m: &DataMatrix, cfg: &LscConfig) -> Result<ClusterModel> {
    let started = Instant::now();
    cfg.validate(m.n_samples())?;
    let (lines, mut timings) = prepare_timed(m, cfg)?;

    let t = Instant::now();
    let metric = CombinedMetric::fit(cfg.metric, &lines, cfg.seed)?;
    let dist = |a: &[f64], b: &[f64]| metric.distance(a, b);
    timings.distance += t.elapsed();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = match cfg.init {
        InitStrategy::Random => random_init(&lines, cfg.k, &mut rng),
        InitStrategy::KMeansPlusPlus => {
            let t = Instant::now();
            let c = plus_plus_init(&lines, cfg.k, &mut rng, &dist)?;
            timings.distance += t.elapsed();
            c
        }
    };

    let out = run_loop(
        &lines,
        centers,
        cfg.max_iter,
        cfg.tol,
        CenterUpdate::Median,
        &dist,
        started,
        &mut timings.distance,
    )?;
    timings.total = started.elapsed();
    Ok(ClusterModel {
        centers: out.centers,
        labels: LabelVector::new(out.labels, cfg.k)?,
        iterations_run: out.iterations_run,
        converged: out.converged,
        trace: out.trace,
        timings,
    })
}

/// Lloyd's K-means with K-means++ seeding on the matrix as given (no
/// standardization). Convergence rules match [`lsc_fit`] with
/// `tol = DEFAULT_TOL`.
pub fn kmeans_fit(m: &DataMatrix, k: usize, seed: u64, max_iter: usize) -> Result<ClusterModel> {
    let started = Instant::now();
    if k == 0 || max_iter == 0 {
        return Err(LscError::InvalidConfig("k and max_iter must be at least 1".into()));
    }
    if k > m.n_samples() {
        return Err(LscError::TooManyClusters {
            k,
            n: m.n_samples(),
        });
    }
    let lines = to_line_space(m);
    let dist = |a: &[f64], b: &[f64]| euclidean(a, b);
    let mut timings = PhaseTimings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = Instant::now();
    let centers = plus_plus_init(&lines, k, &mut rng, &dist)?;
    timings.distance += t.elapsed();
    let out = run_loop(
        &lines,
        centers,
        max_iter,
        DEFAULT_TOL,
        CenterUpdate::Mean,
        &dist,
        started,
        &mut timings.distance,
    )?;
    timings.total = started.elapsed();
    Ok(ClusterModel {
        centers: out.centers,
        labels: LabelVector::new(out.labels, k)?,
        iterations_run: out.iterations_run,
        converged: out.converged,
        trace: out.trace,
        timings,
    })
}
