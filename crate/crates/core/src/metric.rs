//! Alpha-weighted blend of DTW (shape) and Euclidean (magnitude) distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dtw::DtwMode;
use crate::error::{LscError, Result};
use crate::types::LineSeries;

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LscError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// How the two distance terms are put on a common scale before blending.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Terms are blended as computed.
    #[default]
    Raw,
    /// Each term is divided by its median over pairs of dataset lines.
    Normalized,
}

/// Optional normalization of the DTW term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtwNormalize {
    #[default]
    None,
    /// Divide by the number of cells on the warping path.
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedMetricSpec {
    /// Weight of the DTW term; `1 - alpha` goes to the Euclidean term.
    pub alpha: f64,
    pub dtw_mode: DtwMode,
    pub scale_mode: ScaleMode,
    pub dtw_normalize: DtwNormalize,
}

impl Default for CombinedMetricSpec {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            dtw_mode: DtwMode::Exact,
            scale_mode: ScaleMode::Raw,
            dtw_normalize: DtwNormalize::None,
        }
    }
}

impl CombinedMetricSpec {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(LscError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if let DtwMode::Fast(spec) = self.dtw_mode {
            spec.validate()?;
        }
        Ok(())
    }
}

/// A validated spec together with the per-term scale divisors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedMetric {
    spec: CombinedMetricSpec,
    dtw_scale: f64,
    euc_scale: f64,
}

/// Pairs sampled when estimating dataset-level medians.
const SCALE_SAMPLE_PAIRS: usize = 2000;

impl CombinedMetric {
    /// Metric with unit scales. Fails for [`ScaleMode::Normalized`], which
    /// needs dataset scales from [`CombinedMetric::fit`].
    pub fn new(spec: CombinedMetricSpec) -> Result<Self> {
        spec.validate()?;
        if spec.scale_mode == ScaleMode::Normalized {
            return Err(LscError::InvalidConfig(
                "normalized scale mode needs dataset scales; use CombinedMetric::fit".into(),
            ));
        }
        Ok(Self {
            spec,
            dtw_scale: 1.0,
            euc_scale: 1.0,
        })
    }

    pub fn with_scales(spec: CombinedMetricSpec, dtw_scale: f64, euc_scale: f64) -> Result<Self> {
        spec.validate()?;
        if !(dtw_scale > 0.0 && euc_scale > 0.0) {
            return Err(LscError::InvalidConfig("term scales must be positive".into()));
        }
        Ok(Self {
            spec,
            dtw_scale,
            euc_scale,
        })
    }

    /// Builds the metric for a dataset. In normalized mode each term's
    /// scale is its median over all line pairs, or over a seeded sample of
    /// pairs when the dataset is large.
    pub fn fit(spec: CombinedMetricSpec, lines: &[LineSeries], seed: u64) -> Result<Self> {
        spec.validate()?;
        if spec.scale_mode == ScaleMode::Raw {
            return Self::new(spec);
        }
        let n = lines.len();
        let total = n * n.saturating_sub(1) / 2;
        let pairs: Vec<(usize, usize)> = if total <= SCALE_SAMPLE_PAIRS {
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..SCALE_SAMPLE_PAIRS)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    (i, j)
                })
                .collect()
        };
        let unit = Self {
            spec,
            dtw_scale: 1.0,
            euc_scale: 1.0,
        };
        let mut dtw = Vec::with_capacity(pairs.len());
        let mut euc = Vec::with_capacity(pairs.len());
        for (i, j) in pairs {
            let (a, b) = (lines[i].values(), lines[j].values());
            dtw.push(unit.dtw_term(a, b)?);
            euc.push(euclidean(a, b)?);
        }
        let positive_median = |v: &mut Vec<f64>| match median(v) {
            Some(m) if m > 0.0 => m,
            _ => 1.0,
        };
        Ok(Self {
            spec,
            dtw_scale: positive_median(&mut dtw),
            euc_scale: positive_median(&mut euc),
        })
    }

    pub fn spec(&self) -> &CombinedMetricSpec {
        &self.spec
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.dtw_scale, self.euc_scale)
    }

    fn dtw_term(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self.spec.dtw_normalize {
            DtwNormalize::None => self.spec.dtw_mode.distance(a, b),
            DtwNormalize::Length => {
                let (d, len) = self.spec.dtw_mode.distance_and_path_len(a, b)?;
                Ok(d / len as f64)
            }
        }
    }

    /// `alpha * DTW + (1 - alpha) * Euclidean`, each term over its scale.
    /// A term whose weight is zero is not computed.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(LscError::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let alpha = self.spec.alpha;
        let dtw = if alpha > 0.0 {
            alpha * (self.dtw_term(a, b)? / self.dtw_scale)
        } else {
            0.0
        };
        let euc = if alpha < 1.0 {
            (1.0 - alpha) * (euclidean(a, b)? / self.euc_scale)
        } else {
            0.0
        };
        Ok(dtw + euc)
    }

    pub fn line_distance(&self, a: &LineSeries, b: &LineSeries) -> Result<f64> {
        self.distance(a.values(), b.values())
    }
}

/// Combined distance between two lines under a raw-scale spec.
pub fn combined_distance(a: &LineSeries, b: &LineSeries, spec: &CombinedMetricSpec) -> Result<f64> {
    CombinedMetric::new(*spec)?.line_distance(a, b)
}

/// Median with the midpoint rule for even counts; reorders `v`.
pub(crate) fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
