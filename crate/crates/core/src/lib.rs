//! Line space clustering.
//!
//! Each sample of an `n x d` data matrix is read as an ordered sequence of
//! feature values (a "line"), compared with an alpha-weighted blend of
//! Dynamic Time Warping and Euclidean distance, optionally smoothed with a
//! Savitzky-Golay filter, and grouped with a K-medians loop. A K-means
//! baseline and the usual external/internal clustering scores are included
//! so that runs can be compared end to end.

pub mod cluster;
pub mod data;
pub mod dtw;
mod error;
pub mod eval;
pub mod metric;
pub mod preprocess;
pub mod types;

pub use cluster::{kmeans_fit, lsc_fit, update_centers, InitStrategy, LscConfig, Smoothing};
pub use data::{generate_synthetic, load_csv, write_csv, CsvSchema, LabelColumn, LabeledDataset, SyntheticSpec};
pub use dtw::{dtw_exact, dtw_fast, pairwise_dtw, DtwMode, FastDtwSpec, WarpingPath};
pub use error::{LscError, Result};
pub use eval::{
    adjusted_mutual_information, adjusted_rand_index, homogeneity_completeness_v, silhouette,
    silhouette_from_distances, ContingencyTable, MetricReport,
};
pub use metric::{combined_distance, euclidean, CombinedMetric, CombinedMetricSpec, DtwNormalize, ScaleMode};
pub use preprocess::{
    apply_standardizer, fit_standardizer, savgol_kernel, smooth_line, SavGolKernel, SavGolSpec,
    StandardizationParams,
};
pub use types::{
    to_line_space, to_matrix, ClusterModel, DataMatrix, DistanceMatrix, IterationRecord, LabelVector,
    LineSeries, PhaseTimings,
};
