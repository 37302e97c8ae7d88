use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lsc_core::cluster::Smoothing;
use lsc_core::data::builtin;
use lsc_core::eval::SilhouetteDistance;
use lsc_core::{
    apply_standardizer, fit_standardizer, generate_synthetic, kmeans_fit, load_csv, lsc_fit, silhouette,
    ClusterModel, CombinedMetricSpec, CsvSchema, DataMatrix, DtwMode, FastDtwSpec, IterationRecord,
    LabelColumn, LabeledDataset, LscConfig, MetricReport, SavGolSpec,
};

use crate::config::{Algorithm, DataSource, DtwChoice, LabelChoice, RunConfig, AUTO_EXACT_LIMIT};
use crate::error::{CliError, CliResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Silhouette is skipped above this many samples (it is quadratic in n).
pub const SILHOUETTE_MAX_SAMPLES: usize = 20_000;

const DEFAULT_WINDOW: usize = 5;
const DEFAULT_ORDER: usize = 2;

/// A configuration with every choice made explicit, plus its data.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub dataset: LabeledDataset,
    /// Adjustments made while resolving (e.g. a shrunk smoothing window).
    pub notes: Vec<String>,
}

pub fn csv_schema(cfg: &RunConfig, path: &Path) -> CliResult<CsvSchema> {
    let label_column = match &cfg.label {
        LabelChoice::None => LabelColumn::None,
        LabelChoice::Name(n) => LabelColumn::Name(n.clone()),
        LabelChoice::Index(i) => LabelColumn::Index(*i),
        LabelChoice::Auto => auto_label(path, cfg.delimiter, cfg.header)?,
    };
    Ok(CsvSchema {
        label_column,
        delimiter: cfg.delimiter,
        has_header: cfg.header,
        expected_shape: None,
    })
}

fn auto_label(path: &Path, delimiter: u8, header: bool) -> CliResult<LabelColumn> {
    if !header {
        return Ok(LabelColumn::None);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let names = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(["label", "class"]
        .iter()
        .find(|c| names.iter().any(|h| h.trim() == **c))
        .map(|c| LabelColumn::Name(c.to_string()))
        .unwrap_or(LabelColumn::None))
}

pub fn load_source(cfg: &RunConfig) -> CliResult<LabeledDataset> {
    match &cfg.source {
        None => Err(CliError::Usage("no dataset given (positional argument or data.source)".into())),
        Some(DataSource::Synthetic) => Ok(generate_synthetic(&cfg.synthetic)?),
        Some(DataSource::Builtin(name)) => match builtin(name) {
            Some(ds) => Ok(ds?),
            None => Err(CliError::Usage(format!("unknown builtin dataset {name:?} (iris, wine)"))),
        },
        Some(DataSource::Path(p)) => {
            let schema = csv_schema(cfg, p)?;
            Ok(load_csv(p, &schema)?)
        }
    }
}

/// Loads the data and fixes every implicit choice: `k` from the truth
/// classes, the DTW mode, the smoothing window, and the label column.
pub fn resolve(mut cfg: RunConfig) -> CliResult<Resolved> {
    let dataset = load_source(&cfg)?;
    let mut notes = Vec::new();
    let (n, d) = (dataset.matrix.n_samples(), dataset.matrix.n_features());

    if let (Some(DataSource::Path(p)), LabelChoice::Auto) = (&cfg.source, &cfg.label) {
        cfg.label = match csv_schema(&cfg, p)?.label_column {
            LabelColumn::Name(name) => LabelChoice::Name(name),
            _ => LabelChoice::None,
        };
    }
    if cfg.k.is_none() {
        match &dataset.truth {
            Some(t) => {
                cfg.k = Some(t.n_clusters());
                notes.push(format!("k = {} taken from the truth labels", t.n_clusters()));
            }
            None => return Err(CliError::Usage("k is required when the data has no labels".into())),
        }
    }
    let k = cfg.k.unwrap_or(0);

    if cfg.alg == Algorithm::Lsc {
        if cfg.dtw == DtwChoice::Auto {
            cfg.dtw = if n * k <= AUTO_EXACT_LIMIT {
                DtwChoice::Exact
            } else {
                DtwChoice::Fast
            };
        }
        if cfg.smooth {
            let order = cfg.order.unwrap_or(DEFAULT_ORDER);
            let window = match cfg.window {
                Some(w) => w,
                None if d >= DEFAULT_WINDOW => DEFAULT_WINDOW,
                None => {
                    let w = if d % 2 == 1 { d } else { d.saturating_sub(1) };
                    if w < 3 {
                        return Err(CliError::Usage(format!(
                            "lines have {d} features; smoothing needs at least 3 (use --smooth off)"
                        )));
                    }
                    notes.push(format!("smoothing window shrunk to {w} for {d} features"));
                    w
                }
            };
            let order = if cfg.order.is_none() && order + 1 >= window {
                let o = window.saturating_sub(2);
                notes.push(format!("smoothing order lowered to {o} for window {window}"));
                o
            } else {
                order
            };
            cfg.window = Some(window);
            cfg.order = Some(order);
        }
    }
    Ok(Resolved {
        config: cfg,
        dataset,
        notes,
    })
}

/// The core configuration for a resolved LSC run.
pub fn lsc_config(cfg: &RunConfig) -> CliResult<LscConfig> {
    let dtw_mode = match cfg.dtw {
        DtwChoice::Exact => DtwMode::Exact,
        DtwChoice::Fast => DtwMode::Fast(FastDtwSpec::new(cfg.radius, cfg.min_size)?),
        DtwChoice::Auto => return Err(CliError::Runtime("DTW mode was not resolved".into())),
    };
    let smoothing = if cfg.smooth {
        Smoothing::On(SavGolSpec::new(
            cfg.window.unwrap_or(DEFAULT_WINDOW),
            cfg.order.unwrap_or(DEFAULT_ORDER),
        )?)
    } else {
        Smoothing::Off
    };
    let mut lsc = LscConfig::new(cfg.k.unwrap_or(0));
    lsc.metric = CombinedMetricSpec {
        alpha: cfg.alpha,
        dtw_mode,
        scale_mode: cfg.scale,
        dtw_normalize: cfg.dtw_normalize,
    };
    lsc.max_iter = cfg.max_iter;
    lsc.smoothing = smoothing;
    lsc.seed = cfg.seed;
    lsc.tol = cfg.tol;
    lsc.init = cfg.init;
    lsc.standardize = cfg.standardize;
    Ok(lsc)
}

fn standardized(m: &DataMatrix) -> CliResult<DataMatrix> {
    Ok(apply_standardizer(m, &fit_standardizer(m))?)
}

pub fn fit(r: &Resolved) -> CliResult<ClusterModel> {
    let cfg = &r.config;
    let m = &r.dataset.matrix;
    match cfg.alg {
        Algorithm::Lsc => Ok(lsc_fit(m, &lsc_config(cfg)?)?),
        Algorithm::Kmeans => {
            let k = cfg.k.unwrap_or(0);
            if cfg.standardize {
                Ok(kmeans_fit(&standardized(m)?, k, cfg.seed, cfg.max_iter)?)
            } else {
                Ok(kmeans_fit(m, k, cfg.seed, cfg.max_iter)?)
            }
        }
    }
}

/// External scores when truth exists; silhouette under Euclidean distance
/// on the standardized data when at least two clusters are populated.
pub fn score(data: &DataMatrix, truth: Option<&[usize]>, pred: &[usize]) -> CliResult<MetricReport> {
    if truth.is_some_and(|t| t.len() != pred.len()) || data.n_samples() != pred.len() {
        return Err(CliError::Data(format!(
            "label count {} does not match {} samples",
            pred.len(),
            data.n_samples()
        )));
    }
    let mut report = match truth {
        Some(t) => MetricReport::external(t, pred)?,
        None => MetricReport::default(),
    };
    if data.n_samples() <= SILHOUETTE_MAX_SAMPLES {
        match silhouette(&standardized(data)?, pred) {
            Ok(s) => report = report.with_silhouette(s, SilhouetteDistance::Euclidean),
            Err(lsc_core::LscError::SingleCluster) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub has_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub standardize_secs: f64,
    pub smooth_secs: f64,
    pub distance_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iterations_run: usize,
    pub converged: bool,
    pub final_label_changes: Option<usize>,
    pub final_max_center_shift: Option<f64>,
    pub trace: Vec<IterationRecord>,
}

/// JSON report of one clustering run. `config` is the resolved echo; it
/// can be passed back with `--config` to repeat the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub config: BTreeMap<String, String>,
    pub dataset: DatasetSummary,
    pub metrics: MetricReport,
    pub timings: TimingReport,
    pub iterations: IterationSummary,
    pub notes: Vec<String>,
}

pub struct RunOutput {
    pub model: ClusterModel,
    pub report: RunReport,
}

pub fn execute(r: &Resolved) -> CliResult<RunOutput> {
    let model = fit(r)?;
    let truth = r.dataset.truth.as_ref().map(|t| t.labels());
    let metrics = score(&r.dataset.matrix, truth, model.labels.labels())?;
    let t = &model.timings;
    let last = model.trace.last();
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        algorithm: r.config.alg.to_string(),
        config: r.config.echo(),
        dataset: DatasetSummary {
            name: r.dataset.name.clone(),
            n_samples: r.dataset.matrix.n_samples(),
            n_features: r.dataset.matrix.n_features(),
            has_truth: truth.is_some(),
        },
        metrics,
        timings: TimingReport {
            standardize_secs: t.standardize.as_secs_f64(),
            smooth_secs: t.smooth.as_secs_f64(),
            distance_secs: t.distance.as_secs_f64(),
            total_secs: t.total.as_secs_f64(),
        },
        iterations: IterationSummary {
            iterations_run: model.iterations_run,
            converged: model.converged,
            final_label_changes: last.map(|l| l.label_changes),
            final_max_center_shift: last.map(|l| l.max_center_shift),
            trace: model.trace.clone(),
        },
        notes: r.notes.clone(),
    };
    Ok(RunOutput { model, report })
}

/// Writes `contents` to `path` via a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::write(path, e))?;
    tmp.write_all(contents).map_err(|e| CliError::write(path, e))?;
    tmp.persist(path).map_err(|e| CliError::write(path, e.error))?;
    Ok(())
}

pub fn labels_csv(labels: &[usize]) -> String {
    let mut s = String::with_capacity(labels.len() * 3 + 6);
    s.push_str("label\n");
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

/// Centers in the space the algorithm clustered in (standardized and, if
/// enabled, smoothed).
pub fn centers_csv(model: &ClusterModel) -> String {
    let d = model.centers.first().map_or(0, |c| c.len());
    let mut s = String::from("cluster");
    for j in 1..=d {
        s.push_str(&format!(",f{j}"));
    }
    s.push('\n');
    for (i, c) in model.centers.iter().enumerate() {
        s.push_str(&i.to_string());
        for v in c.values() {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn report_json<T: Serialize>(report: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `labels.csv`, `centers.csv` and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> CliResult<()> {
    write_atomic(&dir.join("labels.csv"), labels_csv(out.model.labels.labels()).as_bytes())?;
    write_atomic(&dir.join("centers.csv"), centers_csv(&out.model).as_bytes())?;
    write_atomic(&dir.join("report.json"), report_json(&out.report)?.as_bytes())?;
    Ok(())
}

/// Reads a label column from a CSV file: the `label` (or `class`) column if
/// the header has one, otherwise the first column. Non-integer labels are
/// mapped to ids in order of first appearance.
pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut records = rdr.records();
    let first = match records.next() {
        None => return Err(CliError::Data(format!("{}: empty label file", path.display()))),
        Some(r) => r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
    };
    let header_col = first
        .iter()
        .position(|h| matches!(h.trim(), "label" | "class"));
    let is_header = header_col.is_some() || first.get(0).is_some_and(|f| f.trim().parse::<f64>().is_err());
    let col = header_col.unwrap_or(0);
    let mut raw = Vec::new();
    if !is_header {
        raw.push(first.get(col).unwrap_or("").trim().to_string());
    }
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let v = rec.get(col).ok_or_else(|| {
            CliError::Data(format!("{}: line {} has no column {}", path.display(), i + 2, col + 1))
        })?;
        raw.push(v.trim().to_string());
    }
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    if raw.iter().all(|v| v.parse::<usize>().is_ok()) {
        return Ok(raw.iter().map(|v| v.parse().unwrap_or(0)).collect());
    }
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        let next = ids.len();
        out.push(*ids.entry(v).or_insert(next));
    }
    Ok(out)
}
