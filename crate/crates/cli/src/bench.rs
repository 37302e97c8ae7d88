//! Benchmark suites at desk scale.
//!
//! Each suite expands into cells, one per (configuration, seed). Every cell
//! writes its labels, centers and report (with the resolved config echo)
//! under `cells/<id>/`, and contributes one row to `runs.csv`.
//! `aggregate.csv` holds mean and sample standard deviation per
//! configuration and is computed from the rows alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use lsc_core::InitStrategy;

use crate::config::{Algorithm, DataSource, DtwChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::plot::{scaling_svg, Series};
use crate::run::{execute, load_source, report_json, resolve, write_atomic, write_outputs, REPORT_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    NoiseSweep,
    AlphaSweep,
    Realworld,
    SmoothingAblation,
    Timing,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "noise-sweep" => Suite::NoiseSweep,
            "alpha-sweep" => Suite::AlphaSweep,
            "realworld" => Suite::Realworld,
            "smoothing-ablation" => Suite::SmoothingAblation,
            "timing" => Suite::Timing,
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown suite {s:?} (noise-sweep, alpha-sweep, realworld, smoothing-ablation, timing)"
                )))
            }
        })
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::NoiseSweep => "noise-sweep",
            Suite::AlphaSweep => "alpha-sweep",
            Suite::Realworld => "realworld",
            Suite::SmoothingAblation => "smoothing-ablation",
            Suite::Timing => "timing",
        }
    }
}

/// Suite settings. `None` lists fall back to per-suite defaults.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub seeds: Option<usize>,
    pub noise: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub datasets: Option<Vec<String>>,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    /// LSC and generator settings shared by all cells.
    pub base: RunConfig,
    /// Where to write results; `None` keeps everything in memory.
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            seeds: None,
            noise: None,
            alphas: None,
            datasets: None,
            ns: vec![250, 500, 1000],
            ds: vec![32],
            base: bench_base(),
            out: None,
            quiet: false,
        }
    }
}

/// Defaults shared by the suites: desk-scale synthetic data, K-means++
/// seeding for LSC, DTW mode picked by problem size.
pub fn bench_base() -> RunConfig {
    RunConfig {
        init: InitStrategy::KMeansPlusPlus,
        dtw: DtwChoice::Auto,
        ..RunConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub cell: String,
    pub suite: String,
    pub dataset: String,
    pub algorithm: String,
    pub n: usize,
    pub d: usize,
    pub noise: Option<f64>,
    pub alpha: Option<f64>,
    pub smoothing: String,
    pub seed: u64,
    pub status: String,
    pub ari: Option<f64>,
    pub ami: Option<f64>,
    pub homogeneity: Option<f64>,
    pub completeness: Option<f64>,
    pub v_measure: Option<f64>,
    pub silhouette: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub distance_secs: Option<f64>,
    pub total_secs: Option<f64>,
}

impl RunRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean: Some(mean),
            std: Some(std),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub algorithm: String,
    pub n: usize,
    pub d: usize,
    pub noise: Option<f64>,
    pub alpha: Option<f64>,
    pub smoothing: String,
    pub runs: usize,
    pub failed: usize,
    pub ari: Stat,
    pub ari_best: Option<f64>,
    pub ami: Stat,
    pub homogeneity: Stat,
    pub completeness: Stat,
    pub v_measure: Stat,
    pub silhouette: Stat,
    pub total_secs: Stat,
}

type GroupKey = (String, String, usize, usize, Option<u64>, Option<u64>, String);

fn group_key(r: &RunRow) -> GroupKey {
    (
        r.dataset.clone(),
        r.algorithm.clone(),
        r.n,
        r.d,
        r.noise.map(f64::to_bits),
        r.alpha.map(f64::to_bits),
        r.smoothing.clone(),
    )
}

/// Mean and sample standard deviation per configuration, in order of first
/// appearance. Failed runs are counted but not averaged.
pub fn aggregate(rows: &[RunRow]) -> Vec<AggregateRow> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: BTreeMap<GroupKey, Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        let key = group_key(r);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let ok: Vec<&RunRow> = members.iter().copied().filter(|r| r.ok()).collect();
            let stat = |f: fn(&RunRow) -> Option<f64>| Stat::of(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            let first = members[0];
            AggregateRow {
                dataset: first.dataset.clone(),
                algorithm: first.algorithm.clone(),
                n: first.n,
                d: first.d,
                noise: first.noise,
                alpha: first.alpha,
                smoothing: first.smoothing.clone(),
                runs: members.len(),
                failed: members.len() - ok.len(),
                ari: stat(|r| r.ari),
                ari_best: ok.iter().filter_map(|r| r.ari).fold(None, |b: Option<f64>, v| Some(b.map_or(v, |b| b.max(v)))),
                ami: stat(|r| r.ami),
                homogeneity: stat(|r| r.homogeneity),
                completeness: stat(|r| r.completeness),
                v_measure: stat(|r| r.v_measure),
                silhouette: stat(|r| r.silhouette),
                total_secs: stat(|r| r.total_secs),
            }
        })
        .collect()
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept, r2 })
}

/// Time-vs-n fit for one feature count, on the per-n mean times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingFit {
    pub d: usize,
    pub points: Vec<(usize, f64)>,
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub suite: Suite,
    pub cells: usize,
    pub failed: usize,
    pub aggregate: Vec<AggregateRow>,
    pub timing: Vec<TimingFit>,
}

pub struct BenchResult {
    pub rows: Vec<RunRow>,
    pub summary: BenchSummary,
}

impl BenchResult {
    pub fn failed(&self) -> usize {
        self.summary.failed
    }
}

struct Cell {
    id: String,
    config: RunConfig,
    row: RunRow,
}

fn source_for(name: &str) -> DataSource {
    match name {
        "iris" | "wine" => DataSource::Builtin(name.to_string()),
        other => DataSource::parse(other),
    }
}

fn smoothing_tag(cfg: &RunConfig) -> String {
    if cfg.alg == Algorithm::Lsc && cfg.smooth {
        match (cfg.window, cfg.order) {
            (Some(w), Some(o)) => format!("sg{w}-{o}"),
            _ => "on".to_string(),
        }
    } else {
        "off".to_string()
    }
}

fn fmt_num(v: f64) -> String {
    v.to_string().replace('.', "p").replace('-', "m")
}

fn cell_id(dataset: &str, cfg: &RunConfig, noise: Option<f64>, alpha: Option<f64>, smooth: &str) -> String {
    let mut id = format!("{}_{}", dataset.replace(['/', '\\', ':', '.'], "-"), cfg.alg);
    if let Some(x) = noise {
        let _ = write!(id, "_noise{}", fmt_num(x));
    }
    if let Some(a) = alpha {
        let _ = write!(id, "_alpha{}", fmt_num(a));
    }
    if smooth != "off" {
        let _ = write!(id, "_smooth");
    }
    if matches!(cfg.source, Some(DataSource::Synthetic)) {
        let _ = write!(id, "_n{}_d{}", cfg.synthetic.n_samples, cfg.synthetic.n_features);
    }
    let _ = write!(id, "_seed{}", cfg.seed);
    id
}

fn make_cell(suite: Suite, dataset: &str, cfg: RunConfig, noise: Option<f64>) -> Cell {
    let alpha = (cfg.alg == Algorithm::Lsc).then_some(cfg.alpha);
    let smooth = if cfg.alg == Algorithm::Lsc && cfg.smooth { "on" } else { "off" };
    let id = cell_id(dataset, &cfg, noise, alpha, smooth);
    let (n, d) = match cfg.source {
        Some(DataSource::Synthetic) => (cfg.synthetic.n_samples, cfg.synthetic.n_features),
        _ => load_source(&cfg).map_or((0, 0), |ds| (ds.matrix.n_samples(), ds.matrix.n_features())),
    };
    let row = RunRow {
        cell: id.clone(),
        suite: suite.name().to_string(),
        dataset: dataset.to_string(),
        algorithm: cfg.alg.to_string(),
        n,
        d,
        noise,
        alpha,
        smoothing: smoothing_tag(&cfg),
        seed: cfg.seed,
        status: String::new(),
        ari: None,
        ami: None,
        homogeneity: None,
        completeness: None,
        v_measure: None,
        silhouette: None,
        iterations: None,
        converged: None,
        distance_secs: None,
        total_secs: None,
    };
    Cell { id, config: cfg, row }
}

fn synthetic_cfg(base: &RunConfig, noise: f64, seed: u64) -> RunConfig {
    let mut cfg = base.clone();
    cfg.source = Some(DataSource::Synthetic);
    cfg.synthetic.noise_std = noise;
    cfg.synthetic.seed = seed;
    cfg.seed = seed;
    if cfg.k.is_none() {
        cfg.k = Some(cfg.synthetic.n_clusters);
    }
    cfg
}

fn with_alg(mut cfg: RunConfig, alg: Algorithm) -> RunConfig {
    cfg.alg = alg;
    cfg
}

fn with_smoothing(mut cfg: RunConfig, on: bool) -> RunConfig {
    cfg.smooth = on;
    if !on {
        cfg.window = None;
        cfg.order = None;
    }
    cfg
}

fn cells_for(suite: Suite, opts: &BenchOptions) -> Vec<Cell> {
    let seeds = opts.seeds.unwrap_or(if suite == Suite::Timing { 3 } else { 10 }) as u64;
    let base = &opts.base;
    let noise = opts.noise.clone().unwrap_or_else(|| match suite {
        Suite::NoiseSweep => vec![1.0, 2.0, 3.0, 5.0, 10.0],
        Suite::SmoothingAblation => vec![10.0],
        _ => vec![base.synthetic.noise_std],
    });
    let alphas = opts.alphas.clone().unwrap_or_else(|| match suite {
        Suite::AlphaSweep => (1..=9).map(|i| i as f64 / 10.0).collect(),
        _ => vec![base.alpha],
    });
    let datasets = opts
        .datasets
        .clone()
        .unwrap_or_else(|| vec!["iris".to_string(), "wine".to_string()]);
    let mut cells = Vec::new();
    match suite {
        Suite::NoiseSweep => {
            for &x in &noise {
                for seed in 0..seeds {
                    let cfg = synthetic_cfg(base, x, seed);
                    for &a in &alphas {
                        let mut c = with_alg(cfg.clone(), Algorithm::Lsc);
                        c.alpha = a;
                        cells.push(make_cell(suite, "synthetic", c, Some(x)));
                    }
                    cells.push(make_cell(suite, "synthetic", with_alg(cfg, Algorithm::Kmeans), Some(x)));
                }
            }
        }
        Suite::SmoothingAblation => {
            for &x in &noise {
                for seed in 0..seeds {
                    let cfg = with_alg(synthetic_cfg(base, x, seed), Algorithm::Lsc);
                    let on = with_smoothing(cfg.clone(), true);
                    cells.push(make_cell(suite, "synthetic", on, Some(x)));
                    cells.push(make_cell(suite, "synthetic", with_smoothing(cfg, false), Some(x)));
                }
            }
        }
        Suite::AlphaSweep | Suite::Realworld => {
            for name in &datasets {
                let synthetic = name == "synthetic";
                for seed in 0..seeds {
                    let mut cfg = if synthetic {
                        synthetic_cfg(base, base.synthetic.noise_std, seed)
                    } else {
                        let mut c = base.clone();
                        c.source = Some(source_for(name));
                        c.seed = seed;
                        c
                    };
                    cfg.alg = Algorithm::Lsc;
                    let noise_col = synthetic.then_some(cfg.synthetic.noise_std);
                    for &a in &alphas {
                        let mut c = cfg.clone();
                        c.alpha = a;
                        cells.push(make_cell(suite, name, c, noise_col));
                    }
                    if suite == Suite::Realworld {
                        cells.push(make_cell(suite, name, with_alg(cfg, Algorithm::Kmeans), noise_col));
                    }
                }
            }
        }
        Suite::Timing => {
            for &d in &opts.ds {
                for &n in &opts.ns {
                    for seed in 0..seeds {
                        let mut cfg = with_alg(synthetic_cfg(base, noise[0], seed), Algorithm::Lsc);
                        cfg.synthetic.n_samples = n;
                        cfg.synthetic.n_features = d;
                        cfg.dtw = DtwChoice::Fast;
                        cells.push(make_cell(suite, "synthetic", cfg, Some(noise[0])));
                    }
                }
            }
        }
    }
    cells
}

fn run_cell(cell: &Cell, out: Option<&Path>) -> RunRow {
    let mut row = cell.row.clone();
    let result = resolve(cell.config.clone()).and_then(|r| {
        let output = execute(&r)?;
        if let Some(dir) = out {
            write_outputs(&dir.join("cells").join(&cell.id), &output)?;
        }
        Ok((r, output))
    });
    match result {
        Ok((r, output)) => {
            let m = &output.report.metrics;
            row.status = "ok".into();
            row.n = r.dataset.matrix.n_samples();
            row.d = r.dataset.matrix.n_features();
            row.ari = m.ari;
            row.ami = m.ami;
            row.homogeneity = m.homogeneity;
            row.completeness = m.completeness;
            row.v_measure = m.v_measure;
            row.silhouette = m.silhouette;
            row.iterations = Some(output.model.iterations_run);
            row.converged = Some(output.model.converged);
            row.distance_secs = Some(output.report.timings.distance_secs);
            row.total_secs = Some(output.report.timings.total_secs);
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

fn timing_fits(rows: &[RunRow]) -> Vec<TimingFit> {
    let mut by_d: BTreeMap<usize, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.ok()) {
        if let Some(t) = r.total_secs {
            by_d.entry(r.d).or_default().entry(r.n).or_default().push(t);
        }
    }
    by_d.into_iter()
        .map(|(d, per_n)| {
            let points: Vec<(usize, f64)> = per_n
                .into_iter()
                .map(|(n, ts)| (n, ts.iter().sum::<f64>() / ts.len() as f64))
                .collect();
            let fit = linear_fit(&points.iter().map(|&(n, t)| (n as f64, t)).collect::<Vec<_>>());
            TimingFit { d, points, fit }
        })
        .collect()
}

fn csv_string<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `aggregate.csv`: one row per configuration with `_mean`/`_std` columns.
pub fn aggregate_csv(agg: &[AggregateRow]) -> String {
    let metrics = ["ari", "ami", "homogeneity", "completeness", "v_measure", "silhouette", "total_secs"];
    let mut s = String::from("dataset,algorithm,n,d,noise,alpha,smoothing,runs,failed");
    for m in metrics {
        let _ = write!(s, ",{m}_mean,{m}_std");
    }
    s.push_str(",ari_best\n");
    for a in agg {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            a.dataset,
            a.algorithm,
            a.n,
            a.d,
            opt(a.noise),
            opt(a.alpha),
            a.smoothing,
            a.runs,
            a.failed
        );
        for st in [
            a.ari,
            a.ami,
            a.homogeneity,
            a.completeness,
            a.v_measure,
            a.silhouette,
            a.total_secs,
        ] {
            let _ = write!(s, ",{},{}", opt(st.mean), opt(st.std));
        }
        let _ = writeln!(s, ",{}", opt(a.ari_best));
    }
    s
}

/// Human-readable table in the layout of the paper tables: one row per
/// configuration, each score as mean ± std.
pub fn aggregate_table(agg: &[AggregateRow]) -> String {
    let pm = |st: Stat| match (st.mean, st.std) {
        (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
        _ => "-".to_string(),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<7} {:>6} {:>4} {:>6} {:>6} {:<8} {:>17} {:>17} {:>17} {:>17} {:>17} {:>17} {:>8} {:>15}",
        "dataset", "alg", "n", "d", "noise", "alpha", "smooth", "ARI", "AMI", "homogeneity", "completeness",
        "V", "silhouette", "best ARI", "seconds"
    );
    for a in agg {
        let _ = writeln!(
            s,
            "{:<10} {:<7} {:>6} {:>4} {:>6} {:>6} {:<8} {:>17} {:>17} {:>17} {:>17} {:>17} {:>17} {:>8} {:>15}{}",
            a.dataset,
            a.algorithm,
            a.n,
            a.d,
            a.noise.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
            a.alpha.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into()),
            a.smoothing,
            pm(a.ari),
            pm(a.ami),
            pm(a.homogeneity),
            pm(a.completeness),
            pm(a.v_measure),
            pm(a.silhouette),
            a.ari_best.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
            match (a.total_secs.mean, a.total_secs.std) {
                (Some(m), Some(sd)) => format!("{m:.3} ± {sd:.3}"),
                _ => "-".into(),
            },
            if a.failed > 0 { format!("  ({} failed)", a.failed) } else { String::new() }
        );
    }
    s
}

pub fn read_runs_csv(path: &Path) -> CliResult<Vec<RunRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| CliError::Data(format!("{}: {e}", path.display()))))
        .collect()
}

/// Runs every cell of `suite` in order and writes the result files when
/// `opts.out` is set. Cell failures are recorded in their rows; the suite
/// always runs to the end.
pub fn run_suite(suite: Suite, opts: &BenchOptions) -> CliResult<BenchResult> {
    let cells = cells_for(suite, opts);
    let out = opts.out.as_deref();
    let mut rows = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let row = run_cell(cell, out);
        if !opts.quiet {
            eprintln!(
                "[{}/{}] {} {}{}",
                i + 1,
                cells.len(),
                cell.id,
                row.status,
                row.ari.map(|a| format!(" ari={a:.4}")).unwrap_or_default()
            );
        }
        rows.push(row);
    }
    let agg = aggregate(&rows);
    let timing = if suite == Suite::Timing { timing_fits(&rows) } else { Vec::new() };
    let summary = BenchSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        suite,
        cells: rows.len(),
        failed: rows.iter().filter(|r| !r.ok()).count(),
        aggregate: agg,
        timing,
    };
    if let Some(dir) = out {
        write_atomic(&dir.join("runs.csv"), csv_string(&rows)?.as_bytes())?;
        write_atomic(&dir.join("aggregate.csv"), aggregate_csv(&summary.aggregate).as_bytes())?;
        write_atomic(&dir.join("summary.json"), report_json(&summary)?.as_bytes())?;
        if suite == Suite::Timing {
            let series: Vec<Series> = summary
                .timing
                .iter()
                .map(|t| Series {
                    name: match &t.fit {
                        Some(f) => format!("d = {} (R² = {:.3})", t.d, f.r2),
                        None => format!("d = {}", t.d),
                    },
                    points: t.points.iter().map(|&(n, s)| (n as f64, s)).collect(),
                })
                .collect();
            let svg = scaling_svg(&series, "LSC wall-clock vs n", "n (samples)", "seconds");
            write_atomic(&dir.join("timing.svg"), svg.as_bytes())?;
        }
    }
    Ok(BenchResult { rows, summary })
}

/// Parses `a,b,c` or `start:end:step` (inclusive end).
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let bad = |e: String| CliError::Usage(format!("bad list {s:?}: {e}"));
    if let [start, end, step] = s.split(':').collect::<Vec<_>>()[..] {
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
        let (start, end, step) = (p(start)?, p(end)?, p(step)?);
        if !(step > 0.0) || end < start {
            return Err(bad("need step > 0 and end >= start".into()));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        // snap to a 1e-9 grid so that 0.1 + 2 * 0.1 prints as 0.3
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
        .collect()
}
