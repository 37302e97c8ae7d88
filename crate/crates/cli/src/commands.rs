use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use lsc_core::data::DatasetMeta;
use lsc_core::{apply_standardizer, fit_standardizer, generate_synthetic, write_csv, SyntheticSpec};

use crate::bench::{aggregate_table, parse_list, run_suite, BenchOptions, Suite};
use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::plot::line_space_svg;
use crate::run::{execute, load_source, read_labels, report_json, resolve, score, write_atomic, write_outputs};

#[derive(Debug, Parser)]
#[command(name = "lsc", version, about = "Line space clustering: cluster, evaluate, benchmark, plot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded Gaussian-blob dataset (CSV plus .meta.json sidecar).
    Generate(GenerateArgs),
    /// Cluster a dataset with LSC or K-means.
    Cluster(ClusterArgs),
    /// Score a label file against truth and/or data.
    Evaluate(EvaluateArgs),
    /// Run a benchmark suite.
    Benchmark(BenchmarkArgs),
    /// Draw samples as lines over feature index (SVG).
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cluster means are drawn from [-spread, spread]^d.
    #[arg(long, default_value_t = 10.0)]
    pub spread: f64,
    /// Within-cluster standard deviation before noise.
    #[arg(long, default_value_t = 1.0)]
    pub base_std: f64,
    #[arg(short, long)]
    pub out: PathBuf,
}

/// Flags shared by `cluster` and `benchmark`; each maps to a config key.
#[derive(Debug, Args)]
pub struct AlgorithmFlags {
    /// Key = value config file or a JSON run report.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// on | off
    #[arg(long)]
    pub smooth: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    /// exact | fast | auto
    #[arg(long)]
    pub dtw: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub min_size: Option<usize>,
    /// random | kmeans++
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// raw | normalized
    #[arg(long)]
    pub scale: Option<String>,
    /// none | length
    #[arg(long)]
    pub dtw_normalize: Option<String>,
    /// on | off
    #[arg(long)]
    pub standardize: Option<String>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl AlgorithmFlags {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut p = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                p.push((k.to_string(), v));
            }
        };
        put("k", self.k.map(|v| v.to_string()));
        put("lsc.alpha", self.alpha.map(|v| v.to_string()));
        put("lsc.smooth", self.smooth.clone());
        put("lsc.window", self.window.map(|v| v.to_string()));
        put("lsc.order", self.order.map(|v| v.to_string()));
        put("lsc.dtw", self.dtw.clone());
        put("lsc.radius", self.radius.map(|v| v.to_string()));
        put("lsc.min_size", self.min_size.map(|v| v.to_string()));
        put("lsc.init", self.init.clone());
        put("max_iter", self.max_iter.map(|v| v.to_string()));
        put("lsc.tol", self.tol.map(|v| v.to_string()));
        put("lsc.scale", self.scale.clone());
        put("lsc.dtw_normalize", self.dtw_normalize.clone());
        put("standardize", self.standardize.clone());
        p
    }

    /// Defaults, then the config file, then flags, then `--set` pairs.
    pub fn apply_to(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        self.apply_flags(cfg)
    }

    /// Flags and `--set` pairs only.
    pub fn apply_flags(&self, cfg: &mut RunConfig) -> CliResult<()> {
        for (k, v) in self.pairs() {
            cfg.set(&k, &v)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct DataFlags {
    /// Label column name, `#<index>`, `none` or `auto`.
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl DataFlags {
    fn apply_to(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(l) = &self.label_column {
            cfg.set("data.label", l)?;
        }
        if let Some(d) = self.delimiter {
            cfg.set("data.delimiter", &d.to_string())?;
        }
        if self.no_header {
            cfg.set("data.header", "false")?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// CSV path, `builtin:iris`, `builtin:wine` or `synthetic`.
    pub dataset: Option<String>,
    /// lsc | kmeans
    #[arg(long)]
    pub alg: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub algo: AlgorithmFlags,
    #[command(flatten)]
    pub data: DataFlags,
    /// Output directory for labels.csv, centers.csv and report.json.
    #[arg(short, long, default_value = "lsc_out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted labels CSV.
    #[arg(long)]
    pub labels: PathBuf,
    /// Truth labels CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Dataset for silhouette (and truth, if it has a label column).
    #[arg(long)]
    pub data: Option<String>,
    #[command(flatten)]
    pub data_flags: DataFlags,
    /// Also write the report here.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// noise-sweep | alpha-sweep | realworld | smoothing-ablation | timing
    pub suite: String,
    /// Repetitions; seeds are 0..N (default 10, timing 3).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Noise levels, `a,b,c` or `start:end:step`.
    #[arg(long)]
    pub noise: Option<String>,
    /// Alpha values, `a,b,c` or `start:end:step`.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Comma-separated: iris, wine, synthetic or CSV paths.
    #[arg(long)]
    pub datasets: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Sample counts for the timing suite.
    #[arg(long, default_value = "250,500,1000")]
    pub ns: String,
    /// Feature counts for the timing suite.
    #[arg(long, default_value = "32")]
    pub ds: String,
    #[command(flatten)]
    pub algo: AlgorithmFlags,
    #[arg(short, long, default_value = "bench_out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV path, `builtin:iris`, `builtin:wine` or `synthetic`.
    pub dataset: String,
    /// Labels CSV used for colors.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Plot standardized values.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub data_flags: DataFlags,
    #[arg(short, long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

/// `ds.csv` -> `ds.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

pub fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        n_samples: a.n,
        n_features: a.d,
        n_clusters: a.k,
        noise_std: a.noise,
        seed: a.seed,
        center_spread: a.spread,
        base_std: a.base_std,
    };
    let ds = generate_synthetic(&spec)?;
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    write_csv(&ds, &a.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    let meta = meta_path(&a.out);
    DatasetMeta::for_synthetic(&spec, &ds)
        .write(&meta)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("wrote {} ({} x {}) and {}", a.out.display(), a.n, a.d, meta.display());
    Ok(())
}

pub fn cmd_cluster(a: &ClusterArgs) -> CliResult<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &a.algo.config {
        cfg.apply_file(path)?;
    }
    if let Some(ds) = &a.dataset {
        cfg.source = Some(DataSource::parse(ds));
    }
    a.data.apply_to(&mut cfg)?;
    if let Some(alg) = &a.alg {
        cfg.set("alg", alg)?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    a.algo.apply_flags(&mut cfg)?;

    let resolved = resolve(cfg)?;
    for note in &resolved.notes {
        eprintln!("note: {note}");
    }
    let output = execute(&resolved)?;
    write_outputs(&a.out, &output)?;
    let m = &output.report.metrics;
    println!(
        "{} k={} on {} ({} x {}): {} iterations, converged={}",
        output.report.algorithm,
        output.model.k(),
        output.report.dataset.name,
        output.report.dataset.n_samples,
        output.report.dataset.n_features,
        output.model.iterations_run,
        output.model.converged
    );
    if let Some(ari) = m.ari {
        println!("ARI {ari:.4}");
    }
    println!("outputs in {}", a.out.display());
    Ok(())
}

#[derive(Debug, serde::Serialize)]
struct EvaluateReport {
    schema_version: u32,
    labels: String,
    truth: Option<String>,
    data: Option<String>,
    n_samples: usize,
    metrics: lsc_core::MetricReport,
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let pred = read_labels(&a.labels)?;
    let mut truth = match &a.truth {
        Some(p) => Some(read_labels(p)?),
        None => None,
    };
    let dataset = match &a.data {
        Some(src) => {
            let mut cfg = RunConfig {
                source: Some(DataSource::parse(src)),
                ..RunConfig::default()
            };
            a.data_flags.apply_to(&mut cfg)?;
            Some(load_source(&cfg)?)
        }
        None => None,
    };
    if truth.is_none() {
        truth = dataset.as_ref().and_then(|d| d.truth.as_ref()).map(|t| t.labels().to_vec());
    }
    if let Some(t) = &truth {
        if t.len() != pred.len() {
            return Err(CliError::Data(format!(
                "truth has {} labels but prediction has {}",
                t.len(),
                pred.len()
            )));
        }
    }
    let metrics = match &dataset {
        Some(ds) => score(&ds.matrix, truth.as_deref(), &pred)?,
        None => match &truth {
            Some(t) => lsc_core::MetricReport::external(t, &pred)?,
            None => {
                return Err(CliError::Usage(
                    "nothing to evaluate against: give --truth and/or --data".into(),
                ))
            }
        },
    };
    let report = EvaluateReport {
        schema_version: crate::run::REPORT_SCHEMA_VERSION,
        labels: a.labels.display().to_string(),
        truth: a.truth.as_ref().map(|p| p.display().to_string()),
        data: a.data.clone(),
        n_samples: pred.len(),
        metrics,
    };
    let json = report_json(&report)?;
    print!("{json}");
    if let Some(out) = &a.out {
        write_atomic(out, json.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> CliResult<()> {
    let suite: Suite = a.suite.parse()?;
    let mut base = crate::bench::bench_base();
    a.algo.apply_to(&mut base)?;
    if let Some(n) = a.n {
        base.synthetic.n_samples = n;
    }
    if let Some(d) = a.d {
        base.synthetic.n_features = d;
    }
    if let Some(k) = base.k {
        base.synthetic.n_clusters = k;
    }
    let usizes = |s: &str| -> CliResult<Vec<usize>> {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|e| CliError::Usage(format!("bad list {s:?}: {e}"))))
            .collect()
    };
    let opts = BenchOptions {
        seeds: a.seeds,
        noise: a.noise.as_deref().map(parse_list).transpose()?,
        alphas: a.alphas.as_deref().map(parse_list).transpose()?,
        datasets: a
            .datasets
            .as_ref()
            .map(|s| s.split(',').map(|x| x.trim().to_string()).collect()),
        ns: usizes(&a.ns)?,
        ds: usizes(&a.ds)?,
        base,
        out: Some(a.out.clone()),
        quiet: false,
    };
    let result = run_suite(suite, &opts)?;
    print!("{}", aggregate_table(&result.summary.aggregate));
    for t in &result.summary.timing {
        if let Some(f) = &t.fit {
            println!(
                "timing d={}: seconds = {:.3e} * n + {:.3e}, R^2 = {:.4}",
                t.d, f.slope, f.intercept, f.r2
            );
        }
    }
    println!("results in {}", a.out.display());
    if result.failed() > 0 {
        return Err(CliError::Runtime(format!(
            "{} of {} runs failed (see runs.csv)",
            result.failed(),
            result.summary.cells
        )));
    }
    Ok(())
}

pub fn cmd_plot(a: &PlotArgs) -> CliResult<()> {
    let mut cfg = RunConfig {
        source: Some(DataSource::parse(&a.dataset)),
        ..RunConfig::default()
    };
    a.data_flags.apply_to(&mut cfg)?;
    let ds = load_source(&cfg)?;
    let labels = match &a.labels {
        Some(p) => {
            let l = read_labels(p)?;
            if l.len() != ds.matrix.n_samples() {
                return Err(CliError::Data(format!(
                    "{} labels for {} samples",
                    l.len(),
                    ds.matrix.n_samples()
                )));
            }
            Some(l)
        }
        None => None,
    };
    let data = if a.standardize {
        apply_standardizer(&ds.matrix, &fit_standardizer(&ds.matrix))?
    } else {
        ds.matrix.clone()
    };
    let title = format!("{} in line space", ds.name);
    let svg = line_space_svg(&data, labels.as_deref(), &title);
    write_atomic(&a.out, svg.as_bytes())?;
    println!("wrote {}", a.out.display());
    Ok(())
}
