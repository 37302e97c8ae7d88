//! Run configuration.
//!
//! Every setting has a flat dotted key. Config files use one `key = value`
//! pair per line; `#` starts a comment and blank lines are ignored. A JSON
//! run report is also accepted, in which case its `config` object is read.
//! Precedence is defaults, then the file, then command-line flags.
//!
//! | key | values |
//! |-----|--------|
//! | `data.source` | file path, `builtin:iris`, `builtin:wine`, `synthetic` |
//! | `data.label` | `auto`, `none`, a column name, or `#<index>` (0-based) |
//! | `data.delimiter` | single character, default `,` |
//! | `data.header` | `true` / `false` |
//! | `synthetic.n`, `.d`, `.k`, `.noise`, `.seed`, `.spread`, `.base_std` | generator settings |
//! | `alg` | `lsc` / `kmeans` |
//! | `k` | cluster count (defaults to the number of truth classes) |
//! | `seed`, `max_iter` | run seed and iteration cap |
//! | `lsc.alpha`, `lsc.smooth`, `lsc.window`, `lsc.order` | blend weight and smoothing |
//! | `lsc.dtw` | `exact`, `fast`, `auto` |
//! | `lsc.radius`, `lsc.min_size` | FastDTW settings |
//! | `lsc.init` | `random` / `kmeans++` |
//! | `lsc.tol`, `lsc.scale`, `lsc.dtw_normalize`, `standardize` | remaining options |

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lsc_core::{DtwNormalize, InitStrategy, ScaleMode, SyntheticSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Path(PathBuf),
    Builtin(String),
    Synthetic,
}

impl Display for DataSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataSource::Path(p) => write!(f, "{}", p.display()),
            DataSource::Builtin(name) => write!(f, "builtin:{name}"),
            DataSource::Synthetic => f.write_str("synthetic"),
        }
    }
}

impl DataSource {
    pub fn parse(s: &str) -> Self {
        if s == "synthetic" {
            DataSource::Synthetic
        } else if let Some(name) = s.strip_prefix("builtin:") {
            DataSource::Builtin(name.to_string())
        } else {
            DataSource::Path(PathBuf::from(s))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelChoice {
    /// Use a column named `label` or `class` if the header has one.
    Auto,
    None,
    Name(String),
    Index(usize),
}

impl Display for LabelChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelChoice::Auto => f.write_str("auto"),
            LabelChoice::None => f.write_str("none"),
            LabelChoice::Name(n) => f.write_str(n),
            LabelChoice::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Lsc,
    Kmeans,
}

impl Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Lsc => "lsc",
            Algorithm::Kmeans => "kmeans",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtwChoice {
    Exact,
    Fast,
    /// Exact when `n * k <= AUTO_EXACT_LIMIT`, FastDTW otherwise.
    Auto,
}

/// Largest number of line-center pairs per assignment step for which
/// `lsc.dtw = auto` picks exact DTW.
pub const AUTO_EXACT_LIMIT: usize = 1000;

impl Display for DtwChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DtwChoice::Exact => "exact",
            DtwChoice::Fast => "fast",
            DtwChoice::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<DataSource>,
    pub label: LabelChoice,
    pub delimiter: u8,
    pub header: bool,
    pub synthetic: SyntheticSpec,
    pub alg: Algorithm,
    pub k: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub standardize: bool,
    pub alpha: f64,
    pub smooth: bool,
    /// `None` means "default, shrunk to fit short lines".
    pub window: Option<usize>,
    pub order: Option<usize>,
    pub dtw: DtwChoice,
    pub radius: usize,
    pub min_size: usize,
    pub init: InitStrategy,
    pub tol: f64,
    pub scale: ScaleMode,
    pub dtw_normalize: DtwNormalize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: None,
            label: LabelChoice::Auto,
            delimiter: b',',
            header: true,
            synthetic: SyntheticSpec::default(),
            alg: Algorithm::Lsc,
            k: None,
            seed: 0,
            max_iter: lsc_core::cluster::DEFAULT_MAX_ITER,
            standardize: true,
            alpha: 0.5,
            smooth: false,
            window: None,
            order: None,
            dtw: DtwChoice::Auto,
            radius: 1,
            min_size: 4,
            init: InitStrategy::Random,
            tol: lsc_core::cluster::DEFAULT_TOL,
            scale: ScaleMode::Raw,
            dtw_normalize: DtwNormalize::None,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("{key} = {value:?}: {e}")))
}

fn flag(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("{key} expects on/off, got {value:?}"))),
    }
}

fn bad(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Usage(format!("{key} expects {expected}, got {value:?}"))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key {
            "data.source" => self.source = Some(DataSource::parse(value)),
            "data.label" => {
                self.label = match value {
                    "auto" => LabelChoice::Auto,
                    "none" => LabelChoice::None,
                    v if v.starts_with('#') => LabelChoice::Index(num(key, &v[1..])?),
                    v => LabelChoice::Name(v.to_string()),
                }
            }
            "data.delimiter" => {
                let bytes = value.as_bytes();
                if bytes.len() != 1 {
                    return Err(bad(key, value, "a single ASCII character"));
                }
                self.delimiter = bytes[0];
            }
            "data.header" => self.header = flag(key, value)?,
            "synthetic.n" => self.synthetic.n_samples = num(key, value)?,
            "synthetic.d" => self.synthetic.n_features = num(key, value)?,
            "synthetic.k" => self.synthetic.n_clusters = num(key, value)?,
            "synthetic.noise" => self.synthetic.noise_std = num(key, value)?,
            "synthetic.seed" => self.synthetic.seed = num(key, value)?,
            "synthetic.spread" => self.synthetic.center_spread = num(key, value)?,
            "synthetic.base_std" => self.synthetic.base_std = num(key, value)?,
            "alg" => {
                self.alg = match value {
                    "lsc" => Algorithm::Lsc,
                    "kmeans" | "km" => Algorithm::Kmeans,
                    _ => return Err(bad(key, value, "lsc or kmeans")),
                }
            }
            "k" => self.k = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "standardize" => self.standardize = flag(key, value)?,
            "lsc.alpha" => self.alpha = num(key, value)?,
            "lsc.smooth" => self.smooth = flag(key, value)?,
            "lsc.window" => self.window = Some(num(key, value)?),
            "lsc.order" => self.order = Some(num(key, value)?),
            "lsc.dtw" => {
                self.dtw = match value {
                    "exact" => DtwChoice::Exact,
                    "fast" => DtwChoice::Fast,
                    "auto" => DtwChoice::Auto,
                    _ => return Err(bad(key, value, "exact, fast or auto")),
                }
            }
            "lsc.radius" => self.radius = num(key, value)?,
            "lsc.min_size" => self.min_size = num(key, value)?,
            "lsc.init" => {
                self.init = match value {
                    "random" => InitStrategy::Random,
                    "kmeans++" | "kmeanspp" => InitStrategy::KMeansPlusPlus,
                    _ => return Err(bad(key, value, "random or kmeans++")),
                }
            }
            "lsc.tol" => self.tol = num(key, value)?,
            "lsc.scale" => {
                self.scale = match value {
                    "raw" => ScaleMode::Raw,
                    "normalized" => ScaleMode::Normalized,
                    _ => return Err(bad(key, value, "raw or normalized")),
                }
            }
            "lsc.dtw_normalize" => {
                self.dtw_normalize = match value {
                    "none" => DtwNormalize::None,
                    "length" => DtwNormalize::Length,
                    _ => return Err(bad(key, value, "none or length")),
                }
            }
            _ => return Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> CliResult<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Reads a `key = value` file or a JSON run report and applies it.
    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_config_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// All settings as key/value strings. Feeding the result back through
    /// [`RunConfig::set`] reproduces `self`.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        if let Some(src) = &self.source {
            put("data.source", src.to_string());
            if matches!(src, DataSource::Synthetic) {
                let s = &self.synthetic;
                put("synthetic.n", s.n_samples.to_string());
                put("synthetic.d", s.n_features.to_string());
                put("synthetic.k", s.n_clusters.to_string());
                put("synthetic.noise", s.noise_std.to_string());
                put("synthetic.seed", s.seed.to_string());
                put("synthetic.spread", s.center_spread.to_string());
                put("synthetic.base_std", s.base_std.to_string());
            }
            if matches!(src, DataSource::Path(_)) {
                put("data.label", self.label.to_string());
                put("data.delimiter", (self.delimiter as char).to_string());
                put("data.header", self.header.to_string());
            }
        }
        put("alg", self.alg.to_string());
        if let Some(k) = self.k {
            put("k", k.to_string());
        }
        put("seed", self.seed.to_string());
        put("max_iter", self.max_iter.to_string());
        put("standardize", self.standardize.to_string());
        if self.alg == Algorithm::Lsc {
            put("lsc.alpha", self.alpha.to_string());
            put("lsc.smooth", if self.smooth { "on" } else { "off" }.to_string());
            if let Some(w) = self.window {
                put("lsc.window", w.to_string());
            }
            if let Some(o) = self.order {
                put("lsc.order", o.to_string());
            }
            put("lsc.dtw", self.dtw.to_string());
            put("lsc.radius", self.radius.to_string());
            put("lsc.min_size", self.min_size.to_string());
            put(
                "lsc.init",
                match self.init {
                    InitStrategy::Random => "random",
                    InitStrategy::KMeansPlusPlus => "kmeans++",
                }
                .to_string(),
            );
            put("lsc.tol", self.tol.to_string());
            put(
                "lsc.scale",
                match self.scale {
                    ScaleMode::Raw => "raw",
                    ScaleMode::Normalized => "normalized",
                }
                .to_string(),
            );
            put(
                "lsc.dtw_normalize",
                match self.dtw_normalize {
                    DtwNormalize::None => "none",
                    DtwNormalize::Length => "length",
                }
                .to_string(),
            );
        }
        m
    }

    /// The echo in config-file form.
    pub fn to_config_text(&self) -> String {
        self.echo()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Parses config text into ordered `(key, value)` pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, String> {
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = v
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or("JSON config must have a \"config\" object")?;
        return obj
            .iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => Ok((k.clone(), s.clone())),
                other => Ok((k.clone(), other.to_string())),
            })
            .collect();
    }
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            // `#` right after `=` is a label index, not a comment
            Some(p) if !raw[..p].trim_end().ends_with('=') => &raw[..p],
            _ => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}
