//! Labeled datasets: seeded Gaussian blobs, CSV loading and writing, and
//! the bundled Iris and Wine tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};
use crate::types::{DataMatrix, LabelVector};

/// Identity of the random stream behind [`generate_synthetic`]; recorded in
/// dataset metadata.
pub const PRNG_ID: &str =
    "ChaCha8Rng (rand_chacha 0.9, seed_from_u64) + StandardNormal ziggurat (rand_distr 0.5)";

const IRIS_CSV: &str = include_str!("../data/iris.csv");
const WINE_CSV: &str = include_str!("../data/wine.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub matrix: DataMatrix,
    pub truth: Option<LabelVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_clusters: usize,
    pub noise_std: f64,
    pub seed: u64,
    /// Cluster means are drawn from `[-center_spread, center_spread]^d`.
    pub center_spread: f64,
    /// Within-cluster standard deviation before noise is added.
    pub base_std: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 500,
            n_features: 32,
            n_clusters: 5,
            noise_std: 1.0,
            seed: 0,
            center_spread: 10.0,
            base_std: 1.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_features == 0 || self.n_clusters == 0 {
            return Err(LscError::InvalidConfig(
                "n_samples, n_features and n_clusters must be positive".into(),
            ));
        }
        if self.n_clusters > self.n_samples {
            return Err(LscError::TooManyClusters {
                k: self.n_clusters,
                n: self.n_samples,
            });
        }
        for (name, v) in [
            ("noise_std", self.noise_std),
            ("center_spread", self.center_spread),
            ("base_std", self.base_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LscError::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Gaussian blobs with additive Gaussian noise.
///
/// Stream order: all cluster means (cluster-major), then for each cluster
/// and each of its samples, per feature one base draw followed by one noise
/// draw, then a Fisher-Yates shuffle of the rows.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d, k) = (spec.n_samples, spec.n_features, spec.n_clusters);
    let s = spec.center_spread;
    let means: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-s..=s)).collect())
        .collect();

    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        let count = n / k + usize::from(c < n % k);
        for _ in 0..count {
            let row: Vec<f64> = mean
                .iter()
                .map(|&mu| {
                    let base: f64 = rng.sample(StandardNormal);
                    let noise: f64 = rng.sample(StandardNormal);
                    mu + spec.base_std * base + spec.noise_std * noise
                })
                .collect();
            rows.push(row);
            labels.push(c);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let shuffled_rows: Vec<&[f64]> = order.iter().map(|&i| rows[i].as_slice()).collect();
    let shuffled_labels = order.iter().map(|&i| labels[i]).collect();
    Ok(LabeledDataset {
        name: format!(
            "synthetic-n{n}-d{d}-k{k}-noise{}-seed{}",
            spec.noise_std, spec.seed
        ),
        matrix: DataMatrix::from_rows(&shuffled_rows)?,
        truth: Some(LabelVector::new(shuffled_labels, k)?),
    })
}

/// JSON sidecar written next to generated datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema_version: u32,
    pub name: String,
    pub prng: String,
    pub seed: u64,
    pub spec: SyntheticSpec,
    pub n_samples: usize,
    pub n_features: usize,
}

impl DatasetMeta {
    pub fn for_synthetic(spec: &SyntheticSpec, ds: &LabeledDataset) -> Self {
        Self {
            schema_version: 1,
            name: ds.name.clone(),
            prng: PRNG_ID.to_string(),
            seed: spec.seed,
            spec: *spec,
            n_samples: ds.matrix.n_samples(),
            n_features: ds.matrix.n_features(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| LscError::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    None,
    Name(String),
    /// 0-based column position.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    pub delimiter: u8,
    pub has_header: bool,
    /// `(rows, features)` the file must have, if given.
    pub expected_shape: Option<(usize, usize)>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::None,
            delimiter: b',',
            has_header: true,
            expected_shape: None,
        }
    }
}

impl CsvSchema {
    pub fn labeled(name: &str) -> Self {
        Self {
            label_column: LabelColumn::Name(name.to_string()),
            ..Self::default()
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LscError::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, schema, &name)
}

/// Parses a labeled numeric table. Errors carry 1-based file line and
/// column numbers.
pub fn read_csv(reader: impl Read, schema: &CsvSchema, name: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let label_idx = match &schema.label_column {
        LabelColumn::None => None,
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(col) => {
            if !schema.has_header {
                return Err(LscError::InvalidConfig(format!(
                    "label column '{col}' given by name but the file has no header"
                )));
            }
            let headers = rdr.headers()?;
            let pos = headers.iter().position(|h| h == col).ok_or_else(|| {
                LscError::InvalidConfig(format!("label column '{col}' not found in header"))
            })?;
            Some(pos)
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if let Some(li) = label_idx {
            if li >= record.len() {
                return Err(LscError::Parse {
                    row: line,
                    col: li + 1,
                    msg: "label column missing".into(),
                });
            }
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_idx {
                let next = label_ids.len();
                labels.push(*label_ids.entry(cell.to_string()).or_insert(next));
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| LscError::Parse {
                row: line,
                col: c + 1,
                msg: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(LscError::Parse {
                    row: line,
                    col: c + 1,
                    msg: format!("non-finite value '{cell}'"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(LscError::InvalidInput(format!("{name}: no data rows")));
    }
    let matrix = DataMatrix::from_rows(&rows)?;
    if let Some((n, d)) = schema.expected_shape {
        if (matrix.n_samples(), matrix.n_features()) != (n, d) {
            return Err(LscError::InvalidInput(format!(
                "{name}: expected {n}x{d}, found {}x{}",
                matrix.n_samples(),
                matrix.n_features()
            )));
        }
    }
    let truth = label_idx.map(|_| LabelVector::new(labels, label_ids.len())).transpose()?;
    Ok(LabeledDataset {
        name: name.to_string(),
        matrix,
        truth,
    })
}

/// Writes `f1..fd` columns and, when present, a trailing `label` column.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv_to(ds: &LabeledDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = ds.matrix.n_features();
    let mut header: Vec<String> = (1..=d).map(|j| format!("f{j}")).collect();
    if ds.truth.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in ds.matrix.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(t) = &ds.truth {
            rec.push(t.labels()[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| LscError::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LscError::io(path, e))?;
    write_csv_to(ds, file)
}

/// Bundled UCI tables (`iris`, `wine`), label column `class`.
pub fn builtin(name: &str) -> Option<Result<LabeledDataset>> {
    let (text, shape) = match name {
        "iris" => (IRIS_CSV, (150, 4)),
        "wine" => (WINE_CSV, (178, 13)),
        _ => return None,
    };
    let schema = CsvSchema {
        expected_shape: Some(shape),
        ..CsvSchema::labeled("class")
    };
    Some(read_csv(text.as_bytes(), &schema, name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_csv_with_header() {
        let text = "a,b,y\n1,2,cat\n3,4,dog\n";
        let ds = read_csv(text.as_bytes(), &CsvSchema::labeled("y"), "toy").unwrap();
        assert_eq!(ds.matrix, DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        assert_eq!(ds.truth.unwrap().labels(), &[0, 1]);
    }

    #[test]
    fn labels_follow_first_appearance() {
        let text = "x;cls\n1;b\n2;a\n3;b\n4;c\n";
        let schema = CsvSchema {
            label_column: LabelColumn::Index(1),
            delimiter: b';',
            ..CsvSchema::default()
        };
        let ds = read_csv(text.as_bytes(), &schema, "t").unwrap();
        assert_eq!(ds.truth.unwrap().labels(), &[0, 1, 0, 2]);
    }

    #[test]
    fn headerless_unlabeled() {
        let schema = CsvSchema {
            has_header: false,
            ..CsvSchema::default()
        };
        let ds = read_csv("1.5,2\n3,4e1\n".as_bytes(), &schema, "t").unwrap();
        assert_eq!(ds.matrix.values(), &[1.5, 2.0, 3.0, 40.0]);
        assert!(ds.truth.is_none());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = read_csv("a,b\n1,2\n3,x\n".as_bytes(), &CsvSchema::default(), "t").unwrap_err();
        assert!(matches!(err, LscError::Parse { row: 3, col: 2, .. }), "{err}");
        let err = read_csv("a,b\n1,NaN\n".as_bytes(), &CsvSchema::default(), "t").unwrap_err();
        assert!(matches!(err, LscError::Parse { row: 2, col: 2, .. }), "{err}");
    }

    #[test]
    fn shape_check_and_missing_file() {
        let schema = CsvSchema {
            expected_shape: Some((3, 2)),
            ..CsvSchema::default()
        };
        assert!(read_csv("a,b\n1,2\n".as_bytes(), &schema, "t").is_err());
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &CsvSchema::default()),
            Err(LscError::Io { .. })
        ));
    }

    #[test]
    fn bundled_tables() {
        let iris = builtin("iris").unwrap().unwrap();
        assert_eq!((iris.matrix.n_samples(), iris.matrix.n_features()), (150, 4));
        assert_eq!(iris.truth.unwrap().cluster_sizes(), vec![50, 50, 50]);
        let wine = builtin("wine").unwrap().unwrap();
        assert_eq!((wine.matrix.n_samples(), wine.matrix.n_features()), (178, 13));
        assert_eq!(wine.truth.unwrap().n_clusters(), 3);
        assert!(builtin("mnist").is_none());
    }

    #[test]
    fn synthetic_is_deterministic_and_balanced() {
        let spec = SyntheticSpec {
            n_samples: 103,
            n_features: 6,
            n_clusters: 4,
            seed: 9,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let sizes = a.truth.as_ref().unwrap().cluster_sizes();
        assert_eq!(sizes, vec![26, 26, 26, 25]);
        let other = generate_synthetic(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.matrix, other.matrix);
    }

    #[test]
    fn noiseless_samples_sit_on_their_means() {
        let spec = SyntheticSpec {
            n_samples: 20,
            n_features: 3,
            n_clusters: 2,
            noise_std: 0.0,
            base_std: 1e-9,
            seed: 1,
            ..SyntheticSpec::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        let truth = ds.truth.unwrap();
        for c in 0..2 {
            let members: Vec<usize> = (0..20).filter(|&i| truth.labels()[i] == c).collect();
            let first = ds.matrix.row(members[0]);
            for &i in &members {
                for (a, b) in ds.matrix.row(i).iter().zip(first) {
                    assert!((a - b).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn synthetic_spec_validation() {
        let bad = SyntheticSpec {
            n_clusters: 10,
            n_samples: 5,
            ..SyntheticSpec::default()
        };
        assert!(generate_synthetic(&bad).is_err());
        let bad = SyntheticSpec {
            noise_std: -1.0,
            ..SyntheticSpec::default()
        };
        assert!(generate_synthetic(&bad).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = generate_synthetic(&SyntheticSpec {
            n_samples: 30,
            n_features: 5,
            n_clusters: 3,
            seed: 4,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CsvSchema::labeled("label"), &ds.name).unwrap();
        assert_eq!(back.matrix, ds.matrix);
        // first-appearance relabeling is a permutation of the original ids
        let orig = ds.truth.unwrap();
        let got = back.truth.unwrap();
        let mut map = HashMap::new();
        for (a, b) in orig.labels().iter().zip(got.labels()) {
            assert_eq!(*map.entry(*a).or_insert(*b), *b);
        }
    }
}
