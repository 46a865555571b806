//! Dataset ingestion, synthetic Gaussian streams and random partitioning.
//!
//! The loader accepts the public UCI Air Quality layout (semicolon
//! separated, decimal comma, `-200` for missing readings, trailing empty
//! columns) as well as a plain comma/dot CSV whose header carries the five
//! pollutant columns. Rows with a missing or negative reading in any
//! selected column are dropped.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selected columns, in output order.
pub const AIR_QUALITY_COLUMNS: [&str; 5] = ["CO_GT", "NMHC_GT", "C6H6_GT", "NOX_GT", "NO2_GT"];

/// Missing-value marker of the published file.
pub const MISSING_SENTINEL: f64 = -200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub dimension_names: Vec<String>,
    pub source: String,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.dimension_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject malformed rows (bad field count, unparseable or non-finite
    /// numbers) instead of skipping them.
    pub strict: bool,
}

pub fn load_air_quality(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut ds = read_air_quality(BufReader::new(file), opts)?;
    ds.source = path.display().to_string();
    Ok(ds)
}

/// Same as [`load_air_quality`] over any reader.
pub fn read_air_quality<R: Read>(reader: R, opts: LoadOptions) -> Result<Dataset> {
    let mut reader = BufReader::new(reader);
    let mut header_line = String::new();
    reader.read_line(&mut header_line).map_err(|source| Error::Io {
        path: "<input>".into(),
        source,
    })?;
    let delimiter = if header_line.contains(';') { b';' } else { b',' };
    let decimal_comma = delimiter == b';';

    let header: Vec<String> = header_line
        .trim_end_matches(['\r', '\n'])
        .split(delimiter as char)
        .map(normalize_header)
        .collect();
    let mut indices = Vec::with_capacity(AIR_QUALITY_COLUMNS.len());
    let mut missing = Vec::new();
    for name in AIR_QUALITY_COLUMNS {
        match header.iter().position(|h| *h == normalize_header(name)) {
            Some(i) => indices.push(i),
            None => missing.push(name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }

    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) if opts.strict => return Err(e.into()),
            Err(_) => continue,
        };
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, String> = indices
            .iter()
            .map(|&c| {
                let raw = record.get(c).ok_or_else(|| format!("missing field {}", c + 1))?.trim();
                let text = if decimal_comma { raw.replace(',', ".") } else { raw.to_string() };
                let v: f64 = text.parse().map_err(|_| format!("cannot parse {raw:?}"))?;
                if !v.is_finite() {
                    return Err(format!("non-finite value {raw:?}"));
                }
                Ok(v)
            })
            .collect();
        match parsed {
            Ok(values) => {
                if values.iter().any(|v| *v == MISSING_SENTINEL || *v < 0.0) {
                    continue;
                }
                rows.push(values);
            }
            Err(reason) if opts.strict => return Err(Error::Malformed { line, reason }),
            Err(_) => {}
        }
    }
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(Dataset {
        rows,
        dimension_names: AIR_QUALITY_COLUMNS.iter().map(|s| s.to_string()).collect(),
        source: String::new(),
    })
}

/// `CO(GT)`, `co_gt` and `CO_GT` all map to `COGT`.
fn normalize_header(h: &str) -> String {
    h.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_uppercase())
        .collect()
}

/// Replaces negative components with zero.
pub fn clamp_non_negative(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// Deterministic generator for one purpose (`stream`) under a master seed.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub mu: f64,
    pub sigma: f64,
    pub count: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!(
                "scenario needs finite mu and positive sigma, got mu = {}, sigma = {}",
                self.mu, self.sigma
            )));
        }
        if self.count == 0 {
            return Err(Error::Config("scenario vector count must be positive".into()));
        }
        Ok(())
    }
}

/// Infinite iterator of clamped Gaussian vectors.
pub struct GaussianVectors {
    rng: ChaCha8Rng,
    normals: Vec<Normal<f64>>,
}

impl GaussianVectors {
    /// Independent components, component `j` drawn from `Normal(means[j], sigma)`.
    pub fn new(means: &[f64], sigma: f64, rng: ChaCha8Rng) -> Result<Self> {
        let normals = means
            .iter()
            .map(|&m| Normal::new(m, sigma).map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rng, normals })
    }
}

impl Iterator for GaussianVectors {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        loop {
            let v: Vec<f64> = self
                .normals
                .iter()
                .map(|n| n.sample(&mut self.rng).max(0.0))
                .collect();
            if v.iter().any(|c| *c > 0.0) {
                return Some(v);
            }
        }
    }
}

/// `spec.count` vectors of dimension `dim`, each component drawn from
/// `Normal(mu, sigma)` and clamped at zero. All-zero draws are redrawn.
pub fn synth_stream(spec: &ScenarioSpec, dim: usize) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let gen = GaussianVectors::new(&vec![spec.mu; dim], spec.sigma, ChaCha8Rng::seed_from_u64(spec.seed))?;
    Ok(gen.take(spec.count).collect())
}

/// Assigns each of `rows` indices to one of `n` partitions uniformly at
/// random. Partitions may differ in size.
pub fn random_split(rows: usize, n: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::Config("need at least one partition".into()));
    }
    if rows == 0 {
        return Err(Error::EmptySet);
    }
    if n > rows {
        return Err(Error::Config(format!("cannot split {rows} rows into {n} partitions")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = vec![Vec::new(); n];
    for i in 0..rows {
        parts[rng.random_range(0..n)].push(i);
    }
    Ok(parts)
}
