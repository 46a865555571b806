//! Exact per-dimension statistics over raw vectors.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{check_dim, Error, Result};

/// Per-dimension mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn partition_stats(vectors: &[Vec<f64>]) -> Result<Moments> {
    let first = vectors.first().ok_or(Error::EmptySet)?;
    let dim = first.len();
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in vectors {
        check_dim(dim, v.len())?;
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    // two-pass variance
    let mut var = vec![0.0; dim];
    for v in vectors {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok(Moments { mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub dimensions: Vec<DimensionSummary>,
}

pub fn summarize_dataset(ds: &Dataset) -> Result<DatasetSummary> {
    let m = partition_stats(&ds.rows)?;
    let dimensions = ds
        .dimension_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = ds.rows.iter().map(|r| r[j]);
            DimensionSummary {
                name: name.clone(),
                mean: m.mean[j],
                std: m.std[j],
                min: col.clone().fold(f64::INFINITY, f64::min),
                max: col.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(DatasetSummary {
        rows: ds.len(),
        dimensions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let m = partition_stats(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        assert_eq!(m.mean, vec![2.0, 2.0]);
        assert_eq!(m.std, vec![1.0, 1.0]);
    }

    #[test]
    fn single_and_duplicates() {
        let v = vec![4.0, 0.5, 9.0];
        let m = partition_stats(std::slice::from_ref(&v)).unwrap();
        assert_eq!((m.mean, m.std), (v.clone(), vec![0.0; 3]));
        let m = partition_stats(&[v.clone(), v.clone(), v.clone()]).unwrap();
        assert_eq!(m.std, vec![0.0; 3]);
        assert!(m.mean.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn empty_set() {
        assert!(matches!(partition_stats(&[]), Err(Error::EmptySet)));
    }
}
