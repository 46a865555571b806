//! Fusion of the metric outcomes into one similarity score.
//!
//! Each metric is an expert. Experts whose outcome sits more than `k`
//! population standard deviations from the mean outcome are outliers and
//! get the floor weight `theta`; the remaining experts split what is left
//! equally. The pooled dissimilarity is the weighted sum of outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{all_dissimilarities, MetricOutcome};
use crate::synopsis::Synopsis;

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_K: f64 = 3.0;

/// Outlier floor weight and deviation multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub theta: f64,
    pub k: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            k: DEFAULT_K,
        }
    }
}

impl EnsembleParams {
    pub fn new(theta: f64, k: f64) -> Result<Self> {
        let p = Self { theta, k };
        p.validate(3)?;
        Ok(p)
    }

    /// Checks `0 < theta < 1/n_metrics` and `k > 0`.
    pub fn validate(&self, n_metrics: usize) -> Result<()> {
        if n_metrics < 2 {
            return Err(Error::Config(format!(
                "at least two metrics are needed, got {n_metrics}"
            )));
        }
        let cap = 1.0 / n_metrics as f64;
        if !(self.theta > 0.0 && self.theta < cap) {
            return Err(Error::Config(format!(
                "theta must lie in (0, 1/{n_metrics}), got {}",
                self.theta
            )));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    theta: f64,
}

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Each weight in `[0, 1]` and the total within 1e-12 of one.
    pub fn is_convex(&self) -> bool {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().all(|w| (0.0..=1.0).contains(w)) && (total - 1.0).abs() <= 1e-12
    }
}

pub fn compute_weights(outcomes: &[f64], theta: f64, k: f64) -> Result<WeightVector> {
    let params = EnsembleParams { theta, k };
    params.validate(outcomes.len())?;
    let n = outcomes.len() as f64;
    let uniform = || WeightVector {
        weights: vec![1.0 / n; outcomes.len()],
        theta,
    };
    let mean = outcomes.iter().sum::<f64>() / n;
    let sd = (outcomes.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return Ok(uniform());
    }
    let outlier: Vec<bool> = outcomes.iter().map(|o| (o - mean).abs() > k * sd).collect();
    let n_out = outlier.iter().filter(|&&b| b).count();
    if n_out == 0 || n_out == outcomes.len() {
        return Ok(uniform());
    }
    let share = (1.0 - n_out as f64 * theta) / (outcomes.len() - n_out) as f64;
    Ok(WeightVector {
        weights: outlier.iter().map(|&o| if o { theta } else { share }).collect(),
        theta,
    })
}

/// Linear opinion pool: the weighted sum of outcomes.
pub fn opinion_pool(outcomes: &[f64], weights: &WeightVector) -> Result<f64> {
    if outcomes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: outcomes.len(),
        });
    }
    let pooled: f64 = outcomes.iter().zip(&weights.weights).map(|(o, w)| o * w).sum();
    Ok(pooled.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleScore {
    pub pooled_dissimilarity: f64,
    pub similarity: f64,
    pub per_metric: Vec<MetricOutcome>,
    pub weights: WeightVector,
    /// Which dominant centroid of the synopsis produced this score.
    pub centroid_index: usize,
}

/// Scores `x` against one centroid.
pub fn score_centroid(x: &[f64], centroid: &[f64], params: &EnsembleParams) -> Result<EnsembleScore> {
    let per_metric = all_dissimilarities(x, centroid)?;
    let outcomes = per_metric.map(|o| o.dissimilarity);
    let weights = compute_weights(&outcomes, params.theta, params.k)?;
    let pooled = opinion_pool(&outcomes, &weights)?;
    Ok(EnsembleScore {
        pooled_dissimilarity: pooled,
        similarity: 1.0 - pooled,
        per_metric: per_metric.to_vec(),
        weights,
        centroid_index: 0,
    })
}

/// Best score of `x` over the dominant centroids of `synopsis`; the first
/// centroid in list order wins ties.
pub fn ensemble_similarity(x: &[f64], synopsis: &Synopsis, params: &EnsembleParams) -> Result<EnsembleScore> {
    let mut best: Option<EnsembleScore> = None;
    for (i, c) in synopsis.centroids().iter().enumerate() {
        let mut score = score_centroid(x, c, params)?;
        score.centroid_index = i;
        if best.as_ref().is_none_or(|b| score.similarity > b.similarity) {
            best = Some(score);
        }
    }
    best.ok_or(Error::EmptySet)
}
