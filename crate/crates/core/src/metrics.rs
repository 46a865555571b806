//! Abundance-based dissimilarities between non-negative vectors.
//!
//! All three are symmetric, bounded in `[0, 1]` and invariant under joint
//! positive scaling of their arguments.

use serde::{Deserialize, Serialize};

use crate::error::{check_abundance, check_dim, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Quantitative Jaccard: share of the combined abundance not held in common.
    Jaccard,
    /// Sørensen / Bray–Curtis.
    Sorensen,
    /// Quantitative symmetric Kulczynski.
    Kulczynski,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Jaccard, Metric::Sorensen, Metric::Kulczynski];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::Sorensen => "sorensen",
            Metric::Kulczynski => "kulczynski",
        }
    }

    pub fn dissimilarity(self, x: &[f64], s: &[f64]) -> Result<f64> {
        let sums = Sums::of(x, s)?;
        Ok(self.eval_sums(&sums))
    }

    fn eval_sums(self, sums: &Sums) -> f64 {
        match self {
            Metric::Jaccard => sums.jaccard(),
            Metric::Sorensen => sums.sorensen(),
            Metric::Kulczynski => sums.kulczynski(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOutcome {
    pub metric: Metric,
    pub dissimilarity: f64,
}

/// Evaluates every metric in [`Metric::ALL`] order with a single pass over
/// the inputs.
pub fn all_dissimilarities(x: &[f64], s: &[f64]) -> Result<[MetricOutcome; 3]> {
    let sums = Sums::of(x, s)?;
    Ok(Metric::ALL.map(|metric| MetricOutcome {
        metric,
        dissimilarity: metric.eval_sums(&sums),
    }))
}

pub fn jaccard_dissim(x: &[f64], s: &[f64]) -> Result<f64> {
    Metric::Jaccard.dissimilarity(x, s)
}

pub fn sorensen_dissim(x: &[f64], s: &[f64]) -> Result<f64> {
    Metric::Sorensen.dissimilarity(x, s)
}

pub fn kulczynski_dissim(x: &[f64], s: &[f64]) -> Result<f64> {
    Metric::Kulczynski.dissimilarity(x, s)
}

struct Sums {
    x: f64,
    s: f64,
    abs_diff: f64,
    min: f64,
}

impl Sums {
    fn of(x: &[f64], s: &[f64]) -> Result<Self> {
        check_dim(x.len(), s.len())?;
        check_abundance(x)?;
        check_abundance(s)?;
        let mut out = Sums {
            x: 0.0,
            s: 0.0,
            abs_diff: 0.0,
            min: 0.0,
        };
        for (a, b) in x.iter().zip(s) {
            out.x += a;
            out.s += b;
            out.abs_diff += (a - b).abs();
            out.min += a.min(*b);
        }
        Ok(out)
    }

    fn jaccard(&self) -> f64 {
        let denom = self.x + self.s + self.abs_diff;
        if denom == 0.0 {
            return 0.0;
        }
        unit(2.0 * self.abs_diff / denom)
    }

    fn sorensen(&self) -> f64 {
        let denom = self.x + self.s;
        if denom == 0.0 {
            return 0.0;
        }
        unit(self.abs_diff / denom)
    }

    fn kulczynski(&self) -> f64 {
        match (self.x == 0.0, self.s == 0.0) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            (false, false) => unit(1.0 - 0.5 * (self.min / self.x + self.min / self.s)),
        }
    }
}

fn unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
