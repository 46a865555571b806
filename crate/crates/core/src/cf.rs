//! Cluster features: the additive `{L, LS, SS}` summary of a micro-cluster.
//!
//! `SS` is kept per dimension so that per-dimension variances can be read
//! back out of any cluster without touching the raw points.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};

/// Tolerance on the per-dimension variance `SS/L - (LS/L)^2` below which a
/// feature is considered inconsistent.
pub const VARIANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFeature {
    count: u64,
    linear_sum: Vec<f64>,
    square_sum: Vec<f64>,
}

impl ClusterFeature {
    /// The identity element for [`merge`](Self::merge).
    pub fn empty(dim: usize) -> Self {
        Self {
            count: 0,
            linear_sum: vec![0.0; dim],
            square_sum: vec![0.0; dim],
        }
    }

    pub fn from_point(x: &[f64]) -> Result<Self> {
        check_finite(x)?;
        Ok(Self {
            count: 1,
            linear_sum: x.to_vec(),
            square_sum: x.iter().map(|v| v * v).collect(),
        })
    }

    /// Builds a feature from raw parts, checking shape and the empty-cluster
    /// invariant.
    pub fn from_parts(count: u64, linear_sum: Vec<f64>, square_sum: Vec<f64>) -> Result<Self> {
        check_dim(linear_sum.len(), square_sum.len())?;
        check_finite(&linear_sum)?;
        check_finite(&square_sum)?;
        if count == 0 && (linear_sum.iter().any(|v| *v != 0.0) || square_sum.iter().any(|v| *v != 0.0)) {
            return Err(Error::Config(
                "a cluster feature with L = 0 must have zero sums".into(),
            ));
        }
        Ok(Self {
            count,
            linear_sum,
            square_sum,
        })
    }

    /// Feature of an arbitrary finite point set.
    pub fn from_points<'a, I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut cf = Self::empty(dim);
        for p in points {
            check_dim(dim, p.len())?;
            check_finite(p)?;
            cf.add_point(p);
        }
        Ok(cf)
    }

    pub fn dim(&self) -> usize {
        self.linear_sum.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn linear_sum(&self) -> &[f64] {
        &self.linear_sum
    }

    pub fn square_sum(&self) -> &[f64] {
        &self.square_sum
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.absorb(other)?;
        Ok(out)
    }

    /// In-place merge.
    pub fn absorb(&mut self, other: &Self) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        self.count += other.count;
        for (a, b) in self.linear_sum.iter_mut().zip(&other.linear_sum) {
            *a += b;
        }
        for (a, b) in self.square_sum.iter_mut().zip(&other.square_sum) {
            *a += b;
        }
        Ok(())
    }

    /// Adds one point. Caller guarantees matching dimension and finiteness.
    pub(crate) fn add_point(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1;
        for ((ls, ss), v) in self.linear_sum.iter_mut().zip(self.square_sum.iter_mut()).zip(x) {
            *ls += v;
            *ss += v * v;
        }
    }

    pub fn centroid(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptyCluster);
        }
        let n = self.count as f64;
        Ok(self.linear_sum.iter().map(|v| v / n).collect())
    }

    /// Root-mean-square distance of the member points to the centroid.
    pub fn radius(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyCluster);
        }
        Ok(radius_of(self.count as f64, &self.linear_sum, &self.square_sum, None))
    }

    /// Radius this feature would have after absorbing `x`.
    pub(crate) fn radius_with_point(&self, x: &[f64]) -> f64 {
        radius_of((self.count + 1) as f64, &self.linear_sum, &self.square_sum, Some(x))
    }

    /// Per-dimension population variance, clamped at zero.
    pub fn variance(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptyCluster);
        }
        let n = self.count as f64;
        Ok(self
            .linear_sum
            .iter()
            .zip(&self.square_sum)
            .map(|(ls, ss)| {
                let m = ls / n;
                (ss / n - m * m).max(0.0)
            })
            .collect())
    }

    /// Per-dimension population standard deviation.
    pub fn std_dev(&self) -> Result<Vec<f64>> {
        Ok(self.variance()?.into_iter().map(f64::sqrt).collect())
    }

    /// Checks the Cauchy–Schwarz bound `SS_j * L >= LS_j^2` (up to
    /// [`VARIANCE_TOLERANCE`] on the variance) and the empty-cluster rule.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.linear_sum.len() != self.square_sum.len() {
            return Err("LS and SS differ in dimension".into());
        }
        if self.count == 0 {
            if self.linear_sum.iter().chain(&self.square_sum).any(|v| *v != 0.0) {
                return Err("empty feature with non-zero sums".into());
            }
            return Ok(());
        }
        let n = self.count as f64;
        for (j, (ls, ss)) in self.linear_sum.iter().zip(&self.square_sum).enumerate() {
            let m = ls / n;
            let var = ss / n - m * m;
            // relative slack: round-off grows with the magnitude of SS/L
            let slack = VARIANCE_TOLERANCE * (1.0 + (ss / n).abs());
            if var < -slack {
                return Err(format!("dimension {j}: negative variance {var:e}"));
            }
        }
        Ok(())
    }
}

fn radius_of(n: f64, ls: &[f64], ss: &[f64], extra: Option<&[f64]>) -> f64 {
    let mut ss_total = 0.0;
    let mut centroid_sq = 0.0;
    for j in 0..ls.len() {
        let (l, s) = match extra {
            Some(x) => (ls[j] + x[j], ss[j] + x[j] * x[j]),
            None => (ls[j], ss[j]),
        };
        ss_total += s;
        let c = l / n;
        centroid_sq += c * c;
    }
    (ss_total / n - centroid_sq).max(0.0).sqrt()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
