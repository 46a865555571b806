//! Partition synopses: the α-dominant micro-clusters of a CF-tree.

use serde::{Deserialize, Serialize};

use crate::cf::ClusterFeature;
use crate::error::{check_abundance, Error, Result};
use crate::tree::CfTree;

pub const DEFAULT_ALPHA: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Synopsis {
    partition_id: usize,
    dominant: Vec<ClusterFeature>,
    centroids: Vec<Vec<f64>>,
    version: u64,
    /// True when no leaf entry reached α and the root aggregate stands in.
    fallback: bool,
}

impl Synopsis {
    /// Scans the leaf level of `tree` and keeps every micro-cluster holding
    /// at least `alpha` points, largest first (creation order on ties).
    /// Smaller clusters are treated as outliers. If nothing qualifies, the
    /// synopsis is the single root aggregate.
    pub fn extract(tree: &CfTree, alpha: u64, partition_id: usize, version: u64) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::Config("alpha must be a positive integer".into()));
        }
        if tree.is_empty() {
            return Err(Error::EmptyTree);
        }
        let mut kept: Vec<_> = tree.leaf_entries().filter(|e| e.cf.count() >= alpha).collect();
        kept.sort_by(|a, b| b.cf.count().cmp(&a.cf.count()).then(a.seq.cmp(&b.seq)));
        let (dominant, fallback) = if kept.is_empty() {
            (vec![tree.root_cf()], true)
        } else {
            (kept.into_iter().map(|e| e.cf.clone()).collect(), false)
        };
        let centroids = dominant
            .iter()
            .map(ClusterFeature::centroid)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            partition_id,
            dominant,
            centroids,
            version,
            fallback,
        })
    }

    /// A one-cluster synopsis summarised by its mean vector alone.
    pub fn from_mean(partition_id: usize, mean: &[f64]) -> Result<Self> {
        check_abundance(mean)?;
        let cf = ClusterFeature::from_point(mean)?;
        Ok(Self {
            partition_id,
            centroids: vec![mean.to_vec()],
            dominant: vec![cf],
            version: 0,
            fallback: false,
        })
    }

    pub fn partition_id(&self) -> usize {
        self.partition_id
    }

    pub fn dominant(&self) -> &[ClusterFeature] {
        &self.dominant
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Checks α-compliance and centroid consistency.
    pub fn check(&self, alpha: u64) -> std::result::Result<(), String> {
        if self.dominant.is_empty() {
            return Err("empty dominant list".into());
        }
        if self.dominant.len() != self.centroids.len() {
            return Err("centroid count differs from dominant count".into());
        }
        if self.fallback {
            if self.dominant.len() != 1 {
                return Err("fallback synopsis must hold exactly one feature".into());
            }
        } else if let Some(cf) = self.dominant.iter().find(|cf| cf.count() < alpha) {
            return Err(format!("dominant feature with L = {} < alpha = {alpha}", cf.count()));
        }
        for (cf, c) in self.dominant.iter().zip(&self.centroids) {
            let expect = cf.centroid().map_err(|e| e.to_string())?;
            if expect.iter().zip(c).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
                return Err("centroid differs from LS / L".into());
            }
        }
        Ok(())
    }
}
