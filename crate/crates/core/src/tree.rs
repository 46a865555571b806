//! Height-balanced CF-tree with BIRCH-style incremental insertion.
//!
//! Nodes live in an arena and refer to their children by index. Internal
//! entries carry the aggregate feature of the child they point to; leaf
//! entries are the micro-clusters themselves.

use crate::cf::{squared_distance, ClusterFeature};
use crate::error::{check_abundance, check_dim, Error, Result};

pub const DEFAULT_BRANCHING: usize = 8;

type NodeId = usize;

#[derive(Debug, Clone)]
struct Entry {
    cf: ClusterFeature,
    child: Option<NodeId>,
    /// Creation order of leaf entries; zero for internal entries.
    seq: u64,
}

#[derive(Debug, Clone)]
struct Node {
    entries: Vec<Entry>,
    is_leaf: bool,
}

/// What happened to the inserted point at leaf level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Absorbed into the existing micro-cluster with this creation number.
    Absorbed { seq: u64 },
    /// Started a new singleton micro-cluster.
    Created { seq: u64 },
}

/// A leaf-level micro-cluster as seen from outside the tree.
#[derive(Debug, Clone, Copy)]
pub struct LeafEntry<'a> {
    pub cf: &'a ClusterFeature,
    pub seq: u64,
}

#[derive(Debug, Clone)]
pub struct CfTree {
    nodes: Vec<Node>,
    root: NodeId,
    branching: usize,
    threshold: f64,
    dim: usize,
    inserted: u64,
    next_seq: u64,
}

impl CfTree {
    pub fn new(dim: usize, branching: usize, threshold: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if branching < 2 {
            return Err(Error::Config(format!(
                "branching factor must be at least 2, got {branching}"
            )));
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::Config(format!(
                "leaf threshold must be a positive real, got {threshold}"
            )));
        }
        Ok(Self {
            nodes: vec![Node {
                entries: Vec::new(),
                is_leaf: true,
            }],
            root: 0,
            branching,
            threshold,
            dim,
            inserted: 0,
            next_seq: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of points inserted so far.
    pub fn len(&self) -> u64 {
        self.inserted
    }

    pub fn is_empty(&self) -> bool {
        self.inserted == 0
    }

    /// Number of levels, a lone leaf root counting as one.
    pub fn height(&self) -> usize {
        let mut h = 1;
        let mut id = self.root;
        while !self.nodes[id].is_leaf {
            id = self.nodes[id].entries[0].child.expect("internal entry without child");
            h += 1;
        }
        h
    }

    pub fn insert(&mut self, x: &[f64]) -> Result<InsertOutcome> {
        check_dim(self.dim, x.len())?;
        check_abundance(x)?;
        let (split, outcome) = self.insert_at(self.root, x);
        if let Some(sibling) = split {
            let old_root = self.root;
            let entries = vec![
                Entry {
                    cf: self.node_cf(old_root),
                    child: Some(old_root),
                    seq: 0,
                },
                Entry {
                    cf: self.node_cf(sibling),
                    child: Some(sibling),
                    seq: 0,
                },
            ];
            self.root = self.push_node(Node {
                entries,
                is_leaf: false,
            });
        }
        self.inserted += 1;
        Ok(outcome)
    }

    /// Aggregate feature over every inserted point.
    pub fn root_cf(&self) -> ClusterFeature {
        self.node_cf(self.root)
    }

    /// All leaf-level micro-clusters, in arena order.
    pub fn leaf_entries(&self) -> impl Iterator<Item = LeafEntry<'_>> {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf)
            .flat_map(|n| n.entries.iter())
            .map(|e| LeafEntry { cf: &e.cf, seq: e.seq })
    }

    /// Full structural audit. Returns one message per violated invariant.
    pub fn audit(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut leaf_mass = 0u64;
        let radius_cap = self.threshold * (1.0 + 1e-9) + 1e-12;
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.entries.len() > self.branching {
                problems.push(format!(
                    "node {id} holds {} entries, branching factor is {}",
                    node.entries.len(),
                    self.branching
                ));
            }
            for (i, e) in node.entries.iter().enumerate() {
                if let Err(msg) = e.cf.check_invariants() {
                    problems.push(format!("node {id} entry {i}: {msg}"));
                }
                if node.is_leaf {
                    leaf_mass += e.cf.count();
                    if e.cf.count() > 1 {
                        let r = e.cf.radius().unwrap_or(0.0);
                        if r > radius_cap {
                            problems.push(format!(
                                "leaf entry seq {} has radius {r} above threshold {}",
                                e.seq, self.threshold
                            ));
                        }
                    }
                    continue;
                }
                let Some(child) = e.child else {
                    problems.push(format!("internal node {id} entry {i} has no child"));
                    continue;
                };
                let expected = self.node_cf(child);
                if let Some(msg) = cf_mismatch(&e.cf, &expected) {
                    problems.push(format!("node {id} entry {i} disagrees with child {child}: {msg}"));
                }
                stack.push(child);
            }
        }
        if leaf_mass != self.inserted {
            problems.push(format!(
                "leaf mass {leaf_mass} differs from inserted count {}",
                self.inserted
            ));
        }
        problems
    }

    /// Fault injection for audit tests: shifts one linear-sum component of
    /// the first leaf entry found below an internal node (or of the root
    /// leaf when the tree has a single level).
    #[doc(hidden)]
    pub fn perturb_leaf_linear_sum(&mut self, dim: usize, delta: f64) {
        let Some(id) = self.nodes.iter().position(|n| n.is_leaf && !n.entries.is_empty()) else {
            return;
        };
        let e = &mut self.nodes[id].entries[0];
        let mut ls = e.cf.linear_sum().to_vec();
        ls[dim] += delta;
        e.cf = ClusterFeature::from_parts(e.cf.count(), ls, e.cf.square_sum().to_vec())
            .expect("perturbed feature keeps its shape");
    }

    fn push_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn node_cf(&self, id: NodeId) -> ClusterFeature {
        let mut cf = ClusterFeature::empty(self.dim);
        for e in &self.nodes[id].entries {
            cf.absorb(&e.cf).expect("tree entries share one dimension");
        }
        cf
    }

    /// Index of the entry whose centroid is nearest to `x`; lowest index on ties.
    fn nearest_entry(&self, id: NodeId, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.nodes[id].entries.iter().enumerate() {
            let d = centroid_distance_sq(&e.cf, x);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Returns the id of a new sibling if `id` had to split.
    fn insert_at(&mut self, id: NodeId, x: &[f64]) -> (Option<NodeId>, InsertOutcome) {
        let outcome;
        if self.nodes[id].is_leaf {
            let target = self
                .nearest_entry(id, x)
                .filter(|&i| self.nodes[id].entries[i].cf.radius_with_point(x) <= self.threshold);
            match target {
                Some(i) => {
                    let e = &mut self.nodes[id].entries[i];
                    e.cf.add_point(x);
                    outcome = InsertOutcome::Absorbed { seq: e.seq };
                }
                None => {
                    let seq = self.next_seq;
                    self.next_seq += 1;
                    let mut cf = ClusterFeature::empty(self.dim);
                    cf.add_point(x);
                    self.nodes[id].entries.push(Entry {
                        cf,
                        child: None,
                        seq,
                    });
                    outcome = InsertOutcome::Created { seq };
                }
            }
        } else {
            let i = self
                .nearest_entry(id, x)
                .expect("internal nodes are never empty");
            let child = self.nodes[id].entries[i].child.expect("internal entry without child");
            let (split, inner) = self.insert_at(child, x);
            outcome = inner;
            match split {
                Some(sibling) => {
                    let child_cf = self.node_cf(child);
                    let sibling_cf = self.node_cf(sibling);
                    let node = &mut self.nodes[id];
                    node.entries[i].cf = child_cf;
                    node.entries.push(Entry {
                        cf: sibling_cf,
                        child: Some(sibling),
                        seq: 0,
                    });
                }
                None => self.nodes[id].entries[i].cf.add_point(x),
            }
        }
        if self.nodes[id].entries.len() > self.branching {
            (Some(self.split(id)), outcome)
        } else {
            (None, outcome)
        }
    }

    /// Farthest-pair split: the two entries with maximal inter-centroid
    /// distance seed two groups, every other entry joins the nearer seed
    /// (first seed on ties). The first group stays in `id`.
    fn split(&mut self, id: NodeId) -> NodeId {
        let entries = std::mem::take(&mut self.nodes[id].entries);
        let centroids: Vec<Vec<f64>> = entries
            .iter()
            .map(|e| e.cf.centroid().expect("tree entries are non-empty"))
            .collect();
        let (mut sa, mut sb, mut best) = (0, 1, -1.0);
        for i in 0..centroids.len() {
            for j in (i + 1)..centroids.len() {
                let d = squared_distance(&centroids[i], &centroids[j]);
                if d > best {
                    (sa, sb, best) = (i, j, d);
                }
            }
        }
        let mut keep = Vec::new();
        let mut moved = Vec::new();
        for (i, e) in entries.into_iter().enumerate() {
            let to_b = if i == sa {
                false
            } else if i == sb {
                true
            } else {
                squared_distance(&centroids[i], &centroids[sb]) < squared_distance(&centroids[i], &centroids[sa])
            };
            if to_b {
                moved.push(e);
            } else {
                keep.push(e);
            }
        }
        let is_leaf = self.nodes[id].is_leaf;
        self.nodes[id].entries = keep;
        self.push_node(Node {
            entries: moved,
            is_leaf,
        })
    }
}

fn centroid_distance_sq(cf: &ClusterFeature, x: &[f64]) -> f64 {
    let n = cf.count() as f64;
    cf.linear_sum()
        .iter()
        .zip(x)
        .map(|(ls, v)| {
            let d = ls / n - v;
            d * d
        })
        .sum()
}

/// Exact on L, 1e-9 relative on LS and SS.
fn cf_mismatch(actual: &ClusterFeature, expected: &ClusterFeature) -> Option<String> {
    if actual.count() != expected.count() {
        return Some(format!("L {} vs {}", actual.count(), expected.count()));
    }
    let close = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0))
    };
    if !close(actual.linear_sum(), expected.linear_sum()) {
        return Some("LS differs".into());
    }
    if !close(actual.square_sum(), expected.square_sum()) {
        return Some("SS differs".into());
    }
    None
}
