use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MergeTree, Node, NodeKind, TreeArc};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Persistence,
    Hypervolume,
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "persistence" => Ok(MetricKind::Persistence),
            "hypervolume" => Ok(MetricKind::Hypervolume),
            other => Err(Error::InvalidQuery(format!("unknown metric '{other}'"))),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Persistence => "persistence",
            MetricKind::Hypervolume => "hypervolume",
        })
    }
}

/// Which measure to simplify by, and the cutoff below which features go.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplificationMetric {
    pub kind: MetricKind,
    pub threshold: f64,
}

impl SimplificationMetric {
    pub fn new(kind: MetricKind, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::InvalidQuery(format!(
                "threshold must be non-negative, got {threshold}"
            )));
        }
        Ok(SimplificationMetric { kind, threshold })
    }

    pub fn persistence(threshold: f64) -> Self {
        Self::new(MetricKind::Persistence, threshold).expect("non-negative threshold")
    }

    pub fn hypervolume(threshold: f64) -> Self {
        Self::new(MetricKind::Hypervolume, threshold).expect("non-negative threshold")
    }

    pub fn of_branch(&self, b: &super::Branch) -> f64 {
        match self.kind {
            MetricKind::Persistence => b.persistence,
            MetricKind::Hypervolume => b.hypervolume,
        }
    }
}

struct Candidate {
    metric: f64,
    node: usize,
    version: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // max-heap: smallest metric first, then the younger leaf (higher id)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .metric
            .total_cmp(&self.metric)
            .then(self.node.cmp(&other.node))
    }
}

/// Prunes leaf arcs in ascending metric order while the metric is below the
/// threshold. A pruned arc's vertices move to the arc above its parent;
/// merge nodes left with a single child are dissolved. The leaf of the
/// global minimum is never pruned.
pub fn simplify(tree: &MergeTree, metric: SimplificationMetric) -> MergeTree {
    let n = tree.nodes().len();
    let root = tree.root();
    let protected = tree.global_min_leaf();
    let voxel_volume = tree.grid().voxel_volume();

    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = (0..n).map(|i| tree.children(i).to_vec()).collect();
    let mut verts: Vec<Vec<usize>> = vec![Vec::new(); n];
    for arc in tree.arcs() {
        parent[arc.child] = arc.parent;
        verts[arc.child] = arc.vertices.clone();
    }
    let mut alive = vec![true; n];
    let mut version = vec![0u32; n];

    let value = |i: usize| tree.node(i).value;
    let leaf_metric = |node: usize, parent: usize, count: usize| {
        let height = value(parent) - value(node);
        match metric.kind {
            MetricKind::Persistence => height,
            MetricKind::Hypervolume => height * (count as f64 * voxel_volume),
        }
    };

    let mut heap = BinaryHeap::new();
    for node in tree.leaves() {
        if node.id != protected {
            heap.push(Candidate {
                metric: leaf_metric(node.id, parent[node.id], verts[node.id].len()),
                node: node.id,
                version: 0,
            });
        }
    }

    while let Some(c) = heap.pop() {
        if !alive[c.node] || version[c.node] != c.version {
            continue;
        }
        if c.metric.is_nan() || c.metric >= metric.threshold {
            break;
        }
        let leaf = c.node;
        let p = parent[leaf];
        alive[leaf] = false;
        children[p].retain(|&k| k != leaf);
        let moved = std::mem::take(&mut verts[leaf]);

        if p == root {
            // the root has no outgoing arc; hand the vertices to the master path
            let mut top = protected;
            while parent[top] != root {
                top = parent[top];
            }
            verts[top].extend(moved);
            continue;
        }
        verts[p].extend(moved);
        if children[p].len() == 1 {
            let only = children[p][0];
            let gp = parent[p];
            let upper = std::mem::take(&mut verts[p]);
            verts[only].extend(upper);
            parent[only] = gp;
            for k in children[gp].iter_mut() {
                if *k == p {
                    *k = only;
                }
            }
            alive[p] = false;
            if children[only].is_empty() && only != protected {
                version[only] += 1;
                heap.push(Candidate {
                    metric: leaf_metric(only, gp, verts[only].len()),
                    node: only,
                    version: version[only],
                });
            }
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for old in (0..n).filter(|&i| alive[i]) {
        remap[old] = nodes.len();
        let kind = if old == root {
            NodeKind::Root
        } else if children[old].is_empty() {
            NodeKind::LeafMin
        } else {
            NodeKind::Merge
        };
        let src = tree.node(old);
        nodes.push(Node {
            id: nodes.len(),
            vertex: src.vertex,
            value: src.value,
            kind,
        });
    }
    let arcs = (0..n)
        .filter(|&i| alive[i] && i != root)
        .map(|i| TreeArc {
            child: remap[i],
            parent: remap[parent[i]],
            vertices: std::mem::take(&mut verts[i]),
        })
        .collect();
    MergeTree::from_parts(
        *tree.grid(),
        tree.shared_values(),
        nodes,
        arcs,
        remap[root],
    )
}
