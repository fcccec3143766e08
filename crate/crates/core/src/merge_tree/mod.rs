//! Augmented merge (join) trees of vertex-valued grid fields.
//!
//! Vertices are swept in ascending `(value, vertex id)` order, which acts as a
//! symbolic perturbation: plateaus and repeated values are resolved by id.
//! Leaves are the local minima under that order; the global maximum is the
//! root. Every grid vertex belongs to exactly one arc.

mod branch;
mod build;
mod simplify;

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use branch::{compute_hypervolume, compute_persistence, Branch, BranchDecomposition, Hypervolume};
pub use build::build_merge_tree;
pub use simplify::{simplify, MetricKind, SimplificationMetric};

use crate::grid::GridDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    LeafMin,
    Merge,
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub vertex: usize,
    pub value: f64,
    pub kind: NodeKind,
}

/// Arc from `child` up to `parent`, with the grid vertices assigned to it.
/// The child node's own vertex is included; the parent's is not, except for
/// the root, whose vertex sits on one of its incoming arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeArc {
    pub child: usize,
    pub parent: usize,
    pub vertices: Vec<usize>,
}

/// Total order on vertices used by every sweep: value, then vertex id.
#[inline]
pub fn vertex_order(values: &[f64], a: usize, b: usize) -> Ordering {
    values[a].total_cmp(&values[b]).then(a.cmp(&b))
}

#[derive(Clone, Debug)]
pub struct MergeTree {
    grid: GridDescriptor,
    values: Arc<[f64]>,
    nodes: Vec<Node>,
    arcs: Vec<TreeArc>,
    root: usize,
    node_arc: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl MergeTree {
    /// Nodes must be ordered ascending by `(value, vertex)`; `nodes[i].id == i`.
    pub(crate) fn from_parts(
        grid: GridDescriptor,
        values: Arc<[f64]>,
        nodes: Vec<Node>,
        mut arcs: Vec<TreeArc>,
        root: usize,
    ) -> Self {
        arcs.sort_by_key(|a| a.child);
        let mut node_arc = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, arc) in arcs.iter().enumerate() {
            node_arc[arc.child] = Some(i);
            children[arc.parent].push(arc.child);
        }
        MergeTree {
            grid,
            values,
            nodes,
            arcs,
            root,
            node_arc,
            children,
        }
    }

    pub fn grid(&self) -> &GridDescriptor {
        &self.grid
    }

    /// The scalar field the tree was built from.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn shared_values(&self) -> Arc<[f64]> {
        Arc::clone(&self.values)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn arcs(&self) -> &[TreeArc] {
        &self.arcs
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// The arc leaving `node` towards the root.
    pub fn arc_of(&self, node: usize) -> Option<&TreeArc> {
        self.node_arc[node].map(|i| &self.arcs[i])
    }

    pub fn arc_index_of(&self, node: usize) -> Option<usize> {
        self.node_arc[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.arc_of(node).map(|a| a.parent)
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.kind == NodeKind::LeafMin)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn merge_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Merge).count()
    }

    /// The leaf holding the global minimum.
    pub fn global_min_leaf(&self) -> usize {
        self.leaves()
            .min_by(|a, b| vertex_order(&self.values, a.vertex, b.vertex))
            .map(|n| n.id)
            .expect("a merge tree has at least one leaf")
    }

    /// Label field with one segment per arc (label = arc index + 1).
    pub fn arc_labels(&self) -> Vec<u32> {
        let mut labels = vec![0u32; self.grid.voxel_count()];
        for (i, arc) in self.arcs.iter().enumerate() {
            for &v in &arc.vertices {
                labels[v] = i as u32 + 1;
            }
        }
        labels
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let roots = self.nodes.iter().filter(|n| n.kind == NodeKind::Root).count();
        if roots != 1 || self.nodes[self.root].kind != NodeKind::Root {
            return Err(format!("expected exactly one root, found {roots}"));
        }
        for node in &self.nodes {
            let has_arc = self.node_arc[node.id].is_some();
            if (node.id == self.root) == has_arc {
                return Err(format!("node {} has wrong parent arc count", node.id));
            }
            let kids = self.children[node.id].len();
            match node.kind {
                NodeKind::LeafMin if kids != 0 => {
                    return Err(format!("leaf {} has children", node.id))
                }
                NodeKind::Merge if kids < 2 => {
                    return Err(format!("merge {} has {kids} children", node.id))
                }
                NodeKind::Root if kids == 0 => return Err("root without children".into()),
                _ => {}
            }
        }
        let mut seen = vec![false; self.grid.voxel_count()];
        for arc in &self.arcs {
            let (c, p) = (&self.nodes[arc.child], &self.nodes[arc.parent]);
            if c.value > p.value {
                return Err(format!("arc {}->{} decreases", c.id, p.id));
            }
            for &v in &arc.vertices {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(format!("vertex {v} on two arcs"));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(format!("vertex {v} on no arc"));
        }
        Ok(())
    }
}
