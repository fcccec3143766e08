use serde::Serialize;

use super::{vertex_order, MergeTree, NodeKind};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub id: usize,
    pub min_node: usize,
    pub term_node: usize,
    pub persistence: f64,
    pub hypervolume: f64,
    pub parent: Option<usize>,
    #[serde(skip)]
    pub vertices: Vec<usize>,
}

/// Pairing of every minimum with the node where its branch ends, under the
/// elder rule: at a merge the branch with the older minimum (lower in
/// `(value, vertex)` order) continues, the others terminate there.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchDecomposition {
    pub branches: Vec<Branch>,
    /// The branch running from the global minimum to the root.
    pub master: usize,
    /// Branch of each arc, indexed like [`MergeTree::arcs`].
    pub arc_branch: Vec<usize>,
}

impl BranchDecomposition {
    pub fn branch(&self, id: usize) -> &Branch {
        &self.branches[id]
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

/// Per-arc and per-branch hypervolume.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypervolume {
    pub arcs: Vec<f64>,
    pub branches: Vec<f64>,
}

/// `(parent value - child value) * vertex count * voxel_volume` for each arc.
pub(crate) fn arc_hypervolumes(tree: &MergeTree, voxel_volume: f64) -> Vec<f64> {
    tree.arcs()
        .iter()
        .map(|a| {
            let height = tree.node(a.parent).value - tree.node(a.child).value;
            height * (a.vertices.len() as f64 * voxel_volume)
        })
        .collect()
}

/// Branch decomposition with persistence; hypervolume uses the grid's voxel
/// volume.
pub fn compute_persistence(tree: &MergeTree) -> BranchDecomposition {
    let values = tree.values();
    let mut order: Vec<usize> = (0..tree.nodes().len()).collect();
    order.sort_by(|&a, &b| vertex_order(values, tree.node(a).vertex, tree.node(b).vertex));
    let min_key = |branches: &[Branch], b: usize| tree.node(branches[b].min_node).vertex;

    let mut branches: Vec<Branch> = Vec::new();
    let mut node_branch = vec![usize::MAX; tree.nodes().len()];
    let mut master = usize::MAX;

    for &id in &order {
        let node = tree.node(id);
        if node.kind == NodeKind::LeafMin {
            node_branch[id] = branches.len();
            branches.push(Branch {
                id: branches.len(),
                min_node: id,
                term_node: usize::MAX,
                persistence: 0.0,
                hypervolume: 0.0,
                parent: None,
                vertices: Vec::new(),
            });
            continue;
        }
        let mut incoming: Vec<usize> = tree.children(id).iter().map(|&c| node_branch[c]).collect();
        incoming.sort_by(|&a, &b| {
            vertex_order(values, min_key(&branches, a), min_key(&branches, b))
        });
        let elder = incoming[0];
        for &b in &incoming[1..] {
            let br = &mut branches[b];
            br.term_node = id;
            br.persistence = node.value - tree.node(br.min_node).value;
            br.parent = Some(elder);
        }
        node_branch[id] = elder;
        if id == tree.root() {
            let br = &mut branches[elder];
            br.term_node = id;
            br.persistence = node.value - tree.node(br.min_node).value;
            master = elder;
        }
    }

    let hv = arc_hypervolumes(tree, tree.grid().voxel_volume());
    let mut arc_branch = Vec::with_capacity(tree.arcs().len());
    for (i, arc) in tree.arcs().iter().enumerate() {
        let b = node_branch[arc.child];
        arc_branch.push(b);
        branches[b].hypervolume += hv[i];
        branches[b].vertices.extend_from_slice(&arc.vertices);
    }
    BranchDecomposition {
        branches,
        master,
        arc_branch,
    }
}

/// Hypervolume of every arc and every branch for an explicit voxel volume.
pub fn compute_hypervolume(tree: &MergeTree, voxel_volume: f64) -> Hypervolume {
    let arcs = arc_hypervolumes(tree, voxel_volume);
    let bd = compute_persistence(tree);
    let mut branches = vec![0.0; bd.branches.len()];
    for (i, &b) in bd.arc_branch.iter().enumerate() {
        branches[b] += arcs[i];
    }
    Hypervolume { arcs, branches }
}
