use std::sync::Arc;

use super::{vertex_order, MergeTree, Node, NodeKind, TreeArc};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Connectivity;

/// Disjoint sets with path halving and union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Returns the new representative.
    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        big
    }
}

/// Ascending `(value, id)` sweep order.
pub(crate) fn sweep_order(values: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| vertex_order(values, a as usize, b as usize));
    order
}

/// Builds the augmented join tree of `field` by a union-find sweep over the
/// sub-level set filtration.
pub fn build_merge_tree(field: &ScalarField, conn: Connectivity) -> Result<MergeTree> {
    let grid = *field.grid();
    conn.check(&grid)?;
    let values: Arc<[f64]> = Arc::from(field.values());
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidGrid(
            "a merge tree needs at least two vertices".into(),
        ));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            field: field.name.clone(),
            index,
        });
    }

    let order = sweep_order(&values);
    let mut uf = UnionFind::new(n);
    let mut processed = vec![false; n];
    // per union-find representative: the open arc and the component's oldest vertex
    let mut comp_arc = vec![u32::MAX; n];
    let mut comp_min = vec![u32::MAX; n];

    let mut nodes: Vec<Node> = Vec::new();
    let mut arcs: Vec<TreeArc> = Vec::new();
    let mut roots: Vec<u32> = Vec::with_capacity(6);

    let new_node = |nodes: &mut Vec<Node>, v: usize, kind| {
        let id = nodes.len();
        nodes.push(Node {
            id,
            vertex: v,
            value: values[v],
            kind,
        });
        id
    };

    for (step, &v32) in order.iter().enumerate() {
        let v = v32 as usize;
        let last = step + 1 == n;
        roots.clear();
        grid.for_each_neighbor(v, conn, |u| {
            if processed[u] {
                roots.push(u as u32);
            }
        });
        for r in roots.iter_mut() {
            *r = uf.find(*r);
        }
        // elder components first
        roots.sort_unstable_by_key(|&r| comp_min[r as usize]);
        roots.dedup();
        processed[v] = true;

        match roots.len() {
            0 => {
                let id = new_node(&mut nodes, v, NodeKind::LeafMin);
                comp_arc[v] = arcs.len() as u32;
                comp_min[v] = step as u32;
                arcs.push(TreeArc {
                    child: id,
                    parent: usize::MAX,
                    vertices: vec![v],
                });
            }
            1 => {
                let r = roots[0] as usize;
                let arc = comp_arc[r] as usize;
                arcs[arc].vertices.push(v);
                let rep = uf.union(r as u32, v32) as usize;
                comp_arc[rep] = arc as u32;
                comp_min[rep] = comp_min[r];
                if last {
                    let id = new_node(&mut nodes, v, NodeKind::Root);
                    arcs[arc].parent = id;
                }
            }
            _ => {
                let kind = if last { NodeKind::Root } else { NodeKind::Merge };
                let id = new_node(&mut nodes, v, kind);
                for &r in roots.iter() {
                    arcs[comp_arc[r as usize] as usize].parent = id;
                }
                let elder = roots[0] as usize;
                let oldest = comp_min[elder];
                let arc = if last {
                    // the root owns no outgoing arc; its vertex joins the elder arc
                    let arc = comp_arc[elder] as usize;
                    arcs[arc].vertices.push(v);
                    arc
                } else {
                    arcs.push(TreeArc {
                        child: id,
                        parent: usize::MAX,
                        vertices: vec![v],
                    });
                    arcs.len() - 1
                };
                let mut rep = v32;
                for &r in roots.iter() {
                    rep = uf.union(rep, r);
                }
                comp_arc[rep as usize] = arc as u32;
                comp_min[rep as usize] = oldest;
            }
        }
    }

    let root = nodes.len() - 1;
    debug_assert_eq!(nodes[root].kind, NodeKind::Root);
    Ok(MergeTree::from_parts(grid, values, nodes, arcs, root))
}
