//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use mtx_core::attribute::Normalization;
use mtx_core::{Connectivity, GridDescriptor, ScalarField, TraitConfig, TraitGeometry};
use mtx_core::{DistanceMetric, MultiFieldDataset};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn less(values: &[f64], a: usize, b: usize) -> bool {
    values[a] < values[b] || (values[a] == values[b] && a < b)
}

fn sorted_vertices(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    order
}

fn neighbors(grid: &GridDescriptor, conn: Connectivity, v: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let [x, y, z] = grid.coords(v);
    let [nx, ny, nz] = grid.dims;
    let mut push = |x: isize, y: isize, z: isize| {
        if x >= 0 && y >= 0 && z >= 0 && (x as usize) < nx && (y as usize) < ny && (z as usize) < nz {
            out.push(x as usize + nx * (y as usize + ny * z as usize));
        }
    };
    let (x, y, z) = (x as isize, y as isize, z as isize);
    push(x - 1, y, z);
    push(x + 1, y, z);
    push(x, y - 1, z);
    push(x, y + 1, z);
    if conn == Connectivity::Face6 {
        push(x, y, z - 1);
        push(x, y, z + 1);
    }
    out
}

/// Connected components of the vertices selected by `inside`, each labelled by
/// the first vertex reached in `visit` order.
pub fn components(
    grid: &GridDescriptor,
    conn: Connectivity,
    visit: &[usize],
    inside: &dyn Fn(usize) -> bool,
) -> Vec<Option<usize>> {
    let mut label = vec![None; grid.voxel_count()];
    for &s in visit {
        if !inside(s) || label[s].is_some() {
            continue;
        }
        label[s] = Some(s);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for n in neighbors(grid, conn, v) {
                if inside(n) && label[n].is_none() {
                    label[n] = Some(s);
                    queue.push_back(n);
                }
            }
        }
    }
    label
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleNode {
    pub vertex: usize,
    pub value: f64,
    pub kind: &'static str,
    /// Minima of the components joined here (merges only), in sweep order.
    pub merged: Vec<usize>,
}

/// Result of the naive sub-level sweep: critical events, elder-rule pairing
/// and per-arc vertex counts.
#[derive(Clone, Debug, Default)]
pub struct OracleTree {
    pub nodes: Vec<OracleNode>,
    /// minimum vertex -> persistence
    pub persistence: BTreeMap<usize, f64>,
    /// child node vertex -> (parent node vertex, vertex count)
    pub arcs: BTreeMap<usize, (usize, usize)>,
}

/// Recomputes the sub-level components from scratch after every insertion.
pub fn sweep_oracle(field: &ScalarField, conn: Connectivity) -> OracleTree {
    let grid = *field.grid();
    let values = field.values();
    let order = sorted_vertices(values);
    let n = values.len();
    let mut active = vec![false; n];
    let mut comp: Vec<Option<usize>> = vec![None; n];
    // component label (its minimum) -> vertex of the latest node on it
    let mut head: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = OracleTree::default();
    let mut arc_of_vertex: Vec<usize> = vec![usize::MAX; n];

    for (step, &v) in order.iter().enumerate() {
        let mut touching: Vec<usize> = neighbors(&grid, conn, v)
            .into_iter()
            .filter_map(|u| comp[u])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        touching.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if less(values, a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        let last = step + 1 == n;
        match touching.len() {
            0 => {
                out.nodes.push(OracleNode { vertex: v, value: values[v], kind: "leaf_min", merged: vec![] });
                head.insert(v, v);
                arc_of_vertex[v] = v;
            }
            1 => {
                let h = head[&touching[0]];
                arc_of_vertex[v] = h;
                if last {
                    out.nodes.push(OracleNode { vertex: v, value: values[v], kind: "root", merged: vec![] });
                    out.arcs.insert(h, (v, 0));
                }
            }
            _ => {
                out.nodes.push(OracleNode {
                    vertex: v,
                    value: values[v],
                    kind: if last { "root" } else { "merge" },
                    merged: touching.clone(),
                });
                let elder_head = head[&touching[0]];
                for (i, m) in touching.iter().enumerate() {
                    let h = head.remove(m).unwrap();
                    out.arcs.insert(h, (v, 0));
                    if i > 0 {
                        out.persistence.insert(*m, values[v] - values[*m]);
                    }
                }
                if last {
                    // the root vertex sits on the elder incoming arc
                    arc_of_vertex[v] = elder_head;
                } else {
                    arc_of_vertex[v] = v;
                }
                head.insert(touching[0], v);
            }
        }
        active[v] = true;
        comp = components(&grid, conn, &order, &|u| active[u]);
        if last {
            let gmin = order[0];
            out.persistence.insert(gmin, values[v] - values[gmin]);
        }
    }
    for &a in &arc_of_vertex {
        out.arcs.get_mut(&a).unwrap().1 += 1;
    }
    out
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: usize) -> [usize; 3] {
    loop {
        let d = [rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max)];
        if d[0] * d[1] * d[2] >= 2 {
            return d;
        }
    }
}

/// Random field on `dims`: a permutation of distinct values, or values drawn
/// from a handful of levels when `duplicates` is set.
pub fn random_field(rng: &mut ChaCha8Rng, dims: [usize; 3], duplicates: bool) -> ScalarField {
    let grid = GridDescriptor::unit(dims).unwrap();
    let n = grid.voxel_count();
    let values: Vec<f64> = if duplicates {
        (0..n).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect()
    } else {
        let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.25 - 3.0).collect();
        v.shuffle(rng);
        v
    };
    ScalarField::new("g", grid, values).unwrap()
}

fn norm(metric: &DistanceMetric, d: &[f64]) -> f64 {
    match metric {
        DistanceMetric::Euclidean => d.iter().map(|x| x * x).sum::<f64>().sqrt(),
        DistanceMetric::WeightedEuclidean { weights } => {
            d.iter().zip(weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
        }
        DistanceMetric::Chebyshev => d.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Golden-section search of a convex function on [0, 1], finished by
/// checking the endpoints.
fn convex_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).min(f(0.0)).min(f(1.0))
}

/// Per-voxel reference distance field, recomputing normalization on its own.
pub fn distance_oracle(ds: &MultiFieldDataset, cfg: &TraitConfig) -> Vec<f64> {
    let axes: Vec<(Vec<f64>, Normalization, f64, f64)> = cfg
        .mapping
        .axes
        .iter()
        .map(|a| {
            let vals = ds.field(&a.source).unwrap().values().to_vec();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in &vals {
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
            (vals, a.normalization, lo, hi)
        })
        .collect();
    let n = ds.grid().voxel_count();
    (0..n)
        .map(|i| {
            let p: Vec<f64> = axes
                .iter()
                .map(|(vals, norm, lo, hi)| match norm {
                    Normalization::None => vals[i],
                    Normalization::MinMaxUnit if hi > lo => (vals[i] - lo) / (hi - lo),
                    Normalization::MinMaxUnit => 0.0,
                })
                .collect();
            let diff = |q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a - b).collect() };
            match &cfg.geometry {
                TraitGeometry::PointSet(points) => points
                    .iter()
                    .map(|q| norm(&cfg.metric, &diff(&q.0)))
                    .fold(f64::INFINITY, f64::min),
                TraitGeometry::Box { lo, hi, unbounded } => {
                    let d: Vec<f64> = (0..p.len())
                        .map(|k| {
                            if unbounded[k] {
                                0.0
                            } else if p[k] < lo.0[k] {
                                lo.0[k] - p[k]
                            } else if p[k] > hi.0[k] {
                                p[k] - hi.0[k]
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    norm(&cfg.metric, &d)
                }
                TraitGeometry::Segment { a, b } => convex_min(|t| {
                    let q: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| x + t * (y - x)).collect();
                    norm(&cfg.metric, &diff(&q))
                }),
            }
        })
        .collect()
}

use mtx_core::merge_tree::{MergeTree, MetricKind, SimplificationMetric};
use mtx_core::segmentation::{run_query, QueryMethod, QuerySpec};
use mtx_core::{build_merge_tree, compute_persistence, simplify};

/// `(vertex, kind)` of every node plus `(child vertex, parent vertex, sorted
/// vertices)` of every arc.
pub type TreeShape = (BTreeSet<(usize, String)>, BTreeSet<(usize, usize, Vec<usize>)>);

pub fn shape(tree: &MergeTree) -> TreeShape {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| (n.vertex, format!("{:?}", n.kind)))
        .collect();
    let arcs = tree
        .arcs()
        .iter()
        .map(|a| {
            let mut v = a.vertices.clone();
            v.sort_unstable();
            (tree.node(a.child).vertex, tree.node(a.parent).vertex, v)
        })
        .collect();
    (nodes, arcs)
}

fn metric(kind: MetricKind, t: f64) -> SimplificationMetric {
    SimplificationMetric::new(kind, t).unwrap()
}

/// Simplification and segmentation properties for one field and a pair of
/// thresholds `t1 <= t2`. Returns a description of the first violation.
pub fn check_simplification_properties(field: &ScalarField, t1: f64, t2: f64) -> Result<(), String> {
    let tree = build_merge_tree(field, Connectivity::Face6).map_err(|e| e.to_string())?;
    let n = field.len();
    for kind in [MetricKind::Persistence, MetricKind::Hypervolume] {
        let s1 = simplify(&tree, metric(kind, t1));
        let s2 = simplify(&tree, metric(kind, t2));
        s1.check_invariants()?;
        s2.check_invariants()?;
        if s2.leaf_count() > s1.leaf_count() || s1.leaf_count() > tree.leaf_count() {
            return Err(format!("{kind}: leaf count grew with threshold"));
        }
        let vertex_total: usize = compute_persistence(&s2).branches.iter().map(|b| b.vertices.len()).sum();
        if vertex_total != n {
            return Err(format!("{kind}: branch vertex lists cover {vertex_total} of {n}"));
        }
        if shape(&simplify(&tree, metric(kind, 0.0))) != shape(&tree) {
            return Err(format!("{kind}: threshold 0 changed the tree"));
        }
        if kind == MetricKind::Persistence
            && shape(&simplify(&s1, metric(kind, t2))) != shape(&s2)
        {
            return Err("persistence: simplify(t2) . simplify(t1) != simplify(max)".into());
        }

        let bd = compute_persistence(&tree);
        let (lo, hi) = field.range();
        let cut = 0.5 * (lo + hi);
        let mut last = [usize::MAX; 3];
        for t in [t1, t2] {
            for (k, method) in [QueryMethod::BranchDecomposition, QueryMethod::LeafArcs, QueryMethod::Subtrees]
                .into_iter()
                .enumerate()
            {
                let cut = (method == QueryMethod::Subtrees).then_some(cut);
                let spec = QuerySpec::new(method, metric(kind, t), cut).map_err(|e| e.to_string())?;
                let lf = run_query(&tree, &bd, &spec).map_err(|e| e.to_string())?;
                if lf.segment_count() > last[k] {
                    return Err(format!("{kind} {method}: segment count grew"));
                }
                last[k] = lf.segment_count();
                for e in &lf.legend {
                    let min = lf
                        .voxels_of(e.id)
                        .iter()
                        .map(|&v| field.values()[v])
                        .fold(f64::INFINITY, f64::min);
                    if min != e.min_value || e.voxels != lf.voxels_of(e.id).len() {
                        return Err(format!("{kind} {method}: legend entry {} inconsistent", e.id));
                    }
                }
                let labelled: BTreeSet<u32> = lf.labels.iter().copied().filter(|&l| l > 0).collect();
                let ids: BTreeSet<u32> = lf.legend.iter().map(|e| e.id).collect();
                if labelled != ids {
                    return Err(format!("{kind} {method}: legend ids differ from labels"));
                }
                match method {
                    QueryMethod::BranchDecomposition if lf.labels.contains(&0) => {
                        return Err("branch decomposition left voxels unlabelled".into())
                    }
                    QueryMethod::LeafArcs
                        if lf.segment_count() != simplify(&tree, metric(kind, t)).leaf_count() =>
                    {
                        return Err("leaf arc count differs from leaf count".into())
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Random small fields with values on a quarter grid, so duplicates are common
/// and shifted or power-of-two scaled copies are exact.
pub fn field_strategy() -> impl proptest::strategy::Strategy<Value = ScalarField> {
    use proptest::prelude::*;
    (1usize..=6, 1usize..=6, 1usize..=6)
        .prop_filter("at least two vertices", |(a, b, c)| a * b * c >= 2)
        .prop_flat_map(|(a, b, c)| {
            proptest::collection::vec(0i32..40, a * b * c).prop_map(move |v| {
                let grid = GridDescriptor::unit([a, b, c]).unwrap();
                ScalarField::new("g", grid, v.into_iter().map(|x| x as f64 * 0.25).collect())
                    .unwrap()
            })
        })
}
