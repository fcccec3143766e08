//! Domain segmentations read off a (simplified) merge tree, and the distance
//! histogram used for threshold picking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridDescriptor;
use crate::merge_tree::{
    simplify, vertex_order, BranchDecomposition, MergeTree, SimplificationMetric,
};

/// Categorical palette, assigned by segment rank.
pub const PALETTE: [[u8; 3]; 10] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub id: u32,
    /// Smallest field value inside the segment.
    pub min_value: f64,
    pub voxels: usize,
    pub color: [u8; 3],
    pub source: String,
}

/// Per-voxel segment ids; 0 is background. Legend entries are sorted by
/// ascending `min_value` and ids follow that rank.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelField {
    pub grid: GridDescriptor,
    pub labels: Vec<u32>,
    pub legend: Vec<LegendEntry>,
    pub warnings: Vec<String>,
}

impl LabelField {
    pub fn segment_count(&self) -> usize {
        self.legend.len()
    }

    /// Voxel ids carrying `id`.
    pub fn voxels_of(&self, id: u32) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == id).collect()
    }

    fn from_segments(tree: &MergeTree, segments: Vec<(String, Vec<usize>)>) -> Self {
        let values = tree.values();
        let mut ranked: Vec<(usize, String, Vec<usize>)> = segments
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(source, voxels)| {
                let argmin = voxels
                    .iter()
                    .copied()
                    .min_by(|&a, &b| vertex_order(values, a, b))
                    .unwrap();
                (argmin, source, voxels)
            })
            .collect();
        ranked.sort_by(|a, b| vertex_order(values, a.0, b.0));

        let grid = *tree.grid();
        let mut labels = vec![0u32; grid.voxel_count()];
        let legend = ranked
            .into_iter()
            .enumerate()
            .map(|(rank, (argmin, source, voxels))| {
                let id = rank as u32 + 1;
                for &v in &voxels {
                    labels[v] = id;
                }
                LegendEntry {
                    id,
                    min_value: values[argmin],
                    voxels: voxels.len(),
                    color: PALETTE[rank % PALETTE.len()],
                    source,
                }
            })
            .collect();
        LabelField {
            grid,
            labels,
            legend,
            warnings: Vec::new(),
        }
    }
}

/// One segment per branch surviving the threshold; pruned branches join the
/// nearest surviving ancestor. Labels every voxel.
pub fn segment_branch_decomposition(
    tree: &MergeTree,
    bd: &BranchDecomposition,
    metric: SimplificationMetric,
) -> LabelField {
    // parents are elder, hence created (and indexed) before their children
    let mut survivor = vec![usize::MAX; bd.branches.len()];
    for b in &bd.branches {
        let keep = b.id == bd.master || metric.of_branch(b) >= metric.threshold;
        survivor[b.id] = match (keep, b.parent) {
            (true, _) | (false, None) => b.id,
            (false, Some(p)) => survivor[p],
        };
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bd.branches.len()];
    for b in &bd.branches {
        members[survivor[b.id]].extend_from_slice(&b.vertices);
    }
    let segments = members
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(b, v)| (format!("branch:{b}"), v))
        .collect();
    LabelField::from_segments(tree, segments)
}

/// Simplifies the tree, then makes each remaining leaf arc one segment.
pub fn segment_leaves(tree: &MergeTree, metric: SimplificationMetric) -> LabelField {
    let s = simplify(tree, metric);
    let segments = s
        .leaves()
        .map(|leaf| {
            let arc = s.arc_of(leaf.id).expect("leaves have a parent arc");
            (format!("leaf:{}", leaf.vertex), arc.vertices.clone())
        })
        .collect();
    LabelField::from_segments(&s, segments)
}

/// Simplifies the tree, cuts it at `cut_level` and makes every sub-tree hanging
/// below the cut one segment of its vertices with value `< cut_level`.
pub fn segment_subtrees(
    tree: &MergeTree,
    metric: SimplificationMetric,
    cut_level: f64,
) -> LabelField {
    let s = simplify(tree, metric);
    let values = s.values();
    let below = |v: usize| values[v] < cut_level;

    let collect = |top: usize| {
        let mut out = Vec::new();
        let mut stack = vec![top];
        while let Some(n) = stack.pop() {
            if let Some(arc) = s.arc_of(n) {
                out.extend(arc.vertices.iter().copied().filter(|&v| below(v)));
            }
            stack.extend_from_slice(s.children(n));
        }
        out
    };

    let root = s.root();
    let segments: Vec<(String, Vec<usize>)> = if s.node(root).value < cut_level {
        vec![(
            format!("subtree:{}", s.node(root).vertex),
            (0..values.len()).collect(),
        )]
    } else {
        s.nodes()
            .iter()
            .filter(|n| n.id != root && n.value < cut_level)
            .filter(|n| s.node(s.parent(n.id).unwrap()).value >= cut_level)
            .map(|n| (format!("subtree:{}", n.vertex), collect(n.id)))
            .collect()
    };
    let mut out = LabelField::from_segments(&s, segments);
    if out.legend.is_empty() {
        out.warnings.push(format!(
            "cut level {cut_level} is at or below the global minimum; nothing selected"
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMethod {
    BranchDecomposition,
    LeafArcs,
    Subtrees,
}

impl FromStr for QueryMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "branch_decomposition" | "bd" => Ok(QueryMethod::BranchDecomposition),
            "leaf_arcs" | "leaves" => Ok(QueryMethod::LeafArcs),
            "subtrees" => Ok(QueryMethod::Subtrees),
            other => Err(Error::InvalidQuery(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for QueryMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMethod::BranchDecomposition => "branch_decomposition",
            QueryMethod::LeafArcs => "leaf_arcs",
            QueryMethod::Subtrees => "subtrees",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuerySpec {
    pub method: QueryMethod,
    pub metric: SimplificationMetric,
    pub cut_level: Option<f64>,
}

impl QuerySpec {
    /// `cut_level` is required for sub-trees and rejected otherwise.
    pub fn new(
        method: QueryMethod,
        metric: SimplificationMetric,
        cut_level: Option<f64>,
    ) -> Result<Self> {
        match (method, cut_level) {
            (QueryMethod::Subtrees, None) => {
                Err(Error::InvalidQuery("subtrees needs a cut level".into()))
            }
            (QueryMethod::Subtrees, Some(c)) if !c.is_finite() => {
                Err(Error::InvalidQuery("cut level must be finite".into()))
            }
            (QueryMethod::Subtrees, _) | (_, None) => Ok(QuerySpec {
                method,
                metric,
                cut_level,
            }),
            (_, Some(_)) => Err(Error::InvalidQuery(format!(
                "cut level only applies to subtrees, not {method}"
            ))),
        }
    }
}

/// Dispatches to the three query methods. `bd` must come from `tree`.
pub fn run_query(tree: &MergeTree, bd: &BranchDecomposition, spec: &QuerySpec) -> Result<LabelField> {
    Ok(match spec.method {
        QueryMethod::BranchDecomposition => segment_branch_decomposition(tree, bd, spec.metric),
        QueryMethod::LeafArcs => segment_leaves(tree, spec.metric),
        QueryMethod::Subtrees => {
            let cut = spec
                .cut_level
                .ok_or_else(|| Error::InvalidQuery("subtrees needs a cut level".into()))?;
            segment_subtrees(tree, spec.metric, cut)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub count: u64,
}

/// Equal-width bins over `[0, max]`. Values at the top edge fall in the last bin.
pub fn histogram(field: &ScalarField, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidQuery("histogram needs at least one bin".into()));
    }
    let max = field.range().1.max(0.0);
    let width = max / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in field.values() {
        let b = if width > 0.0 {
            ((v.max(0.0) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: i as f64 * width,
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merge_tree::tests::line_tree;
    use crate::merge_tree::{compute_persistence, MetricKind};

    const WORKED: [f64; 5] = [5.0, 1.0, 4.0, 0.0, 3.0];

    fn segments(l: &LabelField) -> Vec<Vec<usize>> {
        l.legend.iter().map(|e| l.voxels_of(e.id)).collect()
    }

    #[test]
    fn bd_worked_example() {
        let t = line_tree(&WORKED);
        let bd = compute_persistence(&t);
        let l = segment_branch_decomposition(&t, &bd, SimplificationMetric::persistence(2.0));
        assert_eq!(segments(&l), vec![vec![0, 2, 3, 4], vec![1]]);
        assert!(l.labels.iter().all(|&x| x >= 1));
        let zero = segment_branch_decomposition(&t, &bd, SimplificationMetric::persistence(0.0));
        assert_eq!(zero.segment_count(), bd.len());
        let all = segment_branch_decomposition(&t, &bd, SimplificationMetric::persistence(4.0));
        assert_eq!(all.segment_count(), 1);
        assert_eq!(all.legend[0].voxels, 5);
    }

    #[test]
    fn leaves_worked_example() {
        let t = line_tree(&WORKED);
        let l = segment_leaves(&t, SimplificationMetric::persistence(0.0));
        assert_eq!(segments(&l), vec![vec![3, 4], vec![1]]);
        assert_eq!(l.labels[0], 0);
        assert_eq!(l.labels[2], 0);
        let one = segment_leaves(&t, SimplificationMetric::persistence(3.5));
        assert_eq!(one.segment_count(), 1);
        assert_eq!(one.legend[0].min_value, 0.0);
        let mono = segment_leaves(&line_tree(&[0.0, 1.0, 2.0]), SimplificationMetric::persistence(0.0));
        assert_eq!(mono.segment_count(), 1);
        assert_eq!(mono.legend[0].voxels, 3);
    }

    #[test]
    fn subtrees_worked_example() {
        let t = line_tree(&WORKED);
        let zero = SimplificationMetric::persistence(0.0);
        let l = segment_subtrees(&t, zero, 2.0);
        assert_eq!(segments(&l), vec![vec![3], vec![1]]);
        let l = segment_subtrees(&t, zero, 4.5);
        let mut s = segments(&l);
        s[0].sort();
        assert_eq!(s, vec![vec![1, 2, 3, 4]]);
        let l = segment_subtrees(&t, zero, 6.0);
        assert_eq!(l.segment_count(), 1);
        assert_eq!(l.legend[0].voxels, 5);
        let l = segment_subtrees(&t, zero, -1.0);
        assert_eq!(l.segment_count(), 0);
        assert!(l.labels.iter().all(|&x| x == 0));
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn legend_sorted_and_colored_by_rank() {
        let t = line_tree(&[3.0, 0.5, 2.0, 0.0, 4.0, 1.0, 6.0, 0.25, 5.0]);
        let l = segment_leaves(&t, SimplificationMetric::persistence(0.0));
        for (rank, e) in l.legend.iter().enumerate() {
            assert_eq!(e.id as usize, rank + 1);
            assert_eq!(e.color, PALETTE[rank]);
        }
        assert!(l.legend.windows(2).all(|w| w[0].min_value <= w[1].min_value));
        let again = segment_leaves(&t, SimplificationMetric::persistence(0.0));
        assert_eq!(again, l);
    }

    #[test]
    fn dispatch_and_spec_validation() {
        let t = line_tree(&WORKED);
        let bd = compute_persistence(&t);
        let metric = SimplificationMetric::persistence(0.0);
        let spec = QuerySpec::new(QueryMethod::LeafArcs, metric, None).unwrap();
        assert_eq!(run_query(&t, &bd, &spec).unwrap(), segment_leaves(&t, metric));
        assert!(QuerySpec::new(QueryMethod::Subtrees, metric, None).is_err());
        assert!(QuerySpec::new(QueryMethod::LeafArcs, metric, Some(1.0)).is_err());
        assert!("voronoi".parse::<QueryMethod>().is_err());
        assert_eq!("bd".parse::<QueryMethod>().unwrap(), QueryMethod::BranchDecomposition);
        let hv = SimplificationMetric::new(MetricKind::Hypervolume, 0.0).unwrap();
        let spec = QuerySpec::new(QueryMethod::Subtrees, hv, Some(2.0)).unwrap();
        assert_eq!(run_query(&t, &bd, &spec).unwrap().segment_count(), 2);
    }

    #[test]
    fn histogram_examples() {
        let g = GridDescriptor::unit([4, 1, 1]).unwrap();
        let f = ScalarField::new("h", g, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let h = histogram(&f, 2).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(h[1].lower, 1.5);
        let z = ScalarField::new("h", g, vec![0.0; 4]).unwrap();
        let h = histogram(&z, 4).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![4, 0, 0, 0]);
        assert!(histogram(&f, 0).is_err());
        assert_eq!(histogram(&f, 1).unwrap()[0].count, 4);
    }
}
