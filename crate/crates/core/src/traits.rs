//! Traits (subsets of attribute space), attribute-space metrics, and the
//! declarative trait file.

use serde::{Deserialize, Serialize};

use crate::attribute::{AttributeMapping, AttributePoint};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    /// `sqrt(sum_i w_i * d_i^2)`.
    WeightedEuclidean { weights: Vec<f64> },
    /// `max_i |d_i|`.
    Chebyshev,
}

impl DistanceMetric {
    fn validate(&self, dim: usize) -> Result<()> {
        if let DistanceMetric::WeightedEuclidean { weights } = self {
            if weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: weights.len(),
                });
            }
            if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return Err(Error::InvalidTrait("metric weights must be positive".into()));
            }
        }
        Ok(())
    }

    /// Length of the difference vector produced by `diff(i)` for axes `0..n`.
    #[inline]
    fn norm(&self, n: usize, diff: impl Fn(usize) -> f64) -> f64 {
        match self {
            DistanceMetric::Euclidean => (0..n).map(|i| diff(i) * diff(i)).sum::<f64>().sqrt(),
            DistanceMetric::WeightedEuclidean { weights } => (0..n)
                .map(|i| weights[i] * diff(i) * diff(i))
                .sum::<f64>()
                .sqrt(),
            DistanceMetric::Chebyshev => (0..n).fold(0.0f64, |m, i| m.max(diff(i).abs())),
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm(a.len(), |i| a[i] - b[i])
    }

    fn weight(&self, i: usize) -> f64 {
        match self {
            DistanceMetric::WeightedEuclidean { weights } => weights[i],
            _ => 1.0,
        }
    }
}

/// A subset of attribute space, in mapped coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum TraitGeometry {
    PointSet(Vec<AttributePoint>),
    /// Axis-aligned box; axes flagged in `unbounded` never contribute distance.
    Box {
        lo: AttributePoint,
        hi: AttributePoint,
        unbounded: Vec<bool>,
    },
    Segment { a: AttributePoint, b: AttributePoint },
}

impl TraitGeometry {
    pub fn dim(&self) -> usize {
        match self {
            TraitGeometry::PointSet(p) => p.first().map_or(0, |p| p.dim()),
            TraitGeometry::Box { lo, .. } => lo.dim(),
            TraitGeometry::Segment { a, .. } => a.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::InvalidTrait("trait needs at least one coordinate".into()));
        }
        let check = |p: &AttributePoint| {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.0.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTrait("trait coordinates must be finite".into()));
            }
            Ok(())
        };
        match self {
            TraitGeometry::PointSet(points) => points.iter().try_for_each(check),
            TraitGeometry::Box { lo, hi, unbounded } => {
                check(lo)?;
                check(hi)?;
                if unbounded.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: unbounded.len(),
                    });
                }
                for (i, &free) in unbounded.iter().enumerate() {
                    if !free && lo.0[i] > hi.0[i] {
                        return Err(Error::InvalidTrait(format!(
                            "box axis {i}: lo {} > hi {}",
                            lo.0[i], hi.0[i]
                        )));
                    }
                }
                Ok(())
            }
            TraitGeometry::Segment { a, b } => {
                check(a)?;
                check(b)
            }
        }
    }

    /// Exact membership test for boxes; point sets and segments compare
    /// exactly as well (zero distance).
    pub fn contains(&self, a: &[f64]) -> bool {
        match self {
            TraitGeometry::Box { lo, hi, unbounded } => (0..a.len())
                .all(|i| unbounded[i] || (lo.0[i] <= a[i] && a[i] <= hi.0[i])),
            _ => distance_to_trait_unchecked(a, self, &DistanceMetric::Euclidean) == 0.0,
        }
    }
}

/// `d_T(a)`: the distance from `a` to the nearest point of the trait.
pub fn distance_to_trait(
    a: &AttributePoint,
    geometry: &TraitGeometry,
    metric: &DistanceMetric,
) -> Result<f64> {
    if a.dim() != geometry.dim() {
        return Err(Error::DimensionMismatch {
            expected: geometry.dim(),
            found: a.dim(),
        });
    }
    metric.validate(a.dim())?;
    Ok(distance_to_trait_unchecked(&a.0, geometry, metric))
}

/// Dimension checks are the caller's responsibility.
#[inline]
pub(crate) fn distance_to_trait_unchecked(
    a: &[f64],
    geometry: &TraitGeometry,
    metric: &DistanceMetric,
) -> f64 {
    let n = a.len();
    match geometry {
        TraitGeometry::PointSet(points) => points
            .iter()
            .map(|p| metric.distance(a, &p.0))
            .fold(f64::INFINITY, f64::min),
        TraitGeometry::Box { lo, hi, unbounded } => metric.norm(n, |i| {
            if unbounded[i] {
                0.0
            } else {
                a[i] - a[i].clamp(lo.0[i], hi.0[i])
            }
        }),
        TraitGeometry::Segment { a: p, b: q } => segment_distance(a, &p.0, &q.0, metric),
    }
}

fn segment_distance(a: &[f64], p: &[f64], q: &[f64], metric: &DistanceMetric) -> f64 {
    let n = a.len();
    let at = |t: f64| metric.norm(n, |i| a[i] - (p[i] + t * (q[i] - p[i])));
    match metric {
        DistanceMetric::Chebyshev => {
            // max_i |c_i - t e_i| is convex and piecewise linear in t; its
            // minimum over [0, 1] sits at an endpoint, a zero of one piece, or
            // a crossing of two pieces.
            let c: Vec<f64> = (0..n).map(|i| a[i] - p[i]).collect();
            let e: Vec<f64> = (0..n).map(|i| q[i] - p[i]).collect();
            let mut best = at(0.0).min(at(1.0));
            let mut try_t = |t: f64| {
                if t.is_finite() && (0.0..=1.0).contains(&t) {
                    best = best.min(at(t));
                }
            };
            for i in 0..n {
                if e[i] != 0.0 {
                    try_t(c[i] / e[i]);
                }
                for j in (i + 1)..n {
                    // c_i - t e_i = ±(c_j - t e_j)
                    if e[i] != e[j] {
                        try_t((c[i] - c[j]) / (e[i] - e[j]));
                    }
                    if e[i] != -e[j] {
                        try_t((c[i] + c[j]) / (e[i] + e[j]));
                    }
                }
            }
            best
        }
        _ => {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let w = metric.weight(i);
                let e = q[i] - p[i];
                num += w * (a[i] - p[i]) * e;
                den += w * e * e;
            }
            let t = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 };
            at(t)
        }
    }
}

/// Mapping, metric and geometry as read from a trait file.
#[derive(Clone, Debug, PartialEq)]
pub struct TraitConfig {
    pub mapping: AttributeMapping,
    pub metric: DistanceMetric,
    pub geometry: TraitGeometry,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GeometryDoc {
    Points {
        points: Vec<Vec<f64>>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        unbounded: Vec<usize>,
    },
    Segment {
        a: Vec<f64>,
        b: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraitDoc {
    axes: Vec<crate::attribute::AxisSpec>,
    #[serde(default)]
    metric: DistanceMetric,
    #[serde(rename = "trait")]
    geometry: GeometryDoc,
}

impl TraitConfig {
    pub fn new(
        mapping: AttributeMapping,
        metric: DistanceMetric,
        geometry: TraitGeometry,
    ) -> Result<Self> {
        let cfg = TraitConfig {
            mapping,
            metric,
            geometry,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mapping.axes.is_empty() {
            return Err(Error::InvalidTrait("at least one axis is required".into()));
        }
        self.geometry.validate()?;
        let n = self.mapping.dim();
        if self.geometry.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.geometry.dim(),
            });
        }
        self.metric.validate(n)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TraitDoc =
            serde_json::from_str(text).map_err(|e| Error::json("trait file", e))?;
        let n = doc.axes.len();
        let geometry = match doc.geometry {
            GeometryDoc::Points { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidTrait("point set is empty".into()));
                }
                TraitGeometry::PointSet(points.into_iter().map(AttributePoint).collect())
            }
            GeometryDoc::Box { lo, hi, unbounded } => {
                let mut flags = vec![false; lo.len()];
                for i in unbounded {
                    if i >= n || i >= flags.len() {
                        return Err(Error::InvalidTrait(format!(
                            "unbounded axis {i} out of range"
                        )));
                    }
                    flags[i] = true;
                }
                TraitGeometry::Box {
                    lo: AttributePoint(lo),
                    hi: AttributePoint(hi),
                    unbounded: flags,
                }
            }
            GeometryDoc::Segment { a, b } => TraitGeometry::Segment {
                a: AttributePoint(a),
                b: AttributePoint(b),
            },
        };
        TraitConfig::new(AttributeMapping { axes: doc.axes }, doc.metric, geometry)
    }

    pub fn to_json(&self) -> String {
        let geometry = match &self.geometry {
            TraitGeometry::PointSet(points) => GeometryDoc::Points {
                points: points.iter().map(|p| p.0.clone()).collect(),
            },
            TraitGeometry::Box { lo, hi, unbounded } => GeometryDoc::Box {
                lo: lo.0.clone(),
                hi: hi.0.clone(),
                unbounded: (0..unbounded.len()).filter(|&i| unbounded[i]).collect(),
            },
            TraitGeometry::Segment { a, b } => GeometryDoc::Segment {
                a: a.0.clone(),
                b: b.0.clone(),
            },
        };
        let doc = TraitDoc {
            axes: self.mapping.axes.clone(),
            metric: self.metric.clone(),
            geometry,
        };
        // through Value for sorted keys
        let value = serde_json::to_value(doc).expect("trait doc serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> AttributePoint {
        AttributePoint(v.to_vec())
    }

    fn dist(a: &[f64], g: &TraitGeometry, m: &DistanceMetric) -> f64 {
        distance_to_trait(&pt(a), g, m).unwrap()
    }

    fn unit_box(n: usize) -> TraitGeometry {
        TraitGeometry::Box {
            lo: pt(&vec![0.0; n]),
            hi: pt(&vec![1.0; n]),
            unbounded: vec![false; n],
        }
    }

    #[test]
    fn worked_distances() {
        let e = DistanceMetric::Euclidean;
        let origin = TraitGeometry::PointSet(vec![pt(&[0.0, 0.0])]);
        assert_eq!(dist(&[3.0, 4.0], &origin, &e), 5.0);
        assert_eq!(dist(&[2.0, 0.5], &unit_box(2), &e), 1.0);
        assert_eq!(dist(&[0.5, 0.5], &unit_box(2), &e), 0.0);
        let seg = TraitGeometry::Segment {
            a: pt(&[0.0, 0.0]),
            b: pt(&[1.0, 0.0]),
        };
        assert_eq!(dist(&[0.5, 2.0], &seg, &e), 2.0);
    }

    #[test]
    fn chebyshev_point_set() {
        // oracle: max-norm to each point, min over points
        let points: [[f64; 2]; 2] = [[0.0, 0.0], [2.0, 2.0]];
        let a: [f64; 2] = [1.0, 1.0];
        let oracle = points
            .iter()
            .map(|p| (a[0] - p[0]).abs().max((a[1] - p[1]).abs()))
            .fold(f64::INFINITY, f64::min);
        let g = TraitGeometry::PointSet(points.iter().map(|p| pt(p)).collect());
        assert_eq!(dist(&a, &g, &DistanceMetric::Chebyshev), oracle);
        assert_eq!(oracle, 1.0);
    }

    #[test]
    fn unbounded_axis_is_free() {
        let g = TraitGeometry::Box {
            lo: pt(&[0.0, 0.0]),
            hi: pt(&[1.0, 1.0]),
            unbounded: vec![false, true],
        };
        assert_eq!(dist(&[0.5, 40.0], &g, &DistanceMetric::Euclidean), 0.0);
        assert!(g.contains(&[0.5, -7.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let g = TraitGeometry::PointSet(vec![pt(&[0.0, 0.0])]);
        assert!(matches!(
            distance_to_trait(&pt(&[1.0]), &g, &DistanceMetric::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_box_lo_above_hi_rejected() {
        let text = r#"{"axes":[{"source":"g","normalize":"none"}],
            "metric":{"kind":"euclidean"},
            "trait":{"kind":"box","lo":[1],"hi":[0]}}"#;
        assert!(matches!(
            TraitConfig::from_json(text),
            Err(Error::InvalidTrait(_))
        ));
    }

    #[test]
    fn json_schema_errors() {
        assert!(TraitConfig::from_json("{").is_err());
        let wrong_dim = r#"{"axes":[{"source":"g"}],"trait":{"kind":"points","points":[[0,1]]}}"#;
        assert!(TraitConfig::from_json(wrong_dim).is_err());
        let bad_kind = r#"{"axes":[{"source":"g"}],"trait":{"kind":"polygon"}}"#;
        assert!(TraitConfig::from_json(bad_kind).is_err());
        let weights = r#"{"axes":[{"source":"g"}],"metric":{"kind":"weighted_euclidean","weights":[0]},
            "trait":{"kind":"points","points":[[0]]}}"#;
        assert!(TraitConfig::from_json(weights).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let text = r#"{"axes":[{"source":"a"},{"source":"b","normalize":"none"}],
            "trait":{"kind":"box","lo":[0,0],"hi":[1,1],"unbounded":[1]}}"#;
        let cfg = TraitConfig::from_json(text).unwrap();
        assert_eq!(cfg.metric, DistanceMetric::Euclidean);
        assert_eq!(
            cfg.mapping.axes[0].normalization,
            crate::attribute::Normalization::MinMaxUnit
        );
        let again = TraitConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n)
    }

    fn metric() -> impl Strategy<Value = DistanceMetric> {
        metric_n(3)
    }

    fn metric_n(n: usize) -> impl Strategy<Value = DistanceMetric> {
        prop_oneof![
            Just(DistanceMetric::Euclidean),
            Just(DistanceMetric::Chebyshev),
            proptest::collection::vec(0.1f64..4.0, n)
                .prop_map(|weights| DistanceMetric::WeightedEuclidean { weights }),
        ]
    }

    proptest! {
        #[test]
        fn metric_axioms(a in point(3), b in point(3), c in point(3), m in metric()) {
            let ab = m.distance(&a, &b);
            prop_assert!((ab - m.distance(&b, &a)).abs() <= 1e-9);
            prop_assert!(ab <= m.distance(&a, &c) + m.distance(&c, &b) + 1e-9);
            prop_assert_eq!(m.distance(&a, &a), 0.0);
        }

        #[test]
        fn growing_point_set_never_increases(a in point(3), ps in proptest::collection::vec(point(3), 1..5),
                                             extra in point(3), m in metric()) {
            let t1 = TraitGeometry::PointSet(ps.iter().cloned().map(AttributePoint).collect());
            let mut bigger = ps.clone();
            bigger.push(extra);
            let t2 = TraitGeometry::PointSet(bigger.into_iter().map(AttributePoint).collect());
            prop_assert!(dist(&a, &t2, &m) <= dist(&a, &t1, &m));
        }

        #[test]
        fn box_zero_iff_member(a in point(3), lo in point(3), ext in proptest::collection::vec(0.0f64..3.0, 3), m in metric()) {
            let hi: Vec<f64> = lo.iter().zip(&ext).map(|(l, e)| l + e).collect();
            let g = TraitGeometry::Box { lo: AttributePoint(lo), hi: AttributePoint(hi), unbounded: vec![false; 3] };
            prop_assert_eq!(dist(&a, &g, &m) == 0.0, g.contains(&a));
        }

        #[test]
        fn point_set_zero_iff_equal(a in point(2), ps in proptest::collection::vec(point(2), 1..4), m in metric_n(2)) {
            let mut ps = ps;
            let g = TraitGeometry::PointSet(ps.iter().cloned().map(AttributePoint).collect());
            prop_assert_eq!(dist(&a, &g, &m) == 0.0, ps.contains(&a));
            ps.push(a.clone());
            let g = TraitGeometry::PointSet(ps.into_iter().map(AttributePoint).collect());
            prop_assert_eq!(dist(&a, &g, &m), 0.0);
        }

        #[test]
        fn segment_distance_is_minimum(a in point(3), p in point(3), q in point(3), m in metric()) {
            let g = TraitGeometry::Segment { a: AttributePoint(p.clone()), b: AttributePoint(q.clone()) };
            let d = dist(&a, &g, &m);
            // dense sampling of the segment never beats the exact value
            for k in 0..=400 {
                let t = k as f64 / 400.0;
                let s: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x + t * (y - x)).collect();
                prop_assert!(d <= m.distance(&a, &s) + 1e-9);
            }
        }
    }
}
