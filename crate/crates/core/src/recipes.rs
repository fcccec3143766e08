//! Ready-made traits and derived-quantity specs for the synthetic datasets.

use crate::attribute::{AttributeMapping, AttributePoint, AxisSpec};
use crate::derived::{DerivedKind, DerivedQuantitySpec};
use crate::error::Result;
use crate::field::MultiFieldDataset;
use crate::io::synth::TENSOR_FIELDS;
use crate::traits::{DistanceMetric, TraitConfig, TraitGeometry};

pub const EIGENVALUE_FIELDS: [&str; 3] = ["lambda1", "lambda2", "lambda3"];
pub const ANISOTROPY_FIELDS: [&str; 3] = ["c_l", "c_p", "c_s"];
pub const VELOCITY_ABS_FIELDS: [&str; 3] = ["abs_vx", "abs_vy", "abs_vz"];

fn max_abs(ds: &MultiFieldDataset, name: &str) -> Result<f64> {
    Ok(ds
        .require(name)?
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs())))
}

fn two_points(axes: [&str; 2], a: [f64; 2], b: [f64; 2]) -> Result<TraitConfig> {
    TraitConfig::new(
        AttributeMapping::new(axes.iter().map(|s| AxisSpec::raw(*s)).collect())?,
        DistanceMetric::Euclidean,
        TraitGeometry::PointSet(vec![
            AttributePoint(a.to_vec()),
            AttributePoint(b.to_vec()),
        ]),
    )
}

/// Points `(+-max|h|, 0)` on raw `(h, p)` axes.
pub fn donor(ds: &MultiFieldDataset, h: &str, p: &str) -> Result<TraitConfig> {
    let m = max_abs(ds, h)?;
    two_points([h, p], [m, 0.0], [-m, 0.0])
}

/// Points `(0, +-max|p|)` on raw `(h, p)` axes.
pub fn acceptor(ds: &MultiFieldDataset, h: &str, p: &str) -> Result<TraitConfig> {
    let m = max_abs(ds, p)?;
    two_points([h, p], [0.0, m], [0.0, -m])
}

/// Eigenvalues, Westin anisotropies and maximum shear of the six stress
/// components.
pub fn tensor_derived() -> Vec<DerivedQuantitySpec> {
    vec![
        DerivedQuantitySpec::new(DerivedKind::EigenvaluesSym3, TENSOR_FIELDS, EIGENVALUE_FIELDS),
        DerivedQuantitySpec::new(DerivedKind::WestinAnisotropy, TENSOR_FIELDS, ANISOTROPY_FIELDS),
        DerivedQuantitySpec::new(DerivedKind::MaxShear, TENSOR_FIELDS.to_vec(), vec!["max_shear"]),
    ]
}

/// All three principal stresses at zero, on raw eigenvalue axes.
pub fn zero_eigenvalue() -> Result<TraitConfig> {
    TraitConfig::new(
        AttributeMapping::new(EIGENVALUE_FIELDS.iter().map(|s| AxisSpec::raw(*s)).collect())?,
        DistanceMetric::Euclidean,
        TraitGeometry::PointSet(vec![AttributePoint(vec![0.0; 3])]),
    )
}

/// `|vx|, |vy|, |vz|` as derived fields.
pub fn vortex_derived() -> Vec<DerivedQuantitySpec> {
    ["vx", "vy", "vz"]
        .iter()
        .zip(VELOCITY_ABS_FIELDS)
        .map(|(i, o)| DerivedQuantitySpec::new(DerivedKind::Abs, [*i], [o]))
        .collect()
}

/// High `|vx|` and `|vz|`, low `|vy|` and low pressure on unit-normalized axes.
pub fn vortex_box() -> Result<TraitConfig> {
    let mut axes: Vec<AxisSpec> = VELOCITY_ABS_FIELDS.iter().map(|s| AxisSpec::unit(*s)).collect();
    axes.push(AxisSpec::unit("p"));
    TraitConfig::new(
        AttributeMapping::new(axes)?,
        DistanceMetric::Euclidean,
        TraitGeometry::Box {
            lo: AttributePoint(vec![0.25, 0.0, 0.25, 0.0]),
            hi: AttributePoint(vec![1.0, 0.25, 1.0, 0.5]),
            unbounded: vec![false; 4],
        },
    )
}

/// The unit box over unit-normalized axes: contains every voxel.
pub fn full_range_box(sources: &[&str]) -> Result<TraitConfig> {
    let n = sources.len();
    TraitConfig::new(
        AttributeMapping::new(sources.iter().map(|s| AxisSpec::unit(*s)).collect())?,
        DistanceMetric::Euclidean,
        TraitGeometry::Box {
            lo: AttributePoint(vec![0.0; n]),
            hi: AttributePoint(vec![1.0; n]),
            unbounded: vec![false; n],
        },
    )
}
