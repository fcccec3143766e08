//! The attribute mapping: which fields span attribute space and how each
//! axis is normalized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MultiFieldDataset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// `(v - min) / (max - min)`; a constant source maps to 0.
    #[default]
    MinMaxUnit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub source: String,
    #[serde(rename = "normalize", default)]
    pub normalization: Normalization,
}

impl AxisSpec {
    pub fn new(source: impl Into<String>, normalization: Normalization) -> Self {
        AxisSpec {
            source: source.into(),
            normalization,
        }
    }

    pub fn raw(source: impl Into<String>) -> Self {
        Self::new(source, Normalization::None)
    }

    pub fn unit(source: impl Into<String>) -> Self {
        Self::new(source, Normalization::MinMaxUnit)
    }
}

/// Ordered axes of attribute space; `axes.len()` is its dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeMapping {
    pub axes: Vec<AxisSpec>,
}

impl AttributeMapping {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidTrait("attribute mapping needs at least one axis".into()));
        }
        Ok(AttributeMapping { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Binds every axis to its field and caches the normalization range.
    pub fn resolve<'a>(&self, dataset: &'a MultiFieldDataset) -> Result<ResolvedMapping<'a>> {
        if self.axes.is_empty() {
            return Err(Error::InvalidTrait("attribute mapping needs at least one axis".into()));
        }
        let axes = self
            .axes
            .iter()
            .map(|axis| {
                let field = dataset.require(&axis.source)?;
                let (min, max) = field.range();
                Ok(ResolvedAxis {
                    values: field.values(),
                    normalization: axis.normalization,
                    min,
                    max,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ResolvedMapping { axes })
    }
}

/// A point of attribute space in mapped (post-normalization) coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributePoint(pub Vec<f64>);

impl AttributePoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for AttributePoint {
    fn from(v: Vec<f64>) -> Self {
        AttributePoint(v)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ResolvedAxis<'a> {
    values: &'a [f64],
    pub normalization: Normalization,
    /// Raw range of the source field.
    pub min: f64,
    pub max: f64,
}

impl ResolvedAxis<'_> {
    #[inline]
    pub fn map(&self, raw: f64) -> f64 {
        match self.normalization {
            Normalization::None => raw,
            Normalization::MinMaxUnit => {
                if self.max > self.min {
                    (raw - self.min) / (self.max - self.min)
                } else {
                    0.0
                }
            }
        }
    }
}

/// An [`AttributeMapping`] bound to a dataset: evaluates `f(x)` per voxel.
#[derive(Clone, Debug)]
pub struct ResolvedMapping<'a> {
    axes: Vec<ResolvedAxis<'a>>,
}

impl ResolvedMapping<'_> {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[ResolvedAxis<'_>] {
        &self.axes
    }

    /// Writes the mapped coordinates of `voxel` into `out`.
    #[inline]
    pub fn map_into(&self, voxel: usize, out: &mut [f64]) {
        for (slot, axis) in out.iter_mut().zip(&self.axes) {
            *slot = axis.map(axis.values[voxel]);
        }
    }

    pub fn point(&self, voxel: usize) -> AttributePoint {
        let mut out = vec![0.0; self.axes.len()];
        self.map_into(voxel, &mut out);
        AttributePoint(out)
    }
}

/// `f(x)` for a single voxel.
pub fn map_to_attribute(
    dataset: &MultiFieldDataset,
    mapping: &AttributeMapping,
    voxel: usize,
) -> Result<AttributePoint> {
    let n = dataset.grid().voxel_count();
    if voxel >= n {
        return Err(Error::InvalidQuery(format!(
            "voxel {voxel} out of range for {n} voxels"
        )));
    }
    Ok(mapping.resolve(dataset)?.point(voxel))
}
