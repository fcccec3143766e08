//! Scalar fields and multi-field datasets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::GridDescriptor;

/// One scalar value per grid vertex, stored as `f64` regardless of the
/// on-disk precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub name: String,
    grid: GridDescriptor,
    values: Vec<f64>,
}

impl ScalarField {
    /// Rejects length mismatches and non-finite values.
    pub fn new(name: impl Into<String>, grid: GridDescriptor, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        grid.validate()?;
        if values.len() != grid.voxel_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.voxel_count(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: name, index });
        }
        Ok(ScalarField { name, grid, values })
    }

    pub fn grid(&self) -> &GridDescriptor {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(min, max)` over all voxels.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// A collection of fields sharing one grid. Immutable once assembled.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiFieldDataset {
    grid: GridDescriptor,
    fields: Vec<ScalarField>,
    derived: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl MultiFieldDataset {
    pub fn new(grid: GridDescriptor, fields: Vec<ScalarField>) -> Result<Self> {
        grid.validate()?;
        let mut ds = MultiFieldDataset {
            grid,
            fields: Vec::with_capacity(fields.len()),
            derived: Vec::new(),
            metadata: BTreeMap::new(),
        };
        for f in fields {
            ds.push_field(f)?;
        }
        Ok(ds)
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn grid(&self) -> &GridDescriptor {
        &self.grid
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Option<&ScalarField> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&ScalarField> {
        self.field(name)
            .ok_or_else(|| Error::MissingField(name.to_string()))
    }

    /// Names of fields that were produced by derived-quantity computation.
    pub fn derived_names(&self) -> &[String] {
        &self.derived
    }

    pub fn is_derived(&self, name: &str) -> bool {
        self.derived.iter().any(|d| d == name)
    }

    pub fn push_field(&mut self, field: ScalarField) -> Result<()> {
        if field.grid() != &self.grid {
            return Err(Error::InvalidGrid(format!(
                "field '{}' does not share the dataset grid",
                field.name
            )));
        }
        if self.field(&field.name).is_some() {
            return Err(Error::DuplicateField(field.name));
        }
        self.fields.push(field);
        Ok(())
    }

    pub(crate) fn push_derived(&mut self, field: ScalarField) -> Result<()> {
        let name = field.name.clone();
        self.push_field(field)?;
        self.derived.push(name);
        Ok(())
    }
}
