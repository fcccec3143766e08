//! The trait-induced distance field: `d_T` pulled back to the domain.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::field::{MultiFieldDataset, ScalarField};
use crate::par;
use crate::traits::{distance_to_trait_unchecked, TraitConfig};

/// Name given to the distance field's scalar channel.
pub const DISTANCE_FIELD_NAME: &str = "distance";

/// Per-voxel distance to the trait, with the configuration that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub field: ScalarField,
    pub provenance: TraitConfig,
}

impl Deref for DistanceField {
    type Target = ScalarField;

    fn deref(&self) -> &ScalarField {
        &self.field
    }
}

impl DistanceField {
    pub fn max(&self) -> f64 {
        self.field.range().1
    }
}

/// Evaluates `h_T(x) = d_T(f(x))` at every voxel.
pub fn compute_distance_field(
    dataset: &MultiFieldDataset,
    config: &TraitConfig,
) -> Result<DistanceField> {
    config.validate()?;
    let mapping = config.mapping.resolve(dataset)?;
    let n = mapping.dim();
    if config.geometry.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: config.geometry.dim(),
        });
    }
    let grid = *dataset.grid();
    let mut values = vec![0.0; grid.voxel_count()];
    par::fill_chunks(&mut values, 4096, |start, chunk| {
        let mut a = vec![0.0; n];
        for (k, slot) in chunk.iter_mut().enumerate() {
            mapping.map_into(start + k, &mut a);
            *slot = distance_to_trait_unchecked(&a, &config.geometry, &config.metric);
        }
    });
    Ok(DistanceField {
        field: ScalarField::new(DISTANCE_FIELD_NAME, grid, values)?,
        provenance: config.clone(),
    })
}
