//! Trait-induced distance fields over multi-field volumes, their merge trees,
//! and the segmentations and level sets derived from them.

pub mod attribute;
pub mod derived;
pub mod distance;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
mod mc_tables;
pub mod merge_tree;
pub mod mesh;
pub mod par;
pub mod recipes;
pub mod segmentation;
pub mod traits;

pub use attribute::{AttributeMapping, AttributePoint, AxisSpec, Normalization};
pub use derived::{DerivedKind, DerivedQuantitySpec};
pub use distance::{compute_distance_field, DistanceField};
pub use error::{Error, Result};
pub use field::{MultiFieldDataset, ScalarField};
pub use grid::{Connectivity, GridDescriptor};
pub use merge_tree::{
    build_merge_tree, compute_hypervolume, compute_persistence, simplify, BranchDecomposition,
    MergeTree, MetricKind, SimplificationMetric,
};
pub use mesh::{extract_level_set, TriangleMesh};
pub use segmentation::{run_query, LabelField, QueryMethod, QuerySpec};
pub use traits::{distance_to_trait, DistanceMetric, TraitConfig, TraitGeometry};
