//! On-disk formats: MVF datasets, label exports, tree JSON, OBJ meshes, plus
//! the synthetic dataset generator.

mod export;
mod mvf;
pub mod synth;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

pub use export::{
    legend_path, load_labels, load_mesh_obj, load_tree_json, store_labels, store_mesh_obj,
    store_tree_json, tree_document, ArcSummary, BranchSummary, TreeDocument,
};
pub use mvf::{load_dataset, store_dataset, store_field, Dtype, FieldEntry, MvfDescriptor};
pub use synth::{generate_synthetic, SyntheticKind, SyntheticSpec};

use crate::error::{Error, Result};

/// Writes through a temporary file in the target directory and renames it
/// into place once complete.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with object keys sorted.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).map_err(|e| Error::json("serialize", e))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::json("serialize", e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
