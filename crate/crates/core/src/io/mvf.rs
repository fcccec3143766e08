use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_bytes, read_text, to_sorted_json, write_atomic};
use crate::error::{Error, Result};
use crate::field::{MultiFieldDataset, ScalarField};
use crate::grid::GridDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub name: String,
    /// Relative to the descriptor's directory.
    pub file: String,
    pub dtype: Dtype,
}

/// The JSON descriptor of an MVF dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvfDescriptor {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub fields: Vec<FieldEntry>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

fn base_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn decode(entry: &FieldEntry, bytes: &[u8], count: usize) -> Result<Vec<f64>> {
    let expected = count * entry.dtype.size();
    if bytes.len() != expected {
        return Err(Error::PayloadSize {
            field: entry.name.clone(),
            expected,
            found: bytes.len(),
        });
    }
    Ok(match entry.dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    })
}

/// Reads a descriptor and all field payloads it lists.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<MultiFieldDataset> {
    let path = path.as_ref();
    let desc: MvfDescriptor = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    let grid = GridDescriptor::new(desc.dims, desc.spacing, desc.origin)?;
    let mut seen = std::collections::HashSet::new();
    for f in &desc.fields {
        if !seen.insert(f.name.as_str()) {
            return Err(Error::DuplicateField(f.name.clone()));
        }
    }
    let dir = base_dir(path);
    let mut fields = Vec::with_capacity(desc.fields.len());
    for entry in &desc.fields {
        let bytes = read_bytes(&dir.join(&entry.file))?;
        let values = decode(entry, &bytes, grid.voxel_count())?;
        fields.push(ScalarField::new(entry.name.clone(), grid, values)?);
    }
    let metadata = desc
        .metadata
        .into_iter()
        .map(|(k, v)| match v {
            serde_json::Value::String(s) => (k, s),
            other => (k, other.to_string()),
        })
        .collect();
    Ok(MultiFieldDataset::new(grid, fields)?.with_metadata(metadata))
}

fn file_name_for(stem: &str, field: &str) -> String {
    let clean: String = field
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{stem}_{clean}.raw")
}

/// Writes the descriptor at `path` and one `f64` payload per field next to it.
pub fn store_dataset(dataset: &MultiFieldDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dir = base_dir(path);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let grid = dataset.grid();
    let mut entries = Vec::with_capacity(dataset.fields().len());
    let mut used = std::collections::HashSet::new();
    for field in dataset.fields() {
        let mut file = file_name_for(&stem, &field.name);
        let mut k = 1;
        while !used.insert(file.clone()) {
            file = file_name_for(&stem, &format!("{}_{k}", field.name));
            k += 1;
        }
        write_atomic(&dir.join(&file), |w| {
            for v in field.values() {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        })?;
        entries.push(FieldEntry {
            name: field.name.clone(),
            file,
            dtype: Dtype::F64,
        });
    }
    let desc = MvfDescriptor {
        dims: grid.dims,
        spacing: grid.spacing,
        origin: grid.origin,
        fields: entries,
        metadata: dataset
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect(),
    };
    let text = to_sorted_json(&desc)?;
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// Stores a single field as its own dataset.
pub fn store_field(
    field: &ScalarField,
    metadata: BTreeMap<String, String>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let ds = MultiFieldDataset::new(*field.grid(), vec![field.clone()])?.with_metadata(metadata);
    store_dataset(&ds, path)
}
