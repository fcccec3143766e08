use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_bytes, read_text, to_sorted_json, write_atomic};
use crate::error::{Error, Result};
use crate::merge_tree::{BranchDecomposition, MergeTree, Node};
use crate::mesh::TriangleMesh;
use crate::segmentation::{LabelField, LegendEntry};

/// `labels.bin` -> `labels.legend.json`.
pub fn legend_path(labels: &Path) -> PathBuf {
    labels.with_extension("legend.json")
}

/// Raw little-endian `u32` labels plus the legend sidecar.
pub fn store_labels(labels: &LabelField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |w| {
        for l in &labels.labels {
            w.write_all(&l.to_le_bytes())?;
        }
        Ok(())
    })?;
    let legend = to_sorted_json(&labels.legend)?;
    write_atomic(&legend_path(path), |w| w.write_all(legend.as_bytes()))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<(Vec<u32>, Vec<LegendEntry>)> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format(format!(
            "{}: length {} is not a multiple of 4",
            path.display(),
            bytes.len()
        )));
    }
    let labels = bytes
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let lp = legend_path(path);
    let legend = serde_json::from_str(&read_text(&lp)?)
        .map_err(|e| Error::json(lp.display().to_string(), e))?;
    Ok((labels, legend))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSummary {
    pub child: usize,
    pub parent: usize,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub id: usize,
    pub min_node: usize,
    pub term_node: usize,
    pub persistence: f64,
    pub hypervolume: f64,
    pub parent: Option<usize>,
}

/// Tree structure without vertex lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub root: usize,
    pub nodes: Vec<Node>,
    pub arcs: Vec<ArcSummary>,
    pub branches: Vec<BranchSummary>,
}

pub fn tree_document(tree: &MergeTree, bd: &BranchDecomposition) -> TreeDocument {
    TreeDocument {
        root: tree.root(),
        nodes: tree.nodes().to_vec(),
        arcs: tree
            .arcs()
            .iter()
            .map(|a| ArcSummary {
                child: a.child,
                parent: a.parent,
                size: a.vertices.len(),
            })
            .collect(),
        branches: bd
            .branches
            .iter()
            .map(|b| BranchSummary {
                id: b.id,
                min_node: b.min_node,
                term_node: b.term_node,
                persistence: b.persistence,
                hypervolume: b.hypervolume,
                parent: b.parent,
            })
            .collect(),
    }
}

pub fn store_tree_json(
    tree: &MergeTree,
    bd: &BranchDecomposition,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = to_sorted_json(&tree_document(tree, bd))?;
    write_atomic(path.as_ref(), |w| w.write_all(text.as_bytes()))
}

pub fn load_tree_json(path: impl AsRef<Path>) -> Result<TreeDocument> {
    let path = path.as_ref();
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::json(path.display().to_string(), e))
}

/// ASCII Wavefront OBJ with 1-based face indices.
pub fn store_mesh_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), |w| {
        writeln!(w, "# level set at {}", mesh.level)?;
        writeln!(
            w,
            "# {} vertices, {} triangles",
            mesh.vertices.len(),
            mesh.triangles.len()
        )?;
        for v in &mesh.vertices {
            writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    })
}

/// Reads `v` and triangular `f` lines; the level is taken from the header
/// comment when present.
pub fn load_mesh_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let bad = |line: usize, what: &str| {
        Error::Format(format!("{}:{}: {what}", path.display(), line + 1))
    };
    let mut mesh = TriangleMesh::default();
    for (n, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("#") => {
                if let Some(rest) = line.strip_prefix("# level set at ") {
                    mesh.level = rest.trim().parse().map_err(|_| bad(n, "bad level"))?;
                }
            }
            Some("v") => {
                let mut p = [0.0; 3];
                for c in &mut p {
                    *c = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(n, "bad vertex"))?;
                }
                mesh.vertices.push(p);
            }
            Some("f") => {
                let mut t = [0u32; 3];
                for c in &mut t {
                    let i: u32 = parts
                        .next()
                        .and_then(|s| s.split('/').next())
                        .and_then(|s| s.parse().ok())
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| bad(n, "bad face"))?;
                    *c = i - 1;
                }
                if parts.next().is_some() {
                    return Err(bad(n, "only triangles are supported"));
                }
                mesh.triangles.push(t);
            }
            _ => {}
        }
    }
    let nv = mesh.vertices.len() as u32;
    if mesh.triangles.iter().flatten().any(|&i| i >= nv) {
        return Err(Error::Format(format!("{}: face index out of range", path.display())));
    }
    Ok(mesh)
}
