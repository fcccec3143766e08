//! Level sets of a scalar field as triangle meshes (marching cubes).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mc_tables::{CORNERS, EDGES, TRIANGLES};
use crate::par;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    /// World-space positions.
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// The iso-value the mesh was extracted at.
    pub level: f64,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Undirected edges with the number of triangles using each.
    pub fn edge_usage(&self) -> HashMap<(u32, u32), usize> {
        let mut edges = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Every edge shared by exactly two triangles.
    pub fn is_closed(&self) -> bool {
        !self.triangles.is_empty() && self.edge_usage().values().all(|&n| n == 2)
    }

    /// `V - E + F` over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i as usize] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edge_usage().len() as i64 + self.triangles.len() as i64
    }

    /// Unnormalized per-face normals (zero for sliver triangles).
    pub fn face_normals(&self) -> Vec<[f64; 3]> {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ]
            })
            .collect()
    }
}

/// Marching cubes over every grid cell at iso-value `level`. A vertex counts
/// as inside when its value is `<= level`, so exact-level plateaus end up on
/// the inside. Mesh vertices are shared between cells through the grid edge
/// they lie on; their order is the first-use order in cell-index order.
pub fn extract_level_set(field: &ScalarField, level: f64) -> Result<TriangleMesh> {
    if !level.is_finite() || level < 0.0 {
        return Err(Error::InvalidQuery(format!(
            "level must be finite and non-negative, got {level}"
        )));
    }
    let grid = *field.grid();
    let [nx, ny, nz] = grid.dims;
    let values = field.values();
    let empty = TriangleMesh {
        level,
        ..TriangleMesh::default()
    };
    if nx < 2 || ny < 2 || nz < 2 {
        return Ok(empty);
    }
    let strides = [1, nx, nx * ny];

    // triangles as triples of global edge ids, one buffer per z-slab
    let slabs: Vec<Vec<[u64; 3]>> = par::map_indices(nz - 1, |z| {
        let mut out = Vec::new();
        for y in 0..ny - 1 {
            for x in 0..nx - 1 {
                let base = grid.index(x, y, z);
                let corner = |k: usize| {
                    let [dx, dy, dz] = CORNERS[k];
                    base + dx * strides[0] + dy * strides[1] + dz * strides[2]
                };
                let mut mask = 0usize;
                for k in 0..8 {
                    if values[corner(k)] <= level {
                        mask |= 1 << k;
                    }
                }
                let row = &TRIANGLES[mask];
                let edge_id = |e: i8| {
                    let [a, b] = EDGES[e as usize];
                    let (ca, cb) = (CORNERS[a], CORNERS[b]);
                    let axis = (0..3).find(|&i| ca[i] != cb[i]).unwrap();
                    let lower = corner(if ca[axis] < cb[axis] { a } else { b });
                    (lower as u64) * 3 + axis as u64
                };
                for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    out.push([edge_id(tri[0]), edge_id(tri[1]), edge_id(tri[2])]);
                }
            }
        }
        out
    });

    let mut mesh = empty;
    let mut index: HashMap<u64, u32> = HashMap::new();
    for tri in slabs.into_iter().flatten() {
        let ids = tri.map(|edge| {
            *index.entry(edge).or_insert_with(|| {
                let lower = (edge / 3) as usize;
                let axis = (edge % 3) as usize;
                let upper = lower + strides[axis];
                let (va, vb) = (values[lower], values[upper]);
                let t = (level - va) / (vb - va);
                let mut p = grid.world(lower);
                p[axis] += t * grid.spacing[axis];
                mesh.vertices.push(p);
                (mesh.vertices.len() - 1) as u32
            })
        });
        mesh.triangles.push(ids);
    }
    Ok(mesh)
}
