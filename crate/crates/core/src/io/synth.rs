//! Deterministic synthetic stand-ins for real multi-field data.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{MultiFieldDataset, ScalarField};
use crate::grid::GridDescriptor;
use crate::par;

/// Amplitude of the uniform noise on the `aux` field of the wells dataset.
pub const AUX_NOISE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `wells` (sum of negative Gaussians) and a low-amplitude `aux` noise field.
    GaussianWells,
    /// Six stress components `s_xx..s_yz` of two point loads on the top face.
    TensorTwoPointAnalog,
    /// `phi_h` with one blob and `phi_p` with two blobs of opposite sign, all
    /// with disjoint compact supports.
    BivariateDonorAcceptor,
    /// `vx, vy, vz, p`: two counter-rotating vortices along z plus a weak
    /// transverse tube along y.
    VectorVortexAnalog,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 4] = [
        SyntheticKind::GaussianWells,
        SyntheticKind::TensorTwoPointAnalog,
        SyntheticKind::BivariateDonorAcceptor,
        SyntheticKind::VectorVortexAnalog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::GaussianWells => "gaussian_wells",
            SyntheticKind::TensorTwoPointAnalog => "tensor_two_point_analog",
            SyntheticKind::BivariateDonorAcceptor => "bivariate_donor_acceptor",
            SyntheticKind::VectorVortexAnalog => "vector_vortex_analog",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSynthetic(format!("unknown kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub dims: [usize; 3],
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, dims: [usize; 3], seed: u64) -> Self {
        SyntheticSpec { kind, dims, seed }
    }
}

/// A Gaussian well centred on a grid vertex. Width and position are in voxels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub center: [usize; 3],
    pub width: f64,
    pub depth: f64,
}

/// Compact bump `amplitude * (1 - r^2/R^2)^3` for `r < R`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: [usize; 3],
    pub radius: f64,
    pub amplitude: f64,
}

impl Blob {
    pub fn value(&self, p: [f64; 3]) -> f64 {
        let r2 = dist2(p, self.center.map(|c| c as f64));
        let q = r2 / (self.radius * self.radius);
        if q < 1.0 {
            self.amplitude * (1.0 - q).powi(3)
        } else {
            0.0
        }
    }
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn frac_vertex(dims: [usize; 3], f: [f64; 3]) -> [usize; 3] {
    [0, 1, 2].map(|i| (f[i] * (dims[i] - 1) as f64).round() as usize)
}

fn check_dims(dims: [usize; 3]) -> Result<GridDescriptor> {
    if dims.iter().any(|&d| d < 4) {
        return Err(Error::InvalidSynthetic(format!(
            "dims must be at least 4 per axis, got {dims:?}"
        )));
    }
    GridDescriptor::unit(dims)
}

fn voxel_point(grid: &GridDescriptor, i: usize) -> [f64; 3] {
    grid.coords(i).map(|c| c as f64)
}

/// Two wells on the x axis through the centre: depths 1.0 and 0.6, width
/// `0.08 * min(dims)`.
pub fn default_wells(dims: [usize; 3]) -> Vec<Well> {
    let width = 0.08 * *dims.iter().min().unwrap() as f64;
    vec![
        Well {
            center: frac_vertex(dims, [0.3, 0.5, 0.5]),
            width,
            depth: 1.0,
        },
        Well {
            center: frac_vertex(dims, [0.7, 0.5, 0.5]),
            width,
            depth: 0.6,
        },
    ]
}

/// Wells dataset with explicit wells.
pub fn gaussian_wells(dims: [usize; 3], wells: &[Well], seed: u64) -> Result<MultiFieldDataset> {
    let grid = check_dims(dims)?;
    for w in wells {
        if !(w.width > 0.0 && w.depth > 0.0) || (0..3).any(|i| w.center[i] >= dims[i]) {
            return Err(Error::InvalidSynthetic(format!("bad well {w:?}")));
        }
    }
    let values = par::map_indices(grid.voxel_count(), |i| {
        let p = voxel_point(&grid, i);
        -wells
            .iter()
            .map(|w| {
                let r2 = dist2(p, w.center.map(|c| c as f64));
                w.depth * (-r2 / (2.0 * w.width * w.width)).exp()
            })
            .sum::<f64>()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aux = (0..grid.voxel_count())
        .map(|_| rng.gen_range(-AUX_NOISE..AUX_NOISE))
        .collect();
    let mut ds = MultiFieldDataset::new(
        grid,
        vec![
            ScalarField::new("wells", grid, values)?,
            ScalarField::new("aux", grid, aux)?,
        ],
    )?;
    ds.metadata.insert(
        "synthetic.wells".into(),
        serde_json::to_string(wells).map_err(|e| Error::json("wells", e))?,
    );
    Ok(ds)
}

/// Load positions in voxel coordinates, half a voxel above the top face.
pub fn force_points(dims: [usize; 3]) -> [[f64; 3]; 2] {
    let top = (dims[2] - 1) as f64 + 0.5;
    let y = 0.5 * (dims[1] - 1) as f64;
    let x = |f: f64| f * (dims[0] - 1) as f64;
    [[x(0.3), y, top], [x(0.7), y, top]]
}

/// Stress of a unit normal point load at `load` acting downwards on an
/// incompressible half-space: `-(3 / 2pi) r_i r_j d / R^5` with `d` the
/// depth below the load. Components in order xx, yy, zz, xy, xz, yz.
pub fn point_load_stress(p: [f64; 3], load: [f64; 3]) -> [f64; 6] {
    let r = [p[0] - load[0], p[1] - load[1], p[2] - load[2]];
    let rr = dist2(p, load);
    let d = load[2] - p[2];
    let k = -3.0 / (2.0 * std::f64::consts::PI) * d / (rr * rr * rr.sqrt());
    [
        k * r[0] * r[0],
        k * r[1] * r[1],
        k * r[2] * r[2],
        k * r[0] * r[1],
        k * r[0] * r[2],
        k * r[1] * r[2],
    ]
}

pub const TENSOR_FIELDS: [&str; 6] = ["s_xx", "s_yy", "s_zz", "s_xy", "s_xz", "s_yz"];

fn tensor_two_point(dims: [usize; 3]) -> Result<MultiFieldDataset> {
    let grid = check_dims(dims)?;
    let loads = force_points(dims);
    let stress: Vec<[f64; 6]> = par::map_indices(grid.voxel_count(), |i| {
        let p = voxel_point(&grid, i);
        let a = point_load_stress(p, loads[0]);
        let b = point_load_stress(p, loads[1]);
        [0, 1, 2, 3, 4, 5].map(|k| a[k] + b[k])
    });
    let fields = TENSOR_FIELDS
        .iter()
        .enumerate()
        .map(|(k, name)| ScalarField::new(*name, grid, stress.iter().map(|s| s[k]).collect()))
        .collect::<Result<_>>()?;
    MultiFieldDataset::new(grid, fields)
}

/// Blob layout of the bivariate dataset: one `phi_h` blob at the centre and
/// two `phi_p` blobs of opposite sign near the x ends.
pub fn bivariate_blobs(dims: [usize; 3]) -> (Vec<Blob>, Vec<Blob>) {
    let m = *dims.iter().min().unwrap() as f64;
    let h = vec![Blob {
        center: frac_vertex(dims, [0.5, 0.5, 0.5]),
        radius: 0.15 * m,
        amplitude: 1.0,
    }];
    let p = vec![
        Blob {
            center: frac_vertex(dims, [0.2, 0.5, 0.5]),
            radius: 0.12 * m,
            amplitude: 0.8,
        },
        Blob {
            center: frac_vertex(dims, [0.8, 0.5, 0.5]),
            radius: 0.12 * m,
            amplitude: -0.8,
        },
    ];
    (h, p)
}

fn bivariate(dims: [usize; 3]) -> Result<MultiFieldDataset> {
    let grid = check_dims(dims)?;
    let (hb, pb) = bivariate_blobs(dims);
    let eval = |blobs: &[Blob]| {
        par::map_indices(grid.voxel_count(), |i| {
            let p = voxel_point(&grid, i);
            blobs.iter().map(|b| b.value(p)).sum::<f64>()
        })
    };
    MultiFieldDataset::new(
        grid,
        vec![
            ScalarField::new("phi_h", grid, eval(&hb))?,
            ScalarField::new("phi_p", grid, eval(&pb))?,
        ],
    )
}

/// Lamb-Oseen swirl speed at radius `r`.
fn lamb_oseen(gamma: f64, core: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    gamma / (2.0 * std::f64::consts::PI * r) * (1.0 - (-(r * r) / (core * core)).exp())
}

fn vortex(dims: [usize; 3], seed: u64) -> Result<MultiFieldDataset> {
    let grid = check_dims(dims)?;
    let scale = dims.map(|d| (d - 1) as f64);
    // (centre in the plane normal to the axis, circulation, core radius)
    let columns = [([0.5, 0.35], 1.0, 0.08), ([0.5, 0.65], -1.0, 0.08)];
    let tube = ([0.5, 0.5], 0.3, 0.06);
    let samples: Vec<[f64; 4]> = par::map_indices(grid.voxel_count(), |i| {
        let c = grid.coords(i);
        let u = [0, 1, 2].map(|k| c[k] as f64 / scale[k]);
        let mut v = [0.0; 4];
        for (ctr, gamma, core) in columns {
            let (dx, dy) = (u[0] - ctr[0], u[1] - ctr[1]);
            let r = dx.hypot(dy);
            if r > 0.0 {
                let s = lamb_oseen(gamma, core, r) / r;
                v[0] -= s * dy;
                v[1] += s * dx;
            }
            v[3] -= gamma.abs() * (-(r * r) / (core * core)).exp();
        }
        let (ctr, gamma, core) = tube;
        let (dx, dz) = (u[0] - ctr[0], u[2] - ctr[1]);
        let r = dx.hypot(dz);
        if r > 0.0 {
            let s = lamb_oseen(gamma, core, r) / r;
            v[0] -= s * dz;
            v[2] += s * dx;
        }
        v[3] -= gamma * (-(r * r) / (core * core)).exp();
        v
    });
    // faint seeded perturbation keeps the velocity field generic
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(4);
    for (k, name) in ["vx", "vy", "vz", "p"].into_iter().enumerate() {
        let values = samples
            .iter()
            .map(|s| s[k] + rng.gen_range(-1e-6..1e-6))
            .collect();
        fields.push(ScalarField::new(name, grid, values)?);
    }
    MultiFieldDataset::new(grid, fields)
}

/// Same spec, same bytes.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiFieldDataset> {
    let mut ds = match spec.kind {
        SyntheticKind::GaussianWells => {
            check_dims(spec.dims)?;
            gaussian_wells(spec.dims, &default_wells(spec.dims), spec.seed)?
        }
        SyntheticKind::TensorTwoPointAnalog => tensor_two_point(spec.dims)?,
        SyntheticKind::BivariateDonorAcceptor => bivariate(spec.dims)?,
        SyntheticKind::VectorVortexAnalog => vortex(spec.dims, spec.seed)?,
    };
    ds.metadata
        .insert("synthetic.kind".into(), spec.kind.name().into());
    ds.metadata
        .insert("synthetic.seed".into(), spec.seed.to_string());
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_all_kinds() {
        for kind in SyntheticKind::ALL {
            let spec = SyntheticSpec::new(kind, [6, 5, 4], 7);
            let a = generate_synthetic(&spec).unwrap();
            let b = generate_synthetic(&spec).unwrap();
            assert_eq!(a, b, "{kind}");
            assert_eq!(kind.name().parse::<SyntheticKind>().unwrap(), kind);
        }
        assert!("nope".parse::<SyntheticKind>().is_err());
    }

    #[test]
    fn rejects_small_dims() {
        let spec = SyntheticSpec::new(SyntheticKind::GaussianWells, [3, 8, 8], 0);
        assert!(matches!(generate_synthetic(&spec), Err(Error::InvalidSynthetic(_))));
    }

    #[test]
    fn seed_changes_noise() {
        let a = generate_synthetic(&SyntheticSpec::new(SyntheticKind::GaussianWells, [8; 3], 1)).unwrap();
        let b = generate_synthetic(&SyntheticSpec::new(SyntheticKind::GaussianWells, [8; 3], 2)).unwrap();
        assert_eq!(a.field("wells"), b.field("wells"));
        assert_ne!(a.field("aux"), b.field("aux"));
        assert!(a.require("aux").unwrap().values().iter().all(|v| v.abs() < AUX_NOISE));
    }

    #[test]
    fn wells_are_local_minima() {
        let dims = [16; 3];
        let ds = generate_synthetic(&SyntheticSpec::new(SyntheticKind::GaussianWells, dims, 3)).unwrap();
        let g = ds.require("wells").unwrap();
        let grid = g.grid();
        for w in default_wells(dims) {
            let i = grid.index(w.center[0], w.center[1], w.center[2]);
            grid.for_each_neighbor(i, crate::grid::Connectivity::Face6, |n| {
                assert!(g.values()[n] > g.values()[i]);
            });
        }
    }

    #[test]
    fn bivariate_supports_disjoint() {
        let ds = generate_synthetic(&SyntheticSpec::new(
            SyntheticKind::BivariateDonorAcceptor,
            [24, 16, 16],
            0,
        ))
        .unwrap();
        let h = ds.require("phi_h").unwrap().values();
        let p = ds.require("phi_p").unwrap().values();
        assert!(h.iter().zip(p).all(|(a, b)| *a == 0.0 || *b == 0.0));
        assert!(h.iter().any(|&v| v > 0.0));
        assert!(p.iter().any(|&v| v > 0.0) && p.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn point_load_is_rank_one_and_compressive() {
        let s = point_load_stress([1.0, 2.0, 0.0], [0.0, 0.0, 3.0]);
        let l = crate::derived::sym3_eigenvalues(s);
        let trace = s[0] + s[1] + s[2];
        assert!(trace < 0.0);
        assert!(l[0].abs() < 1e-12 && l[1].abs() < 1e-12);
        assert!((l[2] - trace).abs() < 1e-12);
    }
}
