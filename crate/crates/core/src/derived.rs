//! Derived scalar quantities: principal values and invariants of symmetric
//! 3x3 tensors, vector magnitudes and absolute values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{MultiFieldDataset, ScalarField};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedKind {
    /// Six inputs (xx, yy, zz, xy, xz, yz); outputs λ1 ≥ λ2 ≥ λ3.
    EigenvaluesSym3,
    /// Six inputs; outputs c_l, c_p, c_s.
    WestinAnisotropy,
    /// Six inputs; output λ1 − λ3.
    MaxShear,
    /// Six inputs; output xx + yy + zz.
    Trace,
    /// Any number of inputs; output the Euclidean norm.
    Magnitude,
    /// One input; output |x|.
    Abs,
}

impl DerivedKind {
    fn input_arity(self) -> Option<usize> {
        match self {
            DerivedKind::EigenvaluesSym3
            | DerivedKind::WestinAnisotropy
            | DerivedKind::MaxShear
            | DerivedKind::Trace => Some(6),
            DerivedKind::Magnitude => None,
            DerivedKind::Abs => Some(1),
        }
    }

    fn output_arity(self) -> usize {
        match self {
            DerivedKind::EigenvaluesSym3 | DerivedKind::WestinAnisotropy => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantitySpec {
    pub kind: DerivedKind,
    #[serde(alias = "input_fields")]
    pub inputs: Vec<String>,
    #[serde(alias = "output_names")]
    pub outputs: Vec<String>,
}

impl DerivedQuantitySpec {
    pub fn new<S: Into<String>>(
        kind: DerivedKind,
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
    ) -> Self {
        DerivedQuantitySpec {
            kind,
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_in = match self.kind.input_arity() {
            Some(n) => self.inputs.len() == n,
            None => !self.inputs.is_empty(),
        };
        if !ok_in {
            return Err(Error::InvalidDerived(format!(
                "{:?} got {} inputs",
                self.kind,
                self.inputs.len()
            )));
        }
        if self.outputs.len() != self.kind.output_arity() {
            return Err(Error::InvalidDerived(format!(
                "{:?} expects {} outputs, got {}",
                self.kind,
                self.kind.output_arity(),
                self.outputs.len()
            )));
        }
        Ok(())
    }
}

/// Output of [`compute_derived`].
#[derive(Clone, Debug)]
pub struct DerivedFields {
    pub fields: Vec<ScalarField>,
    /// Voxels where the anisotropy denominator vanished and zeros were emitted.
    pub degenerate_voxels: usize,
}

/// Relative size below which the eigenvalue sum counts as zero.
pub const DEGENERATE_TRACE: f64 = 1e-12;

/// Eigenvalues of the symmetric tensor `[xx, yy, zz, xy, xz, yz]`, sorted
/// descending. Closed-form trigonometric solution; diagonal (or numerically
/// diagonal) input short-circuits to the sorted diagonal.
pub fn sym3_eigenvalues(t: [f64; 6]) -> [f64; 3] {
    let [xx, yy, zz, xy, xz, yz] = t;
    let off = xy * xy + xz * xz + yz * yz;
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if off <= (f64::EPSILON * scale) * (f64::EPSILON * scale) {
        let mut d = [xx, yy, zz];
        sort_desc(&mut d);
        return d;
    }
    let q = (xx + yy + zz) / 3.0;
    let (a, b, c) = (xx - q, yy - q, zz - q);
    let p2 = a * a + b * b + c * c + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    // det((A - qI) / p) / 2
    let det = a * (b * c - yz * yz) - xy * (xy * c - yz * xz) + xz * (xy * yz - b * xz);
    let r = (det / (p * p * p) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut e = [e1, e2, e3];
    sort_desc(&mut e);
    e
}

fn sort_desc(v: &mut [f64; 3]) {
    v.sort_by(|a, b| b.total_cmp(a));
}

/// Westin shape measures `(c_l, c_p, c_s)` from descending eigenvalues, or
/// `None` when the eigenvalue sum is (relatively) zero.
pub fn westin(l: [f64; 3], input_scale: f64) -> Option<[f64; 3]> {
    let sum = l[0] + l[1] + l[2];
    if sum == 0.0 || sum.abs() < DEGENERATE_TRACE * input_scale {
        return None;
    }
    Some([
        (l[0] - l[1]) / sum,
        2.0 * (l[1] - l[2]) / sum,
        3.0 * l[2] / sum,
    ])
}

/// Evaluates a derived quantity over every voxel of `dataset`.
pub fn compute_derived(
    dataset: &MultiFieldDataset,
    spec: &DerivedQuantitySpec,
) -> Result<DerivedFields> {
    spec.validate()?;
    let inputs: Vec<&[f64]> = spec
        .inputs
        .iter()
        .map(|n| dataset.require(n).map(|f| f.values()))
        .collect::<Result<_>>()?;
    let n = dataset.grid().voxel_count();
    let kind = spec.kind;

    // (outputs, degenerate flag) per voxel
    let per_voxel: Vec<([f64; 3], bool)> = par::map_indices(n, |i| {
        let tensor = || {
            let mut t = [0.0; 6];
            for (k, slot) in t.iter_mut().enumerate() {
                *slot = inputs[k][i];
            }
            t
        };
        match kind {
            DerivedKind::EigenvaluesSym3 => (sym3_eigenvalues(tensor()), false),
            DerivedKind::WestinAnisotropy => {
                let t = tensor();
                let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                match westin(sym3_eigenvalues(t), scale) {
                    Some(c) => (c, false),
                    None => ([0.0; 3], true),
                }
            }
            DerivedKind::MaxShear => {
                let l = sym3_eigenvalues(tensor());
                ([l[0] - l[2], 0.0, 0.0], false)
            }
            DerivedKind::Trace => {
                let t = tensor();
                ([t[0] + t[1] + t[2], 0.0, 0.0], false)
            }
            DerivedKind::Magnitude => {
                let s: f64 = inputs.iter().map(|f| f[i] * f[i]).sum();
                ([s.sqrt(), 0.0, 0.0], false)
            }
            DerivedKind::Abs => ([inputs[0][i].abs(), 0.0, 0.0], false),
        }
    });

    let degenerate_voxels = per_voxel.iter().filter(|(_, d)| *d).count();
    let grid = *dataset.grid();
    let fields = spec
        .outputs
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values = per_voxel.iter().map(|(v, _)| v[k]).collect();
            ScalarField::new(name.clone(), grid, values)
        })
        .collect::<Result<_>>()?;
    Ok(DerivedFields {
        fields,
        degenerate_voxels,
    })
}

impl MultiFieldDataset {
    /// Computes `spec` and appends its outputs as derived fields. Degenerate
    /// voxel counts land in metadata under `derived.<output>.degenerate_voxels`.
    pub fn add_derived(&mut self, spec: &DerivedQuantitySpec) -> Result<()> {
        let out = compute_derived(self, spec)?;
        let record = spec.kind == DerivedKind::WestinAnisotropy;
        for f in out.fields {
            if record {
                self.metadata.insert(
                    format!("derived.{}.degenerate_voxels", f.name),
                    out.degenerate_voxels.to_string(),
                );
            }
            self.push_derived(f)?;
        }
        Ok(())
    }
}
