//! Structured grid geometry and vertex adjacency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular grid of vertices. Index ordering is x-fastest, then y, then z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl GridDescriptor {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        let grid = GridDescriptor {
            dims,
            spacing,
            origin,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Unit spacing, zero origin.
    pub fn unit(dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, [1.0; 3], [0.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidGrid(format!(
                "dims must be positive, got {:?}",
                self.dims
            )));
        }
        let count = self.dims[0]
            .checked_mul(self.dims[1])
            .and_then(|c| c.checked_mul(self.dims[2]));
        if count.is_none() || count.unwrap() > u32::MAX as usize {
            return Err(Error::InvalidGrid(format!(
                "voxel count of {:?} overflows the index type",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// World-space position of a grid vertex.
    pub fn world(&self, index: usize) -> [f64; 3] {
        let c = self.coords(index);
        [
            self.origin[0] + c[0] as f64 * self.spacing[0],
            self.origin[1] + c[1] as f64 * self.spacing[1],
            self.origin[2] + c[2] as f64 * self.spacing[2],
        ]
    }

    /// Calls `f` for every axis neighbor of `index` under `conn`.
    #[inline]
    pub fn for_each_neighbor(&self, index: usize, conn: Connectivity, mut f: impl FnMut(usize)) {
        let [x, y, z] = self.coords(index);
        let [nx, ny, nz] = self.dims;
        let sy = nx;
        let sz = nx * ny;
        if x > 0 {
            f(index - 1);
        }
        if x + 1 < nx {
            f(index + 1);
        }
        if y > 0 {
            f(index - sy);
        }
        if y + 1 < ny {
            f(index + sy);
        }
        if conn == Connectivity::Face6 {
            if z > 0 {
                f(index - sz);
            }
            if z + 1 < nz {
                f(index + sz);
            }
        }
    }
}

/// Vertex adjacency used for sub-level set connectivity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// Six axis neighbors.
    #[default]
    Face6,
    /// Four in-plane neighbors; only valid on single-slice grids.
    Edge4,
}

impl Connectivity {
    pub fn check(self, grid: &GridDescriptor) -> Result<()> {
        match self {
            Connectivity::Face6 => Ok(()),
            Connectivity::Edge4 if grid.dims[2] == 1 => Ok(()),
            Connectivity::Edge4 => Err(Error::InvalidGrid(format!(
                "edge4 connectivity requires a single z-slice, got dims {:?}",
                grid.dims
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = GridDescriptor::unit([3, 4, 5]).unwrap();
        for i in 0..g.voxel_count() {
            let [x, y, z] = g.coords(i);
            assert_eq!(g.index(x, y, z), i);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridDescriptor::unit([0, 1, 1]).is_err());
        assert!(GridDescriptor::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        assert!(GridDescriptor::unit([1 << 20, 1 << 20, 1 << 20]).is_err());
    }

    #[test]
    fn neighbor_counts() {
        let g = GridDescriptor::unit([3, 3, 3]).unwrap();
        let count = |i| {
            let mut n = 0;
            g.for_each_neighbor(i, Connectivity::Face6, |_| n += 1);
            n
        };
        assert_eq!(count(g.index(1, 1, 1)), 6);
        assert_eq!(count(0), 3);
        let flat = GridDescriptor::unit([3, 3, 1]).unwrap();
        assert!(Connectivity::Edge4.check(&flat).is_ok());
        assert!(Connectivity::Edge4.check(&g).is_err());
    }
}
