use super::{AdmittanceRule, RoomScene, Vec3};
use crate::error::{Error, Result};

/// One air-cell face that touches a solid cell or the grid edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    /// Flat index of the air cell.
    pub cell: usize,
    /// Face direction, in wall order `-x, +x, -y, +y, -z, +z`.
    pub face: usize,
    /// Real normalized specific admittance of the surface.
    pub admittance: f64,
}

/// Cell-centred voxelization of a scene.
///
/// Cell `(i, j, k)` has centre `((i + 0.5) dx, (j + 0.5) dx, (k + 0.5) dx)` and flat
/// index `(i * ny + j) * nz + k`.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    pub dx: f64,
    pub dims: [usize; 3],
    pub solid: Vec<bool>,
    /// Sorted by `(cell, face)`.
    pub boundary_faces: Vec<BoundaryFace>,
}

impl VoxelGrid {
    pub fn len(&self) -> usize {
        self.solid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solid.is_empty()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let ij = idx / self.dims[2];
        [ij / self.dims[1], ij % self.dims[1], k]
    }

    pub fn cell_center(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        Vec3::new(
            (i as f64 + 0.5) * self.dx,
            (j as f64 + 0.5) * self.dx,
            (k as f64 + 0.5) * self.dx,
        )
    }

    /// Flat index of the cell containing `p` (clamped to the grid).
    pub fn cell_at(&self, p: Vec3) -> usize {
        let c = |v: f64, n: usize| ((v / self.dx).floor().max(0.0) as usize).min(n - 1);
        self.index(
            c(p.x, self.dims[0]),
            c(p.y, self.dims[1]),
            c(p.z, self.dims[2]),
        )
    }

    pub fn air_cell_count(&self) -> usize {
        self.solid.iter().filter(|s| !**s).count()
    }

    pub fn air_volume(&self) -> f64 {
        self.air_cell_count() as f64 * self.dx.powi(3)
    }

    /// Neighbour of `idx` across `face`, or `None` at the grid edge.
    pub fn neighbor(&self, idx: usize, face: usize) -> Option<usize> {
        let [i, j, k] = self.coords(idx);
        let axis = face / 2;
        let up = face % 2 == 1;
        let mut c = [i, j, k];
        if up {
            if c[axis] + 1 >= self.dims[axis] {
                return None;
            }
            c[axis] += 1;
        } else {
            if c[axis] == 0 {
                return None;
            }
            c[axis] -= 1;
        }
        Some(self.index(c[0], c[1], c[2]))
    }
}

/// Voxelizes `scene` at spacing `dx`, deriving boundary admittances with the default rule.
pub fn voxelize(scene: &RoomScene, dx: f64) -> Result<VoxelGrid> {
    voxelize_with(scene, dx, AdmittanceRule::default())
}

/// A cell is solid iff its centre lies inside an interior box or outside the room.
pub fn voxelize_with(scene: &RoomScene, dx: f64, rule: AdmittanceRule) -> Result<VoxelGrid> {
    let max_dx = scene.dims.min_component() / 4.0;
    if !(dx > 0.0) || dx > max_dx + 1e-12 {
        return Err(Error::VoxelTooCoarse { dx, max: max_dx });
    }
    let n = |l: f64| (l / dx - 1e-9).ceil().max(1.0) as usize;
    let dims = [n(scene.dims.x), n(scene.dims.y), n(scene.dims.z)];
    let total = dims[0] * dims[1] * dims[2];

    let wall_beta: Vec<f64> = (0..6)
        .map(|w| scene.wall_material(w).map(|m| m.real_admittance(rule)))
        .collect::<Result<_>>()?;
    let box_beta: Vec<f64> = scene
        .boxes
        .iter()
        .map(|b| scene.material(&b.material).map(|m| m.real_admittance(rule)))
        .collect::<Result<_>>()?;

    let mut grid = VoxelGrid {
        dx,
        dims,
        solid: vec![false; total],
        boundary_faces: Vec::new(),
    };
    // Owner of each solid cell: usize::MAX for outside the room, else box index.
    let mut owner = vec![usize::MAX; total];
    for idx in 0..total {
        let c = grid.cell_center(idx);
        let outside = c.x > scene.dims.x || c.y > scene.dims.y || c.z > scene.dims.z;
        if outside {
            grid.solid[idx] = true;
        } else if let Some(b) = scene.boxes.iter().position(|b| b.contains(c)) {
            grid.solid[idx] = true;
            owner[idx] = b;
        }
    }

    for idx in 0..total {
        if grid.solid[idx] {
            continue;
        }
        for face in 0..6 {
            let beta = match grid.neighbor(idx, face) {
                None => wall_beta[face],
                Some(nb) if grid.solid[nb] => match owner[nb] {
                    usize::MAX => wall_beta[face],
                    b => box_beta[b],
                },
                Some(_) => continue,
            };
            grid.boundary_faces.push(BoundaryFace {
                cell: idx,
                face,
                admittance: beta,
            });
        }
    }
    Ok(grid)
}
