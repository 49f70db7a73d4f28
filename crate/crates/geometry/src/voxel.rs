//! Occupancy voxel grids from meshes (winding-number fill) and point clouds
//! (ball union plus pocket fill).

use crate::cloud::PointCloud;
use crate::error::GeomError;
use crate::mesh::TriMesh;
use graspgen_core::{real, Real};

pub const MAX_DIM: usize = 256;
pub const DEFAULT_CELL_M: f64 = 0.004;
pub const DEFAULT_DILATION_M: f64 = 0.008;

#[derive(Clone, Debug)]
pub struct VoxelGrid<T> {
    pub origin: [T; 3],
    pub cell: T,
    pub dims: [usize; 3],
    occupancy: Vec<bool>,
}

impl<T: Real> VoxelGrid<T> {
    pub fn empty(origin: [T; 3], cell: T, dims: [usize; 3]) -> Result<Self, GeomError> {
        if dims.iter().any(|&d| d > MAX_DIM) {
            return Err(GeomError::GridTooLarge { dims });
        }
        assert!(cell > T::zero(), "voxel cell must be positive");
        Ok(Self { origin, cell, dims, occupancy: vec![false; dims[0] * dims[1] * dims[2]] })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupancy[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: bool) {
        let idx = self.index(i, j, k);
        self.occupancy[idx] = v;
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> [T; 3] {
        let half = real::<T>(0.5);
        [
            self.origin[0] + (real::<T>(i as f64) + half) * self.cell,
            self.origin[1] + (real::<T>(j as f64) + half) * self.cell,
            self.origin[2] + (real::<T>(k as f64) + half) * self.cell,
        ]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    /// Occupied volume in cubic meters.
    pub fn volume(&self) -> T {
        real::<T>(self.occupied_count() as f64) * self.cell * self.cell * self.cell
    }

    pub fn is_all_empty(&self) -> bool {
        self.occupancy.iter().all(|&o| !o)
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    /// Cell index containing a world point, or None outside the grid.
    pub fn locate(&self, p: [T; 3]) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let t = (p[a] - self.origin[a]) / self.cell;
            if t < T::zero() {
                return None;
            }
            let i = t.to_f64().unwrap().floor() as usize;
            if i >= self.dims[a] {
                return None;
            }
            idx[a] = i;
        }
        Some(idx)
    }
}

fn grid_for_bounds<T: Real>(
    lo: [T; 3],
    hi: [T; 3],
    cell: T,
    pad_cells: usize,
) -> Result<VoxelGrid<T>, GeomError> {
    let pad = real::<T>(pad_cells as f64) * cell;
    let origin = [lo[0] - pad, lo[1] - pad, lo[2] - pad];
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let span = (hi[a] - lo[a] + pad + pad) / cell;
        dims[a] = (span.to_f64().unwrap().ceil() as usize).max(1);
    }
    VoxelGrid::empty(origin, cell, dims)
}

/// Voxelizes a closed mesh: a cell is occupied when its center has non-zero
/// winding number, computed by casting a +x ray per (y, z) row and
/// accumulating signed crossings. Overlapping closed components merge.
pub fn voxelize_mesh<T: Real>(mesh: &TriMesh<T>, cell: T) -> Result<VoxelGrid<T>, GeomError> {
    if mesh.faces.is_empty() {
        return Err(GeomError::DegenerateMesh("no faces".into()));
    }
    let (lo, hi) = mesh.bounds();
    let mut grid = grid_for_bounds(lo, hi, cell, 2)?;
    let [nx, ny, nz] = grid.dims;

    // Crossings per (y, z) row: (x of crossing, winding sign).
    let mut rows: Vec<Vec<(T, i32)>> = vec![Vec::new(); ny * nz];
    // Small irrational offsets keep ray targets off triangle edges.
    let ey = real::<T>(1.236_067_977e-4) * cell;
    let ez = real::<T>(2.449_489_743e-4) * cell;
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.face_vertices(f);
        let area2 = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]);
        if area2 == T::zero() {
            continue;
        }
        let ymin = a[1].min(b[1]).min(c[1]);
        let ymax = a[1].max(b[1]).max(c[1]);
        let zmin = a[2].min(b[2]).min(c[2]);
        let zmax = a[2].max(b[2]).max(c[2]);
        let jy0 = (((ymin - grid.origin[1]) / cell).to_f64().unwrap().floor() as isize - 1).max(0) as usize;
        let jy1 = ((((ymax - grid.origin[1]) / cell).to_f64().unwrap().ceil() as isize) + 1).min(ny as isize) as usize;
        let kz0 = (((zmin - grid.origin[2]) / cell).to_f64().unwrap().floor() as isize - 1).max(0) as usize;
        let kz1 = ((((zmax - grid.origin[2]) / cell).to_f64().unwrap().ceil() as isize) + 1).min(nz as isize) as usize;
        for k in kz0..kz1 {
            for j in jy0..jy1 {
                let py = grid.center(0, j, k)[1] + ey;
                let pz = grid.center(0, j, k)[2] + ez;
                let w0 = ((b[1] - py) * (c[2] - pz) - (b[2] - pz) * (c[1] - py)) / area2;
                let w1 = ((c[1] - py) * (a[2] - pz) - (c[2] - pz) * (a[1] - py)) / area2;
                let w2 = T::one() - w0 - w1;
                if w0 < T::zero() || w1 < T::zero() || w2 < T::zero() {
                    continue;
                }
                let x = w0 * a[0] + w1 * b[0] + w2 * c[0];
                let sgn = if area2 > T::zero() { 1 } else { -1 };
                rows[k * ny + j].push((x, sgn));
            }
        }
    }
    for k in 0..nz {
        for j in 0..ny {
            let row = &mut rows[k * ny + j];
            if row.is_empty() {
                continue;
            }
            row.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
            let mut winding = 0i32;
            let mut ci = 0usize;
            for i in 0..nx {
                let xc = grid.center(i, j, k)[0];
                while ci < row.len() && row[ci].0 <= xc {
                    winding += row[ci].1;
                    ci += 1;
                }
                if winding != 0 {
                    grid.set(i, j, k, true);
                }
            }
        }
    }
    Ok(grid)
}

/// Voxelizes a point cloud as a union of balls of `dilation` radius, then
/// fills interior pockets unreachable from the grid boundary.
pub fn voxelize_points<T: Real>(
    cloud: &PointCloud<T>,
    cell: T,
    dilation: T,
) -> Result<VoxelGrid<T>, GeomError> {
    assert!(dilation >= cell, "dilation radius below the cell size leaves gaps");
    if cloud.is_empty() {
        return VoxelGrid::empty([T::zero(); 3], cell, [1, 1, 1]);
    }
    let mut lo = [T::infinity(); 3];
    let mut hi = [T::neg_infinity(); 3];
    for p in &cloud.points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a] - dilation);
            hi[a] = hi[a].max(p[a] + dilation);
        }
    }
    let mut grid = grid_for_bounds(lo, hi, cell, 2)?;
    let r = (dilation / cell).to_f64().unwrap().ceil() as isize + 1;
    let d2max = dilation * dilation;
    for &p in &cloud.points {
        let Some([ci, cj, ck]) = grid.locate(p) else { continue };
        for dk in -r..=r {
            for dj in -r..=r {
                for di in -r..=r {
                    let (i, j, k) = (ci as isize + di, cj as isize + dj, ck as isize + dk);
                    if i < 0 || j < 0 || k < 0 {
                        continue;
                    }
                    let (i, j, k) = (i as usize, j as usize, k as usize);
                    if i >= grid.dims[0] || j >= grid.dims[1] || k >= grid.dims[2] {
                        continue;
                    }
                    let c = grid.center(i, j, k);
                    let d2 = crate::vec3::dist_sq(c, p);
                    if d2 <= d2max {
                        grid.set(i, j, k, true);
                    }
                }
            }
        }
    }
    fill_pockets(&mut grid);
    erode(&mut grid, dilation);
    Ok(grid)
}

/// Morphological erosion by `radius`: keeps an occupied cell only when its
/// distance to the nearest empty cell exceeds the radius. Together with the
/// ball-union dilation and pocket fill this is a closing, so the surface
/// lands back near the sample points.
fn erode<T: Real>(grid: &mut VoxelGrid<T>, radius: T) {
    let n = grid.occupancy.len();
    let inf = f64::MAX / 4.0;
    let mut to_empty: Vec<f64> = grid.occupancy.iter().map(|&o| if o { inf } else { 0.0 }).collect();
    crate::sdf::edt3(&mut to_empty, grid.dims);
    let r_cells = (radius / grid.cell).to_f64().unwrap();
    let keep = (r_cells - 0.25).max(0.0).powi(2);
    for i in 0..n {
        if grid.occupancy[i] && to_empty[i] <= keep {
            grid.occupancy[i] = false;
        }
    }
}

/// Marks every empty cell unreachable from the boundary as occupied.
fn fill_pockets<T: Real>(grid: &mut VoxelGrid<T>) {
    let [nx, ny, nz] = grid.dims;
    let mut outside = vec![false; nx * ny * nz];
    let mut stack = Vec::new();
    let try_seed = |i: usize, j: usize, k: usize, outside: &mut Vec<bool>, stack: &mut Vec<[usize; 3]>| {
        let idx = grid.index(i, j, k);
        if !grid.occupancy[idx] && !outside[idx] {
            outside[idx] = true;
            stack.push([i, j, k]);
        }
    };
    for j in 0..ny {
        for i in 0..nx {
            try_seed(i, j, 0, &mut outside, &mut stack);
            try_seed(i, j, nz - 1, &mut outside, &mut stack);
        }
    }
    for k in 0..nz {
        for i in 0..nx {
            try_seed(i, 0, k, &mut outside, &mut stack);
            try_seed(i, ny - 1, k, &mut outside, &mut stack);
        }
    }
    for k in 0..nz {
        for j in 0..ny {
            try_seed(0, j, k, &mut outside, &mut stack);
            try_seed(nx - 1, j, k, &mut outside, &mut stack);
        }
    }
    while let Some([i, j, k]) = stack.pop() {
        let neighbors = [
            (i.wrapping_sub(1), j, k),
            (i + 1, j, k),
            (i, j.wrapping_sub(1), k),
            (i, j + 1, k),
            (i, j, k.wrapping_sub(1)),
            (i, j, k + 1),
        ];
        for (a, b, c) in neighbors {
            if a < nx && b < ny && c < nz {
                let idx = grid.index(a, b, c);
                if !grid.occupancy[idx] && !outside[idx] {
                    outside[idx] = true;
                    stack.push([a, b, c]);
                }
            }
        }
    }
    for idx in 0..grid.occupancy.len() {
        if !grid.occupancy[idx] && !outside[idx] {
            grid.occupancy[idx] = true;
        }
    }
}
