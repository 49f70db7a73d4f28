//! Signed distance fields from occupancy grids via exact Euclidean distance
//! transforms, with trilinear interpolation at query points.

use crate::voxel::VoxelGrid;
use graspgen_core::{real, Real};

/// Per-cell signed distance (meters, negative inside), sampled at cell
/// centers and trilinearly interpolated between them.
#[derive(Clone, Debug)]
pub struct SdfGrid<T> {
    pub origin: [T; 3],
    pub cell: T,
    pub dims: [usize; 3],
    values: Vec<T>,
}

impl<T: Real> SdfGrid<T> {
    /// Builds the field from occupancy: distance-to-occupied minus
    /// distance-to-empty, each shifted half a cell so the zero level sits on
    /// the occupancy boundary.
    pub fn from_grid(grid: &VoxelGrid<T>) -> Self {
        let [nx, ny, nz] = grid.dims;
        let n = nx * ny * nz;
        let occ = grid.occupancy();
        let inf = f64::MAX / 4.0;
        // Squared distances in cell units.
        let mut to_occ: Vec<f64> = occ.iter().map(|&o| if o { 0.0 } else { inf }).collect();
        let mut to_empty: Vec<f64> = occ.iter().map(|&o| if o { inf } else { 0.0 }).collect();
        edt3(&mut to_occ, grid.dims);
        edt3(&mut to_empty, grid.dims);
        let mut values = Vec::with_capacity(n);
        let half = 0.5;
        for idx in 0..n {
            let v = if occ[idx] {
                -(to_empty[idx].sqrt() - half)
            } else {
                to_occ[idx].sqrt() - half
            };
            values.push(real::<T>(v) * grid.cell);
        }
        Self { origin: grid.origin, cell: grid.cell, dims: grid.dims, values }
    }

    #[inline]
    fn at(&self, i: usize, j: usize, k: usize) -> T {
        self.values[(k * self.dims[1] + j) * self.dims[0] + i]
    }

    /// Signed distance at an arbitrary point. Inside the grid this is a
    /// trilinear interpolation of cell-center values; outside, the clamped
    /// border value plus the Euclidean distance to the border sample.
    pub fn sample(&self, p: [T; 3]) -> T {
        let half = real::<T>(0.5);
        let mut t = [T::zero(); 3];
        let mut clamped_sq = T::zero();
        for a in 0..3 {
            let x = (p[a] - self.origin[a]) / self.cell - half;
            let max = real::<T>((self.dims[a] - 1) as f64);
            let xc = x.max(T::zero()).min(max);
            let d = (x - xc) * self.cell;
            clamped_sq += d * d;
            t[a] = xc;
        }
        let i0 = t[0].to_f64().unwrap().floor() as usize;
        let j0 = t[1].to_f64().unwrap().floor() as usize;
        let k0 = t[2].to_f64().unwrap().floor() as usize;
        let i1 = (i0 + 1).min(self.dims[0] - 1);
        let j1 = (j0 + 1).min(self.dims[1] - 1);
        let k1 = (k0 + 1).min(self.dims[2] - 1);
        let fx = t[0] - real::<T>(i0 as f64);
        let fy = t[1] - real::<T>(j0 as f64);
        let fz = t[2] - real::<T>(k0 as f64);
        let lerp = |a: T, b: T, f: T| a + (b - a) * f;
        let c00 = lerp(self.at(i0, j0, k0), self.at(i1, j0, k0), fx);
        let c10 = lerp(self.at(i0, j1, k0), self.at(i1, j1, k0), fx);
        let c01 = lerp(self.at(i0, j0, k1), self.at(i1, j0, k1), fx);
        let c11 = lerp(self.at(i0, j1, k1), self.at(i1, j1, k1), fx);
        let c0 = lerp(c00, c10, fy);
        let c1 = lerp(c01, c11, fy);
        let inside = lerp(c0, c1, fz);
        inside + clamped_sq.sqrt()
    }

    /// Central-difference gradient of the field, normalized to a unit
    /// direction (points from inside toward outside).
    pub fn gradient(&self, p: [T; 3]) -> [T; 3] {
        let h = self.cell * real::<T>(0.5);
        let mut g = [T::zero(); 3];
        for a in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[a] += h;
            pm[a] -= h;
            g[a] = (self.sample(pp) - self.sample(pm)) / (h + h);
        }
        crate::vec3::normalize(g)
    }
}

/// In-place exact squared EDT (Felzenszwalb-Huttenlocher), separable over
/// the three axes; distances in cell units.
pub(crate) fn edt3(f: &mut [f64], dims: [usize; 3]) {
    let [nx, ny, nz] = dims;
    let nmax = nx.max(ny).max(nz);
    let mut line = vec![0.0f64; nmax];
    let mut out = vec![0.0f64; nmax];
    let mut v = vec![0usize; nmax];
    let mut z = vec![0.0f64; nmax + 1];
    // x pass
    for k in 0..nz {
        for j in 0..ny {
            let base = (k * ny + j) * nx;
            line[..nx].copy_from_slice(&f[base..base + nx]);
            edt1(&line[..nx], &mut out[..nx], &mut v, &mut z);
            f[base..base + nx].copy_from_slice(&out[..nx]);
        }
    }
    // y pass
    for k in 0..nz {
        for i in 0..nx {
            for j in 0..ny {
                line[j] = f[(k * ny + j) * nx + i];
            }
            edt1(&line[..ny], &mut out[..ny], &mut v, &mut z);
            for j in 0..ny {
                f[(k * ny + j) * nx + i] = out[j];
            }
        }
    }
    // z pass
    for j in 0..ny {
        for i in 0..nx {
            for k in 0..nz {
                line[k] = f[(k * ny + j) * nx + i];
            }
            edt1(&line[..nz], &mut out[..nz], &mut v, &mut z);
            for k in 0..nz {
                f[(k * ny + j) * nx + i] = out[k];
            }
        }
    }
}

/// 1-D squared distance transform of a sampled function.
fn edt1(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
}
