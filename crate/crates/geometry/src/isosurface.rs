//! Watertight isosurface extraction from occupancy grids.
//!
//! Cells become lattice samples at their centers (-1 occupied, +1 empty,
//! padded with an empty ring); each lattice cube splits into six tetrahedra
//! around the main diagonal, and each tetrahedron contributes triangles at
//! the zero crossing. Adjacent cubes share face diagonals, so the result is
//! closed. Marching-cubes role, tetrahedral table.

use crate::mesh::TriMesh;
use crate::vec3::{cross, dot, sub};
use crate::voxel::VoxelGrid;
use graspgen_core::{real, Real};
use std::collections::HashMap;

const TETS: [[usize; 4]; 6] = [
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 7, 4, 6],
    [0, 4, 5, 6],
    [0, 5, 1, 6],
];

// Cube corner offsets (x, y, z).
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Extracts the surface between occupied and empty cells. An empty grid
/// yields an empty mesh.
pub fn marching_cubes<T: Real>(grid: &VoxelGrid<T>) -> TriMesh<T> {
    let [nx, ny, nz] = grid.dims;
    // Padded lattice of samples at cell centers.
    let (px, py, pz) = (nx + 2, ny + 2, nz + 2);
    let inside = |i: usize, j: usize, k: usize| -> bool {
        if i == 0 || j == 0 || k == 0 || i > nx || j > ny || k > nz {
            return false;
        }
        grid.get(i - 1, j - 1, k - 1)
    };
    let lattice_pos = |i: usize, j: usize, k: usize| -> [T; 3] {
        // Matches grid.center for interior samples; the pad ring sits one
        // cell outside.
        let half = real::<T>(0.5);
        [
            grid.origin[0] + (real::<T>(i as f64) - half) * grid.cell,
            grid.origin[1] + (real::<T>(j as f64) - half) * grid.cell,
            grid.origin[2] + (real::<T>(k as f64) - half) * grid.cell,
        ]
    };

    let mut vertices: Vec<[T; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    // One vertex per crossing lattice edge, deduplicated.
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let lin = |i: usize, j: usize, k: usize| (k * py + j) * px + i;

    for k in 0..pz - 1 {
        for j in 0..py - 1 {
            for i in 0..px - 1 {
                let mut corner_idx = [0usize; 8];
                let mut corner_in = [false; 8];
                let mut corner_pos = [[T::zero(); 3]; 8];
                for (c, off) in CORNERS.iter().enumerate() {
                    let (ci, cj, ck) = (i + off[0], j + off[1], k + off[2]);
                    corner_idx[c] = lin(ci, cj, ck);
                    corner_in[c] = inside(ci, cj, ck);
                    corner_pos[c] = lattice_pos(ci, cj, ck);
                }
                if corner_in.iter().all(|&b| b) || corner_in.iter().all(|&b| !b) {
                    continue;
                }
                for tet in &TETS {
                    emit_tet(
                        tet,
                        &corner_idx,
                        &corner_in,
                        &corner_pos,
                        &mut edge_vertex,
                        &mut vertices,
                        &mut faces,
                    );
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

fn emit_tet<T: Real>(
    tet: &[usize; 4],
    corner_idx: &[usize; 8],
    corner_in: &[bool; 8],
    corner_pos: &[[T; 3]; 8],
    edge_vertex: &mut HashMap<(usize, usize), usize>,
    vertices: &mut Vec<[T; 3]>,
    faces: &mut Vec<[usize; 3]>,
) {
    let ins: Vec<usize> = tet.iter().copied().filter(|&c| corner_in[c]).collect();
    let outs: Vec<usize> = tet.iter().copied().filter(|&c| !corner_in[c]).collect();
    if ins.is_empty() || outs.is_empty() {
        return;
    }
    let mut edge_vert = |a: usize, b: usize| -> usize {
        let ka = corner_idx[a];
        let kb = corner_idx[b];
        let key = (ka.min(kb), ka.max(kb));
        *edge_vertex.entry(key).or_insert_with(|| {
            let half = real::<T>(0.5);
            let p = [
                (corner_pos[a][0] + corner_pos[b][0]) * half,
                (corner_pos[a][1] + corner_pos[b][1]) * half,
                (corner_pos[a][2] + corner_pos[b][2]) * half,
            ];
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let push_oriented = |tri: [usize; 3], inside_corner: [T; 3], vertices: &Vec<[T; 3]>, faces: &mut Vec<[usize; 3]>| {
        let a = vertices[tri[0]];
        let b = vertices[tri[1]];
        let c = vertices[tri[2]];
        let n = cross(sub(b, a), sub(c, a));
        let to_inside = sub(inside_corner, a);
        if dot(n, to_inside) > T::zero() {
            faces.push([tri[0], tri[2], tri[1]]);
        } else {
            faces.push(tri);
        }
    };
    match ins.len() {
        1 => {
            let s = ins[0];
            let v0 = edge_vert(s, outs[0]);
            let v1 = edge_vert(s, outs[1]);
            let v2 = edge_vert(s, outs[2]);
            push_oriented([v0, v1, v2], corner_pos[s], vertices, faces);
        }
        2 => {
            // Quad between the two inside corners and the two outside ones.
            let (s0, s1) = (ins[0], ins[1]);
            let (o0, o1) = (outs[0], outs[1]);
            let a = edge_vert(s0, o0);
            let b = edge_vert(s0, o1);
            let c = edge_vert(s1, o1);
            let d = edge_vert(s1, o0);
            push_oriented([a, b, c], corner_pos[s0], vertices, faces);
            push_oriented([a, c, d], corner_pos[s0], vertices, faces);
        }
        3 => {
            let s = outs[0];
            let v0 = edge_vert(ins[0], s);
            let v1 = edge_vert(ins[1], s);
            let v2 = edge_vert(ins[2], s);
            // Orient away from the outside corner means toward the inside.
            push_oriented([v0, v1, v2], corner_pos[ins[0]], vertices, faces);
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::sample_surface;
    use crate::shapes::uv_sphere;
    use crate::voxel::{voxelize_mesh, voxelize_points, VoxelGrid};

    #[test]
    fn empty_grid_gives_empty_mesh() {
        let grid = VoxelGrid::<f64>::empty([0.0; 3], 0.01, [4, 4, 4]).unwrap();
        let mesh = marching_cubes(&grid);
        assert!(mesh.faces.is_empty());
    }

    #[test]
    fn single_voxel_gives_closed_mesh() {
        let mut grid = VoxelGrid::<f64>::empty([0.0; 3], 0.01, [3, 3, 3]).unwrap();
        grid.set(1, 1, 1, true);
        let mesh = marching_cubes(&grid);
        assert!(!mesh.faces.is_empty());
        assert!(mesh.is_watertight(), "single-voxel shell must close");
        assert!(mesh.volume() > 0.0);
        // Shell stays within one cell of the voxel.
        let c = grid.center(1, 1, 1);
        for v in &mesh.vertices {
            for a in 0..3 {
                assert!((v[a] - c[a]).abs() <= 0.011);
            }
        }
    }

    #[test]
    fn sphere_is_watertight_genus_zero() {
        let mesh = uv_sphere([0.0; 3], 0.05f64, 32, 16);
        let grid = voxelize_mesh(&mesh, 0.004).unwrap();
        let shell = marching_cubes(&grid);
        assert!(shell.is_watertight());
        assert_eq!(shell.euler_characteristic(), 2, "genus-0 closed surface");
    }

    #[test]
    fn ball_union_reconstruction_is_watertight() {
        let mesh = uv_sphere([0.0; 3], 0.05f64, 32, 16);
        let cloud = sample_surface(&mesh, 1024, 5).unwrap();
        let grid = voxelize_points(&cloud, 0.004, 0.008).unwrap();
        let shell = marching_cubes(&grid);
        assert!(shell.is_watertight());
        assert!(shell.volume() > 0.0);
    }
}
