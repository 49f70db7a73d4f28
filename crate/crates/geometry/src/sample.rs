//! Area-uniform surface sampling.

use crate::cloud::PointCloud;
use crate::error::GeomError;
use crate::mesh::TriMesh;
use crate::vec3::{add, scale};
use graspgen_core::rng::{derive_rng, uniform};
use graspgen_core::Real;

/// Samples `n` points uniformly over the mesh surface: triangles drawn
/// area-weighted, positions barycentric-uniform. Deterministic given `seed`.
pub fn sample_surface<T: Real>(
    mesh: &TriMesh<T>,
    n: usize,
    seed: u64,
) -> Result<PointCloud<T>, GeomError> {
    let mut cum = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0f64;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f).to_f64().unwrap();
        cum.push(total);
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(GeomError::DegenerateMesh(format!("total surface area {total}")));
    }
    let mut rng = derive_rng(seed, &[0x5352_4643]);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = uniform(&mut rng, 0.0, total);
        let f = cum.partition_point(|&c| c < u).min(mesh.faces.len() - 1);
        let [a, b, c] = mesh.face_vertices(f);
        let r1: T = uniform(&mut rng, 0.0, 1.0);
        let r2: T = uniform(&mut rng, 0.0, 1.0);
        let s = r1.sqrt();
        let wa = T::one() - s;
        let wb = s * (T::one() - r2);
        let wc = s * r2;
        points.push(add(add(scale(a, wa), scale(b, wb)), scale(c, wc)));
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::point_triangle_dist_sq;

    #[test]
    fn unit_square_sample_mean_hits_centroid() {
        // Unit square in the xy plane as two triangles.
        let mesh = TriMesh::<f64>::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        );
        let cloud = sample_surface(&mesh, 100_000, 7).unwrap();
        let c = cloud.centroid();
        assert!((c[0] - 0.5).abs() < 0.01, "mean x {}", c[0]);
        assert!((c[1] - 0.5).abs() < 0.01, "mean y {}", c[1]);
        assert!(c[2].abs() < 1e-12);
    }

    #[test]
    fn single_triangle_samples_stay_inside() {
        let a = [0.0, 0.0, 0.0];
        let b = [2.0, 0.0, 0.0];
        let c = [0.0, 3.0, 0.0];
        let mesh = TriMesh::new(vec![a, b, c], vec![[0, 1, 2]]);
        let cloud = sample_surface(&mesh, 500, 3).unwrap();
        for &p in &cloud.points {
            assert!(point_triangle_dist_sq(p, a, b, c) < 1e-20);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mesh = crate::shapes::uv_sphere([0.0; 3], 1.0f32, 16, 8);
        let a = sample_surface(&mesh, 256, 11).unwrap();
        let b = sample_surface(&mesh, 256, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_area_mesh_is_an_error() {
        let mesh = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        );
        assert!(sample_surface(&mesh, 8, 1).is_err());
    }
}
