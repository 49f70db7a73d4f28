//! Watertight parametric primitive meshes.

use crate::mesh::TriMesh;
use graspgen_core::{real, Real};

/// Axis-aligned box given center and full extents.
pub fn unit_box<T: Real>(center: [T; 3], size: [T; 3]) -> TriMesh<T> {
    let h = [size[0] * real(0.5), size[1] * real(0.5), size[2] * real(0.5)];
    let mut vertices = Vec::with_capacity(8);
    for zi in 0..2 {
        for yi in 0..2 {
            for xi in 0..2 {
                let s = |i: usize, c: T, hh: T| if i == 0 { c - hh } else { c + hh };
                vertices.push([
                    s(xi, center[0], h[0]),
                    s(yi, center[1], h[1]),
                    s(zi, center[2], h[2]),
                ]);
            }
        }
    }
    let faces = vec![
        [0, 2, 3],
        [0, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
        [0, 1, 5],
        [0, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        [0, 4, 6],
        [0, 6, 2],
        [1, 7, 5],
        [1, 3, 7],
    ];
    TriMesh::new(vertices, faces)
}

/// Latitude-longitude sphere. `segments` >= 3 around, `rings` >= 2 between
/// the poles.
pub fn uv_sphere<T: Real>(center: [T; 3], radius: T, segments: usize, rings: usize) -> TriMesh<T> {
    assert!(segments >= 3 && rings >= 2);
    let mut vertices = Vec::new();
    vertices.push([center[0], center[1], center[2] + radius]); // top pole
    for ri in 1..rings {
        let theta = real::<T>(std::f64::consts::PI) * real::<T>(ri as f64 / rings as f64);
        for si in 0..segments {
            let phi = real::<T>(2.0 * std::f64::consts::PI) * real::<T>(si as f64 / segments as f64);
            vertices.push([
                center[0] + radius * theta.sin() * phi.cos(),
                center[1] + radius * theta.sin() * phi.sin(),
                center[2] + radius * theta.cos(),
            ]);
        }
    }
    vertices.push([center[0], center[1], center[2] - radius]); // bottom pole
    let bottom = vertices.len() - 1;
    let ring = |ri: usize, si: usize| 1 + (ri - 1) * segments + (si % segments);

    let mut faces = Vec::new();
    for si in 0..segments {
        faces.push([0, ring(1, si), ring(1, si + 1)]);
    }
    for ri in 1..rings - 1 {
        for si in 0..segments {
            let a = ring(ri, si);
            let a1 = ring(ri, si + 1);
            let b = ring(ri + 1, si);
            let b1 = ring(ri + 1, si + 1);
            faces.push([a, b, b1]);
            faces.push([a, b1, a1]);
        }
    }
    for si in 0..segments {
        faces.push([bottom, ring(rings - 1, si + 1), ring(rings - 1, si)]);
    }
    TriMesh::new(vertices, faces)
}

/// Closed cylinder along +z.
pub fn cylinder<T: Real>(center: [T; 3], radius: T, height: T, segments: usize) -> TriMesh<T> {
    assert!(segments >= 3);
    let hz = height * real(0.5);
    let mut vertices = Vec::new();
    vertices.push([center[0], center[1], center[2] + hz]); // top center
    vertices.push([center[0], center[1], center[2] - hz]); // bottom center
    for si in 0..segments {
        let phi = real::<T>(2.0 * std::f64::consts::PI) * real::<T>(si as f64 / segments as f64);
        let (x, y) = (center[0] + radius * phi.cos(), center[1] + radius * phi.sin());
        vertices.push([x, y, center[2] + hz]);
    }
    for si in 0..segments {
        let phi = real::<T>(2.0 * std::f64::consts::PI) * real::<T>(si as f64 / segments as f64);
        let (x, y) = (center[0] + radius * phi.cos(), center[1] + radius * phi.sin());
        vertices.push([x, y, center[2] - hz]);
    }
    let top = |si: usize| 2 + (si % segments);
    let bot = |si: usize| 2 + segments + (si % segments);
    let mut faces = Vec::new();
    for si in 0..segments {
        faces.push([0, top(si), top(si + 1)]);
        faces.push([1, bot(si + 1), bot(si)]);
        faces.push([top(si), bot(si), bot(si + 1)]);
        faces.push([top(si), bot(si + 1), top(si + 1)]);
    }
    TriMesh::new(vertices, faces)
}

/// Capsule along +z: a cylinder of `cyl_height` with hemispherical caps.
pub fn capsule<T: Real>(
    center: [T; 3],
    radius: T,
    cyl_height: T,
    segments: usize,
    cap_rings: usize,
) -> TriMesh<T> {
    assert!(segments >= 3 && cap_rings >= 1);
    let hz = cyl_height * real(0.5);
    let half_pi = real::<T>(std::f64::consts::FRAC_PI_2);
    let mut vertices = Vec::new();
    vertices.push([center[0], center[1], center[2] + hz + radius]); // top pole
    let mut rings: Vec<Vec<usize>> = Vec::new();
    // Top hemisphere rings (theta in (0, pi/2]), shifted +hz; then bottom
    // hemisphere rings (theta in [pi/2, pi)), shifted -hz. The two equator
    // rings bound the straight section.
    for ri in 1..=cap_rings {
        let theta = half_pi * real::<T>(ri as f64 / cap_rings as f64);
        rings.push(push_ring(&mut vertices, center, radius, theta, hz, segments));
    }
    for ri in 0..cap_rings {
        let theta = half_pi + half_pi * real::<T>(ri as f64 / cap_rings as f64);
        rings.push(push_ring(&mut vertices, center, radius, theta, -hz, segments));
    }
    vertices.push([center[0], center[1], center[2] - hz - radius]); // bottom pole
    let bottom = vertices.len() - 1;

    let mut faces = Vec::new();
    for si in 0..segments {
        faces.push([0, rings[0][si], rings[0][(si + 1) % segments]]);
    }
    for w in rings.windows(2) {
        for si in 0..segments {
            let a = w[0][si];
            let a1 = w[0][(si + 1) % segments];
            let b = w[1][si];
            let b1 = w[1][(si + 1) % segments];
            faces.push([a, b, b1]);
            faces.push([a, b1, a1]);
        }
    }
    let last = rings.last().unwrap();
    for si in 0..segments {
        faces.push([bottom, last[(si + 1) % segments], last[si]]);
    }
    TriMesh::new(vertices, faces)
}

fn push_ring<T: Real>(
    vertices: &mut Vec<[T; 3]>,
    center: [T; 3],
    radius: T,
    theta: T,
    z_shift: T,
    segments: usize,
) -> Vec<usize> {
    let mut ring = Vec::with_capacity(segments);
    for si in 0..segments {
        let phi = real::<T>(2.0 * std::f64::consts::PI) * real::<T>(si as f64 / segments as f64);
        ring.push(vertices.len());
        vertices.push([
            center[0] + radius * theta.sin() * phi.cos(),
            center[1] + radius * theta.sin() * phi.sin(),
            center[2] + radius * theta.cos() + z_shift,
        ]);
    }
    ring
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_are_watertight() {
        assert!(unit_box::<f64>([0.0; 3], [1.0, 2.0, 0.5]).is_watertight());
        assert!(uv_sphere::<f64>([0.0; 3], 1.0, 24, 12).is_watertight());
        assert!(cylinder::<f64>([0.0; 3], 0.5, 2.0, 20).is_watertight());
        assert!(capsule::<f64>([0.0; 3], 0.5, 1.0, 16, 4).is_watertight());
    }

    #[test]
    fn sphere_volume_approaches_analytic() {
        let r = 0.05f64;
        let m = uv_sphere([0.0; 3], r, 48, 24);
        let analytic = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        let rel = (m.volume() - analytic).abs() / analytic;
        assert!(rel < 0.03, "sphere volume rel err {rel}");
    }

    #[test]
    fn cylinder_volume_approaches_analytic() {
        let m = cylinder([0.0; 3], 0.5f64, 2.0, 64);
        let analytic = std::f64::consts::PI * 0.25 * 2.0;
        let rel = (m.volume() - analytic).abs() / analytic;
        assert!(rel < 0.01, "cylinder volume rel err {rel}");
    }

    #[test]
    fn capsule_volume_approaches_analytic() {
        let r = 0.4f64;
        let h = 1.0f64;
        let m = capsule([0.0; 3], r, h, 48, 12);
        let analytic = std::f64::consts::PI * r * r * h + 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        let rel = (m.volume() - analytic).abs() / analytic;
        assert!(rel < 0.02, "capsule volume rel err {rel}");
    }
}
