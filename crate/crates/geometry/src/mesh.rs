//! Triangle meshes and the mesh predicates the pipeline relies on.

use crate::vec3::{self, cross, dot, sub};
use graspgen_core::{real, Real};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    pub vertices: Vec<[T; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl<T: Real> TriMesh<T> {
    pub fn new(vertices: Vec<[T; 3]>, faces: Vec<[usize; 3]>) -> Self {
        for f in &faces {
            for &i in f {
                assert!(i < vertices.len(), "face index {i} out of {} vertices", vertices.len());
            }
        }
        Self { vertices, faces }
    }

    pub fn face_vertices(&self, f: usize) -> [[T; 3]; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.face_vertices(f);
        vec3::norm(cross(sub(b, a), sub(c, a))) * real(0.5)
    }

    pub fn total_area(&self) -> T {
        let mut s = T::zero();
        for f in 0..self.faces.len() {
            s += self.face_area(f);
        }
        s
    }

    /// Signed volume via the divergence theorem. Positive for outward-facing
    /// orientation; sums over components for multi-component meshes.
    pub fn volume(&self) -> T {
        let mut v = T::zero();
        for f in 0..self.faces.len() {
            let [a, b, c] = self.face_vertices(f);
            v += dot(a, cross(b, c));
        }
        v / real(6.0)
    }

    pub fn centroid(&self) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for &p in &self.vertices {
            c = vec3::add(c, p);
        }
        vec3::scale(c, T::one() / real(self.vertices.len().max(1) as f64))
    }

    pub fn bounds(&self) -> ([T; 3], [T; 3]) {
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in &self.vertices {
            for a in 0..3 {
                if p[a] < lo[a] {
                    lo[a] = p[a];
                }
                if p[a] > hi[a] {
                    hi[a] = p[a];
                }
            }
        }
        (lo, hi)
    }

    pub fn translated(&self, d: [T; 3]) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| vec3::add(p, d)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Every undirected edge shared by exactly two faces, with opposite
    /// directions (consistent orientation). Holds per component, so a
    /// soup of closed components counts as watertight.
    pub fn is_watertight(&self) -> bool {
        let mut directed: HashMap<(usize, usize), isize> = HashMap::new();
        for f in &self.faces {
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                if a == b {
                    return false;
                }
                let key = (a.min(b), a.max(b));
                let sgn = if a < b { 1 } else { -1 };
                *directed.entry(key).or_insert(0) += sgn;
            }
        }
        // Usage counts: need exactly one +1 and one -1 per undirected edge.
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts.values().all(|&c| c == 2) && directed.values().all(|&s| s == 0)
    }

    /// V - E + F over the whole mesh (2 per genus-0 closed component).
    pub fn euler_characteristic(&self) -> isize {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for e in 0..3 {
                let a = f[e];
                let b = f[(e + 1) % 3];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let mut used = std::collections::HashSet::new();
        for f in &self.faces {
            for &i in f {
                used.insert(i);
            }
        }
        used.len() as isize - edges.len() as isize + self.faces.len() as isize
    }

    /// Merges another mesh in as an independent component.
    pub fn append(&mut self, other: &TriMesh<T>) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(other.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
    }

    pub fn cast<U: Real>(&self) -> TriMesh<U> {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| {
                    [
                        real(p[0].to_f64().unwrap()),
                        real(p[1].to_f64().unwrap()),
                        real(p[2].to_f64().unwrap()),
                    ]
                })
                .collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Squared distance from a point to a triangle (closest-point computation).
pub fn point_triangle_dist_sq<T: Real>(p: [T; 3], a: [T; 3], b: [T; 3], c: [T; 3]) -> T {
    // Ericson, Real-Time Collision Detection, closest point on triangle.
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= T::zero() && d2 <= T::zero() {
        return vec3::norm_sq(ap);
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= T::zero() && d4 <= d3 {
        return vec3::norm_sq(bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= T::zero() && d1 >= T::zero() && d3 <= T::zero() {
        let v = d1 / (d1 - d3);
        return vec3::dist_sq(p, vec3::add(a, vec3::scale(ab, v)));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= T::zero() && d5 <= d6 {
        return vec3::norm_sq(cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= T::zero() && d2 >= T::zero() && d6 <= T::zero() {
        let w = d2 / (d2 - d6);
        return vec3::dist_sq(p, vec3::add(a, vec3::scale(ac, w)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= T::zero() && (d4 - d3) >= T::zero() && (d5 - d6) >= T::zero() {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return vec3::dist_sq(p, vec3::add(b, vec3::scale(sub(c, b), w)));
    }
    let denom = T::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let closest = vec3::add(a, vec3::add(vec3::scale(ab, v), vec3::scale(ac, w)));
    vec3::dist_sq(p, closest)
}

/// Unsigned distance from a point to the mesh surface (exhaustive).
pub fn point_mesh_distance<T: Real>(p: [T; 3], mesh: &TriMesh<T>) -> T {
    let mut best = T::infinity();
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.face_vertices(f);
        let d = point_triangle_dist_sq(p, a, b, c);
        if d < best {
            best = d;
        }
    }
    best.sqrt()
}

/// Winding-number point-in-mesh test by ray casting along +x. Overlapping
/// closed components count as inside (winding accumulates).
pub fn point_inside_mesh<T: Real>(p: [T; 3], mesh: &TriMesh<T>) -> bool {
    // Tiny irrational offset dodges edge/vertex grazing.
    let py = p[1] + real::<T>(1.236_067_97e-7);
    let pz = p[2] + real::<T>(2.449_489_74e-7);
    let mut winding = 0i32;
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.face_vertices(f);
        // Project onto yz; signed area of the projected triangle gives the
        // crossing direction.
        let (ay, az) = (a[1], a[2]);
        let (by, bz) = (b[1], b[2]);
        let (cy, cz) = (c[1], c[2]);
        let area2 = (by - ay) * (cz - az) - (bz - az) * (cy - ay);
        if area2 == T::zero() {
            continue;
        }
        // Barycentric coordinates of (py, pz) in the projected triangle.
        let w0 = ((by - py) * (cz - pz) - (bz - pz) * (cy - py)) / area2;
        let w1 = ((cy - py) * (az - pz) - (cz - pz) * (ay - py)) / area2;
        let w2 = T::one() - w0 - w1;
        if w0 < T::zero() || w1 < T::zero() || w2 < T::zero() {
            continue;
        }
        let x_cross = w0 * a[0] + w1 * b[0] + w2 * c[0];
        if x_cross > p[0] {
            winding += if area2 > T::zero() { 1 } else { -1 };
        }
    }
    winding != 0
}

/// Penetration depth of a point inside the mesh: 0 outside, distance to the
/// surface inside.
pub fn point_mesh_penetration<T: Real>(p: [T; 3], mesh: &TriMesh<T>) -> T {
    if point_inside_mesh(p, mesh) {
        point_mesh_distance(p, mesh)
    } else {
        T::zero()
    }
}
