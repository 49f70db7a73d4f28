//! Exact k-nearest-neighbor queries and Chamfer distance.
//!
//! Clouds here top out at 2048 points, so the implementation is an
//! exhaustive scan with a bounded selection buffer. Ties on distance resolve
//! to the lower index; the oracle tests compare against an independent
//! full-sort scan.

use crate::cloud::PointCloud;
use crate::error::GeomError;
use crate::vec3::dist_sq;
use graspgen_core::{real, Real};

/// Indices of the `k` nearest cloud points to `query`, ascending by
/// distance, ties by index.
pub fn knn<T: Real>(query: [T; 3], cloud: &PointCloud<T>, k: usize) -> Result<Vec<usize>, GeomError> {
    let n = cloud.len();
    if n == 0 {
        return Err(GeomError::EmptyCloud);
    }
    if k > n {
        return Err(GeomError::KTooLarge { k, n });
    }
    // Insertion-select into a small sorted buffer of (d2, idx).
    let mut best: Vec<(T, usize)> = Vec::with_capacity(k + 1);
    for (i, &p) in cloud.points.iter().enumerate() {
        let d2 = dist_sq(query, p);
        if best.len() == k {
            let &(wd, wi) = best.last().unwrap();
            if d2 > wd || (d2 == wd && i > wi) {
                continue;
            }
        }
        let pos = best.partition_point(|&(bd, bi)| bd < d2 || (bd == d2 && bi < i));
        best.insert(pos, (d2, i));
        if best.len() > k {
            best.pop();
        }
    }
    Ok(best.into_iter().map(|(_, i)| i).collect())
}

/// Index of the single nearest point (lowest index on ties).
pub fn nearest<T: Real>(query: [T; 3], cloud: &PointCloud<T>) -> Result<usize, GeomError> {
    Ok(knn(query, cloud, 1)?[0])
}

/// Symmetric Chamfer distance: mean over `a` of squared nearest distance to
/// `b`, plus the mirrored term.
pub fn chamfer<T: Real>(a: &PointCloud<T>, b: &PointCloud<T>) -> Result<T, GeomError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::EmptyCloud);
    }
    Ok(directed_mean_sq(a, b) + directed_mean_sq(b, a))
}

fn directed_mean_sq<T: Real>(from: &PointCloud<T>, to: &PointCloud<T>) -> T {
    let mut acc = T::zero();
    for &p in &from.points {
        let mut best = T::infinity();
        for &q in &to.points {
            let d = dist_sq(p, q);
            if d < best {
                best = d;
            }
        }
        acc += best;
    }
    acc / real(from.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_on_a_cloud_point_returns_it_first() {
        let cloud = PointCloud::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        let ids = knn([1.0, 0.0, 0.0], &cloud, 2).unwrap();
        assert_eq!(ids[0], 1);
    }

    #[test]
    fn equidistant_points_take_lower_index() {
        let cloud = PointCloud::new(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [5.0, 0.0, 0.0]]);
        let ids = knn([0.0, 0.0, 0.0], &cloud, 2).unwrap();
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let cloud = PointCloud::<f64>::new(vec![]);
        assert!(matches!(knn([0.0; 3], &cloud, 1), Err(GeomError::EmptyCloud)));
    }

    #[test]
    fn chamfer_identity_and_symmetry_and_two_points() {
        let a = PointCloud::new(vec![[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]);
        let b = PointCloud::new(vec![[0.5, 0.0, 0.0]]);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
        // Two single points distance d apart: 2 d^2.
        let p = PointCloud::<f64>::new(vec![[0.0, 0.0, 0.0]]);
        let q = PointCloud::new(vec![[0.0, 3.0, 0.0]]);
        assert!((chamfer(&p, &q).unwrap() - 18.0).abs() < 1e-12);
    }
}
