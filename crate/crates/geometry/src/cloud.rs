//! Point clouds in the object-centric frame.

use crate::error::GeomError;
use crate::vec3;
use graspgen_core::{Real, Tensor};

/// Number of points every model-facing cloud must carry.
pub const MODEL_CLOUD_POINTS: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    pub points: Vec<[T; 3]>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<[T; 3]>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_radius(&self) -> T {
        let mut r2 = T::zero();
        for &p in &self.points {
            let d = vec3::norm_sq(p);
            if d > r2 {
                r2 = d;
            }
        }
        r2.sqrt()
    }

    pub fn centroid(&self) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for &p in &self.points {
            c = vec3::add(c, p);
        }
        vec3::scale(c, T::one() / graspgen_core::real(self.len().max(1) as f64))
    }

    pub fn translated(&self, d: [T; 3]) -> Self {
        Self { points: self.points.iter().map(|&p| vec3::add(p, d)).collect() }
    }

    pub fn all_finite(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Checks the contract for clouds fed to the model: exactly 2048 finite
    /// points within a 0.5 m bounding radius.
    pub fn validate_model_facing(&self) -> Result<(), GeomError> {
        if self.len() != MODEL_CLOUD_POINTS {
            return Err(GeomError::BadPointCount { expected: MODEL_CLOUD_POINTS, got: self.len() });
        }
        if !self.all_finite() {
            return Err(GeomError::DegenerateMesh("non-finite point".into()));
        }
        if self.bounding_radius() > graspgen_core::real(0.5) {
            return Err(GeomError::DegenerateMesh(format!(
                "bounding radius {} exceeds 0.5 m",
                self.bounding_radius()
            )));
        }
        Ok(())
    }

    pub fn to_tensor(&self) -> Tensor<T> {
        let mut data = Vec::with_capacity(self.len() * 3);
        for p in &self.points {
            data.extend_from_slice(p);
        }
        Tensor::from_vec(self.len(), 3, data)
    }

    pub fn from_tensor(t: &Tensor<T>) -> Self {
        assert_eq!(t.cols(), 3, "point tensor must be N x 3, got {:?}", t.shape());
        let points = (0..t.rows()).map(|i| [t.at(i, 0), t.at(i, 1), t.at(i, 2)]).collect();
        Self { points }
    }

    pub fn cast<U: Real>(&self) -> PointCloud<U> {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| {
                    [
                        graspgen_core::real(p[0].to_f64().unwrap()),
                        graspgen_core::real(p[1].to_f64().unwrap()),
                        graspgen_core::real(p[2].to_f64().unwrap()),
                    ]
                })
                .collect(),
        }
    }

    /// Lexicographic (x, y, z) sort. Any permutation of the same point set
    /// canonicalizes to the identical ordering, which is what makes encoder
    /// reductions bitwise permutation-invariant.
    pub fn canonical_sorted(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| {
            a.partial_cmp(b).expect("non-finite point in canonical_sorted")
        });
        Self { points }
    }
}
