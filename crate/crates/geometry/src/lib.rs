//! Geometry kernels: point clouds, triangle meshes, exact kNN, surface
//! sampling, voxel occupancy, signed distance fields, isosurface meshing,
//! Chamfer distance and joint-to-surface offset fields.

pub mod cloud;
pub mod error;
pub mod field;
pub mod isosurface;
pub mod knn;
pub mod mesh;
pub mod ply;
pub mod sample;
pub mod sdf;
pub mod shapes;
pub mod vec3;
pub mod voxel;

pub use cloud::{PointCloud, MODEL_CLOUD_POINTS};
pub use error::GeomError;
pub use field::{chamfer_node, distance_field, distance_field_node, FIELD_JOINTS, FIELD_NEIGHBORS};
pub use isosurface::marching_cubes;
pub use knn::{chamfer, knn, nearest};
pub use mesh::TriMesh;
pub use sample::sample_surface;
pub use sdf::SdfGrid;
pub use voxel::{voxelize_mesh, voxelize_points, VoxelGrid, DEFAULT_CELL_M, DEFAULT_DILATION_M};

pub type PointCloud32 = PointCloud<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type TriMesh32 = TriMesh<f32>;
pub type TriMesh64 = TriMesh<f64>;
