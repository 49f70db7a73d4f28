//! Parametric articulated right hand: 48 axis-angle values plus wrist
//! translation, forward kinematics, and linear blend skinning over a
//! procedural capsule mesh. Interface-compatible stand-in for a licensed
//! blend-skinned hand model.

pub mod fk;
pub mod lbs;
pub mod ops;
pub mod skeleton;
pub mod template;

pub use fk::{forward_kinematics, joints_and_jacobian, log_rotation, rodrigues, Dual, FkScalar};
pub use lbs::{fingertips, joints, lbs, HandMesh};
pub use ops::{fk_joints_node, lbs_vertices_node};
pub use skeleton::{wrap_angle, HandParams, HandSkeleton, N_FINGERS, N_JOINTS, THETA_DIM, Y_H_DIM};
pub use template::HandTemplate;

pub type HandParams32 = HandParams<f32>;
pub type HandParams64 = HandParams<f64>;
