//! Six-degree-of-freedom Monte Carlo localization against sparse two-level TSDF
//! maps, with a data-parallel sensor-update engine.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common case.

// NaN must fail parameter checks, hence the negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod map;
pub mod mcl;
pub mod parallel;
pub mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type Vec3d = geometry::Vec3<f64>;
pub type Pose = geometry::Pose6D<f64>;
pub type Quat = geometry::Quaternion<f64>;
pub type Map = map::TsdfMap<f64>;
pub type SceneF64 = scene::Scene<f64>;
pub type Cloud = scene::PointCloud<f64>;
pub type Particles = mcl::ParticleSet<f64>;
pub type SensorParams = mcl::SensorModelParams<f64>;

/// Single-precision aliases, matching the on-disk map format.
pub type Vec3f = geometry::Vec3<f32>;
pub type PoseF32 = geometry::Pose6D<f32>;
pub type MapF32 = map::TsdfMap<f32>;
pub type CloudF32 = scene::PointCloud<f32>;
pub type ParticlesF32 = mcl::ParticleSet<f32>;
