use super::ParticleSet;
use crate::error::Result;
use crate::geometry::{Pose6D, Quaternion, Vec3};
use crate::parallel::{default_lanes, pack, tree_reduce_weighted_pose};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EstimateMode {
    /// Weighted mean position and weighted quaternion average.
    #[default]
    Mean,
    /// State of the highest-weight particle.
    Max,
}

pub fn estimate_pose<T: Real>(set: &ParticleSet<T>, mode: EstimateMode) -> Result<Pose6D<T>> {
    match mode {
        EstimateMode::Max => Ok(set.particles()[set.argmax()].state),
        EstimateMode::Mean => {
            let sums = tree_reduce_weighted_pose(&pack(set.particles()), default_lanes())?;
            let inv = T::one() / sums.total_weight;
            let t = Vec3::new(sums.x, sums.y, sums.z).scale(inv);
            let q = Quaternion::new(sums.qw, sums.qx, sums.qy, sums.qz).normalized();
            let (roll, pitch, yaw) = q.to_euler();
            Ok(Pose6D::new(t.x, t.y, t.z, roll, pitch, yaw))
        }
    }
}
