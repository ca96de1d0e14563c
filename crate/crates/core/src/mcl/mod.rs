//! Monte Carlo localization: particle sets, initialization, motion and sensor
//! updates, normalization, resampling and pose estimation.

mod estimate;
mod init;
mod motion;
mod resample;
mod sensor;

pub use estimate::{estimate_pose, EstimateMode};
pub use init::{initialize_global, initialize_local, LocalSigmas, OrientationMode};
pub use motion::{motion_update, MotionNoiseParams, OdometryDelta};
pub use resample::{resample, resample_if_degenerate};
pub use sensor::{
    build_likelihood_lut, particle_log_likelihood, point_likelihood, point_log_likelihood,
    sensor_update, sensor_update_with_lanes, LikelihoodLut, LookupMode, SensorModelParams,
};

use crate::error::{Error, Result};
use crate::geometry::Pose6D;
use crate::parallel::{tree_reduce_sum, ReductionBuffer};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle<T> {
    pub state: Pose6D<T>,
    pub weight: T,
}

impl<T: Real> Particle<T> {
    pub fn new(state: Pose6D<T>, weight: T) -> Self {
        Self { state, weight }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet<T> {
    particles: Vec<Particle<T>>,
    normalized: bool,
}

impl<T: Real> ParticleSet<T> {
    /// Wraps particles as given; the set is flagged normalized only if the weights
    /// already sum to one.
    pub fn new(particles: Vec<Particle<T>>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParameter {
                name: "particles",
                msg: "a particle set needs at least one particle".into(),
            });
        }
        if let Some(i) = particles
            .iter()
            .position(|p| !(p.weight >= T::zero()) || !p.weight.is_finite())
        {
            return Err(Error::InvalidParameter {
                name: "weight",
                msg: format!("particle {i} has weight {}", particles[i].weight),
            });
        }
        let total: T = particles.iter().map(|p| p.weight).sum();
        let normalized = (total - T::one()).abs() <= T::lit(1e-9);
        Ok(Self {
            particles,
            normalized,
        })
    }

    /// Equal weights `1/N` for the given states.
    pub fn uniform(states: impl IntoIterator<Item = Pose6D<T>>) -> Result<Self> {
        let states: Vec<_> = states.into_iter().collect();
        let w = T::one() / T::from_usize_lossy(states.len().max(1));
        let particles = states.into_iter().map(|s| Particle::new(s, w)).collect();
        let mut set = Self::new(particles)?;
        set.normalized = true;
        Ok(set)
    }

    pub(crate) fn from_parts(particles: Vec<Particle<T>>, normalized: bool) -> Self {
        debug_assert!(!particles.is_empty());
        Self {
            particles,
            normalized,
        }
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn into_particles(self) -> Vec<Particle<T>> {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weights(&self) -> impl Iterator<Item = T> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    pub fn total_weight(&self) -> T {
        tree_reduce_sum(&ReductionBuffer::new(self.weights()))
    }

    /// `1 / Σ wᵢ²` of the normalized weights.
    pub fn effective_sample_size(&self) -> T {
        let total = self.total_weight();
        if !(total > T::zero()) {
            return T::zero();
        }
        let sq = tree_reduce_sum(&ReductionBuffer::new(self.weights().map(|w| {
            let v = w / total;
            v * v
        })));
        T::one() / sq
    }

    /// Index of the largest weight, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.weight > self.particles[best].weight {
                best = i;
            }
        }
        best
    }

    /// `x y z roll pitch yaw weight` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.particles.len() * 64);
        for p in &self.particles {
            s.push_str(&format!("{} {}\n", p.state, p.weight));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut particles = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v = crate::geometry::parse_fields::<T>(line, 7, n + 1)?;
            particles.push(Particle::new(
                Pose6D::new(v[0], v[1], v[2], v[3], v[4], v[5]),
                v[6],
            ));
        }
        Self::new(particles)
    }
}

/// Divides every weight by the total weight.
pub fn normalize<T: Real>(set: ParticleSet<T>) -> Result<ParticleSet<T>> {
    let total = set.total_weight();
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::DegenerateFilter(format!(
            "total particle weight is {total}"
        )));
    }
    let inv = T::one() / total;
    let particles = set
        .particles
        .into_iter()
        .map(|p| Particle::new(p.state, p.weight * inv))
        .collect();
    Ok(ParticleSet::from_parts(particles, true))
}
