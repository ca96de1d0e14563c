use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Particle, ParticleSet};
use crate::error::{invalid, Result};
use crate::geometry::Pose6D;
use crate::scalar::Real;

/// Per-update Gaussian noise added to every component of the odometry increment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MotionNoiseParams<T> {
    pub sigma_linear: T,
    pub sigma_angular: T,
}

impl<T: Real> MotionNoiseParams<T> {
    pub fn new(sigma_linear: T, sigma_angular: T) -> Result<Self> {
        if !(sigma_linear >= T::zero()) || !(sigma_angular >= T::zero()) {
            return Err(invalid("motion noise", "sigmas must be >= 0"));
        }
        Ok(Self {
            sigma_linear,
            sigma_angular,
        })
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

/// Pose increment expressed in the robot's previous frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdometryDelta<T>(pub Pose6D<T>);

impl<T: Real> OdometryDelta<T> {
    pub fn identity() -> Self {
        Self(Pose6D::identity())
    }

    /// Relative motion taking `from` to `to`.
    pub fn between(from: &Pose6D<T>, to: &Pose6D<T>) -> Self {
        Self(from.inverse().compose(to))
    }
}

/// Random stream for particle `index` under `seed`.
pub(crate) fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Moves every particle by `delta` perturbed with independent noise. Particle `i`
/// draws from its own stream derived from `(seed, i)`.
pub fn motion_update<T: Real>(
    set: ParticleSet<T>,
    delta: &OdometryDelta<T>,
    noise: &MotionNoiseParams<T>,
    seed: u64,
) -> ParticleSet<T> {
    let normalized = set.is_normalized();
    let d = delta.0;
    let (sl, sa) = (noise.sigma_linear.as_f64(), noise.sigma_angular.as_f64());
    let noisy = sl > 0.0 || sa > 0.0;
    let particles = set
        .into_particles()
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let step = if noisy {
                let mut rng = particle_rng(seed, i);
                let mut g = |s: f64| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    T::lit(s * n)
                };
                Pose6D::new(
                    d.x + g(sl),
                    d.y + g(sl),
                    d.z + g(sl),
                    d.roll + g(sa),
                    d.pitch + g(sa),
                    d.yaw + g(sa),
                )
            } else {
                d
            };
            Particle::new(p.state.compose(&step), p.weight)
        })
        .collect();
    ParticleSet::from_parts(particles, normalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_set(n: usize) -> ParticleSet<f64> {
        ParticleSet::uniform((0..n).map(|i| Pose6D::new(i as f64 * 0.1, 1.0, -0.5, 0.0, 0.0, 0.0)))
            .unwrap()
    }

    #[test]
    fn zero_motion_is_identity() {
        let s = grid_set(10);
        let out = motion_update(
            s.clone(),
            &OdometryDelta::identity(),
            &MotionNoiseParams::zero(),
            3,
        );
        for (a, b) in s.particles().iter().zip(out.particles()) {
            for (u, v) in a.state.to_array().iter().zip(b.state.to_array()) {
                assert!((u - v).abs() < 1e-12);
            }
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn rigid_shift() {
        let s = grid_set(10);
        let delta = OdometryDelta(Pose6D::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let out = motion_update(s.clone(), &delta, &MotionNoiseParams::zero(), 3);
        for (a, b) in s.particles().iter().zip(out.particles()) {
            assert!((b.state.x - a.state.x - 1.0).abs() < 1e-12);
            assert!((b.state.y - a.state.y).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_particle_moves_along_heading() {
        let s = ParticleSet::uniform([Pose6D::new(
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            std::f64::consts::FRAC_PI_2,
        )])
        .unwrap();
        let delta = OdometryDelta(Pose6D::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let p = motion_update(s, &delta, &MotionNoiseParams::zero(), 0).particles()[0].state;
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_spread_matches_sigma() {
        let n = 20_000;
        let s = ParticleSet::uniform(vec![Pose6D::<f64>::identity(); n]).unwrap();
        let noise = MotionNoiseParams::new(0.1, 0.0).unwrap();
        let out = motion_update(s, &OdometryDelta::identity(), &noise, 42);
        for axis in 0..3 {
            let vals: Vec<f64> = out
                .particles()
                .iter()
                .map(|p| p.state.to_array()[axis])
                .collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            // sd of the sample sd is about sigma / sqrt(2n) = 5e-4
            assert!((sd - 0.1).abs() < 0.004, "axis {axis}: {sd}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let noise = MotionNoiseParams::new(0.05, 0.01).unwrap();
        let a = motion_update(grid_set(50), &OdometryDelta::identity(), &noise, 9);
        let b = motion_update(grid_set(50), &OdometryDelta::identity(), &noise, 9);
        let c = motion_update(grid_set(50), &OdometryDelta::identity(), &noise, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn between_recovers_relative_motion() {
        let a: Pose6D<f64> = Pose6D::new(1.0, 2.0, 0.5, 0.1, -0.05, 0.7);
        let b = Pose6D::new(1.4, 2.2, 0.5, 0.1, -0.05, 0.75);
        let d = OdometryDelta::between(&a, &b);
        let c = a.compose(&d.0);
        for (u, v) in c.to_array().iter().zip(b.to_array()) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
