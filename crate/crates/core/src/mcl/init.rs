use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ParticleSet;
use crate::error::{invalid, Result};
use crate::geometry::Pose6D;
use crate::scalar::Real;
use crate::scene::Scene;

/// Orientation distribution for global initialization. Yaw is always uniform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrientationMode<T> {
    /// Roll and pitch uniform in `[-max, max]` (radians).
    Bounded { roll_pitch_max: T },
    /// Roll, pitch and yaw all uniform over the full circle.
    FullUniform,
}

impl<T: Real> Default for OrientationMode<T> {
    fn default() -> Self {
        Self::Bounded {
            roll_pitch_max: T::lit(15f64.to_radians()),
        }
    }
}

/// Uniform over the circle, `(-pi, pi]`.
fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    std::f64::consts::PI - std::f64::consts::TAU * rng.random::<f64>()
}

/// Particles spread uniformly over the scene's free space with equal weights.
pub fn initialize_global<T: Real>(
    scene: &Scene<T>,
    count: usize,
    orientation: OrientationMode<T>,
    seed: u64,
) -> Result<ParticleSet<T>> {
    if count == 0 {
        return Err(invalid("count", "must be >= 1"));
    }
    let positions = scene.sample_free_space(count, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let states = positions.into_iter().map(|p| {
        let (roll, pitch) = match orientation {
            OrientationMode::Bounded { roll_pitch_max } => {
                let m = roll_pitch_max.as_f64();
                (rng.random_range(-m..=m), rng.random_range(-m..=m))
            }
            OrientationMode::FullUniform => (uniform_angle(&mut rng), uniform_angle(&mut rng)),
        };
        let yaw = uniform_angle(&mut rng);
        Pose6D::new(p.x, p.y, p.z, T::lit(roll), T::lit(pitch), T::lit(yaw))
    });
    ParticleSet::uniform(states.collect::<Vec<_>>())
}

/// Standard deviations of the local initialization, per pose component.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalSigmas<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> LocalSigmas<T> {
    pub fn new(position: T, orientation: T) -> Self {
        Self {
            x: position,
            y: position,
            z: position,
            roll: orientation,
            pitch: orientation,
            yaw: orientation,
        }
    }

    fn to_array(self) -> [T; 6] {
        [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]
    }
}

/// Particles drawn from independent Gaussians around `center`.
pub fn initialize_local<T: Real>(
    center: &Pose6D<T>,
    sigmas: &LocalSigmas<T>,
    count: usize,
    seed: u64,
) -> Result<ParticleSet<T>> {
    if count == 0 {
        return Err(invalid("count", "must be >= 1"));
    }
    let s = sigmas.to_array().map(|v| v.as_f64());
    if s.iter().any(|v| !(*v >= 0.0)) {
        return Err(invalid("sigmas", "must be >= 0"));
    }
    let c = center.to_array();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<_> = (0..count)
        .map(|_| {
            let mut v = c;
            for (x, sd) in v.iter_mut().zip(s) {
                let n: f64 = StandardNormal.sample(&mut rng);
                *x += T::lit(sd * n);
            }
            Pose6D::from_array(v)
        })
        .collect();
    ParticleSet::uniform(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{closed_room, office_scene};

    #[test]
    fn global_particles_in_free_space() {
        let scene = office_scene::<f64>();
        let set = initialize_global(&scene, 1000, OrientationMode::default(), 5).unwrap();
        assert_eq!(set.len(), 1000);
        assert!(set.is_normalized());
        for p in set.particles() {
            assert!(scene.sdf(p.state.translation()) > 0.0);
            assert_eq!(p.weight, 1.0 / 1000.0);
            assert!(p.state.roll.abs() <= 15f64.to_radians() + 1e-12);
        }
        assert_eq!(
            set,
            initialize_global(&scene, 1000, OrientationMode::default(), 5).unwrap()
        );
    }

    #[test]
    fn global_yaw_is_uniform() {
        let scene = closed_room::<f64>(10.0, 10.0, 3.0);
        let n = 100_000;
        let set = initialize_global(&scene, n, OrientationMode::FullUniform, 8).unwrap();
        let (c, s) = set.particles().iter().fold((0.0, 0.0), |(c, s), p| {
            (c + p.state.yaw.cos(), s + p.state.yaw.sin())
        });
        // each mean has sd sqrt(1/2n); bound the resultant at 4 sd
        let bound = 4.0 * (0.5 / n as f64).sqrt();
        assert!((c / n as f64).abs() < bound && (s / n as f64).abs() < bound);
    }

    #[test]
    fn local_degenerate_and_spread() {
        let center = Pose6D::new(1.0, 2.0, 3.0, 0.1, 0.2, 0.3);
        let set = initialize_local(&center, &LocalSigmas::default(), 10, 0).unwrap();
        assert!(set.particles().iter().all(|p| p.state == center));
        let total: f64 = set.weights().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let sig = LocalSigmas {
            x: 0.5,
            y: 0.2,
            z: 0.1,
            roll: 0.05,
            pitch: 0.02,
            yaw: 0.3,
        };
        let n = 100_000;
        let set = initialize_local(&center, &sig, n, 1).unwrap();
        let req = [0.5, 0.2, 0.1, 0.05, 0.02, 0.3];
        for (k, want) in req.iter().enumerate() {
            let v: Vec<f64> = set
                .particles()
                .iter()
                .map(|p| p.state.to_array()[k])
                .collect();
            let m = v.iter().sum::<f64>() / n as f64;
            let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            assert!((sd / want - 1.0).abs() < 0.05, "component {k}: {sd}");
        }
        assert!(initialize_local(&center, &sig, 0, 1).is_err());
    }
}
