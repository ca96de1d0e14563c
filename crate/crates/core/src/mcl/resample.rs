use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Particle, ParticleSet};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Systematic (low-variance) resampling: one offset `u ∈ [0, 1/N)`, then the particle
/// whose cumulative-weight interval contains `u + k/N` is copied for every `k`.
pub fn resample<T: Real>(set: &ParticleSet<T>, seed: u64) -> Result<ParticleSet<T>> {
    if !set.is_normalized() {
        return Err(invalid("set", "resampling needs normalized weights"));
    }
    let n = set.len();
    let step = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = rng.random::<f64>() * step;
    let particles = set.particles();
    let w = T::one() / T::from_usize_lossy(n);
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    let mut cumulative = particles[0].weight.as_f64();
    for k in 0..n {
        let target = u0 + k as f64 * step;
        while target >= cumulative && j + 1 < n {
            j += 1;
            cumulative += particles[j].weight.as_f64();
        }
        out.push(Particle::new(particles[j].state, w));
    }
    Ok(ParticleSet::from_parts(out, true))
}

/// Resamples only when the effective sample size falls below `fraction * N`.
pub fn resample_if_degenerate<T: Real>(
    set: ParticleSet<T>,
    fraction: T,
    seed: u64,
) -> Result<ParticleSet<T>> {
    if set.effective_sample_size() < fraction * T::from_usize_lossy(set.len()) {
        resample(&set, seed)
    } else {
        Ok(set)
    }
}
