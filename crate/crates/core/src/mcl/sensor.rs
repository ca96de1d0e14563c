//! Endpoint sensor model.
//!
//! Every scan point is moved into the map frame with the particle pose and scored by
//! the Gaussian density of the TSDF value found there. A particle's likelihood is the
//! product over the (subsampled) scan points, accumulated as a sum of logs.

use super::{Particle, ParticleSet};
use crate::error::{invalid, Result};
use crate::geometry::{Isometry, Pose6D};
use crate::map::TsdfMap;
use crate::parallel::{default_lanes, evaluate_particles_parallel, pack};
use crate::scalar::Real;
use crate::scene::PointCloud;

/// Gaussian density of a signed distance `d`.
#[inline]
pub fn point_likelihood<T: Real>(d: T, sigma: T) -> T {
    let two_pi = T::PI() + T::PI();
    let z = d / sigma;
    (T::lit(-0.5) * z * z).exp() / (two_pi * sigma * sigma).sqrt()
}

/// `ln(point_likelihood(d, sigma))`, evaluated without the exponential.
#[inline]
pub fn point_log_likelihood<T: Real>(d: T, sigma: T) -> T {
    let two_pi = T::PI() + T::PI();
    let z = d / sigma;
    T::lit(-0.5) * z * z - T::lit(0.5) * (two_pi * sigma * sigma).ln()
}

/// Tabulated likelihoods over `[-truncation, truncation]`, read by nearest entry.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodLut<T> {
    truncation: T,
    resolution: T,
    inv_resolution: T,
    values: Vec<T>,
    log_values: Vec<T>,
}

impl<T: Real> LikelihoodLut<T> {
    pub fn truncation(&self) -> T {
        self.truncation
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Distance represented by entry `i`.
    pub fn entry_distance(&self, i: usize) -> T {
        -self.truncation + self.resolution * T::from_usize_lossy(i)
    }

    #[inline]
    fn index(&self, d: T) -> usize {
        let last = self.values.len() - 1;
        let f = ((d + self.truncation) * self.inv_resolution).round();
        if !(f > T::zero()) {
            0
        } else {
            f.to_usize().unwrap_or(last).min(last)
        }
    }

    #[inline]
    pub fn likelihood(&self, d: T) -> T {
        self.values[self.index(d)]
    }

    #[inline]
    pub fn log_likelihood(&self, d: T) -> T {
        self.log_values[self.index(d)]
    }
}

/// Precomputes [`point_likelihood`] at every multiple of `lut_resolution` in
/// `[-truncation, truncation]`. The grid is symmetric about zero.
pub fn build_likelihood_lut<T: Real>(
    sigma: T,
    truncation: T,
    lut_resolution: T,
) -> Result<LikelihoodLut<T>> {
    if !(lut_resolution > T::zero()) {
        return Err(invalid("lut_resolution", "must be positive"));
    }
    if !(sigma > T::zero()) {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(truncation > T::zero()) {
        return Err(invalid("truncation", "must be positive"));
    }
    let half = (truncation / lut_resolution).ceil().to_usize().unwrap_or(0);
    let len = 2 * half + 1;
    let mut values = vec![T::zero(); len];
    // fill from the center outwards so that mirrored entries are bit-identical
    for k in 0..=half {
        let v = point_likelihood(lut_resolution * T::from_usize_lossy(k), sigma);
        values[half + k] = v;
        values[half - k] = v;
    }
    let log_values = (0..len)
        .map(|i| {
            let k = i.abs_diff(half);
            point_log_likelihood(lut_resolution * T::from_usize_lossy(k), sigma)
        })
        .collect();
    // entries are anchored at -half*res, which equals -truncation when the ratio is integral
    let anchored = lut_resolution * T::from_usize_lossy(half);
    Ok(LikelihoodLut {
        truncation: anchored,
        resolution: lut_resolution,
        inv_resolution: T::one() / lut_resolution,
        values,
        log_values,
    })
}

/// How the map is read at each transformed scan point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LookupMode {
    #[default]
    Nearest,
    Interpolated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorModelParams<T> {
    pub sigma: T,
    pub subsample_stride: usize,
    pub lut_resolution: T,
    pub lut: Option<LikelihoodLut<T>>,
    pub lookup: LookupMode,
}

impl<T: Real> SensorModelParams<T> {
    /// Exact exponential evaluation, stride 4, nearest-cell lookup.
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(invalid("sigma", "must be positive and finite"));
        }
        Ok(Self {
            sigma,
            subsample_stride: 4,
            lut_resolution: sigma / T::lit(100.0),
            lut: None,
            lookup: LookupMode::Nearest,
        })
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("subsample_stride", "must be >= 1"));
        }
        self.subsample_stride = stride;
        Ok(self)
    }

    pub fn with_lookup(mut self, lookup: LookupMode) -> Self {
        self.lookup = lookup;
        self
    }

    /// Attaches a likelihood table covering the map's truncation band.
    pub fn with_lut(mut self, truncation: T, lut_resolution: T) -> Result<Self> {
        self.lut = Some(build_likelihood_lut(
            self.sigma,
            truncation,
            lut_resolution,
        )?);
        self.lut_resolution = lut_resolution;
        Ok(self)
    }

    #[inline]
    pub fn log_likelihood(&self, d: T) -> T {
        match &self.lut {
            Some(lut) => lut.log_likelihood(d),
            None => point_log_likelihood(d, self.sigma),
        }
    }

    /// Number of scan points the model reads from a cloud of `len` points.
    pub fn used_points(&self, len: usize) -> usize {
        len.div_ceil(self.subsample_stride.max(1))
    }
}

/// Sum of per-point log-likelihoods for one pose, in scan order.
#[inline]
pub fn particle_log_likelihood<T: Real>(
    pose: &Pose6D<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
) -> T {
    let iso = Isometry::from_pose(pose);
    let mut acc = T::zero();
    for &p in scan.points().iter().step_by(params.subsample_stride.max(1)) {
        let w = iso.apply(p);
        let d = match params.lookup {
            LookupMode::Nearest => map.lookup(w),
            LookupMode::Interpolated => map.lookup_interpolated(w),
        };
        acc += params.log_likelihood(d);
    }
    acc
}

/// Reweights every particle by its scan likelihood using all available cores.
/// The result is not normalized.
pub fn sensor_update<T: Real>(
    set: ParticleSet<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
) -> ParticleSet<T> {
    sensor_update_with_lanes(set, scan, map, params, default_lanes())
}

pub fn sensor_update_with_lanes<T: Real>(
    set: ParticleSet<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
    lanes: usize,
) -> ParticleSet<T> {
    if scan.is_empty() {
        return set;
    }
    let weights = evaluate_particles_parallel(&pack(set.particles()), scan, map, params, lanes);
    let particles = set
        .into_particles()
        .into_iter()
        .zip(weights)
        .map(|(p, w)| Particle::new(p.state, w))
        .collect();
    ParticleSet::from_parts(particles, false)
}
