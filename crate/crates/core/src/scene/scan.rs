//! Virtual multi-ring LiDAR.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Scene;
use crate::error::{invalid, Result};
use crate::geometry::{parse_fields, Pose6D, Vec3};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPattern<T> {
    ring_elevations: Vec<T>,
    azimuth_count: usize,
    max_range: T,
}

impl<T: Real> ScanPattern<T> {
    pub fn new(ring_elevations: Vec<T>, azimuth_count: usize, max_range: T) -> Result<Self> {
        if ring_elevations.is_empty() {
            return Err(invalid("ring_elevations", "at least one ring"));
        }
        if ring_elevations.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("ring_elevations", "must be strictly increasing"));
        }
        if azimuth_count == 0 {
            return Err(invalid("azimuth_count", "must be >= 1"));
        }
        if !(max_range > T::zero()) {
            return Err(invalid("max_range", "must be positive"));
        }
        Ok(Self {
            ring_elevations,
            azimuth_count,
            max_range,
        })
    }

    /// 16 rings from -15° to +15° in 2° steps, 0.4° azimuth spacing, 100 m range.
    pub fn vlp16() -> Self {
        Self::rings(16, T::lit(-15.0), T::lit(2.0), 900, T::lit(100.0))
    }

    /// Evenly spaced rings, elevations given in degrees.
    pub fn rings(
        count: usize,
        first_deg: T,
        step_deg: T,
        azimuth_count: usize,
        max_range: T,
    ) -> Self {
        let elevations = (0..count)
            .map(|i| (first_deg + step_deg * T::from_usize_lossy(i)).to_radians())
            .collect();
        Self::new(elevations, azimuth_count, max_range).expect("valid ring layout")
    }

    pub fn ring_elevations(&self) -> &[T] {
        &self.ring_elevations
    }

    pub fn azimuth_count(&self) -> usize {
        self.azimuth_count
    }

    pub fn max_range(&self) -> T {
        self.max_range
    }

    pub fn ray_count(&self) -> usize {
        self.ring_elevations.len() * self.azimuth_count
    }

    /// Unit ray directions in the sensor frame, ring-major.
    pub fn directions(&self) -> impl Iterator<Item = Vec3<T>> + '_ {
        let step = (T::PI() + T::PI()) / T::from_usize_lossy(self.azimuth_count);
        self.ring_elevations.iter().flat_map(move |&el| {
            let (se, ce) = el.sin_cos();
            (0..self.azimuth_count).map(move |a| {
                let (sa, ca) = (step * T::from_usize_lossy(a)).sin_cos();
                Vec3::new(ce * ca, ce * sa, se)
            })
        })
    }
}

/// Scan endpoints in the sensor frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec3<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps every `stride`-th point, starting with the first.
    pub fn subsampled(&self, stride: usize) -> Self {
        Self::new(self.points.iter().step_by(stride.max(1)).copied().collect())
    }

    /// `x y z` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.points.len() * 32);
        for p in &self.points {
            s.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v = parse_fields::<T>(line, 3, n + 1)?;
            points.push(Vec3::new(v[0], v[1], v[2]));
        }
        Ok(Self::new(points))
    }
}

/// Casts one ray per (ring, azimuth) from `sensor_pose`. Misses are dropped, hits get
/// additive Gaussian range noise and are returned in the sensor frame.
pub fn simulate_scan<T: Real>(
    scene: &Scene<T>,
    sensor_pose: &Pose6D<T>,
    pattern: &ScanPattern<T>,
    noise_sigma: T,
    seed: u64,
) -> PointCloud<T> {
    let rot = sensor_pose.rotation();
    let origin = sensor_pose.translation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = (noise_sigma > T::zero())
        .then(|| Normal::new(0.0, noise_sigma.as_f64()).expect("finite sigma"));
    let mut points = Vec::with_capacity(pattern.ray_count());
    for dir in pattern.directions() {
        let Some(t) = scene.ray_cast(origin, rot.apply(dir), pattern.max_range()) else {
            continue;
        };
        let r = match &noise {
            Some(n) => t + T::lit(n.sample(&mut rng)),
            None => t,
        };
        let r = r.max(T::zero()).min(pattern.max_range());
        points.push(dir.scale(r));
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::closed_room;

    #[test]
    fn pattern_validation() {
        assert!(ScanPattern::<f64>::new(vec![0.1, 0.0], 4, 10.0).is_err());
        assert!(ScanPattern::<f64>::new(vec![0.0], 0, 10.0).is_err());
        assert!(ScanPattern::<f64>::new(vec![0.0], 4, 0.0).is_err());
        let p = ScanPattern::<f64>::vlp16();
        assert_eq!(p.ray_count(), 14_400);
        assert!((p.ring_elevations()[0] + 15f64.to_radians()).abs() < 1e-12);
        assert!((p.ring_elevations()[15] - 15f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn scan_is_deterministic_and_bounded() {
        let room = closed_room::<f64>(10.0, 10.0, 3.0);
        let pose = Pose6D::new(5.0, 5.0, 1.5, 0.0, 0.0, 0.0);
        let pattern = ScanPattern::rings(16, -15.0, 2.0, 900, 100.0);
        let a = simulate_scan(&room, &pose, &pattern, 0.02, 9);
        assert_eq!(a, simulate_scan(&room, &pose, &pattern, 0.02, 9));
        assert!(a.len() <= 14_400);
        assert!(a.points().iter().all(|p| p.norm() <= 100.0 + 1e-6));
        let b = simulate_scan(&room, &pose, &pattern, 0.0, 9);
        assert_eq!(b, simulate_scan(&room, &pose, &pattern, 0.0, 1));
    }

    #[test]
    fn misses_are_dropped() {
        let room = closed_room::<f64>(10.0, 10.0, 3.0);
        let pose = Pose6D::new(5.0, 5.0, 1.5, 0.0, 0.0, 0.0);
        let short = ScanPattern::new(vec![0.0], 8, 1.0).unwrap();
        assert!(simulate_scan(&room, &pose, &short, 0.0, 0).is_empty());
    }

    #[test]
    fn cloud_text_round_trip() {
        let c = PointCloud::new(vec![Vec3::new(1.0, -2.5, 0.125), Vec3::new(0.0, 3.0, 1e-3)]);
        assert_eq!(PointCloud::<f64>::parse(&c.to_text()).unwrap(), c);
        assert_eq!(c.subsampled(2).len(), 1);
        assert!(PointCloud::<f64>::parse("1 2\n").is_err());
    }
}
