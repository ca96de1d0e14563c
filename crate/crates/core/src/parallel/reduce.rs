//! Pairwise halving reduction.
//!
//! Each iteration adds the upper half of the active range onto the lower half
//! (`v[i] += v[i + half]`), so `N = 2^k` values finish after `k` iterations. Inputs
//! are padded with zeros to the next power of two.

use super::ParticleSoA;
use crate::error::{Error, Result};
use crate::geometry::Quaternion;
use crate::scalar::Real;

/// Below this many additions per lane an iteration runs on the calling thread.
const MIN_PARALLEL_CHUNK: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionBuffer<T> {
    values: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionOutcome<T> {
    pub sum: T,
    pub iterations: u32,
}

impl<T: Real> ReductionBuffer<T> {
    pub fn new(values: impl IntoIterator<Item = T>) -> Self {
        let mut values: Vec<T> = values.into_iter().collect();
        let padded = values.len().next_power_of_two();
        values.resize(padded, T::zero());
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reduce(&self, lanes: usize) -> ReductionOutcome<T> {
        let mut v = self.values.clone();
        let mut active = v.len();
        let mut iterations = 0;
        while active > 1 {
            let half = active / 2;
            let (lo, hi) = v[..active].split_at_mut(half);
            let chunk = half.div_ceil(lanes.max(1));
            if lanes > 1 && chunk >= MIN_PARALLEL_CHUNK {
                // leaving the scope is the barrier between iterations
                std::thread::scope(|s| {
                    for (l, h) in lo.chunks_mut(chunk).zip(hi.chunks(chunk)) {
                        s.spawn(move || add_into(l, h));
                    }
                });
            } else {
                add_into(lo, hi);
            }
            active = half;
            iterations += 1;
        }
        ReductionOutcome {
            sum: v[0],
            iterations,
        }
    }
}

#[inline]
fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub fn tree_reduce_sum<T: Real>(buffer: &ReductionBuffer<T>) -> T {
    buffer.reduce(1).sum
}

/// Same arithmetic as [`tree_reduce_sum`], with each iteration split over `lanes`
/// threads. Results are bit-identical for every lane count.
pub fn tree_reduce_sum_lanes<T: Real>(buffer: &ReductionBuffer<T>, lanes: usize) -> T {
    buffer.reduce(lanes).sum
}

/// Weighted sums of positions and hemisphere-aligned quaternions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedPoseSums<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub qw: T,
    pub qx: T,
    pub qy: T,
    pub qz: T,
    pub total_weight: T,
}

/// Reduces `wᵢ·xᵢ`, `wᵢ·yᵢ`, `wᵢ·zᵢ`, `wᵢ·qᵢ` and `wᵢ` over all particles. Quaternions
/// are flipped into the hemisphere of the highest-weight particle first.
pub fn tree_reduce_weighted_pose<T: Real>(
    soa: &ParticleSoA<T>,
    lanes: usize,
) -> Result<WeightedPoseSums<T>> {
    let n = soa.len();
    let total = tree_reduce_sum_lanes(&ReductionBuffer::new(soa.weight.iter().copied()), lanes);
    if n == 0 || !(total > T::zero()) || !total.is_finite() {
        return Err(Error::DegenerateFilter(format!(
            "total particle weight is {total}"
        )));
    }
    let mut best = 0;
    for i in 1..n {
        if soa.weight[i] > soa.weight[best] {
            best = i;
        }
    }
    let quat = |i: usize| Quaternion::from_euler(soa.roll[i], soa.pitch[i], soa.yaw[i]);
    let reference = quat(best);
    let quats: Vec<Quaternion<T>> = (0..n).map(|i| quat(i).aligned_to(&reference)).collect();
    let w = &soa.weight;
    let sum =
        |f: &dyn Fn(usize) -> T| tree_reduce_sum_lanes(&ReductionBuffer::new((0..n).map(f)), lanes);
    Ok(WeightedPoseSums {
        x: sum(&|i| w[i] * soa.x[i]),
        y: sum(&|i| w[i] * soa.y[i]),
        z: sum(&|i| w[i] * soa.z[i]),
        qw: sum(&|i| w[i] * quats[i].w),
        qx: sum(&|i| w[i] * quats[i].x),
        qy: sum(&|i| w[i] * quats[i].y),
        qz: sum(&|i| w[i] * quats[i].z),
        total_weight: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose6D;
    use crate::mcl::Particle;
    use crate::parallel::pack;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn small_sums() {
        assert_eq!(
            tree_reduce_sum(&ReductionBuffer::new([1.0, 2.0, 3.0, 4.0])),
            10.0
        );
        assert_eq!(tree_reduce_sum(&ReductionBuffer::<f64>::new([])), 0.0);
        assert_eq!(tree_reduce_sum(&ReductionBuffer::new([7.5])), 7.5);
    }

    #[test]
    fn eight_values_take_three_halvings() {
        let out = ReductionBuffer::new((1..=8).map(f64::from)).reduce(1);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.sum, 36.0);
        assert_eq!(ReductionBuffer::new([1.0f64; 1]).reduce(1).iterations, 0);
        assert_eq!(
            ReductionBuffer::new([1.0f64; 1000]).reduce(1).iterations,
            10
        );
    }

    #[test]
    fn padding_is_zero() {
        let b = ReductionBuffer::new([1.5, 2.5, 3.0, 4.0, 5.0]);
        assert_eq!(b.len(), 8);
        assert_eq!(&b.values()[5..], &[0.0, 0.0, 0.0]);
        // sequential oracle over the five inputs
        assert_eq!(tree_reduce_sum(&b), 1.5 + 2.5 + 3.0 + 4.0 + 5.0);
    }

    #[test]
    fn lane_count_does_not_change_bits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let vals: Vec<f64> = (0..300_001).map(|_| rng.random::<f64>()).collect();
        let b = ReductionBuffer::new(vals);
        let one = tree_reduce_sum(&b);
        for lanes in [2, 3, 4, 8] {
            assert_eq!(tree_reduce_sum_lanes(&b, lanes).to_bits(), one.to_bits());
        }
    }

    fn random_soa(n: usize, seed: u64) -> ParticleSoA<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ps: Vec<_> = (0..n)
            .map(|_| {
                Particle::new(
                    Pose6D::new(
                        rng.random_range(-5.0..5.0),
                        rng.random_range(-5.0..5.0),
                        rng.random_range(0.0..3.0),
                        rng.random_range(-0.2..0.2),
                        rng.random_range(-0.2..0.2),
                        rng.random_range(-0.5..0.5),
                    ),
                    rng.random::<f64>(),
                )
            })
            .collect();
        pack(&ps)
    }

    #[test]
    fn weighted_pose_matches_sequential_oracle() {
        let soa = random_soa(1000, 4);
        let s = tree_reduce_weighted_pose(&soa, 1).unwrap();
        let mut seq = [0.0f64; 4];
        for i in 0..soa.len() {
            seq[0] += soa.weight[i] * soa.x[i];
            seq[1] += soa.weight[i] * soa.y[i];
            seq[2] += soa.weight[i] * soa.z[i];
            seq[3] += soa.weight[i];
        }
        for (got, want) in [s.x, s.y, s.z, s.total_weight].iter().zip(seq) {
            assert!(((got - want) / want).abs() < 1e-7);
        }
    }

    #[test]
    fn single_nonzero_weight() {
        let mut soa = random_soa(16, 5);
        soa.weight.iter_mut().for_each(|w| *w = 0.0);
        soa.weight[3] = 0.25;
        let s = tree_reduce_weighted_pose(&soa, 1).unwrap();
        assert_eq!(s.x, 0.25 * soa.x[3]);
        assert_eq!(s.total_weight, 0.25);
        let q = Quaternion::from_euler(soa.roll[3], soa.pitch[3], soa.yaw[3]);
        assert!((s.qw - 0.25 * q.w).abs() < 1e-15);
    }

    #[test]
    fn symmetric_positions_cancel() {
        let ps: Vec<_> = (0..50)
            .flat_map(|i| {
                let p = Pose6D::new(
                    i as f64 * 0.3,
                    -(i as f64),
                    1.0 - i as f64 * 0.01,
                    0.0,
                    0.0,
                    0.0,
                );
                let m = Pose6D::new(-p.x, -p.y, -p.z, 0.0, 0.0, 0.0);
                [Particle::new(p, 0.01), Particle::new(m, 0.01)]
            })
            .collect();
        let s = tree_reduce_weighted_pose(&pack(&ps), 1).unwrap();
        let tol = 1e-9 * ps.len() as f64;
        assert!(s.x.abs() < tol && s.y.abs() < tol && s.z.abs() < tol);
    }

    #[test]
    fn zero_weight_is_degenerate() {
        let mut soa = random_soa(4, 1);
        soa.weight.iter_mut().for_each(|w| *w = 0.0);
        assert!(matches!(
            tree_reduce_weighted_pose(&soa, 1),
            Err(Error::DegenerateFilter(_))
        ));
    }

    proptest! {
        #[test]
        fn matches_left_fold(vals in proptest::collection::vec(0.0..1.0f64, 0..2000)) {
            let seq: f64 = vals.iter().sum();
            let tree = tree_reduce_sum(&ReductionBuffer::new(vals.iter().copied()));
            prop_assert!((tree - seq).abs() <= 1e-12 * seq.max(1.0));
        }
    }
}
