use std::ops::Range;

use super::ParticleSoA;
use crate::map::TsdfMap;
use crate::mcl::{particle_log_likelihood, SensorModelParams};
use crate::scalar::Real;
use crate::scene::PointCloud;

/// Splits `0..n` into at most `lanes` contiguous, nearly equal ranges.
pub fn lane_ranges(n: usize, lanes: usize) -> Vec<Range<usize>> {
    let lanes = lanes.clamp(1, n.max(1));
    let base = n / lanes;
    let extra = n % lanes;
    let mut start = 0;
    (0..lanes)
        .map(|l| {
            let len = base + usize::from(l < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Per-particle scan log-likelihoods. Each lane owns a contiguous particle range
/// and a disjoint slice of the output; every particle reads the scan in the same
/// order, so the result does not depend on `lanes`.
pub fn evaluate_log_likelihoods<T: Real>(
    soa: &ParticleSoA<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
    lanes: usize,
) -> Vec<T> {
    let n = soa.len();
    let mut out = vec![T::zero(); n];
    let eval = |range: Range<usize>, dst: &mut [T]| {
        for (i, slot) in range.zip(dst.iter_mut()) {
            *slot = particle_log_likelihood(&soa.pose(i), scan, map, params);
        }
    };
    let ranges = lane_ranges(n, lanes);
    if ranges.len() <= 1 {
        eval(0..n, &mut out);
        return out;
    }
    std::thread::scope(|s| {
        let mut rest: &mut [T] = &mut out;
        for r in ranges {
            let (dst, tail) = rest.split_at_mut(r.len());
            rest = tail;
            let eval = &eval;
            s.spawn(move || eval(r, dst));
        }
    });
    out
}

/// New particle weights `wᵢ · exp(ℓᵢ − max ℓ)` where `ℓᵢ` is the scan log-likelihood
/// of particle `i`. An empty scan returns the input weights.
pub fn evaluate_particles_parallel<T: Real>(
    soa: &ParticleSoA<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
    lanes: usize,
) -> Vec<T> {
    if scan.is_empty() || soa.is_empty() {
        return soa.weight.clone();
    }
    let ll = evaluate_log_likelihoods(soa, scan, map, params, lanes);
    let max = ll.iter().copied().fold(T::neg_infinity(), T::max);
    soa.weight
        .iter()
        .zip(&ll)
        .map(|(&w, &l)| w * (l - max).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose6D;
    use crate::mcl::{initialize_local, LocalSigmas};
    use crate::parallel::pack;
    use crate::scene::{office_scene, simulate_scan, ScanPattern};

    #[test]
    fn ranges_partition_contiguously() {
        assert_eq!(lane_ranges(10, 3), vec![0..4, 4..7, 7..10]);
        assert_eq!(lane_ranges(2, 8), vec![0..1, 1..2]);
        assert_eq!(lane_ranges(0, 4), vec![0..0]);
        let r = lane_ranges(10_001, 8);
        assert_eq!(r.len(), 8);
        assert_eq!(r.iter().map(|r| r.len()).sum::<usize>(), 10_001);
    }

    #[test]
    fn lane_counts_agree_bitwise() {
        let scene = office_scene::<f64>();
        let map = scene.build_tsdf(0.1, 0.3, 8).unwrap();
        let truth = Pose6D::new(9.0, 5.0, 1.0, 0.0, 0.0, 0.3);
        let scan = simulate_scan(
            &scene,
            &truth,
            &ScanPattern::rings(4, -3.0, 2.0, 90, 100.0),
            0.0,
            0,
        );
        let set = initialize_local(&truth, &LocalSigmas::new(0.3, 0.05), 999, 1).unwrap();
        let soa = pack(set.particles());
        let params = SensorModelParams::new(0.1).unwrap();
        let one = evaluate_particles_parallel(&soa, &scan, &map, &params, 1);
        for lanes in [2, 3, 4, 8] {
            let many = evaluate_particles_parallel(&soa, &scan, &map, &params, lanes);
            assert!(one
                .iter()
                .zip(&many)
                .all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        // a single particle matches the sequential per-particle path
        let single = pack(&set.particles()[..1]);
        let ll = evaluate_log_likelihoods(&single, &scan, &map, &params, 4);
        assert_eq!(
            ll[0],
            particle_log_likelihood(&set.particles()[0].state, &scan, &map, &params)
        );
        assert_eq!(
            evaluate_particles_parallel(&single, &scan, &map, &params, 4),
            vec![single.weight[0]]
        );
    }

    #[test]
    fn identical_particles_identical_weights() {
        let scene = office_scene::<f64>();
        let map = scene.build_tsdf(0.1, 0.3, 8).unwrap();
        let p = Pose6D::new(9.0, 5.0, 1.0, 0.0, 0.0, 0.3);
        let scan = simulate_scan(
            &scene,
            &p,
            &ScanPattern::rings(2, -1.0, 2.0, 60, 100.0),
            0.0,
            0,
        );
        let soa = pack(&[
            crate::mcl::Particle::new(p, 0.5),
            crate::mcl::Particle::new(p, 0.5),
        ]);
        let w = evaluate_particles_parallel(
            &soa,
            &scan,
            &map,
            &SensorModelParams::new(0.1).unwrap(),
            2,
        );
        assert_eq!(w[0], w[1]);
    }
}
