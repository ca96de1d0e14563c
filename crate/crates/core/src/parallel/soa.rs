use crate::geometry::Pose6D;
use crate::mcl::Particle;
use crate::scalar::Real;

/// Component-major particle storage: index `i` of every array belongs to particle `i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParticleSoA<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    pub roll: Vec<T>,
    pub pitch: Vec<T>,
    pub yaw: Vec<T>,
    pub weight: Vec<T>,
}

impl<T: Real> ParticleSoA<T> {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            z: Vec::with_capacity(n),
            roll: Vec::with_capacity(n),
            pitch: Vec::with_capacity(n),
            yaw: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn push(&mut self, p: &Particle<T>) {
        let s = &p.state;
        self.x.push(s.x);
        self.y.push(s.y);
        self.z.push(s.z);
        self.roll.push(s.roll);
        self.pitch.push(s.pitch);
        self.yaw.push(s.yaw);
        self.weight.push(p.weight);
    }

    /// Pose of particle `i`, read field by field without renormalizing angles.
    #[inline]
    pub fn pose(&self, i: usize) -> Pose6D<T> {
        Pose6D {
            x: self.x[i],
            y: self.y[i],
            z: self.z[i],
            roll: self.roll[i],
            pitch: self.pitch[i],
            yaw: self.yaw[i],
        }
    }
}

pub fn pack<T: Real>(particles: &[Particle<T>]) -> ParticleSoA<T> {
    let mut soa = ParticleSoA::with_capacity(particles.len());
    for p in particles {
        soa.push(p);
    }
    soa
}

pub fn unpack<T: Real>(soa: &ParticleSoA<T>) -> Vec<Particle<T>> {
    (0..soa.len())
        .map(|i| Particle {
            state: soa.pose(i),
            weight: soa.weight[i],
        })
        .collect()
}
