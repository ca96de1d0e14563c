//! Analytic environments built from axis-aligned boxes.
//!
//! A scene provides exact signed distance, exact ray casting and free-space
//! sampling, which makes it a ground-truth source for maps and virtual scans.

mod presets;
mod scan;

pub use presets::{closed_room, office_scene, office_trajectory};
pub use scan::{simulate_scan, PointCloud, ScanPattern};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{parse_fields, Vec3};
use crate::map::TsdfMap;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb<T>) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max).scale(T::lit(0.5))
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }
}

/// Axis-aligned solid box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolidBox<T> {
    pub center: Vec3<T>,
    pub half_extents: Vec3<T>,
}

impl<T: Real> SolidBox<T> {
    pub fn new(center: Vec3<T>, half_extents: Vec3<T>) -> Self {
        Self {
            center,
            half_extents,
        }
    }

    /// Box spanning `min..max`.
    pub fn from_corners(min: Vec3<T>, max: Vec3<T>) -> Self {
        let h = T::lit(0.5);
        Self::new((min + max).scale(h), (max - min).scale(h))
    }

    pub fn aabb(&self) -> Aabb<T> {
        Aabb::new(
            self.center - self.half_extents,
            self.center + self.half_extents,
        )
    }

    /// Exact signed distance: negative inside, Euclidean outside.
    #[inline]
    pub fn sdf(&self, p: Vec3<T>) -> T {
        let q = (p - self.center).map(|v| v.abs()) - self.half_extents;
        let outside = q.map(|v| v.max(T::zero())).norm();
        let inside = q.max_component().min(T::zero());
        outside + inside
    }

    /// Slab test. Returns the smallest positive hit parameter, or `None`.
    pub fn intersect(&self, origin: Vec3<T>, dir: Vec3<T>) -> Option<T> {
        let lo = (self.center - self.half_extents).to_array();
        let hi = (self.center + self.half_extents).to_array();
        let o = origin.to_array();
        let d = dir.to_array();
        let mut t_near = T::neg_infinity();
        let mut t_far = T::infinity();
        for a in 0..3 {
            if d[a] == T::zero() {
                if o[a] < lo[a] || o[a] > hi[a] {
                    return None;
                }
                continue;
            }
            let inv = T::one() / d[a];
            let (mut t0, mut t1) = ((lo[a] - o[a]) * inv, (hi[a] - o[a]) * inv);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_near = t_near.max(t0);
            t_far = t_far.min(t1);
            if t_near > t_far {
                return None;
            }
        }
        if t_near > T::zero() {
            Some(t_near)
        } else if t_far > T::zero() {
            // origin inside the box: the exit face is the first surface crossing
            Some(t_far)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T> {
    solids: Vec<SolidBox<T>>,
    bounds: Aabb<T>,
}

impl<T: Real> Scene<T> {
    pub fn new(solids: Vec<SolidBox<T>>, bounds: Aabb<T>) -> Result<Self> {
        if solids.is_empty() {
            return Err(invalid("solids", "scene needs at least one solid"));
        }
        let tol = T::lit(1e-9);
        let grown = Aabb::new(
            bounds.min - Vec3::new(tol, tol, tol),
            bounds.max + Vec3::new(tol, tol, tol),
        );
        for (i, s) in solids.iter().enumerate() {
            if s.half_extents.x < T::zero()
                || s.half_extents.y < T::zero()
                || s.half_extents.z < T::zero()
            {
                return Err(invalid(
                    "solids",
                    format!("box {i} has negative half-extent"),
                ));
            }
            if !grown.contains_box(&s.aabb()) {
                return Err(invalid(
                    "bounds",
                    format!("box {i} lies outside the bounds"),
                ));
            }
        }
        Ok(Self { solids, bounds })
    }

    pub fn solids(&self) -> &[SolidBox<T>] {
        &self.solids
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.bounds
    }

    /// Union of all solids (minimum over per-box distances).
    pub fn sdf(&self, p: Vec3<T>) -> T {
        self.solids
            .iter()
            .map(|s| s.sdf(p))
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Distance to the first surface along a unit direction, if within `max_range`.
    pub fn ray_cast(&self, origin: Vec3<T>, dir: Vec3<T>, max_range: T) -> Option<T> {
        self.solids
            .iter()
            .filter_map(|s| s.intersect(origin, dir))
            .filter(|&t| t <= max_range)
            .fold(None, |best: Option<T>, t| {
                Some(best.map_or(t, |b| b.min(t)))
            })
    }

    /// Rejection-samples `count` points with positive scene distance inside the bounds.
    pub fn sample_free_space(&self, count: usize, seed: u64) -> Result<Vec<Vec3<T>>> {
        if count == 0 {
            return Err(invalid("count", "must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (self.bounds.min, self.bounds.max);
        let ext = (hi - lo).to_array().map(|v| v.as_f64());
        let lo = lo.to_array().map(|v| v.as_f64());
        let mut out = Vec::with_capacity(count);
        let mut trials = 0usize;
        while out.len() < count {
            trials += 1;
            let p = Vec3::new(
                T::lit(lo[0] + ext[0] * rng.random::<f64>()),
                T::lit(lo[1] + ext[1] * rng.random::<f64>()),
                T::lit(lo[2] + ext[2] * rng.random::<f64>()),
            );
            if self.sdf(p) > T::zero() {
                out.push(p);
            }
            if trials >= 1_000_000 && out.len() * 1000 < trials {
                return Err(Error::DegenerateScene {
                    accepted: out.len(),
                    trials,
                });
            }
        }
        Ok(out)
    }

    /// Fills a TSDF map with the clamped scene distance at every fine-cell center,
    /// keeping only blocks that intersect the truncation band.
    pub fn build_tsdf(
        &self,
        fine_resolution: T,
        truncation: T,
        block_size: u32,
    ) -> Result<TsdfMap<T>> {
        let mut map = TsdfMap::new(fine_resolution, truncation, block_size, self.bounds.min)?;
        let pad = Vec3::new(truncation, truncation, truncation);
        let first = map.coarse_of(map.world_to_cell(self.bounds.min - pad));
        let last = map.coarse_of(map.world_to_cell(self.bounds.max + pad));
        let bs = block_size as i32;
        let half_diag = map.block_extent() * T::lit(3f64.sqrt() * 0.5);
        let cells = (block_size as usize).pow(3);
        for cz in first[2]..=last[2] {
            for cy in first[1]..=last[1] {
                for cx in first[0]..=last[0] {
                    let base = [cx * bs, cy * bs, cz * bs];
                    let lo = map.cell_center(base)
                        - Vec3::new(fine_resolution, fine_resolution, fine_resolution)
                            .scale(T::lit(0.5));
                    let mid = lo
                        + Vec3::new(T::one(), T::one(), T::one())
                            .scale(map.block_extent() * T::lit(0.5));
                    if self.sdf(mid).abs() >= truncation + half_diag {
                        continue;
                    }
                    let mut values = Vec::with_capacity(cells);
                    for k in 0..bs {
                        for j in 0..bs {
                            for i in 0..bs {
                                let c = map.cell_center([base[0] + i, base[1] + j, base[2] + k]);
                                values.push(self.sdf(c));
                            }
                        }
                    }
                    map.insert_block([cx, cy, cz], values)?;
                }
            }
        }
        Ok(map)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut solids = Vec::new();
        let mut bounds = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let v = parse_fields::<T>(rest, 6, n + 1)?;
            match kind {
                "box" => solids.push(SolidBox::new(
                    Vec3::new(v[0], v[1], v[2]),
                    Vec3::new(v[3], v[4], v[5]),
                )),
                "bounds" => {
                    bounds = Some(Aabb::new(
                        Vec3::new(v[0], v[1], v[2]),
                        Vec3::new(v[3], v[4], v[5]),
                    ))
                }
                other => {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: format!("unknown record `{other}`"),
                    })
                }
            }
        }
        let bounds = bounds.ok_or(Error::Parse {
            line: 0,
            msg: "missing bounds line".into(),
        })?;
        Self::new(solids, bounds)
    }

    pub fn to_text(&self) -> String {
        let b = &self.bounds;
        let mut s = format!(
            "bounds {} {} {} {} {} {}\n",
            b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
        );
        for solid in &self.solids {
            let (c, h) = (solid.center, solid.half_extents);
            s.push_str(&format!(
                "box {} {} {} {} {} {}\n",
                c.x, c.y, c.z, h.x, h.y, h.z
            ));
        }
        s
    }
}
