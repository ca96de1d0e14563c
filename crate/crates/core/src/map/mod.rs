//! Two-level sparse TSDF grid.
//!
//! The coarse level is a hash from block coordinates to dense fine blocks of
//! `block_size³` cells. Only blocks holding at least one value strictly inside the
//! truncation band are kept; every other cell reads as `+truncation`.

mod io;

pub use io::{deserialize, serialize, FORMAT_VERSION, MAGIC};

use rustc_hash::FxHashMap;

use crate::error::{invalid, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

pub const DEFAULT_BLOCK_SIZE: u32 = 16;

/// Integer cell or block coordinate.
pub type GridIndex = [i32; 3];

/// Dense block of fine cells, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FineBlock<T> {
    values: Vec<T>,
}

impl<T: Real> FineBlock<T> {
    fn filled(block_size: u32, v: T) -> Self {
        Self {
            values: vec![v; (block_size as usize).pow(3)],
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

#[derive(Clone, Debug)]
pub struct TsdfMap<T> {
    fine_resolution: T,
    truncation: T,
    block_size: u32,
    block_shift: u32,
    origin: Vec3<T>,
    index: FxHashMap<GridIndex, usize>,
    coords: Vec<GridIndex>,
    blocks: Vec<FineBlock<T>>,
}

impl<T: Real> TsdfMap<T> {
    pub fn new(
        fine_resolution: T,
        truncation: T,
        block_size: u32,
        origin: Vec3<T>,
    ) -> Result<Self> {
        if !(fine_resolution > T::zero()) || !fine_resolution.is_finite() {
            return Err(invalid("fine_resolution", "must be positive and finite"));
        }
        if !(truncation >= fine_resolution) || !truncation.is_finite() {
            return Err(invalid("truncation", "must be >= fine_resolution"));
        }
        if block_size == 0 || !block_size.is_power_of_two() || block_size > 256 {
            return Err(invalid("block_size", "must be a power of two in 1..=256"));
        }
        Ok(Self {
            fine_resolution,
            truncation,
            block_size,
            block_shift: block_size.trailing_zeros(),
            origin,
            index: FxHashMap::default(),
            coords: Vec::new(),
            blocks: Vec::new(),
        })
    }

    pub fn fine_resolution(&self) -> T {
        self.fine_resolution
    }

    pub fn truncation(&self) -> T {
        self.truncation
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Edge length of a coarse block in meters.
    pub fn block_extent(&self) -> T {
        self.fine_resolution * T::from_usize_lossy(self.block_size as usize)
    }

    /// Iterates `(coarse index, block)` in storage order.
    pub fn blocks(&self) -> impl Iterator<Item = (GridIndex, &FineBlock<T>)> {
        self.coords.iter().copied().zip(self.blocks.iter())
    }

    pub fn block(&self, coarse: GridIndex) -> Option<&FineBlock<T>> {
        self.index.get(&coarse).map(|&i| &self.blocks[i])
    }

    /// Global fine-cell index containing `p` (lower-inclusive floor).
    #[inline]
    pub fn world_to_cell(&self, p: Vec3<T>) -> GridIndex {
        let g = (p - self.origin).scale(T::one() / self.fine_resolution);
        [floor_i32(g.x), floor_i32(g.y), floor_i32(g.z)]
    }

    /// `(coarse block index, global fine-cell index)` of `p`.
    pub fn world_to_grid(&self, p: Vec3<T>) -> (GridIndex, GridIndex) {
        let cell = self.world_to_cell(p);
        (self.coarse_of(cell), cell)
    }

    #[inline]
    pub fn coarse_of(&self, cell: GridIndex) -> GridIndex {
        let s = self.block_shift;
        [cell[0] >> s, cell[1] >> s, cell[2] >> s]
    }

    #[inline]
    fn local_offset(&self, cell: GridIndex) -> usize {
        let mask = (self.block_size - 1) as i32;
        let bs = self.block_size as usize;
        let (lx, ly, lz) = (
            (cell[0] & mask) as usize,
            (cell[1] & mask) as usize,
            (cell[2] & mask) as usize,
        );
        lx + bs * (ly + bs * lz)
    }

    pub fn cell_center(&self, cell: GridIndex) -> Vec3<T> {
        let h = T::lit(0.5);
        let r = self.fine_resolution;
        self.origin
            + Vec3::new(
                (T::lit(cell[0] as f64) + h) * r,
                (T::lit(cell[1] as f64) + h) * r,
                (T::lit(cell[2] as f64) + h) * r,
            )
    }

    /// Stored value of a fine cell, `+truncation` when its block is absent.
    #[inline]
    pub fn cell_value(&self, cell: GridIndex) -> T {
        match self.index.get(&self.coarse_of(cell)) {
            Some(&b) => self.blocks[b].values[self.local_offset(cell)],
            None => self.truncation,
        }
    }

    /// Nearest-cell distance at `p`.
    #[inline]
    pub fn lookup(&self, p: Vec3<T>) -> T {
        self.cell_value(self.world_to_cell(p))
    }

    /// Trilinear interpolation over the eight surrounding cell centers.
    pub fn lookup_interpolated(&self, p: Vec3<T>) -> T {
        let h = T::lit(0.5);
        let g = (p - self.origin).scale(T::one() / self.fine_resolution) - Vec3::new(h, h, h);
        let base = [floor_i32(g.x), floor_i32(g.y), floor_i32(g.z)];
        let f = [
            g.x - T::lit(base[0] as f64),
            g.y - T::lit(base[1] as f64),
            g.z - T::lit(base[2] as f64),
        ];
        let one = T::one();
        let mut acc = T::zero();
        for dz in 0..2 {
            let wz = if dz == 0 { one - f[2] } else { f[2] };
            for dy in 0..2 {
                let wy = if dy == 0 { one - f[1] } else { f[1] };
                for dx in 0..2 {
                    let wx = if dx == 0 { one - f[0] } else { f[0] };
                    let w = wx * wy * wz;
                    if w != T::zero() {
                        acc += w * self.cell_value([base[0] + dx, base[1] + dy, base[2] + dz]);
                    }
                }
            }
        }
        acc.max(-self.truncation).min(self.truncation)
    }

    /// Stores `v` clamped to `[-truncation, truncation]`, allocating the block on demand.
    pub fn set_cell(&mut self, cell: GridIndex, v: T) {
        let v = v.max(-self.truncation).min(self.truncation);
        let coarse = self.coarse_of(cell);
        let off = self.local_offset(cell);
        let b = self.block_slot(coarse);
        self.blocks[b].values[off] = v;
    }

    fn block_slot(&mut self, coarse: GridIndex) -> usize {
        if let Some(&b) = self.index.get(&coarse) {
            return b;
        }
        let b = self.blocks.len();
        self.blocks
            .push(FineBlock::filled(self.block_size, self.truncation));
        self.coords.push(coarse);
        self.index.insert(coarse, b);
        b
    }

    /// Inserts a whole block. Values are clamped; the block is dropped if it carries
    /// no information.
    pub fn insert_block(&mut self, coarse: GridIndex, values: Vec<T>) -> Result<()> {
        if values.len() != (self.block_size as usize).pow(3) {
            return Err(invalid("values", "block length must be block_size³"));
        }
        let t = self.truncation;
        let values: Vec<T> = values.into_iter().map(|v| v.max(-t).min(t)).collect();
        if values.iter().all(|v| v.abs() >= t) {
            return Ok(());
        }
        let b = self.block_slot(coarse);
        self.blocks[b] = FineBlock { values };
        Ok(())
    }

    /// Drops every block whose cells all sit at the truncation bound. Returns the
    /// number of removed blocks.
    pub fn prune(&mut self) -> usize {
        let t = self.truncation;
        let before = self.blocks.len();
        let mut i = 0;
        while i < self.blocks.len() {
            if self.blocks[i].values.iter().all(|v| v.abs() >= t) {
                let coarse = self.coords[i];
                self.index.remove(&coarse);
                self.blocks.swap_remove(i);
                self.coords.swap_remove(i);
                if i < self.blocks.len() {
                    self.index.insert(self.coords[i], i);
                }
            } else {
                i += 1;
            }
        }
        before - self.blocks.len()
    }

    /// Global indices and values of every cell in every allocated block.
    pub fn allocated_cells(&self) -> impl Iterator<Item = (GridIndex, T)> + '_ {
        let bs = self.block_size as i32;
        self.blocks().flat_map(move |(c, block)| {
            block.values.iter().enumerate().map(move |(i, &v)| {
                let i = i as i32;
                let local = [i % bs, (i / bs) % bs, i / (bs * bs)];
                (
                    [
                        c[0] * bs + local[0],
                        c[1] * bs + local[1],
                        c[2] * bs + local[2],
                    ],
                    v,
                )
            })
        })
    }
}

impl<T: Real> PartialEq for TsdfMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.fine_resolution == other.fine_resolution
            && self.truncation == other.truncation
            && self.block_size == other.block_size
            && self.origin == other.origin
            && self.blocks.len() == other.blocks.len()
            && self
                .blocks()
                .all(|(c, b)| other.block(c).is_some_and(|o| o == b))
    }
}

#[inline]
fn floor_i32<T: Real>(v: T) -> i32 {
    let f = v.floor();
    if f >= T::lit(i32::MAX as f64) {
        i32::MAX
    } else if f <= T::lit(i32::MIN as f64) || f.is_nan() {
        i32::MIN
    } else {
        f.to_i32().unwrap_or(i32::MIN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map() -> TsdfMap<f64> {
        TsdfMap::new(0.1, 0.3, 16, Vec3::zeros()).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TsdfMap::<f64>::new(0.0, 0.3, 16, Vec3::zeros()).is_err());
        assert!(TsdfMap::<f64>::new(0.1, 0.05, 16, Vec3::zeros()).is_err());
        assert!(TsdfMap::<f64>::new(0.1, 0.3, 12, Vec3::zeros()).is_err());
    }

    #[test]
    fn world_to_grid_floor_indexing() {
        let m = map();
        assert_eq!(
            m.world_to_grid(Vec3::new(0.0, 0.0, 0.0)),
            ([0, 0, 0], [0, 0, 0])
        );
        assert_eq!(m.world_to_cell(Vec3::new(0.25, 0.0, 0.0)), [2, 0, 0]);
        assert_eq!(m.world_to_cell(Vec3::new(-0.05, 0.0, 0.0)), [-1, 0, 0]);
        assert_eq!(m.world_to_grid(Vec3::new(-0.05, 1.7, 0.0)).0, [-1, 1, 0]);
        assert_eq!(m.world_to_grid(Vec3::new(3.3, 0.0, 0.0)).0, [2, 0, 0]);
    }

    #[test]
    fn absent_blocks_read_as_truncation() {
        let m = map();
        assert_eq!(m.lookup(Vec3::new(12.0, -4.0, 3.0)), 0.3);
        assert_eq!(m.lookup_interpolated(Vec3::new(12.0, -4.0, 3.0)), 0.3);
    }

    #[test]
    fn set_and_read_back() {
        let mut m = map();
        m.set_cell([3, 4, 5], -0.04);
        assert_eq!(m.cell_value([3, 4, 5]), -0.04);
        assert_eq!(m.lookup(Vec3::new(0.31, 0.41, 0.51)), -0.04);
        assert_eq!(m.lookup(Vec3::new(0.39, 0.49, 0.59)), -0.04);
        m.set_cell([-1, 0, 0], 0.5);
        assert_eq!(m.cell_value([-1, 0, 0]), 0.3);
        m.set_cell([-2, 0, 0], -9.0);
        assert_eq!(m.cell_value([-2, 0, 0]), -0.3);
    }

    #[test]
    fn prune_removes_uninformative_blocks() {
        let mut m = map();
        m.set_cell([100, 0, 0], 0.3);
        m.set_cell([0, 0, 0], 0.1);
        assert_eq!(m.block_count(), 2);
        assert_eq!(m.prune(), 1);
        assert_eq!(m.block_count(), 1);
        assert_eq!(m.cell_value([0, 0, 0]), 0.1);
        assert_eq!(m.cell_value([100, 0, 0]), 0.3);
    }

    #[test]
    fn interpolation_examples() {
        let mut m = map();
        // fill a neighbourhood so every corner is allocated
        for k in -2..3 {
            for j in -2..3 {
                for i in -2..6 {
                    m.set_cell([i, j, k], 0.0);
                }
            }
        }
        m.set_cell([1, 0, 0], 0.2);
        let center = m.cell_center([1, 0, 0]);
        assert!((m.lookup_interpolated(center) - 0.2).abs() < 1e-12);

        // cells 0 (0.0) and 1 (0.2), slab of constant value along y and z
        for k in -2..3 {
            for j in -2..3 {
                m.set_cell([1, j, k], 0.2);
            }
        }
        let quarter = m.cell_center([0, 0, 0]) + Vec3::new(0.025, 0.0, 0.0);
        // oracle: (1 - 0.25) * 0.0 + 0.25 * 0.2
        assert!((m.lookup_interpolated(quarter) - 0.05).abs() < 1e-12);

        for k in -2..3 {
            for j in -2..3 {
                m.set_cell([2, j, k], 0.1);
                m.set_cell([3, j, k], -0.1);
            }
        }
        let mid = (m.cell_center([2, 0, 0]) + m.cell_center([3, 0, 0])).scale(0.5);
        assert!(m.lookup_interpolated(mid).abs() < 1e-12);
    }

    #[test]
    fn one_wall_allocates_sparse_blocks() {
        // wall plane x = 2.0 inside a 10 x 10 x 1 m (100 m³) extent
        let mut m: TsdfMap<f64> = TsdfMap::new(0.05, 0.15, 8, Vec3::zeros()).unwrap();
        let n = (10.0 / 0.05) as i32;
        let nz = (1.0 / 0.05) as i32;
        for k in 0..nz {
            for j in 0..n {
                for i in 0..n {
                    let c = m.cell_center([i, j, k]);
                    let d = c.x - 2.0;
                    if d.abs() < 0.15 {
                        m.set_cell([i, j, k], d);
                    }
                }
            }
        }
        let extent_blocks =
            (10.0 / m.block_extent()).ceil().powi(2) * (1.0 / m.block_extent()).ceil();
        assert!(m.block_count() > 0);
        assert!(
            (m.block_count() as f64) < extent_blocks / 10.0,
            "{} of {}",
            m.block_count(),
            extent_blocks
        );
    }

    fn filled_region() -> TsdfMap<f64> {
        let mut m: TsdfMap<f64> = TsdfMap::new(0.1, 0.5, 4, Vec3::new(0.0, 0.0, 0.0)).unwrap();
        for k in -6..6 {
            for j in -6..6 {
                for i in -6..6 {
                    let c = m.cell_center([i, j, k]);
                    m.set_cell(
                        [i, j, k],
                        (c.x * 0.7 + c.y * 0.5 - c.z * 0.3 + 0.05).sin() * 0.4,
                    );
                }
            }
        }
        m
    }

    proptest! {
        #[test]
        fn lookups_stay_within_truncation(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
            let m = filled_region();
            let p = Vec3::new(x, y, z);
            prop_assert!(m.lookup(p).abs() <= m.truncation());
            prop_assert!(m.lookup_interpolated(p).abs() <= m.truncation());
        }

        #[test]
        fn interpolation_continuous_across_blocks(y in -0.3..0.3f64, z in -0.3..0.3f64) {
            // walk across the block boundary at x = 0 (block edge 0.4 m)
            let m = filled_region();
            let step = 1e-4;
            let bound = m.truncation() / m.fine_resolution() * step + 1e-9;
            let mut prev = m.lookup_interpolated(Vec3::new(-0.05, y, z));
            for s in 1..1000 {
                let v = m.lookup_interpolated(Vec3::new(-0.05 + s as f64 * step, y, z));
                prop_assert!((v - prev).abs() <= bound);
                prev = v;
            }
        }
    }
}
