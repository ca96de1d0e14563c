//! Binary map format.
//!
//! ```text
//! "TSDF" | u8 version | f32 fine_resolution | f32 truncation | u32 block_size
//!        | 3 x f32 origin | u64 block_count
//!        | block_count x (3 x i32 coarse index | block_size³ x f32 values)
//! ```
//! All multi-byte fields are little-endian. Blocks are written in ascending
//! coarse-index order so that equal maps serialize to equal bytes.

use super::TsdfMap;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"TSDF";
pub const FORMAT_VERSION: u8 = 1;

pub fn serialize<T: Real>(map: &TsdfMap<T>) -> Vec<u8> {
    let cells = (map.block_size() as usize).pow(3);
    let mut out = Vec::with_capacity(37 + map.block_count() * (12 + 4 * cells));
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    let f = |v: T| v.to_f32().unwrap_or(f32::NAN).to_le_bytes();
    out.extend_from_slice(&f(map.fine_resolution()));
    out.extend_from_slice(&f(map.truncation()));
    out.extend_from_slice(&map.block_size().to_le_bytes());
    for c in map.origin().to_array() {
        out.extend_from_slice(&f(c));
    }
    out.extend_from_slice(&(map.block_count() as u64).to_le_bytes());
    let mut blocks: Vec<_> = map.blocks().collect();
    blocks.sort_by_key(|(c, _)| *c);
    for (coarse, block) in blocks {
        for c in coarse {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for &v in block.values() {
            out.extend_from_slice(&f(v));
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated payload while reading {what}")))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length"))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }
}

pub fn deserialize<T: Real>(bytes: &[u8]) -> Result<TsdfMap<T>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.take("magic")?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let [version] = r.take::<1>("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let res = r.f32("fine_resolution")?;
    let trunc = r.f32("truncation")?;
    let block_size = r.u32("block_size")?;
    let origin = [r.f32("origin")?, r.f32("origin")?, r.f32("origin")?];
    let count = r.u64("block_count")?;
    let lit = |v: f32| T::lit(v as f64);
    let mut map = TsdfMap::new(
        lit(res),
        lit(trunc),
        block_size,
        Vec3::new(lit(origin[0]), lit(origin[1]), lit(origin[2])),
    )
    .map_err(|e| Error::Format(e.to_string()))?;
    let cells = (block_size as usize).pow(3);
    let remaining = (bytes.len() - r.pos) as u64;
    if count.saturating_mul(12 + 4 * cells as u64) > remaining {
        return Err(Error::Format(format!(
            "truncated payload: {count} blocks declared, {remaining} bytes left"
        )));
    }
    for _ in 0..count {
        let coarse = [
            r.i32("coarse index")?,
            r.i32("coarse index")?,
            r.i32("coarse index")?,
        ];
        let mut values = Vec::with_capacity(cells);
        for _ in 0..cells {
            values.push(lit(r.f32("block values")?));
        }
        if map.block(coarse).is_some() {
            return Err(Error::Format(format!("duplicate block {coarse:?}")));
        }
        map.insert_block(coarse, values)?;
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::TsdfMap;

    fn three_blocks() -> TsdfMap<f32> {
        let mut m = TsdfMap::new(0.05f32, 0.2, 4, Vec3::new(-1.0, 0.5, 0.0)).unwrap();
        m.set_cell([0, 0, 0], 0.01);
        m.set_cell([5, 1, 2], -0.13);
        m.set_cell([-9, -1, 30], 0.199);
        m
    }

    #[test]
    fn empty_map_round_trip() {
        let m = TsdfMap::<f32>::new(0.1, 0.3, 16, Vec3::zeros()).unwrap();
        let bytes = serialize(&m);
        assert_eq!(bytes.len(), 37);
        assert_eq!(deserialize::<f32>(&bytes).unwrap(), m);
    }

    #[test]
    fn three_block_round_trip_is_bit_exact() {
        let m = three_blocks();
        assert_eq!(m.block_count(), 3);
        let bytes = serialize(&m);
        let back = deserialize::<f32>(&bytes).unwrap();
        assert_eq!(back, m);
        for (cell, v) in m.allocated_cells() {
            assert_eq!(back.cell_value(cell).to_bits(), v.to_bits());
        }
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = serialize(&three_blocks());
        assert_eq!(&bytes[..4], b"TSDF");
        assert_eq!(bytes[4], 1);
        assert_eq!(f32::from_le_bytes(bytes[5..9].try_into().unwrap()), 0.05);
        assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(bytes[29..37].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 37 + 3 * (12 + 4 * 64));
    }

    #[test]
    fn rejects_corrupt_input() {
        let bytes = serialize(&three_blocks());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(deserialize::<f32>(&bad), Err(Error::Format(m)) if m.contains("magic")));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(deserialize::<f32>(&bad), Err(Error::Format(m)) if m.contains("version")));
        assert!(
            matches!(deserialize::<f32>(&bytes[..bytes.len() - 3]), Err(Error::Format(m)) if m.contains("truncated"))
        );
        assert!(deserialize::<f32>(&bytes[..20]).is_err());
        assert!(deserialize::<f32>(&[]).is_err());
    }
}
