//! Binary field snapshots.
//!
//! Layout: magic `BSFIELD1`, `u8` endianness (0 = little), 3 zero bytes,
//! `u32 n`, `f64 L`, `u32 M`, `u32 N`, then `M^n N` pairs `(f64 re, f64 im)`
//! in point-major order. Only little-endian files are written.

use super::{FieldOnGrid, GridError, GridSpec};
use num_complex::Complex64 as C64;
use std::io::{Read, Write};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"BSFIELD1";
const HEADER: usize = 32;

pub fn write_snapshot<W: Write>(f: &FieldOnGrid, mut w: W) -> std::io::Result<()> {
    let g = &f.grid;
    let mut buf = Vec::with_capacity(HEADER + 16 * f.values.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&[0, 0, 0, 0]);
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&g.half_length().to_le_bytes());
    buf.extend_from_slice(&(g.samples() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.spin() as u32).to_le_bytes());
    for z in &f.values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<FieldOnGrid, GridError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| GridError::Snapshot(e.to_string()))?;
    if bytes.len() < HEADER || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(GridError::Snapshot("missing BSFIELD1 header".into()));
    }
    if bytes[8] != 0 {
        return Err(GridError::Snapshot(format!("unsupported endianness flag {}", bytes[8])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let grid = GridSpec::new(u32_at(12), f64_at(16), u32_at(24), u32_at(28))?;
    let want = HEADER + 16 * grid.dof();
    if bytes.len() != want {
        return Err(GridError::Snapshot(format!("expected {want} bytes, got {}", bytes.len())));
    }
    let values = (0..grid.dof())
        .map(|i| C64::new(f64_at(HEADER + 16 * i), f64_at(HEADER + 16 * i + 8)))
        .collect();
    FieldOnGrid::from_values(&grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = GridSpec::new(2, 1.5, 4, 2).unwrap();
        let f = FieldOnGrid::from_fn(&g, |x, s| C64::new(x[0], x[1] * s as f64));
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 16 * 32);
        assert_eq!(&buf[..8], SNAPSHOT_MAGIC);
        assert_eq!(read_snapshot(&buf[..]).unwrap(), f);
        assert!(read_snapshot(&buf[..40]).is_err());
        buf[8] = 1;
        assert!(read_snapshot(&buf[..]).is_err());
    }
}
