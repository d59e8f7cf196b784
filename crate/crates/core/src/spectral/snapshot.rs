//! The `NLSF` binary snapshot format.
//!
//! Layout: magic `NLSF`, `u32` version, `u8` dimension, `u32` points per axis,
//! `f64` half length, `f64` timestamp, then the complex values as interleaved
//! little-endian `f64` pairs in row-major order.

use std::io::{Read, Write};

use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::grid::GridSpec;
use crate::error::{NlsError, Result};

pub const MAGIC: [u8; 4] = *b"NLSF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, field: &SpectralField, timestamp: f64) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(29 + 16 * g.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(g.dim() as u8);
    buf.extend_from_slice(&(g.points() as u32).to_le_bytes());
    buf.extend_from_slice(&g.half_len().to_le_bytes());
    buf.extend_from_slice(&timestamp.to_le_bytes());
    for z in field.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    let slice = bytes
        .get(*pos..end)
        .ok_or_else(|| NlsError::Format("truncated snapshot".into()))?;
    *pos = end;
    Ok(slice.try_into().expect("length checked"))
}

/// Reads a snapshot, returning the field and its timestamp.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0;
    if take::<4>(&bytes, &mut pos)? != MAGIC {
        return Err(NlsError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&bytes, &mut pos)?);
    if version != VERSION {
        return Err(NlsError::Format(format!("unsupported version {version}")));
    }
    let d = take::<1>(&bytes, &mut pos)?[0] as usize;
    let m = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let half_len = f64::from_le_bytes(take(&bytes, &mut pos)?);
    let t = f64::from_le_bytes(take(&bytes, &mut pos)?);
    let grid = GridSpec::new(d, m, half_len).map_err(|e| NlsError::Format(e.to_string()))?;
    if bytes.len() - pos != 16 * grid.len() {
        return Err(NlsError::Format(format!(
            "payload of {} bytes, expected {}",
            bytes.len() - pos,
            16 * grid.len()
        )));
    }
    let values = bytes[pos..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((SpectralField::from_values(grid, values)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = GridSpec::new(2, 8, 2.5).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::new(x[0].sin() / 3.0, x[1] * 1e-300));
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 0.125).unwrap();
        assert_eq!(&buf[..4], &[0x4E, 0x4C, 0x53, 0x46]);
        assert_eq!(buf.len(), 29 + 16 * 64);
        let (h, t) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(h, f);
    }

    #[test]
    fn rejects_corruption() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &SpectralField::zeros(g), 0.0).unwrap();
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad[..]).is_err());
    }
}
