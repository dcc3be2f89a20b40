//! Binary checkpoint format for spectral fields.
//!
//! Layout (all little-endian):
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `LASF`                    |
//! | 4     | version (`u32`, currently 1)    |
//! | 4     | dim (`u32`)                     |
//! | 4     | n (`u32`)                       |
//! | 4     | components (`u32`)              |
//! | 16·M  | `(re, im)` as `f64` pairs, FFT order, component-major |
//!
//! The period is not stored; readers assume the `2π` torus unless told otherwise.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LASF";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(field: &SpectralField, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    for v in [VERSION, g.dim() as u32, g.n() as u32, field.components() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in field.coeffs() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint onto a grid with the given period.
pub fn read_checkpoint_with_length<R: Read>(mut r: R, length: f64) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
    }
    let mut header = [0u32; 4];
    for h in header.iter_mut() {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *h = u32::from_le_bytes(b);
    }
    let [version, dim, n, components] = header;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let grid = Arc::new(Grid::new(dim as usize, n as usize, length)?);
    let count = components as usize * grid.modes();
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes).map_err(|e| Error::Checkpoint(format!("truncated payload: {e}")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after payload".into()));
    }
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(grid, components as usize, coeffs)
}

pub fn read_checkpoint<R: Read>(r: R) -> Result<SpectralField> {
    read_checkpoint_with_length(r, 2.0 * std::f64::consts::PI)
}

pub fn save_checkpoint(field: &SpectralField, path: &Path) -> Result<()> {
    write_checkpoint(field, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: &Path) -> Result<SpectralField> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let mut f = SpectralField::zero_velocity(g);
        f.set_mode(1, &[1, 0], Complex64::new(0.25, -0.5)).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 20 + 2 * 64 * 16);
        assert_eq!(&buf[..4], b"LASF");
        assert_eq!(&buf[4..20], &[1, 0, 0, 0, 2, 0, 0, 0, 8, 0, 0, 0, 2, 0, 0, 0]);
        // component 1, flat index of (1, 0) is 8.
        let off = 20 + (64 + 8) * 16;
        assert_eq!(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(buf[off + 8..off + 16].try_into().unwrap()), -0.5);
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back.coeffs(), f.coeffs());
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_checkpoint(&b"NOPE"[..]).is_err());
        let g = Arc::new(Grid::periodic(2, 8).unwrap());
        let mut buf = Vec::new();
        write_checkpoint(&SpectralField::zero_velocity(g), &mut buf).unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_checkpoint(&buf[..]).is_err());
    }
}
