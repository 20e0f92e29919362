//! Binary lattice formats and atomic file output.
//!
//! All three formats are little-endian with a fixed header:
//!
//! ```text
//!     PXF1: "PXF1" u32 nx  u32 ny  f64 dx  f64 dy   zero-pad to 64 bytes
//!           then ny·nx complex samples (f64 re, f64 im), x fastest
//!     PXI1: same 64-byte header with magic "PXI1", ny·nx real f64
//!     PXD1: "PXD1" u32 nx  u32 ny  u32 nz  f64 dx  f64 dy  f64 dz  (40 bytes)
//!           then nz·ny·nx real f64, x fastest
//! ```

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write as _;
use std::path::Path;

use crate::condensate::DensityGrid3;
use crate::error::{Error, Result};
use crate::grid::{ComplexField2D, TransverseGrid};

const HEADER_2D: usize = 64;
const HEADER_3D: usize = 40;
/// Cap on total samples per file; keeps malformed headers from huge allocations.
const MAX_SAMPLES: u64 = 1 << 28;

/// Writes `bytes` to a sibling temporary file, then renames over `path`,
/// so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("json encoding failed: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

fn header_2d(magic: &[u8; 4], grid: &TransverseGrid) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_2D);
    h.extend_from_slice(magic);
    h.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    h.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    h.extend_from_slice(&grid.dx.to_le_bytes());
    h.extend_from_slice(&grid.dy.to_le_bytes());
    h.resize(HEADER_2D, 0);
    h
}

struct Parsed2D {
    grid: TransverseGrid,
    samples: Vec<f64>,
}

fn parse_2d(bytes: &[u8], magic: &[u8; 4], per_node: usize) -> Result<Parsed2D> {
    if bytes.len() < HEADER_2D {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the {HEADER_2D}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            &bytes[0..4],
            magic
        )));
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let dx = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let dy = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if (nx as u64) * (ny as u64) > MAX_SAMPLES {
        return Err(Error::Format(format!("unreasonable dimensions {nx}x{ny}")));
    }
    let grid = TransverseGrid::new(nx, ny, dx, dy)?;
    let expected = HEADER_2D + nx * ny * per_node * 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "file is {} bytes, expected {expected} for {nx}x{ny}",
            bytes.len()
        )));
    }
    let samples = read_f64s(&bytes[HEADER_2D..])?;
    Ok(Parsed2D { grid, samples })
}

fn read_f64s(bytes: &[u8]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(bytes.len() / 8);
    for chunk in bytes.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Format(format!("non-finite sample {v}")));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_pxf1(path: &Path, field: &ComplexField2D) -> Result<()> {
    let mut bytes = header_2d(b"PXF1", &field.grid);
    for v in field.values.iter() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn read_pxf1(path: &Path) -> Result<ComplexField2D> {
    let parsed = parse_2d(&std::fs::read(path)?, b"PXF1", 2)?;
    let (ny, nx) = (parsed.grid.ny, parsed.grid.nx);
    let values = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
        let base = 2 * (iy * nx + ix);
        Complex64::new(parsed.samples[base], parsed.samples[base + 1])
    });
    ComplexField2D::new(parsed.grid, values)
}

pub fn write_pxi1(path: &Path, grid: &TransverseGrid, values: &Array2<f64>) -> Result<()> {
    if values.dim() != (grid.ny, grid.nx) {
        return Err(Error::GridMismatch(format!(
            "image is {:?}, grid wants ({}, {})",
            values.dim(),
            grid.ny,
            grid.nx
        )));
    }
    let mut bytes = header_2d(b"PXI1", grid);
    for v in values.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn read_pxi1(path: &Path) -> Result<(TransverseGrid, Array2<f64>)> {
    let parsed = parse_2d(&std::fs::read(path)?, b"PXI1", 1)?;
    let (ny, nx) = (parsed.grid.ny, parsed.grid.nx);
    let values = Array2::from_shape_vec((ny, nx), parsed.samples)
        .expect("length checked against header");
    Ok((parsed.grid, values))
}

pub fn write_pxd1(path: &Path, grid: &DensityGrid3) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_3D + grid.values().len() * 8);
    bytes.extend_from_slice(b"PXD1");
    for n in [grid.nx, grid.ny, grid.nz] {
        bytes.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for d in [grid.dx, grid.dy, grid.dz] {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    for v in grid.values().iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

/// Reads a PXD1 file and re-validates normalization and positivity.
pub fn read_pxd1(path: &Path) -> Result<DensityGrid3> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < HEADER_3D {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the {HEADER_3D}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != b"PXD1" {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"PXD1\"",
            &bytes[0..4]
        )));
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let nz = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let dx = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let dy = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let dz = f64::from_le_bytes(bytes[32..40].try_into().unwrap());
    if (nx as u64) * (ny as u64) * (nz as u64) > MAX_SAMPLES {
        return Err(Error::Format(format!(
            "unreasonable dimensions {nx}x{ny}x{nz}"
        )));
    }
    let expected = HEADER_3D + nx * ny * nz * 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "file is {} bytes, expected {expected} for {nx}x{ny}x{nz}",
            bytes.len()
        )));
    }
    let samples = read_f64s(&bytes[HEADER_3D..])?;
    let values = Array3::from_shape_vec((nz, ny, nx), samples)
        .expect("length checked against header");
    DensityGrid3::new(nx, ny, nz, dx, dy, dz, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn sample_field() -> ComplexField2D {
        let grid = TransverseGrid::new(8, 4, 0.5, 0.25).unwrap();
        let values = Array2::from_shape_fn((4, 8), |(iy, ix)| {
            Complex64::new(ix as f64, -(iy as f64))
        });
        ComplexField2D::new(grid, values).unwrap()
    }

    #[test]
    fn pxf1_round_trip() {
        let dir = tmpdir();
        let path = dir.path().join("field.pxf");
        let field = sample_field();
        write_pxf1(&path, &field).unwrap();
        let back = read_pxf1(&path).unwrap();
        assert_eq!(back, field);
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            64 + 8 * 4 * 16
        );
    }

    #[test]
    fn pxi1_round_trip() {
        let dir = tmpdir();
        let path = dir.path().join("image.pxi");
        let grid = TransverseGrid::new(4, 4, 1.0, 2.0).unwrap();
        let values = Array2::from_shape_fn((4, 4), |(iy, ix)| (iy * 4 + ix) as f64);
        write_pxi1(&path, &grid, &values).unwrap();
        let (g, v) = read_pxi1(&path).unwrap();
        assert_eq!(g, grid);
        assert_eq!(v, values);
    }

    #[test]
    fn pxd1_round_trip() {
        let dir = tmpdir();
        let path = dir.path().join("density.pxd");
        let grid = DensityGrid3::from_fn((6, 5, 4), (1.0, 1.0, 1.0), |x, y, z| {
            (-(x * x + y * y + z * z)).exp()
        })
        .unwrap();
        write_pxd1(&path, &grid).unwrap();
        let back = read_pxd1(&path).unwrap();
        assert_eq!(back.values(), grid.values());
        assert_eq!((back.dx, back.dy, back.dz), (grid.dx, grid.dy, grid.dz));
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tmpdir();
        let path = dir.path().join("bad.pxf");
        let field = sample_field();
        write_pxf1(&path, &field).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_pxf1(&path), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_truncation() {
        let dir = tmpdir();
        let path = dir.path().join("short.pxf");
        let field = sample_field();
        write_pxf1(&path, &field).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_pxf1(&path), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let dir = tmpdir();
        let path = dir.path().join("nan.pxi");
        let grid = TransverseGrid::new(2, 2, 1.0, 1.0).unwrap();
        let values = Array2::from_elem((2, 2), 0.25);
        write_pxi1(&path, &grid, &values).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let nan = f64::NAN.to_le_bytes();
        bytes[64..72].copy_from_slice(&nan);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_pxi1(&path), Err(Error::Format(_))));
    }

    #[test]
    fn pxd1_read_revalidates_normalization() {
        let dir = tmpdir();
        let path = dir.path().join("unnorm.pxd");
        let grid = DensityGrid3::from_fn((4, 4, 4), (1.0, 1.0, 1.0), |_, _, _| 1.0).unwrap();
        write_pxd1(&path, &grid).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let doubled = (2.0 * grid.values()[(0, 0, 0)]).to_le_bytes();
        bytes[40..48].copy_from_slice(&doubled);
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_pxd1(&path).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tmpdir();
        let path = dir.path().join("out.json");
        write_json(&path, &serde_json::json!({"a": 1})).unwrap();
        let entries: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries, vec![std::ffi::OsString::from("out.json")]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
    }
}
