//! Regular complex wavefield grids and the "PNWF" file format.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::SolveError;
use crate::io as bin;

pub const WAVEFIELD_MAGIC: &[u8; 4] = b"PNWF";
pub const WAVEFIELD_VERSION: u16 = 1;

/// Node-centered grid of complex wavefield values, tagged with the frequency
/// and source that produced it. Values are row-major with the z index outer:
/// `values[iz * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub ox: f64,
    pub oz: f64,
    pub frequency_hz: f64,
    pub source_x: f64,
    pub source_z: f64,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(
        nx: usize,
        nz: usize,
        dx: f64,
        dz: f64,
        ox: f64,
        oz: f64,
        frequency_hz: f64,
        source_x: f64,
        source_z: f64,
    ) -> Self {
        Self {
            nx,
            nz,
            dx,
            dz,
            ox,
            oz,
            frequency_hz,
            source_x,
            source_z,
            values: vec![Complex64::new(0.0, 0.0); nx * nz],
        }
    }

    #[inline]
    pub fn idx(&self, ix: usize, iz: usize) -> usize {
        iz * self.nx + ix
    }

    #[inline]
    pub fn at(&self, ix: usize, iz: usize) -> Complex64 {
        self.values[self.idx(ix, iz)]
    }

    pub fn x_of(&self, ix: usize) -> f64 {
        self.ox + ix as f64 * self.dx
    }

    pub fn z_of(&self, iz: usize) -> f64 {
        self.oz + iz as f64 * self.dz
    }

    /// Same geometry (sizes, spacing, origin) as another grid.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.nz == other.nz
            && self.dx == other.dx
            && self.dz == other.dz
            && self.ox == other.ox
            && self.oz == other.oz
    }

    /// Writes the "PNWF" format: magic, version u16, u32 nx, nz,
    /// f64 dx, dz, ox, oz, frequency_hz, source_x, source_z, then nx*nz
    /// (re, im) f32 pairs row-major, little-endian.
    pub fn save(&self, path: &Path) -> Result<(), SolveError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(WAVEFIELD_MAGIC)?;
        bin::write_u16(&mut w, WAVEFIELD_VERSION)?;
        bin::write_u32(&mut w, self.nx as u32)?;
        bin::write_u32(&mut w, self.nz as u32)?;
        bin::write_f64(&mut w, self.dx)?;
        bin::write_f64(&mut w, self.dz)?;
        bin::write_f64(&mut w, self.ox)?;
        bin::write_f64(&mut w, self.oz)?;
        bin::write_f64(&mut w, self.frequency_hz)?;
        bin::write_f64(&mut w, self.source_x)?;
        bin::write_f64(&mut w, self.source_z)?;
        for v in &self.values {
            bin::write_f32(&mut w, v.re as f32)?;
            bin::write_f32(&mut w, v.im as f32)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SolveError> {
        let mut r = BufReader::new(File::open(path)?);
        bin::read_magic(&mut r, WAVEFIELD_MAGIC)?;
        let version = bin::read_u16(&mut r)?;
        if version != WAVEFIELD_VERSION {
            return Err(SolveError::Io(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported wavefield version {version}"),
            )));
        }
        let nx = bin::read_u32(&mut r)? as usize;
        let nz = bin::read_u32(&mut r)? as usize;
        if nx == 0 || nz == 0 || nx.saturating_mul(nz) > 1 << 30 {
            return Err(SolveError::Io(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad grid size {nx}x{nz}"),
            )));
        }
        let dx = bin::read_f64(&mut r)?;
        let dz = bin::read_f64(&mut r)?;
        let ox = bin::read_f64(&mut r)?;
        let oz = bin::read_f64(&mut r)?;
        let frequency_hz = bin::read_f64(&mut r)?;
        let source_x = bin::read_f64(&mut r)?;
        let source_z = bin::read_f64(&mut r)?;
        let mut values = Vec::with_capacity(nx * nz);
        for _ in 0..nx * nz {
            let re = bin::read_f32(&mut r)? as f64;
            let im = bin::read_f32(&mut r)? as f64;
            values.push(Complex64::new(re, im));
        }
        bin::expect_eof(&mut r)?;
        Ok(Self {
            nx,
            nz,
            dx,
            dz,
            ox,
            oz,
            frequency_hz,
            source_x,
            source_z,
            values,
        })
    }

    /// Dumps the grid as `x,z,re,im` CSV for plotting.
    pub fn export_csv(&self, path: &Path) -> Result<(), SolveError> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "x,z,re,im")?;
        for iz in 0..self.nz {
            for ix in 0..self.nx {
                let v = self.at(ix, iz);
                writeln!(w, "{},{},{},{}", self.x_of(ix), self.z_of(iz), v.re, v.im)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_roundtrip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.pnwf");
        let p2 = dir.path().join("b.pnwf");
        let mut g = ComplexGrid::zeros(8, 5, 0.1, 0.1, 0.0, 0.0, 2.0, 1.0, 0.025);
        for (i, v) in g.values.iter_mut().enumerate() {
            *v = Complex64::new(i as f64 * 0.5, -(i as f64) * 0.25);
        }
        g.save(&p1).unwrap();
        let loaded = ComplexGrid::load(&p1).unwrap();
        loaded.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(loaded.nx, 8);
        assert_eq!(loaded.nz, 5);
    }

    #[test]
    fn wrong_magic_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.pnwf");
        std::fs::write(&p, b"PNVM rest of file").unwrap();
        assert!(ComplexGrid::load(&p).is_err());
    }

    #[test]
    fn truncated_file_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.pnwf");
        let g = ComplexGrid::zeros(10, 10, 0.1, 0.1, 0.0, 0.0, 2.0, 1.0, 0.025);
        g.save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 13]).unwrap();
        assert!(ComplexGrid::load(&p).is_err());
    }
}
