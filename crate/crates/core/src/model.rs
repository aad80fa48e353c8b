//! Gridded velocity models over the survey domain: a layered-model
//! generator, bilinear interpolation, squared-slowness queries and the
//! "PNVM" file format.

use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::io as bin;
use crate::physics::{self, MediumPoint, PhysicsError};
use crate::DEFAULT_DOMAIN_KM;

pub const MODEL_MAGIC: &[u8; 4] = b"PNVM";
pub const MODEL_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("point ({x}, {z}) outside model domain")]
    OutOfDomain { x: f64, z: f64 },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("model file: {0}")]
    Io(#[from] io::Error),
}

/// Velocity grid plus the constant background used for the analytic field.
///
/// Velocities are stored as `f32` (matching the file format, so round trips
/// are bit-exact); all queries are carried out in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    nx: usize,
    nz: usize,
    dx: f64,
    dz: f64,
    ox: f64,
    oz: f64,
    /// Row-major, z-major outer: `v[iz * nx + ix]`, km/s.
    v: Vec<f32>,
    /// Background velocity, km/s.
    pub v0: f64,
}

/// The stand-in layered model used throughout: four flat layers of
/// 1.5 / 2.0 / 2.5 / 3.0 km/s with tops at 0 / 0.6 / 1.3 / 1.9 km.
/// The top layer equals the background velocity so the squared-slowness
/// perturbation vanishes in the source strip.
pub const DEFAULT_LAYERS: [(f64, f64); 4] = [(0.0, 1.5), (0.6, 2.0), (1.3, 2.5), (1.9, 3.0)];

impl VelocityModel {
    /// Piecewise-constant-in-depth, laterally invariant model from a layer
    /// table of `(top_depth_km, velocity_km_s)`. Tops must strictly increase
    /// starting at 0. The background velocity is pinned to the top layer.
    pub fn layered(
        nx: usize,
        nz: usize,
        extent_km: f64,
        layers: &[(f64, f64)],
    ) -> Result<Self, ModelError> {
        if nx < 2 || nz < 2 {
            return Err(ModelError::Invalid("grid must be at least 2x2".into()));
        }
        if !(extent_km > 0.0) {
            return Err(ModelError::Invalid("extent must be positive".into()));
        }
        if layers.is_empty() {
            return Err(ModelError::Invalid("layer table is empty".into()));
        }
        if layers[0].0 != 0.0 {
            return Err(ModelError::Invalid("first layer top must be 0".into()));
        }
        for pair in layers.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(ModelError::Invalid(format!(
                    "layer tops must strictly increase: {} after {}",
                    pair[1].0, pair[0].0
                )));
            }
        }
        if layers.iter().any(|&(_, v)| !(v > 0.0)) {
            return Err(ModelError::Invalid("velocities must be positive".into()));
        }
        let dx = extent_km / (nx - 1) as f64;
        let dz = extent_km / (nz - 1) as f64;
        let mut v = Vec::with_capacity(nx * nz);
        for iz in 0..nz {
            let depth = iz as f64 * dz;
            let vel = layers
                .iter()
                .rev()
                .find(|&&(top, _)| depth >= top)
                .map(|&(_, vel)| vel)
                .unwrap_or(layers[0].1);
            for _ in 0..nx {
                v.push(vel as f32);
            }
        }
        Ok(Self {
            nx,
            nz,
            dx,
            dz,
            ox: 0.0,
            oz: 0.0,
            v,
            v0: layers[0].1,
        })
    }

    /// The default 100x100 stand-in model over the standard domain.
    pub fn default_layered() -> Self {
        Self::layered(100, 100, DEFAULT_DOMAIN_KM, &DEFAULT_LAYERS)
            .expect("default layer table is valid")
    }

    /// Constant-velocity model (useful for oracle tests).
    pub fn homogeneous(nx: usize, nz: usize, extent_km: f64, velocity: f64) -> Self {
        Self::layered(nx, nz, extent_km, &[(0.0, velocity)])
            .expect("homogeneous layer table is valid")
    }

    pub fn from_grid(
        nx: usize,
        nz: usize,
        dx: f64,
        dz: f64,
        ox: f64,
        oz: f64,
        v: Vec<f32>,
        v0: f64,
    ) -> Result<Self, ModelError> {
        if nx < 2 || nz < 2 {
            return Err(ModelError::Invalid("grid must be at least 2x2".into()));
        }
        if v.len() != nx * nz {
            return Err(ModelError::Invalid(format!(
                "expected {} velocities, got {}",
                nx * nz,
                v.len()
            )));
        }
        if !(dx > 0.0 && dz > 0.0) {
            return Err(ModelError::Invalid("grid spacing must be positive".into()));
        }
        if v.iter().any(|&vv| !(vv > 0.0) || !vv.is_finite()) {
            return Err(ModelError::Invalid("velocities must be positive".into()));
        }
        if !(v0 > 0.0) {
            return Err(ModelError::Invalid("background velocity must be positive".into()));
        }
        Ok(Self {
            nx,
            nz,
            dx,
            dz,
            ox,
            oz,
            v,
            v0,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn ox(&self) -> f64 {
        self.ox
    }

    pub fn oz(&self) -> f64 {
        self.oz
    }

    pub fn velocities(&self) -> &[f32] {
        &self.v
    }

    /// Domain as `((x_min, x_max), (z_min, z_max))`.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.ox, self.ox + (self.nx - 1) as f64 * self.dx),
            (self.oz, self.oz + (self.nz - 1) as f64 * self.dz),
        )
    }

    /// Background squared slowness `1/v0^2`.
    pub fn m0(&self) -> f64 {
        1.0 / (self.v0 * self.v0)
    }

    pub fn node(&self, ix: usize, iz: usize) -> f64 {
        self.v[iz * self.nx + ix] as f64
    }

    pub fn min_velocity(&self) -> f64 {
        self.v.iter().cloned().fold(f32::INFINITY, f32::min) as f64
    }

    /// Bilinear velocity interpolation inside the domain.
    pub fn velocity_at(&self, x: f64, z: f64) -> Result<f64, ModelError> {
        let ((x0, x1), (z0, z1)) = self.domain();
        if !(x >= x0 && x <= x1 && z >= z0 && z <= z1) {
            return Err(ModelError::OutOfDomain { x, z });
        }
        let fx = (x - self.ox) / self.dx;
        let fz = (z - self.oz) / self.dz;
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iz = (fz.floor() as usize).min(self.nz - 2);
        let tx = fx - ix as f64;
        let tz = fz - iz as f64;
        let v00 = self.node(ix, iz);
        let v10 = self.node(ix + 1, iz);
        let v01 = self.node(ix, iz + 1);
        let v11 = self.node(ix + 1, iz + 1);
        // Constant cells stay exact (keeps dm identically zero in
        // homogeneous regions instead of picking up rounding noise).
        if v00 == v10 && v00 == v01 && v00 == v11 {
            return Ok(v00);
        }
        Ok(v00 * (1.0 - tx) * (1.0 - tz)
            + v10 * tx * (1.0 - tz)
            + v01 * (1.0 - tx) * tz
            + v11 * tx * tz)
    }

    /// Clamped lookup used when extending the medium into absorbing layers.
    pub fn velocity_clamped(&self, x: f64, z: f64) -> f64 {
        let ((x0, x1), (z0, z1)) = self.domain();
        self.velocity_at(x.clamp(x0, x1), z.clamp(z0, z1))
            .expect("clamped point is inside the domain")
    }

    /// Medium quantities for the physics loss at one collocation point.
    pub fn sample_medium(
        &self,
        x: f64,
        z: f64,
        s_x: f64,
        s_z: f64,
        omega: f64,
    ) -> Result<MediumPoint, ModelError> {
        let v = self.velocity_at(x, z)?;
        let m = 1.0 / (v * v);
        let dm = m - self.m0();
        let u0 = physics::background_wavefield(x, z, s_x, s_z, omega, self.m0())?;
        Ok(MediumPoint { m, dm, u0 })
    }

    /// Writes the "PNVM" format: magic, version u16, u32 nx, u32 nz,
    /// f64 dx, dz, ox, oz, v0, then nx*nz f32 velocities row-major
    /// (z-major outer), little-endian.
    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        use std::io::Write;
        w.write_all(MODEL_MAGIC)?;
        bin::write_u16(&mut w, MODEL_VERSION)?;
        bin::write_u32(&mut w, self.nx as u32)?;
        bin::write_u32(&mut w, self.nz as u32)?;
        bin::write_f64(&mut w, self.dx)?;
        bin::write_f64(&mut w, self.dz)?;
        bin::write_f64(&mut w, self.ox)?;
        bin::write_f64(&mut w, self.oz)?;
        bin::write_f64(&mut w, self.v0)?;
        for &vv in &self.v {
            bin::write_f32(&mut w, vv)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let mut r = BufReader::new(File::open(path)?);
        bin::read_magic(&mut r, MODEL_MAGIC)?;
        let version = bin::read_u16(&mut r)?;
        if version != MODEL_VERSION {
            return Err(ModelError::Invalid(format!(
                "unsupported model version {version}"
            )));
        }
        let nx = bin::read_u32(&mut r)? as usize;
        let nz = bin::read_u32(&mut r)? as usize;
        let dx = bin::read_f64(&mut r)?;
        let dz = bin::read_f64(&mut r)?;
        let ox = bin::read_f64(&mut r)?;
        let oz = bin::read_f64(&mut r)?;
        let v0 = bin::read_f64(&mut r)?;
        if nx == 0 || nz == 0 || nx.saturating_mul(nz) > 1 << 30 {
            return Err(ModelError::Invalid(format!("bad grid size {nx}x{nz}")));
        }
        let mut v = Vec::with_capacity(nx * nz);
        for _ in 0..nx * nz {
            v.push(bin::read_f32(&mut r)?);
        }
        bin::expect_eof(&mut r)?;
        Self::from_grid(nx, nz, dx, dz, ox, oz, v, v0)
    }
}
