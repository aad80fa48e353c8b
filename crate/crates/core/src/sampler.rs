//! Randomized collocation batches `(x, z, s_x)` with precomputed medium
//! quantities for the physics loss.
//!
//! Points are uniform over the model domain, sources uniform over a lateral
//! surface range at fixed depth; draws violating the source exclusion radius
//! are rejected and redrawn. Batches are deterministic for a fixed seed and
//! regenerable from the seed recorded in them.

use num_complex::Complex64;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ModelError, VelocityModel};
use crate::physics::DEFAULT_EXCLUSION_RADIUS_KM;
use crate::DEFAULT_SOURCE_DEPTH_KM;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("source x-range ({0}, {1}) not inside the model domain")]
    SourceRangeOutsideDomain(f64, f64),
    #[error("exclusion radius {0} km exceeds the domain diagonal; rejection sampling cannot terminate")]
    ExclusionTooLarge(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where sources sit and how close collocation points may get to them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub source_depth_km: f64,
    pub source_x_range: (f64, f64),
    pub exclusion_radius_km: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            source_depth_km: DEFAULT_SOURCE_DEPTH_KM,
            // Inset from the lateral edges to avoid boundary effects.
            source_x_range: (0.1, 2.4),
            exclusion_radius_km: DEFAULT_EXCLUSION_RADIUS_KM,
        }
    }
}

/// A fixed training set: coordinates, source positions and the
/// per-sample medium quantities entering the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub s_x: Vec<f64>,
    /// Fixed source depth shared by all samples, km.
    pub s_z: f64,
    /// Squared slowness per sample.
    pub m: Vec<f64>,
    /// Squared-slowness perturbation per sample.
    pub dm: Vec<f64>,
    /// Background wavefield per sample.
    pub u0: Vec<Complex64>,
    /// Angular frequency the batch was built for, rad/s.
    pub omega: f64,
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Draws a seeded batch of `n` collocation points.
pub fn draw_samples(
    model: &VelocityModel,
    n: usize,
    omega: f64,
    source_depth_km: f64,
    source_x_range: (f64, f64),
    exclusion_radius_km: f64,
    seed: u64,
) -> Result<SampleBatch, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptyBatch);
    }
    let ((x0, x1), (z0, z1)) = model.domain();
    if !(source_x_range.0 >= x0
        && source_x_range.1 <= x1
        && source_x_range.0 <= source_x_range.1)
    {
        return Err(SampleError::SourceRangeOutsideDomain(
            source_x_range.0,
            source_x_range.1,
        ));
    }
    let diagonal = (x1 - x0).hypot(z1 - z0);
    if exclusion_radius_km > diagonal {
        return Err(SampleError::ExclusionTooLarge(exclusion_radius_km));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = SampleBatch {
        x: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        s_x: Vec::with_capacity(n),
        s_z: source_depth_km,
        m: Vec::with_capacity(n),
        dm: Vec::with_capacity(n),
        u0: Vec::with_capacity(n),
        omega,
        seed,
    };
    for _ in 0..n {
        let (x, z, sx) = loop {
            let x = rng.random_range(x0..x1);
            let z = rng.random_range(z0..z1);
            let sx = if source_x_range.0 < source_x_range.1 {
                rng.random_range(source_x_range.0..source_x_range.1)
            } else {
                source_x_range.0
            };
            if (x - sx).hypot(z - source_depth_km) >= exclusion_radius_km {
                break (x, z, sx);
            }
        };
        let pt = model.sample_medium(x, z, sx, source_depth_km, omega)?;
        batch.x.push(x);
        batch.z.push(z);
        batch.s_x.push(sx);
        batch.m.push(pt.m);
        batch.dm.push(pt.dm);
        batch.u0.push(pt.u0);
    }
    Ok(batch)
}

/// Convenience wrapper taking a [`SamplingConfig`].
pub fn draw_samples_with(
    model: &VelocityModel,
    n: usize,
    omega: f64,
    cfg: &SamplingConfig,
    seed: u64,
) -> Result<SampleBatch, SampleError> {
    draw_samples(
        model,
        n,
        omega,
        cfg.source_depth_km,
        cfg.source_x_range,
        cfg.exclusion_radius_km,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::background_wavefield;

    const OMEGA_2HZ: f64 = 4.0 * std::f64::consts::PI;

    #[test]
    fn fixed_seed_reproduces_batch() {
        let model = VelocityModel::default_layered();
        let cfg = SamplingConfig::default();
        let a = draw_samples_with(&model, 2000, OMEGA_2HZ, &cfg, 99).unwrap();
        let b = draw_samples_with(&model, 2000, OMEGA_2HZ, &cfg, 99).unwrap();
        assert_eq!(a, b);
        let c = draw_samples_with(&model, 2000, OMEGA_2HZ, &cfg, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn homogeneous_model_gives_zero_dm() {
        let model = VelocityModel::homogeneous(50, 50, 2.5, 1.5);
        let batch =
            draw_samples_with(&model, 500, OMEGA_2HZ, &SamplingConfig::default(), 1).unwrap();
        assert!(batch.dm.iter().all(|&dm| dm == 0.0));
    }

    #[test]
    fn all_points_respect_exclusion_radius() {
        let model = VelocityModel::default_layered();
        let cfg = SamplingConfig {
            exclusion_radius_km: 0.35,
            ..SamplingConfig::default()
        };
        let batch = draw_samples_with(&model, 100_000, OMEGA_2HZ, &cfg, 7).unwrap();
        for i in 0..batch.len() {
            let r = (batch.x[i] - batch.s_x[i]).hypot(batch.z[i] - batch.s_z);
            assert!(r >= cfg.exclusion_radius_km);
        }
    }

    #[test]
    fn quadrant_coverage_is_uniform() {
        let model = VelocityModel::default_layered();
        let batch =
            draw_samples_with(&model, 100_000, OMEGA_2HZ, &SamplingConfig::default(), 3).unwrap();
        let (mid_x, mid_z) = (1.25, 1.25);
        let mut counts = [0usize; 4];
        for i in 0..batch.len() {
            let q = (batch.x[i] >= mid_x) as usize + 2 * (batch.z[i] >= mid_z) as usize;
            counts[q] += 1;
        }
        for &c in &counts {
            let frac = c as f64 / batch.len() as f64;
            assert!((frac - 0.25).abs() <= 0.02, "quadrant fraction {frac}");
        }
    }

    #[test]
    fn u0_matches_recomputation_bitwise() {
        let model = VelocityModel::default_layered();
        let batch =
            draw_samples_with(&model, 200, OMEGA_2HZ, &SamplingConfig::default(), 11).unwrap();
        for i in 0..batch.len() {
            let u0 = background_wavefield(
                batch.x[i],
                batch.z[i],
                batch.s_x[i],
                batch.s_z,
                batch.omega,
                model.m0(),
            )
            .unwrap();
            assert_eq!(batch.u0[i], u0);
        }
    }

    #[test]
    fn oversized_exclusion_radius_is_error() {
        let model = VelocityModel::default_layered();
        let cfg = SamplingConfig {
            exclusion_radius_km: 10.0,
            ..SamplingConfig::default()
        };
        assert!(matches!(
            draw_samples_with(&model, 10, OMEGA_2HZ, &cfg, 0),
            Err(SampleError::ExclusionTooLarge(_))
        ));
    }

    #[test]
    fn empty_batch_is_error() {
        let model = VelocityModel::default_layered();
        assert!(matches!(
            draw_samples_with(&model, 0, OMEGA_2HZ, &SamplingConfig::default(), 0),
            Err(SampleError::EmptyBatch)
        ));
    }
}
