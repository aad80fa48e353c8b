//! Analytic background wavefield for a homogeneous medium and the
//! scattered-field PDE residual.
//!
//! The background field for angular frequency `omega` and constant squared
//! slowness `m0` is `(i/4) * H0^(2)(omega * sqrt(m0) * r)` with
//! `H0^(2) = J0 - i*Y0`. J0 and Y0 use the classic rational/polynomial
//! approximations split at x = 3 (small-x polynomial in (x/3)^2, large-x
//! amplitude/phase form), absolute error below 5e-7 on (0, 50].

use num_complex::Complex64;
use thiserror::Error;

use crate::network::EvalJet;

/// Default radius around the source inside which the background field is
/// treated as singular, km.
pub const DEFAULT_EXCLUSION_RADIUS_KM: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("bessel function argument {0} outside domain")]
    Domain(f64),
    #[error("field point within {radius} km of the source (r = {r} km)")]
    SourceSingularity { r: f64, radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Medium quantities at one collocation point: squared slowness, its
/// perturbation from the background, and the background wavefield value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumPoint {
    /// Squared slowness, s^2/km^2.
    pub m: f64,
    /// Squared-slowness perturbation `m - m0`, s^2/km^2.
    pub dm: f64,
    /// Complex background wavefield at this point.
    pub u0: Complex64,
}

/// Bessel function of the first kind, order zero.
///
/// Absolute error <= 5e-7 on [0, 50] versus the power-series/asymptotic
/// oracle used in the tests.
pub fn bessel_j0(x: f64) -> Result<f64, PhysicsError> {
    if !(x >= 0.0) {
        return Err(PhysicsError::Domain(x));
    }
    Ok(j0_raw(x))
}

/// Bessel function of the second kind, order zero.
///
/// The logarithmic singularity at zero makes x <= 0 a domain error.
pub fn bessel_y0(x: f64) -> Result<f64, PhysicsError> {
    if !(x > 0.0) {
        return Err(PhysicsError::Domain(x));
    }
    Ok(y0_raw(x))
}

/// Zero-order Hankel function of the second kind, `J0(x) - i*Y0(x)`.
pub fn hankel2_0(x: f64) -> Result<Complex64, PhysicsError> {
    if !(x > 0.0) {
        return Err(PhysicsError::Domain(x));
    }
    Ok(Complex64::new(j0_raw(x), -y0_raw(x)))
}

// Polynomial coefficients for |x| <= 3, argument t = (x/3)^2.
const J0_SMALL: [f64; 7] = [
    1.0,
    -2.249_999_7,
    1.265_620_8,
    -0.316_386_6,
    0.044_447_9,
    -0.003_944_4,
    0.000_210_0,
];

const Y0_SMALL: [f64; 7] = [
    0.367_466_91,
    0.605_593_66,
    -0.743_503_84,
    0.253_001_17,
    -0.042_612_14,
    0.004_279_16,
    -0.000_248_46,
];

// Amplitude/phase coefficients for x >= 3, argument t = 3/x.
const F0: [f64; 7] = [
    0.797_884_56,
    -0.000_000_77,
    -0.005_527_40,
    -0.000_095_12,
    0.001_372_37,
    -0.000_728_05,
    0.000_144_76,
];

const THETA0: [f64; 7] = [
    -0.785_398_16,
    -0.041_663_97,
    -0.000_039_54,
    0.002_625_73,
    -0.000_541_25,
    -0.000_293_33,
    0.000_135_58,
];

fn poly(t: f64, c: &[f64; 7]) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

fn j0_raw(x: f64) -> f64 {
    if x <= 3.0 {
        poly((x / 3.0) * (x / 3.0), &J0_SMALL)
    } else {
        let t = 3.0 / x;
        let f0 = poly(t, &F0);
        let theta = x + poly(t, &THETA0);
        f0 * theta.cos() / x.sqrt()
    }
}

fn y0_raw(x: f64) -> f64 {
    if x <= 3.0 {
        let t = (x / 3.0) * (x / 3.0);
        std::f64::consts::FRAC_2_PI * (x / 2.0).ln() * j0_raw(x) + poly(t, &Y0_SMALL)
    } else {
        let t = 3.0 / x;
        let f0 = poly(t, &F0);
        let theta = x + poly(t, &THETA0);
        f0 * theta.sin() / x.sqrt()
    }
}

/// Analytic background wavefield `(i/4) * H0^(2)(omega*sqrt(m0)*r)` for a
/// source at `(s_x, s_z)`, using the default exclusion radius.
pub fn background_wavefield(
    x: f64,
    z: f64,
    s_x: f64,
    s_z: f64,
    omega: f64,
    m0: f64,
) -> Result<Complex64, PhysicsError> {
    background_wavefield_with_exclusion(x, z, s_x, s_z, omega, m0, DEFAULT_EXCLUSION_RADIUS_KM)
}

/// Same as [`background_wavefield`] with an explicit exclusion radius.
pub fn background_wavefield_with_exclusion(
    x: f64,
    z: f64,
    s_x: f64,
    s_z: f64,
    omega: f64,
    m0: f64,
    exclusion_radius_km: f64,
) -> Result<Complex64, PhysicsError> {
    if !(omega > 0.0) {
        return Err(PhysicsError::InvalidParameter("omega must be positive"));
    }
    if !(m0 > 0.0) {
        return Err(PhysicsError::InvalidParameter("m0 must be positive"));
    }
    let r = (x - s_x).hypot(z - s_z);
    if r < exclusion_radius_km {
        return Err(PhysicsError::SourceSingularity {
            r,
            radius: exclusion_radius_km,
        });
    }
    let arg = omega * m0.sqrt() * r;
    // (i/4)(J0 - i*Y0) = Y0/4 + i*J0/4
    Ok(Complex64::new(0.25 * y0_raw(arg), 0.25 * j0_raw(arg)))
}

/// Scattered-field PDE residual
/// `omega^2*m*value + (d2dx2 + d2dz2) + omega^2*dm*u0`.
pub fn pde_residual(jet: &EvalJet, pt: &MediumPoint, omega: f64) -> Complex64 {
    let w2 = omega * omega;
    w2 * pt.m * jet.value + jet.d2dx2 + jet.d2dz2 + w2 * pt.dm * pt.u0
}

#[cfg(test)]
mod tests {
    use super::*;

    // Spot values frozen from the series/asymptotic oracle
    // (tests/special_functions.rs carries the dense sweep).
    const J0_5: f64 = -0.177_596_771_314_338_3;
    const Y0_1: f64 = 0.088_256_964_215_676_97;
    const Y0_2: f64 = 0.510_375_672_649_745_1;
    const J0_FIRST_ROOT: f64 = 2.404_825_557_695_773;

    #[test]
    fn j0_at_zero_is_one() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn j0_first_root() {
        assert!(bessel_j0(J0_FIRST_ROOT).unwrap().abs() <= 1e-6);
    }

    #[test]
    fn j0_spot_value() {
        assert!((bessel_j0(5.0).unwrap() - J0_5).abs() <= 5e-7);
    }

    #[test]
    fn j0_negative_is_domain_error() {
        assert!(matches!(bessel_j0(-1.0), Err(PhysicsError::Domain(_))));
    }

    #[test]
    fn y0_log_singularity_sign() {
        assert!(bessel_y0(1e-8).unwrap() < -10.0);
    }

    #[test]
    fn y0_spot_values() {
        assert!((bessel_y0(1.0).unwrap() - Y0_1).abs() <= 5e-7);
        assert!((bessel_y0(2.0).unwrap() - Y0_2).abs() <= 5e-7);
    }

    #[test]
    fn y0_nonpositive_is_domain_error() {
        assert!(matches!(bessel_y0(0.0), Err(PhysicsError::Domain(_))));
        assert!(matches!(bessel_y0(-2.0), Err(PhysicsError::Domain(_))));
    }

    #[test]
    fn hankel_identity() {
        for i in 1..200 {
            let x = 0.25 * i as f64;
            let h = hankel2_0(x).unwrap();
            assert_eq!(h.re, bessel_j0(x).unwrap());
            assert_eq!(h.im, -bessel_y0(x).unwrap());
        }
    }

    #[test]
    fn background_radial_symmetry() {
        let (sx, sz) = (1.0, 0.025);
        let omega = 4.0 * std::f64::consts::PI;
        let m0 = 1.0 / (1.5 * 1.5);
        let a = background_wavefield(sx + 0.3, sz + 0.7, sx, sz, omega, m0).unwrap();
        let b = background_wavefield(sx - 0.3, sz - 0.7, sx, sz, omega, m0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn background_reciprocity() {
        let omega = 4.0 * std::f64::consts::PI;
        let m0 = 1.0 / (1.5 * 1.5);
        let a = background_wavefield(1.5, 1.0, 0.4, 0.025, omega, m0).unwrap();
        let b = background_wavefield(0.4, 0.025, 1.5, 1.0, omega, m0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn background_spot_value() {
        // omega = 4*pi (2 Hz), m0 = (1/1.5)^2, source (1.0, 0.025), point (1.5, 1.0);
        // frozen from the Bessel oracle at arg = 9.17956911467409.
        let omega = 4.0 * std::f64::consts::PI;
        let m0 = 1.0 / (1.5 * 1.5);
        let u0 = background_wavefield(1.5, 1.0, 1.0, 0.025, omega, m0).unwrap();
        assert!((u0.re - 0.056_874_120_388_472_05).abs() <= 2e-7);
        assert!((u0.im - -0.033_068_332_099_484_045).abs() <= 2e-7);
    }

    #[test]
    fn background_exclusion_radius() {
        let omega = 4.0 * std::f64::consts::PI;
        let m0 = 1.0 / (1.5 * 1.5);
        let err = background_wavefield(1.0, 0.0255, 1.0, 0.025, omega, m0);
        assert!(matches!(
            err,
            Err(PhysicsError::SourceSingularity { .. })
        ));
    }

    #[test]
    fn background_satisfies_helmholtz_away_from_source() {
        // 5-point FD Laplacian on a fine local stencil vs omega^2*m0*u0.
        let omega = 4.0 * std::f64::consts::PI;
        let m0 = 1.0 / (1.5 * 1.5);
        let (sx, sz) = (1.0, 0.025);
        let h = 1e-3;
        let eval = |x: f64, z: f64| background_wavefield(x, z, sx, sz, omega, m0).unwrap();
        for &(x, z) in &[(1.7, 0.9), (0.3, 1.4), (2.0, 2.0), (1.0, 0.6)] {
            let c = eval(x, z);
            let lap = (eval(x + h, z) + eval(x - h, z) + eval(x, z + h) + eval(x, z - h)
                - 4.0 * c)
                / (h * h);
            let term = omega * omega * m0 * c;
            assert!(
                (term + lap).norm() <= 1e-3 * term.norm(),
                "residual too large at ({x}, {z})"
            );
        }
    }

    #[test]
    fn residual_trivial_cases() {
        let zero_jet = EvalJet {
            value: Complex64::new(0.0, 0.0),
            d2dx2: Complex64::new(0.0, 0.0),
            d2dz2: Complex64::new(0.0, 0.0),
        };
        let pt = MediumPoint {
            m: 0.7,
            dm: 0.0,
            u0: Complex64::new(0.3, -0.2),
        };
        assert_eq!(pde_residual(&zero_jet, &pt, 3.0), Complex64::new(0.0, 0.0));

        let unit_jet = EvalJet {
            value: Complex64::new(1.0, 0.0),
            d2dx2: Complex64::new(0.0, 0.0),
            d2dz2: Complex64::new(0.0, 0.0),
        };
        let pt1 = MediumPoint {
            m: 1.0,
            dm: 0.0,
            u0: Complex64::new(9.0, 9.0),
        };
        assert_eq!(pde_residual(&unit_jet, &pt1, 1.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn residual_is_sum_of_terms() {
        let jet = EvalJet {
            value: Complex64::new(0.4, -1.1),
            d2dx2: Complex64::new(2.0, 0.3),
            d2dz2: Complex64::new(-0.7, 0.9),
        };
        let pt = MediumPoint {
            m: 0.44,
            dm: -0.06,
            u0: Complex64::new(0.12, 0.08),
        };
        let omega = 8.0 * std::f64::consts::PI;
        let w2 = omega * omega;
        let expect = w2 * pt.m * jet.value + jet.d2dx2 + jet.d2dz2 + w2 * pt.dm * pt.u0;
        assert_eq!(pde_residual(&jet, &pt, omega), expect);
    }

    #[test]
    fn residual_linear_in_jet() {
        let jet = EvalJet {
            value: Complex64::new(0.4, -1.1),
            d2dx2: Complex64::new(2.0, 0.3),
            d2dz2: Complex64::new(-0.7, 0.9),
        };
        let scaled = EvalJet {
            value: 2.0 * jet.value,
            d2dx2: 2.0 * jet.d2dx2,
            d2dz2: 2.0 * jet.d2dz2,
        };
        let hom = MediumPoint {
            m: 0.44,
            dm: 0.0,
            u0: Complex64::new(0.0, 0.0),
        };
        let omega = 2.0;
        let r1 = pde_residual(&jet, &hom, omega);
        let r2 = pde_residual(&scaled, &hom, omega);
        assert!((r2 - 2.0 * r1).norm() <= 1e-14 * r1.norm());
    }
}
