//! Dense accuracy sweep of the Bessel implementations against the
//! independent series/asymptotic oracle.

mod common;

use common::{oracle_background, oracle_j0, oracle_y0};
use pinnup_core::physics::{background_wavefield, bessel_j0, bessel_y0, hankel2_0};

#[test]
fn oracle_matches_reference_spot_values() {
    // Frozen from an independent reference implementation; these pin the
    // oracle itself before it is used to judge the production code.
    assert!((oracle_j0(5.0) - -0.177_596_771_314_338_3).abs() < 1e-12);
    assert!((oracle_y0(1.0) - 0.088_256_964_215_676_97).abs() < 1e-12);
    assert!((oracle_y0(2.0) - 0.510_375_672_649_745_1).abs() < 1e-12);
    assert!((oracle_j0(50.0) - 0.055_812_327_669_252_086).abs() < 1e-10);
    assert!((oracle_y0(50.0) - -0.098_064_995_470_076_92).abs() < 1e-10);
    assert!(oracle_j0(0.0) == 1.0);
}

#[test]
fn j0_sweep_within_5e7() {
    let mut worst = 0.0f64;
    for i in 1..=10_000 {
        let x = 50.0 * i as f64 / 10_000.0;
        let err = (bessel_j0(x).unwrap() - oracle_j0(x)).abs();
        worst = worst.max(err);
    }
    assert!(worst <= 5e-7, "worst J0 error {worst:.3e}");
}

#[test]
fn y0_sweep_within_5e7() {
    let mut worst = 0.0f64;
    for i in 1..=10_000 {
        let x = 50.0 * i as f64 / 10_000.0;
        let err = (bessel_y0(x).unwrap() - oracle_y0(x)).abs();
        worst = worst.max(err);
    }
    assert!(worst <= 5e-7, "worst Y0 error {worst:.3e}");
}

#[test]
fn hankel_assembles_both_parts() {
    for i in 1..=500 {
        let x = 0.1 * i as f64;
        let h = hankel2_0(x).unwrap();
        let expect_re = oracle_j0(x);
        let expect_im = -oracle_y0(x);
        assert!((h.re - expect_re).abs() <= 5e-7);
        assert!((h.im - expect_im).abs() <= 5e-7);
    }
}

#[test]
fn background_matches_oracle_composition() {
    let omega = 4.0 * std::f64::consts::PI;
    let m0 = 1.0 / (1.5 * 1.5);
    for &(x, z, sx) in &[
        (1.5, 1.0, 1.0),
        (0.2, 2.3, 0.5),
        (2.4, 0.3, 1.7),
        (0.9, 1.35, 2.2),
    ] {
        let got = background_wavefield(x, z, sx, 0.025, omega, m0).unwrap();
        let want = oracle_background(x, z, sx, 0.025, omega, m0);
        assert!((got - want).norm() <= 1e-6, "at ({x}, {z}, {sx})");
    }
}
