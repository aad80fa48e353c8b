//! Reference-solver checks against the analytic homogeneous wavefield.

mod common;

use common::oracle_background;
use num_complex::Complex64;
use pinnup_core::refsolver::{
    solve_point_source_homogeneous, solve_scattered, GridSpec, PMLConfig,
};
use pinnup_core::VelocityModel;

const OMEGA_2HZ: f64 = 4.0 * std::f64::consts::PI;
const M0: f64 = 1.0 / (1.5 * 1.5);

/// Relative L2 error of the FD full-field solution against the analytic
/// field, restricted to nodes at least `margin` km from the source and the
/// domain edges.
fn interior_error(grid: &pinnup_core::ComplexGrid, sx: f64, sz: f64, margin: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let (x1, z1) = (
        grid.ox + (grid.nx - 1) as f64 * grid.dx,
        grid.oz + (grid.nz - 1) as f64 * grid.dz,
    );
    for iz in 0..grid.nz {
        for ix in 0..grid.nx {
            let (x, z) = (grid.x_of(ix), grid.z_of(iz));
            if (x - sx).hypot(z - sz) < margin {
                continue;
            }
            if x - grid.ox < margin || x1 - x < margin || z - grid.oz < margin || z1 - z < margin
            {
                continue;
            }
            let exact = oracle_background(x, z, sx, sz, OMEGA_2HZ, M0);
            let d = grid.at(ix, iz) - exact;
            num += d.norm_sqr();
            den += exact.norm_sqr();
        }
    }
    assert!(den > 0.0);
    (num / den).sqrt()
}

#[test]
fn full_field_matches_analytic_solution() {
    // 101 nodes over 2.5 km at 2 Hz: ~15 points per wavelength. The
    // discretization error alone sits around 2-3%; sign conventions being
    // wrong would blow this up to O(1).
    let spec = GridSpec::square(101, 2.5);
    let pml = PMLConfig::with_thickness(20);
    let (sx, sz) = (1.25, 1.25);
    let grid = solve_point_source_homogeneous(M0, OMEGA_2HZ, sx, sz, &spec, &pml).unwrap();
    let err = interior_error(&grid, sx, sz, 0.5);
    assert!(
        err <= 0.05,
        "relative interior error {err:.4} (conventions or PML broken)"
    );
}

#[test]
fn pml_reflections_stay_below_two_percent() {
    // Same interior grid with the default PML versus a much deeper one on an
    // enlarged domain: the difference isolates the boundary treatment.
    let n = 101;
    let spec = GridSpec::square(n, 2.5);
    let (sx, sz) = (1.25, 1.25);
    let default_run =
        solve_point_source_homogeneous(M0, OMEGA_2HZ, sx, sz, &spec, &PMLConfig::default())
            .unwrap();
    let reference =
        solve_point_source_homogeneous(M0, OMEGA_2HZ, sx, sz, &spec, &PMLConfig::with_thickness(100))
            .unwrap();
    let mut num = 0.0;
    let mut den = 0.0;
    for iz in 0..n {
        for ix in 0..n {
            let d = default_run.at(ix, iz) - reference.at(ix, iz);
            num += d.norm_sqr();
            den += reference.at(ix, iz).norm_sqr();
        }
    }
    let rel = (num / den).sqrt();
    assert!(rel <= 0.02, "boundary artifact level {rel:.4}");
}

#[test]
fn scattered_field_decays_into_top_homogeneous_layer() {
    // Physical sanity on the default layered model: the scattered field is
    // finite, nonzero, and reproducible.
    let model = VelocityModel::default_layered();
    let spec = GridSpec::covering(&model, 100);
    let a = solve_scattered(&model, OMEGA_2HZ, 1.0, 0.025, &spec, &PMLConfig::default()).unwrap();
    let b = solve_scattered(&model, OMEGA_2HZ, 1.0, 0.025, &spec, &PMLConfig::default()).unwrap();
    assert_eq!(a.values, b.values);
    let max = a.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(max.is_finite() && max > 1e-4, "max |dU| = {max}");
}
