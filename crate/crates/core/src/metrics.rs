//! Grid-to-grid comparison metrics: relative L2, max abs difference and
//! normalized zero-lag cross-correlation, for the real, imaginary and
//! complex views of two wavefields.

use num_complex::Complex64;

use crate::refsolver::ComplexGrid;

/// Metrics of one view (real, imaginary or complex) of `a` against the
/// reference `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewMetrics {
    /// `||a - b|| / ||b||`; defined as 0 when both fields are zero.
    pub rel_l2: f64,
    pub max_abs_diff: f64,
    /// `<a, b> / (||a|| ||b||)`; scale-blind, 1 for `a = c*b` with `c > 0`.
    pub correlation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridComparison {
    pub real: ViewMetrics,
    pub imag: ViewMetrics,
    pub complex: ViewMetrics,
}

fn real_view_metrics(a: impl Iterator<Item = f64> + Clone, b: impl Iterator<Item = f64> + Clone) -> ViewMetrics {
    let mut diff2 = 0.0;
    let mut bnorm2 = 0.0;
    let mut anorm2 = 0.0;
    let mut dot = 0.0;
    let mut max_abs = 0.0f64;
    for (x, y) in a.zip(b) {
        let d = x - y;
        diff2 += d * d;
        bnorm2 += y * y;
        anorm2 += x * x;
        dot += x * y;
        max_abs = max_abs.max(d.abs());
    }
    ViewMetrics {
        rel_l2: if bnorm2 > 0.0 {
            (diff2 / bnorm2).sqrt()
        } else if diff2 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        },
        max_abs_diff: max_abs,
        correlation: if anorm2 > 0.0 && bnorm2 > 0.0 {
            dot / (anorm2.sqrt() * bnorm2.sqrt())
        } else {
            0.0
        },
    }
}

fn complex_view_metrics(a: &[Complex64], b: &[Complex64]) -> ViewMetrics {
    let mut diff2 = 0.0;
    let mut bnorm2 = 0.0;
    let mut anorm2 = 0.0;
    let mut dot = Complex64::new(0.0, 0.0);
    let mut max_abs = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        diff2 += d.norm_sqr();
        bnorm2 += y.norm_sqr();
        anorm2 += x.norm_sqr();
        dot += x * y.conj();
        max_abs = max_abs.max(d.norm());
    }
    ViewMetrics {
        rel_l2: if bnorm2 > 0.0 {
            (diff2 / bnorm2).sqrt()
        } else if diff2 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        },
        max_abs_diff: max_abs,
        correlation: if anorm2 > 0.0 && bnorm2 > 0.0 {
            dot.re / (anorm2.sqrt() * bnorm2.sqrt())
        } else {
            0.0
        },
    }
}

/// Compares two equal-length complex fields.
pub fn compare_values(a: &[Complex64], b: &[Complex64]) -> GridComparison {
    assert_eq!(a.len(), b.len());
    GridComparison {
        real: real_view_metrics(a.iter().map(|v| v.re), b.iter().map(|v| v.re)),
        imag: real_view_metrics(a.iter().map(|v| v.im), b.iter().map(|v| v.im)),
        complex: complex_view_metrics(a, b),
    }
}

/// Compares two grids of identical geometry.
pub fn compare_grids(a: &ComplexGrid, b: &ComplexGrid) -> Result<GridComparison, String> {
    if !a.same_geometry(b) {
        return Err(format!(
            "grid geometry mismatch: {}x{} ({}, {}) vs {}x{} ({}, {})",
            a.nx, a.nz, a.dx, a.dz, b.nx, b.nz, b.dx, b.dz
        ));
    }
    Ok(compare_values(&a.values, &b.values))
}

/// Element-wise difference `a - b` as a grid (geometry of `a`).
pub fn difference_grid(a: &ComplexGrid, b: &ComplexGrid) -> Result<ComplexGrid, String> {
    if !a.same_geometry(b) {
        return Err("grid geometry mismatch".into());
    }
    let mut out = a.clone();
    for (v, w) in out.values.iter_mut().zip(&b.values) {
        *v -= w;
    }
    Ok(out)
}
