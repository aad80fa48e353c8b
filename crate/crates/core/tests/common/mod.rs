//! Shared test oracles, independent of the library's implementation paths.

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Power-series J0 for small arguments: `sum_k (-1)^k (x^2/4)^k / (k!)^2`.
fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// Series Y0 for small arguments:
/// `(2/pi) [ (ln(x/2) + gamma) J0(x) + sum_k (-1)^(k+1) H_k (x^2/4)^k / (k!)^2 ]`.
fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0; // q^k / (k!)^2
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        harmonic += 1.0 / k as f64;
        let contrib = sign * harmonic * term;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
        sign = -sign;
    }
    std::f64::consts::FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
}

/// Hankel asymptotic amplitude/phase sums, truncated at the smallest term.
///
/// `P = 1 - A2/x^2 + A4/x^4 - ...`, `Q = -A1/x + A3/x^3 - ...` with
/// `A_k = ((2k-1)!!)^2 / (k! 8^k)`.
fn asymptotic_pq(x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0; // A_k / x^k, starting at k = 0
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            a *= (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf * x);
        }
        if a.abs() > prev {
            break; // divergent tail of the asymptotic series
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q -= sign * a;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

fn bessel_asymptotic(x: f64) -> (f64, f64) {
    let (p, q) = asymptotic_pq(x);
    let chi = x - std::f64::consts::FRAC_PI_4;
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let (sin_chi, cos_chi) = chi.sin_cos();
    let j0 = amp * (p * cos_chi - q * sin_chi);
    let y0 = amp * (p * sin_chi + q * cos_chi);
    (j0, y0)
}

/// Oracle J0: power series below 10, asymptotic expansion above.
pub fn oracle_j0(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x <= 10.0 {
        j0_series(x)
    } else {
        bessel_asymptotic(x).0
    }
}

/// Oracle Y0.
pub fn oracle_y0(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 10.0 {
        y0_series(x)
    } else {
        bessel_asymptotic(x).1
    }
}

/// Analytic background wavefield via the oracle Bessel routines.
pub fn oracle_background(
    x: f64,
    z: f64,
    s_x: f64,
    s_z: f64,
    omega: f64,
    m0: f64,
) -> num_complex::Complex64 {
    let r = (x - s_x).hypot(z - s_z);
    let arg = omega * m0.sqrt() * r;
    num_complex::Complex64::new(0.25 * oracle_y0(arg), 0.25 * oracle_j0(arg))
}
