//! Banded complex LU with partial pivoting.
//!
//! Row-major band storage: row `i` holds columns `i - kl ..= i + ku + kl`;
//! the extra `kl` upper diagonals absorb fill-in from row swaps.

use num_complex::Complex64;

use super::SolveError;

/// Square complex matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Working width `2*kl + ku + 1` per row.
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // Column j sits at offset j - (i - kl) within row i's storage.
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.slot(i, j)]
    }

    /// Sets an entry; panics outside the declared band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku && i < self.n && j < self.n,
            "({i}, {j}) outside band kl={}, ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// `y = A x` over the declared band (fill-in columns are zero before
    /// factorization, so this is exact for a freshly assembled matrix).
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku + self.kl).min(self.n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.data[i * self.width..(i + 1) * self.width];
            for j in lo..=hi {
                acc += row[j + self.kl - i] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

/// Solves `A x = b` by banded LU with partial pivoting, consuming the matrix.
///
/// Pivots smaller than `1e-14` of the matrix norm raise
/// [`SolveError::SingularMatrix`].
pub fn banded_lu_solve(mut a: BandMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>, SolveError> {
    if rhs.len() != a.n {
        return Err(SolveError::Shape(format!(
            "matrix order {} vs rhs length {}",
            a.n,
            rhs.len()
        )));
    }
    let n = a.n;
    let (kl, ku) = (a.kl, a.ku);
    let width = a.width;
    let tiny = 1e-14 * a.max_abs();
    if !(tiny > 0.0) {
        return Err(SolveError::SingularMatrix { column: 0 });
    }

    let mut x = rhs.to_vec();
    // In-place factorization fused with forward substitution; row swaps are
    // applied to both the band storage and the right-hand side.
    for k in 0..n {
        let rmax = (k + kl).min(n - 1);
        let mut piv_row = k;
        let mut piv_mag = a.data[a.slot(k, k)].norm();
        for r in k + 1..=rmax {
            let mag = a.data[a.slot(r, k)].norm();
            if mag > piv_mag {
                piv_mag = mag;
                piv_row = r;
            }
        }
        if piv_mag < tiny {
            return Err(SolveError::SingularMatrix { column: k });
        }
        let jmax = (k + ku + kl).min(n - 1);
        if piv_row != k {
            for j in k..=jmax {
                let sk = k * width + (j + kl - k);
                let sp = piv_row * width + (j + kl - piv_row);
                a.data.swap(sk, sp);
            }
            x.swap(k, piv_row);
        }
        let piv = a.data[a.slot(k, k)];
        let xk = x[k];
        for r in k + 1..=rmax {
            let factor = a.data[a.slot(r, k)] / piv;
            if factor.norm() == 0.0 {
                continue;
            }
            // Row r and row k overlap on columns k..=jmax; their storage
            // offsets differ by a constant shift, so walk both slices.
            let off_r = r * width + (k + kl - r);
            let off_k = k * width + (k + kl - k);
            let len = jmax - k + 1;
            for t in 1..len {
                let upd = factor * a.data[off_k + t];
                a.data[off_r + t] -= upd;
            }
            a.data[off_r] = Complex64::new(0.0, 0.0);
            x[r] -= factor * xk;
        }
    }

    // Back substitution on the upper factor (bandwidth ku + kl after swaps).
    for k in (0..n).rev() {
        let jmax = (k + ku + kl).min(n - 1);
        let mut acc = x[k];
        for j in k + 1..=jmax {
            acc -= a.data[a.slot(k, j)] * x[j];
        }
        x[k] = acc / a.data[a.slot(k, k)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_returns_rhs() {
        let n = 12;
        let mut a = BandMatrix::new(n, 2, 2);
        for i in 0..n {
            a.set(i, i, c(1.0, 0.0));
        }
        let b: Vec<Complex64> = (0..n).map(|i| c(i as f64, -(i as f64))).collect();
        let x = banded_lu_solve(a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_hand_elimination() {
        // [[2,1],[1,2]] x = [3,3]  =>  x = [1,1]
        let mut a = BandMatrix::new(2, 1, 1);
        a.set(0, 0, c(2.0, 0.0));
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        a.set(1, 1, c(2.0, 0.0));
        let x = banded_lu_solve(a, &[c(3.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_diagonally_dominant_band_residual() {
        let n = 200;
        let (kl, ku) = (5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut a = BandMatrix::new(n, kl, ku);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            let mut offdiag = 0.0;
            for j in lo..=hi {
                if j != i {
                    let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    offdiag += v.norm();
                    a.set(i, j, v);
                }
            }
            a.set(i, i, c(offdiag + 1.0, rng.random_range(-0.5..0.5)));
        }
        let b: Vec<Complex64> = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a0 = a.clone();
        let x = banded_lu_solve(a, &b).unwrap();
        let ax = a0.matvec(&x);
        let num: f64 = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den <= 1e-10, "residual {}", num / den);
    }

    #[test]
    fn pivoting_handles_zero_leading_diagonal() {
        // Requires a row swap at the first column.
        let mut a = BandMatrix::new(2, 1, 1);
        a.set(0, 0, c(0.0, 0.0));
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        a.set(1, 1, c(1.0, 0.0));
        let x = banded_lu_solve(a, &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        // x0 + x1 = 3, x1 = 2.
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_error() {
        let mut a = BandMatrix::new(3, 1, 1);
        a.set(0, 0, c(1.0, 0.0));
        a.set(1, 1, c(1.0, 0.0));
        // Row 2 left entirely zero.
        let b = vec![c(1.0, 0.0); 3];
        assert!(matches!(
            banded_lu_solve(a, &b),
            Err(SolveError::SingularMatrix { .. })
        ));
    }
}
