//! Minimal complex Hermitian linear algebra for density-matrix checks.

use ndarray::Array2;
use num_complex::Complex64;

/// Cholesky factorization of a Hermitian matrix.  Returns the lower factor
/// L with A = L L†, or None if A is not positive definite.
pub fn cholesky(a: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return None;
    }
    let mut l = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let d = diag.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Positive semidefiniteness up to `tol`: A + tol·I must admit a Cholesky
/// factorization.
pub fn is_psd_within(a: &Array2<Complex64>, tol: f64) -> bool {
    let n = a.nrows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(tol, 0.0);
    }
    cholesky(&shifted).is_some()
}
