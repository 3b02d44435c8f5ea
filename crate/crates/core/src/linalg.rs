//! Thin bridge between `ndarray` storage and `faer` dense kernels.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn to_faer(a: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `A A†` for a row-major `n × m` factor.
pub(crate) fn gram(a: &Array2<Complex64>) -> Array2<Complex64> {
    let fa = to_faer(a);
    let n = a.nrows();
    let mut out = Mat::<Complex64>::zeros(n, n);
    matmul(
        out.as_mut(),
        Accum::Replace,
        fa.as_ref(),
        fa.adjoint(),
        Complex64::new(1.0, 0.0),
        Par::rayon(0),
    );
    Array2::from_shape_fn((n, n), |(i, j)| out[(i, j)])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let fa = to_faer(a);
    let mut ev = fa
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Metric(format!("eigenvalue decomposition failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
