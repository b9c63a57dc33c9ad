//! Small self-contained linear algebra kernels: dense symmetric eigen
//! decomposition, LU, a CSR matrix, and an envelope Cholesky factorization.

mod cholesky;
mod dense;
mod sparse;

pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use dense::{determinant, invert, symmetric_eigen, DenseMatrix, SymmetricEigen};
pub use sparse::CsrMatrix;

pub(crate) fn dot<T: crate::Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm<T: crate::Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y -= alpha * x`
pub(crate) fn axpy_neg<T: crate::Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}
