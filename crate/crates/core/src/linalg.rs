//! Dense symmetric linear algebra on top of `faer`.
//!
//! Public types stay in `nalgebra`; nalgebra storage is column-major and
//! contiguous, so factorizations borrow it through a zero-copy `faer` view.

use faer::prelude::Solve;
use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};

/// Eigenvalues of magnitude at most this are treated as zero curvature.
pub const CURVATURE_FLOOR: f64 = 1e-9;

/// Residual tolerance `‖Av − λv‖ ≤ tol·max(1, ‖A‖)` expected from [`symmetric_eigen`].
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

fn view(a: &DMatrix<f64>) -> MatRef<'_, f64> {
    MatRef::from_column_major_slice(a.as_slice(), a.nrows(), a.ncols())
}

/// Replaces `a` by `(a + aᵀ)/2`.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
}

/// `max |a_ij − a_ji|`, without allocating.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    llt: faer::linalg::solvers::Llt<f64>,
}

impl Cholesky {
    /// Factorizes `a` (lower triangle read). `None` if `a` is not numerically
    /// positive definite.
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        debug_assert_eq!(a.nrows(), a.ncols());
        view(a).llt(Side::Lower).ok().map(|llt| Self { llt })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let n = rhs.len();
        let b = MatRef::from_column_major_slice(rhs.as_slice(), n, 1);
        let x: Mat<f64> = self.llt.solve(b);
        DVector::from_fn(n, |i, _| x[(i, 0)])
    }
}

/// Full eigendecomposition of a symmetric matrix. Eigenvalues ascend.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Unit eigenvector of the smallest eigenvalue.
    pub fn min_vector(&self) -> DVector<f64> {
        self.eigenvectors.column(0).into_owned()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

/// Eigendecomposition of the symmetric matrix `a` (lower triangle read).
pub fn symmetric_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert!(
        n > 0 && n == a.ncols(),
        "symmetric_eigen needs a nonempty square matrix"
    );
    let evd = view(a)
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigensolver did not converge");
    let s = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues = DVector::from_fn(n, |i, _| s[i]);
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    SymmetricEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    assert!(a.nrows() > 0 && a.nrows() == a.ncols());
    view(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigensolver did not converge")
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(a)[0]
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let ev = symmetric_eigenvalues(a);
    ev[0].abs().max(ev[ev.len() - 1].abs())
}
