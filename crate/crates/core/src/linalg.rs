//! Dense symmetric-definite pencils and kernel deflation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Number of eigenvalues below `KERNEL_TOLERANCE * max|eigenvalue|`.
pub fn numerical_kernel_dim(m: &DMatrix<f64>) -> usize {
    let ev = sorted_eigenvalues(m);
    let top = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top == 0.0 {
        return ev.len();
    }
    ev.iter().filter(|&&l| l < KERNEL_TOLERANCE * top).count()
}

/// Largest eigenpair of `a v = lambda b v` with `b` positive definite.
///
/// Reduces to the standard problem `L^{-1} a L^{-T} y = lambda y` through the
/// Cholesky factor `b = L L^T`; the returned vector is `v = L^{-T} y`,
/// normalized so that `v^T b v = 1`.
pub fn pencil_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if a.nrows() == 0 {
        return Ok((0.0, DVector::zeros(0)));
    }
    let chol = symmetrize(b)
        .cholesky()
        .ok_or_else(|| Error::Linalg("pencil matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    let eig = SymmetricEigen::new(symmetrize(&c));
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let y = eig.eigenvectors.column(k).into_owned();
    let v = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    Ok((lambda, v))
}

/// Orthonormal basis (columns) of the Euclidean orthogonal complement of the
/// column span of `z`.
pub fn complement_basis(z: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    if z.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = z.transpose() * z;
    let inv = gram
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .unwrap_or_else(|| gram.pseudo_inverse(1e-14).expect("pseudo inverse"));
    let projector = DMatrix::identity(n, n) - z * inv * z.transpose();
    let eig = SymmetricEigen::new(symmetrize(&projector));
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(i));
    }
    basis
}

/// Largest eigenpair of the pencil restricted to the complement of `kernel`.
///
/// The caller guarantees both forms vanish on the span of `kernel`, so the
/// restriction discards only 0/0 directions.
pub fn pencil_max_deflated(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    kernel: &DMatrix<f64>,
) -> Result<(f64, DVector<f64>)> {
    let v = complement_basis(kernel);
    let ar = v.transpose() * a * &v;
    let br = v.transpose() * b * &v;
    let (lambda, y) = pencil_max(&ar, &br)?;
    Ok((lambda, v * y))
}

/// Inverse of a symmetric positive definite matrix via its eigendecomposition,
/// failing when the smallest eigenvalue is below the kernel tolerance.
pub fn spd_inverse_checked(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top == 0.0 || eig.eigenvalues.iter().any(|&l| l <= KERNEL_TOLERANCE * top) {
        return None;
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    Some(&eig.eigenvectors * inv_diag * eig.eigenvectors.transpose())
}
