//! Small dense Hermitian helpers shared by the receiver and covariance code.

use nalgebra::linalg::Cholesky;

use crate::error::{Error, Result};
use crate::{C64, CMat, CVec};

/// Diagonal loading applied when a Cholesky factorization fails.
pub(crate) const REGULARIZATION: f64 = 1e-12;

fn cholesky(psi: &CMat) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    if !psi.is_square() || psi.nrows() == 0 {
        return Err(Error::Contract(format!(
            "expected a non-empty square matrix, got {}x{}",
            psi.nrows(),
            psi.ncols()
        )));
    }
    if let Some(c) = Cholesky::new(psi.clone()) {
        return Ok(c);
    }
    let n = psi.nrows();
    let load = REGULARIZATION * psi.trace().re.abs() / n as f64;
    let mut loaded = psi.clone();
    for i in 0..n {
        loaded[(i, i)] += C64::new(load, 0.0);
    }
    Cholesky::new(loaded).ok_or_else(|| {
        Error::Singular(format!("{n}x{n} covariance is not positive definite"))
    })
}

/// Solves `psi x = rhs` for Hermitian positive-definite `psi`.
pub(crate) fn hermitian_solve(psi: &CMat, rhs: &CVec) -> Result<CVec> {
    if rhs.len() != psi.nrows() {
        return Err(Error::Contract(format!(
            "right-hand side of length {} for {}x{} matrix",
            rhs.len(),
            psi.nrows(),
            psi.ncols()
        )));
    }
    Ok(cholesky(psi)?.solve(rhs))
}

pub(crate) fn hermitian_inverse(psi: &CMat) -> Result<CMat> {
    Ok(cholesky(psi)?.inverse())
}

/// Eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
///
/// Each eigenvector is rotated so its first non-negligible entry is real
/// and positive, making the basis reproducible.
pub(crate) fn hermitian_eigen_desc(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().find(|z| z.norm() > 1e-12).copied();
        let phase = pivot.map_or(C64::new(1.0, 0.0), |p| p.conj() / p.norm());
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    (values, vectors)
}

/// Frobenius norm of `a - b` relative to that of `b`.
pub fn frobenius_rel_error(a: &CMat, b: &CMat) -> f64 {
    let denom = b.norm();
    let diff = (a - b).norm();
    if denom == 0.0 {
        diff
    } else {
        diff / denom
    }
}
