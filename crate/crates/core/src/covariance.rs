//! Interference-plus-noise covariance algebra and the rank-one inverse
//! update/downdate kernels used by successive SINR evaluation.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen_desc, hermitian_inverse};
use crate::{C64, CMat, CVec};

/// `noise_var * I + G G^H` for an `N x (U-1)` interference matrix `G`.
pub fn interference_covariance(interference: &CMat, noise_var: f64) -> Result<CMat> {
    check_noise_var(noise_var)?;
    let mut phi = interference * interference.adjoint();
    for i in 0..phi.nrows() {
        phi[(i, i)] += C64::new(noise_var, 0.0);
    }
    Ok(phi)
}

fn check_noise_var(noise_var: f64) -> Result<()> {
    if noise_var > 0.0 && noise_var.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "noise variance must be positive, got {noise_var}"
        )))
    }
}

fn check_index_set(kappa: &[usize], n: usize) -> Result<()> {
    for (pos, &k) in kappa.iter().enumerate() {
        if k >= n {
            return Err(Error::Index(format!("port {k} outside 0..{n}")));
        }
        if kappa[..pos].contains(&k) {
            return Err(Error::Index(format!("duplicate port {k} in selection")));
        }
    }
    Ok(())
}

/// Rows and columns `kappa` (zero-based, order preserved) of `phi`.
pub fn submatrix(phi: &CMat, kappa: &[usize]) -> Result<CMat> {
    check_index_set(kappa, phi.nrows())?;
    Ok(gather(phi, kappa))
}

pub(crate) fn gather(phi: &CMat, kappa: &[usize]) -> CMat {
    CMat::from_fn(kappa.len(), kappa.len(), |i, j| phi[(kappa[i], kappa[j])])
}

/// Entries `kappa` (zero-based, order preserved) of `v`.
pub fn subvector(v: &CVec, kappa: &[usize]) -> Result<CVec> {
    check_index_set(kappa, v.len())?;
    Ok(gather_vec(v, kappa))
}

pub(crate) fn gather_vec(v: &CVec, kappa: &[usize]) -> CVec {
    CVec::from_fn(kappa.len(), |i, _| v[kappa[i]])
}

/// Rows `kappa` of `g`.
pub(crate) fn gather_rows(g: &CMat, kappa: &[usize]) -> CMat {
    CMat::from_fn(kappa.len(), g.ncols(), |i, j| g[(kappa[i], j)])
}

/// Running inverse `(I + G_s^H G_s / noise_var)^-1` over a set of
/// interference rows `G_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceInverseState {
    u_mat: CMat,
    noise_var: f64,
}

impl InterferenceInverseState {
    /// State for an empty row set.
    pub fn identity(interferers: usize, noise_var: f64) -> Result<Self> {
        check_noise_var(noise_var)?;
        Ok(Self {
            u_mat: CMat::identity(interferers, interferers),
            noise_var,
        })
    }

    /// State over every row of `rows`, by direct inversion.
    pub fn from_rows(rows: &CMat, noise_var: f64) -> Result<Self> {
        check_noise_var(noise_var)?;
        let i = rows.ncols();
        let mut gram = rows.adjoint() * rows / C64::new(noise_var, 0.0);
        for d in 0..i {
            gram[(d, d)] += C64::new(1.0, 0.0);
        }
        Ok(Self {
            u_mat: hermitian_inverse(&gram)?,
            noise_var,
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.u_mat
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Number of interferers `U - 1`.
    pub fn dim(&self) -> usize {
        self.u_mat.nrows()
    }

    /// `x = U u^H` and `u U u^H`.
    fn project(&self, u: &[C64]) -> Result<(Vec<C64>, f64)> {
        let n = self.dim();
        if u.len() != n {
            return Err(Error::Contract(format!(
                "row of length {} for {n} interferers",
                u.len()
            )));
        }
        let x: Vec<C64> = (0..n)
            .map(|i| (0..n).map(|j| self.u_mat[(i, j)] * u[j].conj()).sum())
            .collect();
        let quad: C64 = u.iter().zip(&x).map(|(a, b)| a * b).sum();
        Ok((x, quad.re))
    }

    fn rank_one(&self, x: &[C64], scale: f64) -> Self {
        let n = self.dim();
        let mut u_mat = self.u_mat.clone();
        for j in 0..n {
            for i in 0..n {
                u_mat[(i, j)] += x[i] * x[j].conj() * scale;
            }
        }
        Self {
            u_mat,
            noise_var: self.noise_var,
        }
    }

    /// Includes interference row `u`:
    /// `U - U u^H u U / (noise_var + u U u^H)`.
    pub fn add_row(&self, u: &[C64]) -> Result<Self> {
        let (x, quad) = self.project(u)?;
        Ok(self.rank_one(&x, -1.0 / (self.noise_var + quad)))
    }

    /// Removes interference row `u`, which must currently be included:
    /// `U + U u^H u U / (noise_var - u U u^H)`.
    ///
    /// Fails with [`Error::Singular`] when the denominator falls below
    /// `1e-12 * noise_var`; callers then rebuild with [`Self::from_rows`].
    pub fn remove_row(&self, u: &[C64]) -> Result<Self> {
        let (x, quad) = self.project(u)?;
        let denom = self.noise_var - quad;
        if denom.abs() < 1e-12 * self.noise_var {
            return Err(Error::Singular(format!(
                "downdate denominator {denom:e} below guard"
            )));
        }
        Ok(self.rank_one(&x, 1.0 / denom))
    }
}

/// Running sum of snapshot outer products `r r^H`.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    acc: CMat,
    count: usize,
}

impl CovarianceAccumulator {
    pub fn new(ports: usize) -> Self {
        Self {
            acc: CMat::zeros(ports, ports),
            count: 0,
        }
    }

    pub fn push(&mut self, r: &CVec) -> Result<()> {
        if r.len() != self.acc.nrows() {
            return Err(Error::Contract("snapshot lengths disagree".into()));
        }
        self.acc.ger(C64::new(1.0, 0.0), r, &r.conjugate(), C64::new(1.0, 0.0));
        self.count += 1;
        Ok(())
    }

    /// Adds every column of `block` as one snapshot.
    pub fn push_block(&mut self, block: &CMat) -> Result<()> {
        if block.nrows() != self.acc.nrows() {
            return Err(Error::Contract("snapshot lengths disagree".into()));
        }
        self.acc.gemm(C64::new(1.0, 0.0), block, &block.adjoint(), C64::new(1.0, 0.0));
        self.count += block.ncols();
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `(1/T) sum_t r[t] r[t]^H - g g^H`.
    pub fn finish(mut self, desired: &CVec) -> Result<CMat> {
        if self.count == 0 {
            return Err(Error::Config("no training snapshots".into()));
        }
        if desired.len() != self.acc.nrows() {
            return Err(Error::Contract("snapshot lengths disagree".into()));
        }
        self.acc /= C64::new(self.count as f64, 0.0);
        self.acc
            .ger(C64::new(-1.0, 0.0), desired, &desired.conjugate(), C64::new(1.0, 0.0));
        Ok(self.acc)
    }
}

/// Sample interference-plus-noise covariance
/// `(1/T) sum_t r[t] r[t]^H - g g^H` from training snapshots.
///
/// The result may be indefinite for small `T`.
pub fn sample_covariance(snapshots: &[CVec], desired: &CVec) -> Result<CMat> {
    let mut acc = CovarianceAccumulator::new(desired.len());
    for r in snapshots {
        acc.push(r)?;
    }
    acc.finish(desired)
}

/// Interference basis `G~` with `G~ G~^H ~ phi_est - noise_var I`.
///
/// Eigenvalues of `phi_est - noise_var I` are clipped at zero; the leading
/// `U - 1` eigenvectors scaled by the root eigenvalues form the columns.
/// Only the column span is identified, up to a unitary mixing.
pub fn recover_interference_basis(phi_est: &CMat, noise_var: f64, users: usize) -> Result<CMat> {
    check_noise_var(noise_var)?;
    let n = phi_est.nrows();
    if users < 2 || users - 1 > n {
        return Err(Error::Config(format!(
            "cannot recover {} interferers from {n} ports",
            users.saturating_sub(1)
        )));
    }
    let mut shifted = phi_est.clone();
    for i in 0..n {
        shifted[(i, i)] -= C64::new(noise_var, 0.0);
    }
    // Symmetrize so rounding in an estimated covariance cannot leak into the
    // eigen solver.
    let shifted = (&shifted + shifted.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = hermitian_eigen_desc(&shifted);
    let mut basis = CMat::zeros(n, users - 1);
    for c in 0..users - 1 {
        let s = values[c].max(0.0).sqrt();
        for r in 0..n {
            basis[(r, c)] = vectors[(r, c)] * s;
        }
    }
    Ok(basis)
}
