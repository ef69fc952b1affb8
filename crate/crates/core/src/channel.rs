//! Random channel generation: finite scattering, correlated Rayleigh and
//! i.i.d. Rayleigh fading.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{steering_vector, PathAngles, PortGrid};
use crate::linalg::hermitian_eigen_desc;
use crate::specfun::bessel_j0;
use crate::{C64, CMat, CVec};

/// Circularly-symmetric complex normal sample with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteScatteringParams {
    /// Rice factor `K`.
    pub rice_k: f64,
    /// Number of scattered (non line-of-sight) paths.
    pub n_paths: usize,
    /// Channel power.
    pub sigma2: f64,
}

impl FiniteScatteringParams {
    pub fn new(rice_k: f64, n_paths: usize, sigma2: f64) -> Result<Self> {
        let p = Self {
            rice_k,
            n_paths,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rice_k >= 0.0) || self.n_paths < 1 || !(self.sigma2 > 0.0) {
            return Err(Error::Config(format!(
                "finite-scattering parameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which fading model a [`ChannelSampler`] draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    FiniteScattering(FiniteScatteringParams),
    /// Rich scattering with Jakes spatial correlation.
    CorrelatedRayleigh { sigma2: f64 },
    /// Uncorrelated ports.
    Iid { sigma2: f64 },
}

impl ChannelModel {
    pub fn sigma2(&self) -> f64 {
        match self {
            ChannelModel::FiniteScattering(p) => p.sigma2,
            ChannelModel::CorrelatedRayleigh { sigma2 } | ChannelModel::Iid { sigma2 } => *sigma2,
        }
    }
}

/// Desired channel and interference channels seen by one user over one
/// coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub desired: CVec,
    /// `N x (U-1)`, one column per interferer.
    pub interference: CMat,
    pub noise_var: f64,
    pub signal_var: f64,
}

impl ChannelSet {
    pub fn ports(&self) -> usize {
        self.desired.len()
    }

    pub fn interferers(&self) -> usize {
        self.interference.ncols()
    }
}

/// Spatial covariance of isotropic rich scattering:
/// `sigma2 * J0(2 pi * port distance in wavelengths)`.
pub fn jakes_covariance(grid: &PortGrid, sigma2: f64) -> CMat {
    let n = grid.len();
    let (d1, d2) = grid.spacing();
    let mut sigma = CMat::zeros(n, n);
    for k in 0..n {
        let (k1, k2) = grid.coords(k);
        sigma[(k, k)] = C64::new(sigma2, 0.0);
        for l in 0..k {
            let (l1, l2) = grid.coords(l);
            let a = (k1 as f64 - l1 as f64) * d1;
            let b = (k2 as f64 - l2 as f64) * d2;
            let rho = bessel_j0(2.0 * PI * a.hypot(b)).expect("finite distance");
            sigma[(k, l)] = C64::new(sigma2 * rho, 0.0);
            sigma[(l, k)] = sigma[(k, l)];
        }
    }
    sigma
}

/// Factor `L` with `L L^H = sigma`, from an eigendecomposition with negative
/// eigenvalues clipped to zero.
pub fn covariance_factor(sigma: &CMat) -> CMat {
    let (values, mut vectors) = hermitian_eigen_desc(sigma);
    for (c, v) in values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        vectors.column_mut(c).scale_mut(s);
    }
    vectors
}

/// One draw of the finite-scattering channel
/// `sqrt(K s2/(K+1)) e^{j delta} a(los) + sqrt(s2/(Np (K+1))) sum_l alpha_l a(path_l)`.
///
/// Arrival angles are isotropic: azimuth uniform on `[0, 2pi)`, elevation
/// uniform on `[-pi/2, pi/2]`. Path gains are unit-variance complex normal.
pub fn sample_finite_scattering<R: Rng + ?Sized>(
    grid: &PortGrid,
    params: &FiniteScatteringParams,
    rng: &mut R,
) -> CVec {
    let k = params.rice_k;
    let los_amp = (k * params.sigma2 / (k + 1.0)).sqrt();
    let nlos_amp = (params.sigma2 / (params.n_paths as f64 * (k + 1.0))).sqrt();

    let draw_angles = |rng: &mut R| PathAngles {
        theta: rng.random_range(0.0..2.0 * PI),
        phi: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
    };

    let delta = rng.random_range(0.0..2.0 * PI);
    let los = draw_angles(rng);
    let mut g = steering_vector(grid, &los) * (C64::cis(delta) * los_amp);
    for _ in 0..params.n_paths {
        let angles = draw_angles(rng);
        let alpha = complex_normal(rng) * nlos_amp;
        g.axpy(alpha, &steering_vector(grid, &angles), C64::new(1.0, 0.0));
    }
    g
}

/// `L z` with `z` i.i.d. unit-variance complex normal.
pub fn sample_correlated_rayleigh<R: Rng + ?Sized>(factor: &CMat, rng: &mut R) -> CVec {
    let z = CVec::from_fn(factor.ncols(), |_, _| complex_normal(rng));
    factor * z
}

/// Draws channel vectors for a fixed grid and model; the Jakes factor is
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    grid: PortGrid,
    model: ChannelModel,
    factor: Option<CMat>,
}

impl ChannelSampler {
    pub fn new(grid: PortGrid, model: ChannelModel) -> Result<Self> {
        let factor = match model {
            ChannelModel::FiniteScattering(p) => {
                p.validate()?;
                None
            }
            ChannelModel::CorrelatedRayleigh { sigma2 } => {
                check_sigma2(sigma2)?;
                Some(covariance_factor(&jakes_covariance(&grid, sigma2)))
            }
            ChannelModel::Iid { sigma2 } => {
                check_sigma2(sigma2)?;
                None
            }
        };
        Ok(Self {
            grid,
            model,
            factor,
        })
    }

    pub fn grid(&self) -> &PortGrid {
        &self.grid
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        match (&self.model, &self.factor) {
            (ChannelModel::FiniteScattering(p), _) => sample_finite_scattering(&self.grid, p, rng),
            (ChannelModel::CorrelatedRayleigh { .. }, Some(l)) => sample_correlated_rayleigh(l, rng),
            (ChannelModel::Iid { sigma2 }, _) => {
                let s = sigma2.sqrt();
                CVec::from_fn(self.grid.len(), |_, _| complex_normal(rng) * s)
            }
            (ChannelModel::CorrelatedRayleigh { .. }, None) => unreachable!("factor built in new"),
        }
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("channel power must be positive, got {sigma2}")))
    }
}

/// One desired channel plus `users - 1` independent interference channels.
/// Symbol power is fixed at one.
pub fn build_channel_set<R: Rng + ?Sized>(
    sampler: &ChannelSampler,
    users: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<ChannelSet> {
    if users < 2 {
        return Err(Error::Config(format!("need at least 2 users, got {users}")));
    }
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::Config(format!("noise variance must be positive, got {noise_var}")));
    }
    let desired = sampler.sample(rng);
    let mut interference = CMat::zeros(desired.len(), users - 1);
    for c in 0..users - 1 {
        interference.set_column(c, &sampler.sample(rng));
    }
    Ok(ChannelSet {
        desired,
        interference,
        noise_var,
        signal_var: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_rel_error;
    use crate::testutil::rng;

    fn sparse_grid() -> PortGrid {
        PortGrid::new(5, 3, 3.0, 1.6).unwrap()
    }

    #[test]
    fn jakes_entries() {
        let g = PortGrid::new(2, 2, 0.5, 0.5).unwrap();
        let s = jakes_covariance(&g, 2.0);
        for k in 0..4 {
            assert_eq!(s[(k, k)], C64::new(2.0, 0.0));
        }
        // Ports (1,1) -> 0 and (2,1) -> 2 are half a wavelength apart.
        assert!((s[(0, 2)].re - 2.0 * -0.304_242_177_644_093_86).abs() < 1e-9);
        assert_eq!(s, s.transpose());
    }

    #[test]
    fn jakes_is_numerically_psd() {
        for grid in [sparse_grid(), PortGrid::new(30, 3, 3.0, 1.6).unwrap()] {
            let (vals, _) = hermitian_eigen_desc(&jakes_covariance(&grid, 1.5));
            assert!(*vals.last().unwrap() >= -1e-8 * 1.5);
        }
    }

    #[test]
    fn factor_reconstructs() {
        let i = CMat::identity(3, 3);
        let l = covariance_factor(&i);
        assert!((&l * l.adjoint() - &i).norm() < 1e-12);

        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(4.0, 0.0), C64::new(1.0, 0.0)]));
        let l = covariance_factor(&d);
        assert!((&l * l.adjoint() - &d).norm() < 1e-12);

        let s = jakes_covariance(&sparse_grid(), 1.0);
        let l = covariance_factor(&s);
        assert!(frobenius_rel_error(&(&l * l.adjoint()), &s) < 1e-8);
    }

    #[test]
    fn line_of_sight_limit() {
        let grid = sparse_grid();
        let p = FiniteScatteringParams::new(1e12, 5, 2.0).unwrap();
        let mut r = rng(1);
        let g = sample_finite_scattering(&grid, &p, &mut r);
        // Replay the same draws to rebuild the line-of-sight term alone.
        let mut r = rng(1);
        let delta = r.random_range(0.0..2.0 * PI);
        let los = PathAngles {
            theta: r.random_range(0.0..2.0 * PI),
            phi: r.random_range(-FRAC_PI_2..=FRAC_PI_2),
        };
        let want = steering_vector(&grid, &los) * (C64::cis(delta) * 2f64.sqrt());
        for (a, b) in g.iter().zip(want.iter()) {
            assert!((a - b).norm() / b.norm() < 1e-5);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let grid = sparse_grid();
        let p = FiniteScatteringParams::new(0.0, 50, 1.0).unwrap();
        let a = sample_finite_scattering(&grid, &p, &mut rng(42));
        let b = sample_finite_scattering(&grid, &p, &mut rng(42));
        assert_eq!(a, b);
    }

    #[test]
    fn nlos_power_per_port() {
        let grid = sparse_grid();
        for sigma2 in [1.0, 3.0] {
            let p = FiniteScatteringParams::new(0.0, 50, sigma2).unwrap();
            let mut r = rng(2);
            let draws = 100_000;
            let mut power = vec![0.0; grid.len()];
            for _ in 0..draws {
                let g = sample_finite_scattering(&grid, &p, &mut r);
                for (acc, z) in power.iter_mut().zip(g.iter()) {
                    *acc += z.norm_sqr();
                }
            }
            for acc in power {
                let mean = acc / draws as f64;
                assert!((mean / sigma2 - 1.0).abs() < 0.03, "mean {mean}");
            }
        }
    }

    #[test]
    fn nlos_amplitude_is_rayleigh() {
        let grid = sparse_grid();
        let p = FiniteScatteringParams::new(0.0, 50, 1.0).unwrap();
        let mut r = rng(3);
        let mut amps: Vec<f64> = (0..100_000)
            .map(|_| sample_finite_scattering(&grid, &p, &mut r)[7].norm())
            .collect();
        amps.sort_by(f64::total_cmp);
        let n = amps.len() as f64;
        // Rayleigh with E|g|^2 = 1: F(a) = 1 - exp(-a^2).
        let ks = amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let f = 1.0 - (-a * a).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS {ks}");
    }

    #[test]
    fn rayleigh_sampling_moments() {
        let zero = CMat::zeros(3, 3);
        assert_eq!(sample_correlated_rayleigh(&zero, &mut rng(4)), CVec::zeros(3));

        let draws = 100_000;
        let eye = CMat::identity(4, 4);
        let mut r = rng(5);
        let mut var = [0.0; 4];
        for _ in 0..draws {
            let v = sample_correlated_rayleigh(&eye, &mut r);
            for (acc, z) in var.iter_mut().zip(v.iter()) {
                *acc += z.norm_sqr();
            }
        }
        for v in var {
            assert!((v / draws as f64 - 1.0).abs() < 0.03);
        }

        let sigma = jakes_covariance(&sparse_grid(), 1.0);
        let l = covariance_factor(&sigma);
        let mut acc = CMat::zeros(15, 15);
        for _ in 0..draws {
            let v = sample_correlated_rayleigh(&l, &mut r);
            acc.ger(C64::new(1.0, 0.0), &v, &v.conjugate(), C64::new(1.0, 0.0));
        }
        acc /= C64::new(draws as f64, 0.0);
        assert!(frobenius_rel_error(&acc, &sigma) < 0.05);
    }

    #[test]
    fn channel_set_shape_and_determinism() {
        let sampler = ChannelSampler::new(sparse_grid(), ChannelModel::Iid { sigma2: 1.0 }).unwrap();
        let cs = build_channel_set(&sampler, 2, 0.1, &mut rng(6)).unwrap();
        assert_eq!(cs.interference.ncols(), 1);
        assert_eq!(cs.signal_var, 1.0);
        assert_eq!(cs, build_channel_set(&sampler, 2, 0.1, &mut rng(6)).unwrap());
        assert!(matches!(build_channel_set(&sampler, 1, 0.1, &mut rng(6)), Err(Error::Config(_))));
    }

    #[test]
    fn desired_and_interference_are_uncorrelated() {
        let p = FiniteScatteringParams::new(0.0, 50, 1.0).unwrap();
        let sampler = ChannelSampler::new(sparse_grid(), ChannelModel::FiniteScattering(p)).unwrap();
        let mut r = rng(7);
        let draws = 10_000;
        let mut cross = vec![C64::new(0.0, 0.0); 3];
        for _ in 0..draws {
            let cs = build_channel_set(&sampler, 4, 0.1, &mut r).unwrap();
            for (c, acc) in cross.iter_mut().enumerate() {
                *acc += cs.desired[0] * cs.interference[(0, c)].conj();
            }
        }
        for acc in cross {
            assert!((acc / draws as f64).norm() < 0.05);
        }
    }
}
