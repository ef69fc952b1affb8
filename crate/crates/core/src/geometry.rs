//! Port grid of a two-dimensional fluid antenna and its plane-wave response.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::{C64, CVec};

/// `n1 x n2` ports spread uniformly over `w1 x w2` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortGrid {
    n1: usize,
    n2: usize,
    w1: f64,
    w2: f64,
}

impl PortGrid {
    pub fn new(n1: usize, n2: usize, w1: f64, w2: f64) -> Result<Self> {
        // Port spacing divides by n_i - 1, so single-row grids are rejected.
        if n1 < 2 || n2 < 2 {
            return Err(Error::Config(format!(
                "port grid needs at least 2 ports per dimension, got {n1}x{n2}"
            )));
        }
        if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::Config(format!(
                "port grid size must be positive, got {w1}x{w2}"
            )));
        }
        Ok(Self { n1, n2, w1, w2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    /// Total number of ports.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Port spacing along each dimension, in wavelengths.
    pub fn spacing(&self) -> (f64, f64) {
        (
            self.w1 / (self.n1 - 1) as f64,
            self.w2 / (self.n2 - 1) as f64,
        )
    }

    /// Zero-based `(k1, k2)` coordinates of zero-based port `k`.
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.n2, k % self.n2)
    }
}

/// Azimuth and elevation angles of arrival, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub theta: f64,
    pub phi: f64,
}

impl PathAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::Domain("path angles must be finite".into()));
        }
        Ok(Self { theta, phi })
    }

    /// Per-port phase progression along each grid dimension, in wavelengths.
    fn slopes(&self, grid: &PortGrid) -> (f64, f64) {
        let (d1, d2) = grid.spacing();
        (
            d1 * self.theta.sin() * self.phi.cos(),
            d2 * self.theta.cos(),
        )
    }
}

/// Linear index `k = (k1 - 1) n2 + k2` of 1-based grid coordinates.
pub fn port_index(k1: usize, k2: usize, grid: &PortGrid) -> Result<usize> {
    if k1 == 0 || k1 > grid.n1 || k2 == 0 || k2 > grid.n2 {
        return Err(Error::Index(format!(
            "port ({k1}, {k2}) outside {}x{} grid",
            grid.n1, grid.n2
        )));
    }
    Ok((k1 - 1) * grid.n2 + k2)
}

/// Inverse of [`port_index`]: 1-based `(k1, k2)` of 1-based port `k`.
pub fn port_coords(k: usize, grid: &PortGrid) -> Result<(usize, usize)> {
    if k == 0 || k > grid.len() {
        return Err(Error::Index(format!(
            "port {k} outside 1..={}",
            grid.len()
        )));
    }
    let (c1, c2) = grid.coords(k - 1);
    Ok((c1 + 1, c2 + 1))
}

/// Path-length difference between port 1 and 1-based port `k`, in wavelengths.
pub fn path_offset(grid: &PortGrid, k: usize, angles: &PathAngles) -> Result<f64> {
    let (k1, k2) = port_coords(k, grid)?;
    let (s1, s2) = angles.slopes(grid);
    Ok((k1 - 1) as f64 * s1 + (k2 - 1) as f64 * s2)
}

/// Plane-wave response `exp(-j 2 pi d(k))` of every port, in port-index order.
pub fn steering_vector(grid: &PortGrid, angles: &PathAngles) -> CVec {
    let (s1, s2) = angles.slopes(grid);
    // The phase is separable in (k1, k2), so two short phasor tables suffice.
    let rows: Vec<C64> = (0..grid.n1)
        .map(|i| C64::cis(-2.0 * PI * s1 * i as f64))
        .collect();
    let cols: Vec<C64> = (0..grid.n2)
        .map(|i| C64::cis(-2.0 * PI * s2 * i as f64))
        .collect();
    CVec::from_fn(grid.len(), |k, _| {
        let (k1, k2) = grid.coords(k);
        rows[k1] * cols[k2]
    })
}
