//! Interference rejection combining (IRC), SINR evaluation, QAM slicing and
//! the instantaneous symbol error probability.

use crate::covariance::InterferenceInverseState;
use crate::error::{Error, Result};
use crate::linalg::hermitian_solve;
use crate::specfun::gaussian_q;
use crate::{C64, CMat, CVec};

/// Square M-QAM constellation with unit average energy.
///
/// Symbol `i * sqrt(M) + q` sits at in-phase level `i` and quadrature level
/// `q`, levels running from most negative to most positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<C64>,
}

impl Constellation {
    pub const SUPPORTED_ORDERS: [usize; 4] = [4, 16, 64, 256];

    pub fn qam(order: usize) -> Result<Self> {
        let side = side_of(order)?;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt().recip();
        let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) * scale;
        let points = (0..order)
            .map(|s| C64::new(level(s / side), level(s % side)))
            .collect();
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn avg_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Nearest symbol to `z`; exact ties go to the lowest index.
    pub fn slice(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

fn side_of(order: usize) -> Result<usize> {
    if Constellation::SUPPORTED_ORDERS.contains(&order) {
        Ok((order as f64).sqrt().round() as usize)
    } else {
        Err(Error::Config(format!(
            "unsupported QAM order {order}; expected one of {:?}",
            Constellation::SUPPORTED_ORDERS
        )))
    }
}

/// IRC combining row vector `w = h^H psi^-1`, via a Hermitian solve.
pub fn irc_weights(h: &CVec, psi: &CMat) -> Result<CVec> {
    Ok(hermitian_solve(psi, h)?.conjugate())
}

/// Combining SINR `h^H psi^-1 h`.
pub fn sinr_direct(h: &CVec, psi: &CMat) -> Result<f64> {
    let x = hermitian_solve(psi, h)?;
    Ok(h.dotc(&x).re.max(0.0))
}

/// Combining SINR through the matrix inversion lemma:
/// `|h|^2 / s2 - h^H G U G^H h / s2^2`, where `U` is the inverse state over
/// the rows `g_rows` of the selected ports.
pub fn sinr_successive(h: &CVec, g_rows: &CMat, state: &InterferenceInverseState) -> Result<f64> {
    if g_rows.nrows() != h.len() || g_rows.ncols() != state.dim() {
        return Err(Error::Contract(format!(
            "{} channel entries, {}x{} interference rows, {} interferers in state",
            h.len(),
            g_rows.nrows(),
            g_rows.ncols(),
            state.dim()
        )));
    }
    let nv = state.noise_var();
    let y = g_rows.ad_mul(h);
    let quad = y.dotc(&(state.matrix() * &y)).re;
    Ok((h.norm_squared() / nv - quad / (nv * nv)).max(0.0))
}

/// Below this `|w h|` the combiner output carries no usable signal.
pub const DEGENERATE_GAIN: f64 = 1e-12;

/// Combines `r` with `w`, normalizes by the effective gain `w h`, and slices.
pub fn combine_and_detect(
    w: &CVec,
    r: &CVec,
    h: &CVec,
    constellation: &Constellation,
) -> Result<usize> {
    if w.len() != r.len() || w.len() != h.len() {
        return Err(Error::Contract(format!(
            "combiner of length {} for {} samples and {} channel entries",
            w.len(),
            r.len(),
            h.len()
        )));
    }
    let gain = w.transpose() * h;
    let gain = gain[(0, 0)];
    if gain.norm() < DEGENERATE_GAIN {
        return Err(Error::DegenerateChannel(gain.norm()));
    }
    let z = (w.transpose() * r)[(0, 0)] / gain;
    Ok(constellation.slice(z))
}

/// Instantaneous M-QAM symbol error probability at SINR `mu`:
/// `4(1 - 1/sqrt M) Q(x) - 4(1 - 1/sqrt M)^2 Q(x)^2`,
/// `x = sqrt(3 sigma_s2 mu / (M - 1))`.
pub fn sep_mqam(mu: f64, order: usize, sigma_s2: f64) -> Result<f64> {
    side_of(order)?;
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!("SINR must be non-negative, got {mu}")));
    }
    let m = order as f64;
    let c = 1.0 - m.sqrt().recip();
    let q = gaussian_q((3.0 * sigma_s2 * mu / (m - 1.0)).sqrt())?;
    Ok(4.0 * c * q - 4.0 * c * c * q * q)
}
