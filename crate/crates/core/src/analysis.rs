//! Distribution of the full-array IRC SINR `mu` in the interference-limited
//! regime and the resulting bounds on the average symbol error probability.
//!
//! `mu` follows a beta-prime law with shape `(N*, U - N*)`. The upper bound
//! averages the M-QAM error probability over that law. The lower bound
//! averages it over the maximum of `C(N, N*)` independent copies, which
//! favours the selector more than any real port-selection rule can.

use crate::error::{Error, Result};
use crate::receiver::sep_mqam;
use crate::specfun::{
    hyp2f1_neg, integrate_semi_infinite_split, log_binomial, log_gamma, QuadratureSpec,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    users: usize,
    n_star: usize,
    n_ports: usize,
    mod_order: usize,
    sigma_s2: f64,
}

impl BoundParams {
    /// Unit symbol power. Requires `1 <= n_star < users <= ...` and
    /// `n_ports >= n_star`.
    pub fn new(users: usize, n_star: usize, n_ports: usize, mod_order: usize) -> Result<Self> {
        if users < 2 || n_star == 0 || n_star >= users {
            return Err(Error::Domain(format!(
                "need 1 <= N* < U, got N*={n_star}, U={users}"
            )));
        }
        if n_ports < n_star {
            return Err(Error::Domain(format!(
                "need N >= N*, got N={n_ports}, N*={n_star}"
            )));
        }
        sep_mqam(0.0, mod_order, 1.0)?;
        let ln_c = log_binomial(n_ports as u64, n_star as u64);
        if !ln_c.exp().is_finite() {
            return Err(Error::Domain(format!(
                "C({n_ports}, {n_star}) is not representable"
            )));
        }
        Ok(Self {
            users,
            n_star,
            n_ports,
            mod_order,
            sigma_s2: 1.0,
        })
    }

    pub fn with_sigma_s2(mut self, sigma_s2: f64) -> Result<Self> {
        if !(sigma_s2 > 0.0) || !sigma_s2.is_finite() {
            return Err(Error::Domain(format!("symbol power must be positive, got {sigma_s2}")));
        }
        self.sigma_s2 = sigma_s2;
        Ok(self)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn mod_order(&self) -> usize {
        self.mod_order
    }

    pub fn sigma_s2(&self) -> f64 {
        self.sigma_s2
    }

    /// Number of candidate port sets `C(N, N*)`.
    pub fn combinations(&self) -> f64 {
        log_binomial(self.n_ports as u64, self.n_star as u64).exp()
    }
}

/// Log-domain evaluation of the beta-prime law of `mu`.
struct MuLaw {
    users: usize,
    n_star: usize,
    ln_norm: f64,
    ln_binom: Vec<f64>,
}

impl MuLaw {
    fn new(p: &BoundParams) -> Result<Self> {
        let (u, n) = (p.users as f64, p.n_star as f64);
        Ok(Self {
            users: p.users,
            n_star: p.n_star,
            ln_norm: log_gamma(u)? - log_gamma(n)? - log_gamma(u - n)?,
            ln_binom: (0..p.users)
                .map(|j| log_binomial(p.users as u64 - 1, j as u64))
                .collect(),
        })
    }

    fn ln_pdf(&self, mu: f64) -> f64 {
        if mu <= 0.0 {
            return if mu == 0.0 && self.n_star == 1 {
                self.ln_norm
            } else {
                f64::NEG_INFINITY
            };
        }
        self.ln_norm + (self.n_star as f64 - 1.0) * mu.ln() - self.users as f64 * mu.ln_1p()
    }

    /// `(ln F, ln S)` with `S = 1 - F`, from the binomial identity
    /// `S(mu) = P(Bin(U - 1, z) < N*)`, `z = mu / (1 + mu)`. Both tails are
    /// sums of positive terms, so neither loses precision.
    fn ln_cdf_sf(&self, mu: f64) -> (f64, f64) {
        if mu <= 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if mu.is_infinite() {
            return (0.0, f64::NEG_INFINITY);
        }
        let l1p = mu.ln_1p();
        let ln_z = -mu.recip().ln_1p();
        let top = self.users - 1;
        let terms: Vec<f64> = (0..self.users)
            .map(|j| self.ln_binom[j] + j as f64 * ln_z - (top - j) as f64 * l1p)
            .collect();
        let ln_sf = log_sum_exp(&terms[..self.n_star]);
        // ln F enters the maximum's density multiplied by C, so its absolute
        // error must stay far below 1 / C; ln_1p(-S) delivers that.
        let ln_cdf = if ln_sf < -std::f64::consts::LN_2 {
            (-ln_sf.exp()).ln_1p()
        } else {
            log_sum_exp(&terms[self.n_star..])
        };
        (ln_cdf, ln_sf)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_nan() {
        return Err(Error::Domain("SINR is NaN".into()));
    }
    Ok(())
}

/// Density of `mu`: `Gamma(U) / (Gamma(N*) Gamma(U - N*)) mu^(N*-1) (1+mu)^-U`.
/// Zero for negative `mu`.
pub fn mu_pdf(mu: f64, p: &BoundParams) -> Result<f64> {
    check_mu(mu)?;
    Ok(MuLaw::new(p)?.ln_pdf(mu).exp())
}

/// Distribution function of `mu` through the Gauss hypergeometric form
/// `Gamma(U) / (Gamma(N*+1) Gamma(U - N*)) mu^N* 2F1(U, N*; N*+1; -mu)`.
pub fn mu_cdf(mu: f64, p: &BoundParams) -> Result<f64> {
    check_mu(mu)?;
    if mu <= 0.0 {
        return Ok(0.0);
    }
    if mu.is_infinite() {
        return Ok(1.0);
    }
    let (u, n) = (p.users as f64, p.n_star as f64);
    let ln_a = log_gamma(u)? - log_gamma(n + 1.0)? - log_gamma(u - n)?;
    let f = hyp2f1_neg(u, n, n + 1.0, -mu)?;
    Ok(((ln_a + n * mu.ln()).exp() * f).clamp(0.0, 1.0))
}

/// `P(mu > x)` from the binomial tail sum; accurate deep into the tail
/// where `1 - mu_cdf` cancels.
pub fn mu_sf(mu: f64, p: &BoundParams) -> Result<f64> {
    check_mu(mu)?;
    Ok(MuLaw::new(p)?.ln_cdf_sf(mu).1.exp())
}

/// Density of the best of `C(N, N*)` independent copies of `mu`,
/// `C F^(C-1) f`, evaluated as one exponential of summed logs.
pub fn mu_max_pdf(mu: f64, p: &BoundParams) -> Result<f64> {
    check_mu(mu)?;
    let law = MuLaw::new(p)?;
    Ok(max_ln_pdf(&law, p.combinations(), mu).exp())
}

fn max_ln_pdf(law: &MuLaw, c: f64, mu: f64) -> f64 {
    let ln_f = law.ln_pdf(mu);
    if c <= 1.0 || ln_f == f64::NEG_INFINITY {
        return ln_f;
    }
    c.ln() + (c - 1.0) * law.ln_cdf_sf(mu).0 + ln_f
}

/// Point where the survival function equals `1 / max(C, 2)`; the
/// density of the maximum concentrates around it.
fn centre(law: &MuLaw, c: f64) -> f64 {
    let target = -c.max(2.0).ln();
    let (mut lo, mut hi) = (-40.0f64, 80.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if law.ln_cdf_sf(mid.exp()).1 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `int_0^inf g(mu) dmu` after the substitution `mu = exp(s)`, split at
/// `s0` into two half lines. Working in `ln mu` keeps the resolution
/// uniform when the mass sits at very large `mu`.
fn integrate_log_scale<G: Fn(f64) -> f64>(g: G, s0: f64, quad: &QuadratureSpec) -> Result<f64> {
    let h = |s: f64| {
        let mu = s.exp();
        g(mu) * mu
    };
    let breaks = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let right = integrate_semi_infinite_split(|y| h(s0 + y), &breaks, quad)?;
    let left = integrate_semi_infinite_split(|y| h(s0 - y), &breaks, quad)?;
    Ok(left + right)
}

fn average_sep(p: &BoundParams, quad: &QuadratureSpec, c: f64) -> Result<f64> {
    let law = MuLaw::new(p)?;
    let (m, s2) = (p.mod_order, p.sigma_s2);
    integrate_log_scale(
        |mu| {
            let ln_density = max_ln_pdf(&law, c, mu);
            if ln_density == f64::NEG_INFINITY {
                return 0.0;
            }
            sep_mqam(mu, m, s2).unwrap_or(f64::NAN) * ln_density.exp()
        },
        centre(&law, c),
        quad,
    )
}

/// Upper bound on the average symbol error probability: the M-QAM error
/// probability averaged over the law of `mu`.
pub fn asep_upper(p: &BoundParams, quad: &QuadratureSpec) -> Result<f64> {
    average_sep(p, quad, 1.0)
}

/// Lower bound on the average symbol error probability: the M-QAM error
/// probability averaged over the maximum of `C(N, N*)` copies of `mu`.
pub fn asep_lower(p: &BoundParams, quad: &QuadratureSpec) -> Result<f64> {
    average_sep(p, quad, p.combinations())
}
