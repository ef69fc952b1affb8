//! Special functions used by the channel model and the error-probability bounds.

mod quadrature;

pub use quadrature::{integrate_semi_infinite, integrate_semi_infinite_split, QuadratureSpec};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Ascending-series cutoff for J0.
const J0_SERIES_MAX: f64 = 8.0;

/// Zero-order Bessel function of the first kind.
///
/// `|x| <= 8` sums the ascending series. Beyond that the integral
/// `J0(x) = (1/2pi) int_0^{2pi} cos(x sin t) dt` is evaluated with the
/// periodic trapezoidal rule, whose aliasing error is `2 J_P(x)` for `P`
/// nodes and is negligible once `P` clears `1.2|x| + 40`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j0 of non-finite {x}")));
    }
    let ax = x.abs();
    if ax <= J0_SERIES_MAX {
        Ok(j0_series(ax))
    } else {
        Ok(j0_trapezoid(ax))
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > q.sqrt() {
            break;
        }
        k += 1.0;
    }
    sum
}

fn j0_trapezoid(x: f64) -> f64 {
    let nodes = ((1.2 * x + 40.0).ceil() as usize).next_multiple_of(4);
    // cos(x sin t) is even about t = pi/2 and t = pi, so a quarter period
    // carries the whole sum.
    let quarter = nodes / 4;
    let step = 2.0 * PI / nodes as f64;
    let mut sum = 0.5 * (1.0 + x.cos());
    for j in 1..quarter {
        sum += (x * (step * j as f64).sin()).cos();
    }
    sum / quarter as f64
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn gaussian_q(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gaussian_q of NaN".into()));
    }
    Ok(0.5 * statrs::function::erf::erfc(x * FRAC_1_SQRT_2))
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    statrs::function::gamma::ln_gamma(n + 1.0)
        - statrs::function::gamma::ln_gamma(k + 1.0)
        - statrs::function::gamma::ln_gamma(n - k + 1.0)
}

const HYP2F1_REL_STOP: f64 = 1e-14;
const HYP2F1_MAX_TERMS: usize = 10_000_000;

/// Gauss hypergeometric function `2F1(a, b; c; x)` restricted to `x <= 0`.
///
/// When exactly one of `c - a`, `c - b` is a non-positive integer and the
/// other is positive, the Euler transformation
/// `(1 - x)^(c-a-b) 2F1(c-a, c-b; c; x)` gives a terminating polynomial with
/// terms of one sign. Otherwise a Pfaff transformation maps the argument to
/// `z = x / (x - 1)` in `[0, 1)`. Of the two Pfaff forms, the one whose upper
/// parameter `c - b` (or `c - a`) is a non-positive integer is preferred
/// because its series terminates; otherwise the form with fewer sign
/// changes in its terms is used.
pub fn hyp2f1_neg(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && x.is_finite()) {
        return Err(Error::Domain("hyp2f1_neg arguments must be finite".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("hyp2f1_neg requires c > 0, got {c}")));
    }
    if x > 0.0 {
        return Err(Error::Domain(format!(
            "hyp2f1_neg supports x <= 0 only, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let log_one_minus_x = (-x).ln_1p();
    let (ca, cb) = (c - a, c - b);
    if (is_nonpositive_integer(ca) && cb > 0.0) || (is_nonpositive_integer(cb) && ca > 0.0) {
        let poly = terminating_series(ca, cb, c, x);
        if poly.is_finite() {
            return Ok(((ca - b) * log_one_minus_x).exp() * poly);
        }
    }
    let z = x / (x - 1.0);
    let use_first = if is_nonpositive_integer(c - b) {
        true
    } else if is_nonpositive_integer(c - a) {
        false
    } else {
        // The form with the larger lower-shifted parameter alternates less.
        c - b >= c - a
    };
    let (front, p, q) = if use_first { (a, a, c - b) } else { (b, c - a, b) };
    let series = hyp2f1_series(p, q, c, z)?;
    Ok((-front * log_one_minus_x).exp() * series)
}

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// `2F1(p, q; c; x)` where `p` or `q` is a non-positive integer.
fn terminating_series(p: f64, q: f64, c: f64, x: f64) -> f64 {
    let degree = -p.min(q) as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..degree {
        let nf = n as f64;
        term *= (p + nf) * (q + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// Power series of `2F1(p, q; c; z)` for `0 <= z < 1`.
fn hyp2f1_series(p: f64, q: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small_run = 0;
    for n in 0..HYP2F1_MAX_TERMS {
        let nf = n as f64;
        term *= (p + nf) * (q + nf) / ((c + nf) * (nf + 1.0)) * z;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        // Terms can grow before they shrink; require a few consecutive
        // small ones once the ratio has turned below one.
        let ratio = ((p + nf + 1.0) * (q + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * z).abs();
        if term.abs() <= HYP2F1_REL_STOP * sum.abs() && ratio < 1.0 {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Convergence {
        estimate: sum,
        error_bound: term.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision evaluation.
    const J0_TABLE: &[(f64, f64)] = &[
        (0.5, 0.938_469_807_240_812_9),
        (std::f64::consts::PI, -0.304_242_177_644_093_9),
        (7.9, 0.194_361_844_841_278_24),
        (8.1, 0.147_517_454_044_377_67),
        (15.0, -0.014_224_472_826_780_773),
        (37.5, 0.071_722_705_110_602_23),
        (100.0, 0.019_985_850_304_223_122),
    ];

    #[test]
    fn j0_matches_reference_values() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        for &(x, want) in J0_TABLE {
            let got = bessel_j0(x).unwrap();
            assert!((got - want).abs() < 1e-12, "J0({x}) = {got}, want {want}");
            assert!((bessel_j0(-x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn j0_first_root() {
        assert!(bessel_j0(2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn j0_regimes_agree_at_the_seam() {
        for x in [7.0, 7.5, 8.0] {
            assert!((j0_series(x) - j0_trapezoid(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn j0_rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn q_function_values() {
        assert_eq!(gaussian_q(0.0).unwrap(), 0.5);
        assert!(gaussian_q(8.0).unwrap() <= 1e-15);
        assert!((gaussian_q(1.0).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-9);
        for x in [-5.0, -1.3, 0.2, 2.7, 6.0] {
            let s = gaussian_q(x).unwrap() + gaussian_q(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(10.0).unwrap() - 362_880f64.ln()).abs() < 1e-9);
        let mut fact = 1.0f64;
        for n in 0..=12u32 {
            if n > 0 {
                fact *= n as f64;
            }
            let got = log_gamma(n as f64 + 1.0).unwrap().exp();
            assert!((got - fact).abs() <= 1e-12 * fact, "n = {n}");
        }
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn hyp2f1_closed_forms() {
        assert_eq!(hyp2f1_neg(2.0, 3.0, 4.0, 0.0).unwrap(), 1.0);
        let got = hyp2f1_neg(1.0, 1.0, 2.0, -1.0).unwrap();
        assert!((got - std::f64::consts::LN_2).abs() < 1e-9);
        // 2F1(1,1;2;x) = -ln(1-x)/x, checked far out on the negative axis.
        for x in [-0.3f64, -5.0, -250.0] {
            let want = -(-x).ln_1p() / x;
            let got = hyp2f1_neg(1.0, 1.0, 2.0, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn hyp2f1_matches_single_port_cdf() {
        // mu * 2F1(U, 1; 2; -mu) * (U - 1) = 1 - (1 + mu)^-(U-1)
        let u = 10.0;
        for mu in [0.1, 1.0, 10.0] {
            let f = (u - 1.0) * mu * hyp2f1_neg(u, 1.0, 2.0, -mu).unwrap();
            let want = 1.0 - (1.0 + mu).powf(-(u - 1.0));
            assert!((f - want).abs() < 1e-9, "mu = {mu}");
        }
    }

    #[test]
    fn hyp2f1_rejects_positive_argument() {
        assert!(matches!(hyp2f1_neg(1.0, 1.0, 2.0, 0.5), Err(Error::Domain(_))));
        assert!(hyp2f1_neg(1.0, 1.0, 0.0, -0.5).is_err());
    }

    #[test]
    fn log_binomial_small() {
        assert!((log_binomial(15, 2).exp() - 105.0).abs() < 1e-9);
        assert_eq!(log_binomial(3, 5), f64::NEG_INFINITY);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn hyp2f1_symmetric_in_upper_parameters(
                a in 0.2f64..12.0, b in 0.2f64..12.0, c in 0.5f64..10.0, x in -50.0f64..0.0,
            ) {
                let ab = hyp2f1_neg(a, b, c, x).unwrap();
                let ba = hyp2f1_neg(b, a, c, x).unwrap();
                prop_assert!(((ab - ba) / ab).abs() < 1e-10, "{ab} vs {ba}");
            }

            #[test]
            fn q_is_monotone(x in -10.0f64..10.0, dx in 0.0f64..3.0) {
                prop_assert!(gaussian_q(x + dx).unwrap() <= gaussian_q(x).unwrap());
            }
        }
    }
}
