use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for [`integrate_semi_infinite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Config(format!(
                "quadrature tolerances must be positive and subdivisions >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integral of `f` over `[0, inf)`.
///
/// The half line is mapped onto `(0, 1)` by `x = t / (1 - t)` and the
/// transformed integrand is integrated with globally adaptive
/// Gauss-Kronrod bisection. The panel with the largest error estimate is
/// split until the summed estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_semi_infinite<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_semi_infinite_split(f, &[], spec)
}

/// As [`integrate_semi_infinite`], with the initial panels split at the
/// positive points `breaks`. Useful when the mass sits far from the origin.
pub fn integrate_semi_infinite_split<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    let mapped = |t: f64| {
        let one_minus = 1.0 - t;
        let x = t / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let mut edges = vec![0.0];
    let mut cuts: Vec<f64> = breaks
        .iter()
        .filter(|b| b.is_finite() && **b > 0.0)
        .map(|b| b / (1.0 + b))
        .filter(|t| *t < 1.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    edges.extend(cuts);
    edges.push(1.0);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        let panel = kronrod15(&mapped, w[0], w[1]);
        total += panel.value;
        total_err += panel.error;
        heap.push(panel);
    }

    let mut subdivisions = 0;
    while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence {
                estimate: total,
                error_bound: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel width has hit floating-point resolution.
            return Err(Error::Convergence {
                estimate: total,
                error_bound: total_err,
            });
        }
        let left = kronrod15(&mapped, worst.lo, mid);
        let right = kronrod15(&mapped, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Re-sum to shed the drift of incremental updates.
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_integrals() {
        let spec = QuadratureSpec::default();
        let a = integrate_semi_infinite(|x| (-x).exp(), &spec).unwrap();
        assert!((a - 1.0).abs() < 1e-10);
        let b = integrate_semi_infinite(|x| x * (-x).exp(), &spec).unwrap();
        assert!((b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomial_tail_density() {
        let spec = QuadratureSpec::default();
        let u = 10.0;
        let v = integrate_semi_infinite(|x| (u - 1.0) * (1.0 + x).powf(-u), &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let spec = QuadratureSpec::new(1e-300, 1e-300, 3).unwrap();
        match integrate_semi_infinite(|x| (-x * x).exp(), &spec) {
            Err(Error::Convergence { estimate, error_bound }) => {
                assert!((estimate - 0.886_226_925_452_758).abs() < 1e-3);
                assert!(error_bound >= 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn breakpoints_locate_distant_mass() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (-(x - 1e6).powi(2) / 2.0).exp();
        let v = integrate_semi_infinite_split(f, &[1e5, 1e6 - 10.0, 1e6 + 10.0, 1e7], &spec).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-8, 0).is_err());
    }
}
