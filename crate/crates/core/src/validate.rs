//! Built-in oracle suite: each check compares a production kernel against
//! an independent route on random instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{mu_cdf, BoundParams};
use crate::channel::complex_normal;
use crate::covariance::{gather, gather_rows, gather_vec, interference_covariance, InterferenceInverseState};
use crate::error::Result;
use crate::receiver::{sinr_direct, sinr_successive};
use crate::selection::{
    predicted_mult_count, select_dps, select_eps, select_ips, select_ss, Method, SelectionProblem,
    SinrMode,
};
use crate::{frobenius_rel_error, CMat, CVec, C64};

type RemoveRow = fn(&InterferenceInverseState, &[C64]) -> Result<InterferenceInverseState>;

/// Replaceable kernels, so tests can confirm that a broken kernel is caught.
#[derive(Clone, Copy)]
pub struct ValidationHooks {
    pub remove_row: RemoveRow,
}

impl Default for ValidationHooks {
    fn default() -> Self {
        Self {
            remove_row: InterferenceInverseState::remove_row,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

/// Kolmogorov-Smirnov distance between `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng))
}

fn cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| complex_normal(rng))
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn check_successive(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..500 {
        let (n, users) = (4 + i % 13, 2 + i % 11);
        let k = 1 + i % n.min(8);
        let g = cvec(rng, n);
        let gi = cmat(rng, n, users - 1);
        let nv = 0.05 + (i % 7) as f64 * 0.2;
        let set: Vec<usize> = (0..k).collect();
        let phi = interference_covariance(&gi, nv)?;
        let direct = sinr_direct(&gather_vec(&g, &set), &gather(&phi, &set))?;
        let rows = gather_rows(&gi, &set);
        let state = InterferenceInverseState::from_rows(&rows, nv)?;
        let succ = sinr_successive(&gather_vec(&g, &set), &rows, &state)?;
        worst = worst.max((succ - direct).abs() / direct);
    }
    Ok((worst < 1e-9, format!("max relative gap {worst:.2e}")))
}

fn check_remove(rng: &mut ChaCha8Rng, hooks: &ValidationHooks) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (n, users) = (3 + i % 8, 2 + i % 6);
        let gi = cmat(rng, n, users - 1);
        let nv = 0.1 + (i % 5) as f64 * 0.3;
        let full = InterferenceInverseState::from_rows(&gi, nv)?;
        let drop = i % n;
        let row: Vec<C64> = gi.row(drop).iter().copied().collect();
        let keep: Vec<usize> = (0..n).filter(|&k| k != drop).collect();
        let updated = (hooks.remove_row)(&full, &row)?;
        let rebuilt = InterferenceInverseState::from_rows(&gather_rows(&gi, &keep), nv)?;
        worst = worst.max(frobenius_rel_error(updated.matrix(), rebuilt.matrix()));
    }
    Ok((worst < 1e-9, format!("max relative error {worst:.2e}")))
}

fn check_add(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (n, users) = (2 + i % 8, 2 + i % 6);
        let gi = cmat(rng, n, users - 1);
        let nv = 0.1 + (i % 5) as f64 * 0.3;
        let mut state = InterferenceInverseState::identity(users - 1, nv)?;
        for k in 0..n {
            let row: Vec<C64> = gi.row(k).iter().copied().collect();
            state = state.add_row(&row)?;
        }
        let rebuilt = InterferenceInverseState::from_rows(&gi, nv)?;
        worst = worst.max(frobenius_rel_error(state.matrix(), rebuilt.matrix()));
    }
    Ok((worst < 1e-9, format!("max relative error {worst:.2e}")))
}

fn brute_force(p: &SelectionProblem) -> Result<(f64, Vec<usize>)> {
    let n = p.ports();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != p.n_rf() {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let h = gather_vec(p.desired(), &set);
        let inv = gather(p.phi(), &set)
            .try_inverse()
            .ok_or_else(|| crate::Error::Singular("brute-force inverse".into()))?;
        let s = h.dotc(&(inv * &h)).re;
        if s > best.0 {
            best = (s, set);
        }
    }
    Ok(best)
}

fn check_eps(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut mismatches = 0;
    for i in 0..100 {
        let (n, users, r) = (4 + i % 7, 2 + i % 5, 1 + i % 3);
        let p = SelectionProblem::new(cvec(rng, n), cmat(rng, n, users - 1), 0.2, r, None)?;
        let (s, set) = brute_force(&p)?;
        let res = select_eps(&p)?;
        if res.kappa != set || (res.sinr - s).abs() > 1e-9 * s {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches} of 100 instances differ")))
}

fn check_counters(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut mismatches = Vec::new();
    for (n, users, r) in [(6, 3, 2), (9, 5, 3), (12, 8, 4), (8, 2, 8)] {
        for mode in [SinrMode::Direct, SinrMode::Successive] {
            let p = SelectionProblem::new(cvec(rng, n), cmat(rng, n, users - 1), 0.3, r, Some(mode))?;
            let runs = [
                (Method::Ss, select_ss(&p)?),
                (Method::Eps, select_eps(&p)?),
                (Method::Ips, select_ips(&p)?),
                (Method::Dps, select_dps(&p)?),
            ];
            for (m, res) in runs {
                if res.mult_count != predicted_mult_count(m, n, r, users, mode)? {
                    mismatches.push(format!("{m}/{mode}/N={n}"));
                }
            }
        }
    }
    Ok((
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "all counts equal the closed forms".into()
        } else {
            mismatches.join(" ")
        },
    ))
}

fn check_mu_law(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let (n, users, samples) = (2, 10, 20_000);
    let nv = 1e-6;
    let params = BoundParams::new(users, n, n, 4)?;
    let mut mus = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = cvec(rng, n);
        let phi = interference_covariance(&cmat(rng, n, users - 1), nv)?;
        mus.push(sinr_direct(&g, &phi)?);
    }
    let d = ks_distance(&mus, |x| mu_cdf(x, &params).unwrap_or(f64::NAN));
    Ok((d < 0.02, format!("KS distance {d:.4}")))
}

/// Runs every oracle check from `seed`.
pub fn run_validation(seed: u64, hooks: &ValidationHooks) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        outcome("sinr_successive oracle", check_successive(&mut rng)),
        outcome("inv_update_add oracle", check_add(&mut rng)),
        outcome("inv_update_remove oracle", check_remove(&mut rng, hooks)),
        outcome("eps brute-force oracle", check_eps(&mut rng)),
        outcome("closed-form counter oracle", check_counters(&mut rng)),
        outcome("mu distribution KS oracle", check_mu_law(&mut rng)),
    ];
    ValidationReport { checks }
}
