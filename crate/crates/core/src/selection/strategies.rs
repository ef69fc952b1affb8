use crate::error::{Error, Result};
use crate::specfun::log_binomial;

use super::evaluator::Evaluator;
use super::{SelectionProblem, SelectionResult, SinrMode};

fn finish(mut kappa: Vec<usize>, sinr: f64, ev: Evaluator<'_>, decisions: Vec<usize>) -> SelectionResult {
    kappa.sort_unstable();
    SelectionResult {
        kappa,
        sinr,
        mult_count: ev.mults,
        evaluations: ev.evaluations,
        decisions,
    }
}

/// Ranks ports by `|g_k|^2 / phi_kk` and keeps the best `N_RF`. Ties go to
/// the lower index.
pub fn select_ss(problem: &SelectionProblem) -> Result<SelectionResult> {
    let n = problem.ports();
    let g = problem.desired();
    let phi = problem.phi();
    let metric: Vec<f64> = (0..n).map(|k| g[k].norm_sqr() / phi[(k, k)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| metric[b].total_cmp(&metric[a]).then(a.cmp(&b)));
    order.truncate(problem.n_rf());

    let mut ev = Evaluator::new(problem);
    ev.mults += 4 * n as u64;
    let sinr = ev.direct(&order)?;
    Ok(finish(order.clone(), sinr, ev, order))
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: Some((0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Exhaustive search over all `C(N, N_RF)` port sets. Refuses to run when
/// the count exceeds the problem's EPS cap.
pub fn select_eps(problem: &SelectionProblem) -> Result<SelectionResult> {
    let n = problem.ports();
    let r = problem.n_rf();
    let combinations = log_binomial(n as u64, r as u64).exp();
    if combinations > problem.eps_cap() as f64 * (1.0 + 1e-9) {
        return Err(Error::EnumerationTooLarge {
            combinations,
            cap: problem.eps_cap(),
        });
    }

    let mut ev = Evaluator::new(problem);
    let empty = ev.identity_state()?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for set in Combinations::new(n, r) {
        let sinr = match problem.mode() {
            SinrMode::Direct => ev.direct(&set)?,
            SinrMode::Successive => {
                let mut state = empty.clone();
                for &k in &set {
                    state = ev.add(&state, k)?;
                }
                ev.successive(&set, &state)?
            }
        };
        if best.as_ref().is_none_or(|(b, _)| sinr > *b) {
            best = Some((sinr, set));
        }
    }
    let (sinr, kappa) = best.expect("at least one combination");
    Ok(finish(kappa, sinr, ev, Vec::new()))
}

/// Greedy forward selection: each round adds the port that maximizes the
/// SINR of the grown set.
pub fn select_ips(problem: &SelectionProblem) -> Result<SelectionResult> {
    let n = problem.ports();
    let mut ev = Evaluator::new(problem);
    let mut chosen: Vec<usize> = Vec::with_capacity(problem.n_rf());
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut state = ev.identity_state()?;
    let mut sinr = 0.0;

    for _ in 0..problem.n_rf() {
        let mut best: Option<(f64, usize, Option<_>)> = None;
        for (pos, &k) in remaining.iter().enumerate() {
            chosen.push(k);
            let (gamma, next) = match problem.mode() {
                SinrMode::Direct => (ev.direct(&chosen)?, None),
                SinrMode::Successive => {
                    let next = ev.add(&state, k)?;
                    (ev.successive(&chosen, &next)?, Some(next))
                }
            };
            chosen.pop();
            if best.as_ref().is_none_or(|(b, _, _)| gamma > *b) {
                best = Some((gamma, pos, next));
            }
        }
        let (gamma, pos, next) = best.expect("candidates remain");
        chosen.push(remaining.remove(pos));
        if let Some(next) = next {
            state = next;
        }
        sinr = gamma;
    }
    Ok(finish(chosen.clone(), sinr, ev, chosen))
}

/// Greedy backward elimination: starting from all ports, each round drops
/// the port whose removal leaves the highest SINR.
pub fn select_dps(problem: &SelectionProblem) -> Result<SelectionResult> {
    let n = problem.ports();
    let mut ev = Evaluator::new(problem);
    let mut omega: Vec<usize> = (0..n).collect();
    let mut state = match problem.mode() {
        SinrMode::Successive => Some(ev.state_for(&omega)?),
        SinrMode::Direct => None,
    };
    let mut removed = Vec::with_capacity(n - problem.n_rf());
    let mut sinr = None;

    let mut candidate = Vec::with_capacity(n);
    while omega.len() > problem.n_rf() {
        let mut best: Option<(f64, usize, Option<_>)> = None;
        for (pos, &k) in omega.iter().enumerate() {
            candidate.clear();
            candidate.extend(omega.iter().copied().filter(|&p| p != k));
            let (gamma, next) = match &state {
                None => (ev.direct(&candidate)?, None),
                Some(s) => {
                    let next = ev.remove(s, k, &candidate)?;
                    (ev.successive(&candidate, &next)?, Some(next))
                }
            };
            if best.as_ref().is_none_or(|(b, _, _)| gamma > *b) {
                best = Some((gamma, pos, next));
            }
        }
        let (gamma, pos, next) = best.expect("candidates remain");
        removed.push(omega.remove(pos));
        if next.is_some() {
            state = next;
        }
        sinr = Some(gamma);
    }

    let sinr = match sinr {
        Some(s) => s,
        None => {
            let mut uncounted = Evaluator::new(problem);
            uncounted.direct(&omega)?
        }
    };
    Ok(finish(omega, sinr, ev, removed))
}

#[cfg(test)]
mod tests {
    use super::Combinations;

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Combinations::new(5, 5).count(), 1);
        assert_eq!(Combinations::new(7, 3).count(), 35);
    }
}
