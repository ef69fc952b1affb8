use crate::covariance::{gather, gather_rows, gather_vec, InterferenceInverseState};
use crate::error::{Error, Result};
use crate::receiver::{sinr_direct, sinr_successive};
use crate::C64;

use super::SelectionProblem;

/// Counted SINR kernels shared by the strategies.
pub(super) struct Evaluator<'a> {
    problem: &'a SelectionProblem,
    rows: Vec<Vec<C64>>,
    pub mults: u64,
    pub evaluations: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a SelectionProblem) -> Self {
        let g = problem.interference();
        let rows = (0..g.nrows())
            .map(|k| g.row(k).iter().copied().collect())
            .collect();
        Self {
            problem,
            rows,
            mults: 0,
            evaluations: 0,
        }
    }

    fn interferers(&self) -> u64 {
        self.problem.interference().ncols() as u64
    }

    pub fn identity_state(&self) -> Result<InterferenceInverseState> {
        InterferenceInverseState::identity(self.problem.interference().ncols(), self.problem.noise_var())
    }

    /// Uncounted state over `set`, used for initialization.
    pub fn state_for(&self, set: &[usize]) -> Result<InterferenceInverseState> {
        InterferenceInverseState::from_rows(
            &gather_rows(self.problem.interference(), set),
            self.problem.noise_var(),
        )
    }

    /// `2n^3 + n^2 + n` multiplications.
    pub fn direct(&mut self, set: &[usize]) -> Result<f64> {
        let n = set.len() as u64;
        self.mults += 2 * n * n * n + n * n + n;
        self.evaluations += 1;
        let h = gather_vec(self.problem.desired(), set);
        let psi = gather(self.problem.phi(), set);
        sinr_direct(&h, &psi)
    }

    /// `n + nI + I^2 + I` multiplications.
    pub fn successive(&mut self, set: &[usize], state: &InterferenceInverseState) -> Result<f64> {
        let n = set.len() as u64;
        let i = self.interferers();
        self.mults += n + n * i + i * i + i;
        self.evaluations += 1;
        let h = gather_vec(self.problem.desired(), set);
        let g = gather_rows(self.problem.interference(), set);
        sinr_successive(&h, &g, state)
    }

    /// `2I^2 + I` multiplications.
    pub fn add(&mut self, state: &InterferenceInverseState, port: usize) -> Result<InterferenceInverseState> {
        self.charge_update();
        state.add_row(&self.rows[port])
    }

    /// `2I^2 + I` multiplications; a singular downdate is rebuilt from
    /// `remaining` at no extra charge.
    pub fn remove(
        &mut self,
        state: &InterferenceInverseState,
        port: usize,
        remaining: &[usize],
    ) -> Result<InterferenceInverseState> {
        self.charge_update();
        match state.remove_row(&self.rows[port]) {
            Err(Error::Singular(msg)) => {
                log::debug!("downdate of port {port} rebuilt: {msg}");
                self.state_for(remaining)
            }
            other => other,
        }
    }

    fn charge_update(&mut self) {
        let i = self.interferers();
        self.mults += 2 * i * i + i;
    }
}
