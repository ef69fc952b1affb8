use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{build_channel_set, complex_normal, ChannelSampler, ChannelSet};
use crate::covariance::{
    gather, gather_vec, interference_covariance, recover_interference_basis, CovarianceAccumulator,
};
use crate::error::{Error, Result};
use crate::receiver::{combine_and_detect, irc_weights, Constellation};
use crate::selection::{selector_by_name, ExternalSelector, PortSelector, SelectionProblem};
use crate::{CMat, CVec, C64};

use super::{CsiMode, ExperimentConfig, PointSettings};

/// Redraws allowed after degenerate-channel events before a trial fails.
const MAX_REDRAWS: u64 = 16;
/// Training snapshots generated per matrix block.
const TRAINING_BLOCK: usize = 256;

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub method: String,
    pub sweep_value: f64,
    /// Post-combining SINR with respect to the true channel.
    pub sinr_achieved: f64,
    pub symbol_errors: u64,
    pub symbols_sent: u64,
    pub mult_count: u64,
    pub kappa: Vec<usize>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial attempt; `attempt` advances on each redraw.
pub fn trial_seed(master_seed: u64, sweep_value: f64, trial_id: u64, attempt: u64) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ sweep_value.to_bits());
    h = splitmix64(h ^ trial_id);
    splitmix64(h ^ attempt)
}

/// Everything shared by the trials of one sweep point.
pub struct PointContext {
    config: ExperimentConfig,
    sweep_value: f64,
    settings: PointSettings,
    sampler: ChannelSampler,
    constellation: Constellation,
    noise_var: f64,
    selectors: Vec<Arc<dyn PortSelector>>,
}

impl PointContext {
    pub fn new(
        config: &ExperimentConfig,
        sweep_value: f64,
        external: Option<&ExternalSelector>,
    ) -> Result<Self> {
        config.validate()?;
        let settings = config.point(sweep_value)?;
        let selectors = config
            .methods
            .iter()
            .map(|m| selector_by_name(m.name(), external))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            sweep_value,
            settings,
            sampler: ChannelSampler::new(config.grid, config.channel_model)?,
            constellation: Constellation::qam(config.mod_order)?,
            noise_var: settings.noise_var(config.channel_model.sigma2()),
            selectors,
        })
    }

    pub fn settings(&self) -> &PointSettings {
        &self.settings
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn method_names(&self) -> Vec<String> {
        self.selectors.iter().map(|s| s.name().to_string()).collect()
    }

    /// One record per configured method, in configuration order.
    pub fn run_trial(&self, trial_id: u64) -> Result<Vec<TrialRecord>> {
        let mut last = 0.0;
        for attempt in 0..MAX_REDRAWS {
            let seed = trial_seed(self.config.master_seed, self.sweep_value, trial_id, attempt);
            match self.attempt(trial_id, seed) {
                Err(Error::DegenerateChannel(gain)) => {
                    log::warn!(
                        "trial {trial_id} at {} = {}: degenerate channel (|w h| = {gain:e}), redrawing",
                        self.config.sweep_variable,
                        self.sweep_value
                    );
                    last = gain;
                }
                other => return other,
            }
        }
        Err(Error::DegenerateChannel(last))
    }

    /// Channels, training and data use separate streams of one seed, so
    /// perfect and estimated CSI runs see identical channels and data.
    fn attempt(&self, trial_id: u64, seed: u64) -> Result<Vec<TrialRecord>> {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        let users = self.settings.users;
        let cs = build_channel_set(&self.sampler, users, self.noise_var, &mut stream(0))?;
        let (basis, true_phi) = match self.config.csi {
            CsiMode::Perfect => (cs.interference.clone(), None),
            CsiMode::Estimated { snapshots } => {
                let phi_est = self.train(&cs, snapshots, &mut stream(1))?;
                (
                    recover_interference_basis(&phi_est, self.noise_var, users)?,
                    Some(interference_covariance(&cs.interference, self.noise_var)?),
                )
            }
        };
        let problem = SelectionProblem::new(
            cs.desired.clone(),
            basis,
            self.noise_var,
            self.settings.n_rf,
            self.config.sinr_mode,
        )?
        .with_eps_cap(self.config.eps_cap);

        let blocks = self.data_block(&cs, &mut stream(2));

        let mut records = Vec::with_capacity(self.selectors.len());
        for selector in &self.selectors {
            let sel = selector.select(&problem)?;
            let h = gather_vec(&cs.desired, &sel.kappa);
            let w = irc_weights(&h, &gather(problem.phi(), &sel.kappa))?;
            let sinr_achieved = match &true_phi {
                None => sel.sinr,
                Some(phi) => realized_sinr(&w, &h, &gather(phi, &sel.kappa)),
            };
            let mut errors = 0;
            for (sent, r) in &blocks {
                let detected = combine_and_detect(&w, &gather_vec(r, &sel.kappa), &h, &self.constellation)?;
                if detected != *sent {
                    errors += 1;
                }
            }
            records.push(TrialRecord {
                trial_id,
                method: selector.name().to_string(),
                sweep_value: self.sweep_value,
                sinr_achieved,
                symbol_errors: errors,
                symbols_sent: blocks.len() as u64,
                mult_count: sel.mult_count,
                kappa: sel.kappa,
            });
        }
        Ok(records)
    }

    fn symbol<R: Rng>(&self, rng: &mut R) -> (usize, C64) {
        let idx = rng.random_range(0..self.constellation.order());
        (idx, self.constellation.points()[idx])
    }

    /// Received full-port vectors for the data symbols of one block; every
    /// method detects the same samples.
    fn data_block<R: Rng>(&self, cs: &ChannelSet, rng: &mut R) -> Vec<(usize, CVec)> {
        let sd = self.noise_var.sqrt();
        (0..self.config.symbols_per_block)
            .map(|_| {
                let (idx, s0) = self.symbol(rng);
                let s = CVec::from_fn(cs.interferers(), |_, _| self.symbol(rng).1);
                let noise = CVec::from_fn(cs.ports(), |_, _| complex_normal(rng) * sd);
                let r = &cs.desired * s0 + &cs.interference * s + noise;
                (idx, r)
            })
            .collect()
    }

    /// Sample covariance from `snapshots` training symbols of all users.
    fn train<R: Rng>(&self, cs: &ChannelSet, snapshots: usize, rng: &mut R) -> Result<CMat> {
        let n = cs.ports();
        let mut h = CMat::zeros(n, cs.interferers() + 1);
        h.set_column(0, &cs.desired);
        h.columns_mut(1, cs.interferers()).copy_from(&cs.interference);
        let sd = self.noise_var.sqrt();
        let mut acc = CovarianceAccumulator::new(n);
        let mut left = snapshots;
        while left > 0 {
            let b = left.min(TRAINING_BLOCK);
            let s = CMat::from_fn(h.ncols(), b, |_, _| self.symbol(rng).1);
            let noise = CMat::from_fn(n, b, |_, _| complex_normal(rng) * sd);
            acc.push_block(&(&h * s + noise))?;
            left -= b;
        }
        acc.finish(&cs.desired)
    }
}

/// `|w h|^2 / (w psi w^H)` for the combiner `z = w^T r`.
fn realized_sinr(w: &CVec, h: &CVec, psi: &CMat) -> f64 {
    let gain = w.dot(h).norm_sqr();
    let wc = w.conjugate();
    let power = w.dot(&(psi * wc)).re;
    if power > 0.0 {
        gain / power
    } else {
        0.0
    }
}

/// Replays one trial of `config` at `sweep_value` with the built-in methods.
pub fn run_trial(config: &ExperimentConfig, sweep_value: f64, trial_id: u64) -> Result<Vec<TrialRecord>> {
    PointContext::new(config, sweep_value, None)?.run_trial(trial_id)
}
