use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::selection::ExternalSelector;

use super::trial::{PointContext, TrialRecord};
use super::ExperimentConfig;

/// Aggregate of one method at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_variable: String,
    pub sweep_value: f64,
    pub method: String,
    pub ser: f64,
    /// Binomial standard error `sqrt(ser (1 - ser) / symbols)`.
    pub ser_stderr: f64,
    /// `10 log10` of the mean linear SINR.
    pub mean_sinr_db: f64,
    pub mean_mult_count: f64,
    pub trials: u64,
    pub symbols: u64,
    /// Trial budget ran out before the error-event target was met.
    #[serde(skip)]
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    errors: u64,
    symbols: u64,
    sinr_sum: f64,
    mult_sum: f64,
    trials: u64,
}

impl Tally {
    fn add(&mut self, r: &TrialRecord) {
        self.errors += r.symbol_errors;
        self.symbols += r.symbols_sent;
        self.sinr_sum += r.sinr_achieved;
        self.mult_sum += r.mult_count as f64;
        self.trials += 1;
    }
}

/// Runs every sweep point of `config` with the built-in methods.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(config, None)
}

/// As [`run_experiment`], with `external` bound to the "external" method.
///
/// Each point runs trials in rounds of `config.chunk` until every method
/// has `error_events_target` symbol errors and `trials_min` trials are
/// done, or `trials_max` is reached. Records are folded in trial order.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    external: Option<&ExternalSelector>,
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;

    let mut rows = Vec::new();
    for &value in &config.sweep_values {
        let ctx = PointContext::new(config, value, external)?;
        let names = ctx.method_names();
        let mut tallies = vec![Tally::default(); names.len()];
        let mut next = 0u64;
        loop {
            let enough_errors = tallies.iter().all(|t| t.errors >= config.error_events_target);
            if (next >= config.trials_min && enough_errors) || next >= config.trials_max {
                break;
            }
            let end = (next + config.chunk as u64).min(config.trials_max);
            let batch: Vec<Result<Vec<TrialRecord>>> =
                pool.install(|| (next..end).into_par_iter().map(|t| ctx.run_trial(t)).collect());
            for records in batch {
                for (tally, record) in tallies.iter_mut().zip(&records?) {
                    tally.add(record);
                }
            }
            next = end;
        }

        for (name, t) in names.into_iter().zip(tallies) {
            let ser = t.errors as f64 / t.symbols as f64;
            let low_confidence = t.errors < config.error_events_target;
            if low_confidence {
                log::warn!(
                    "{name} at {} = {value}: {} errors after {} trials, below target {}",
                    config.sweep_variable,
                    t.errors,
                    t.trials,
                    config.error_events_target
                );
            }
            rows.push(ResultRow {
                sweep_variable: config.sweep_variable.name().to_string(),
                sweep_value: value,
                method: name,
                ser,
                ser_stderr: (ser * (1.0 - ser) / t.symbols as f64).sqrt(),
                mean_sinr_db: 10.0 * (t.sinr_sum / t.trials as f64).log10(),
                mean_mult_count: t.mult_sum / t.trials as f64,
                trials: t.trials,
                symbols: t.symbols,
                low_confidence,
            });
        }
    }
    Ok(rows)
}
