//! Monte-Carlo experiment engine: per-trial pipeline, sweeps, aggregation
//! and CSV output.
//!
//! Every trial draws its randomness from a seed that is a pure function of
//! the master seed, the sweep value and the trial id, so results do not
//! depend on worker count or completion order.

mod bounds;
mod experiment;
mod output;
mod trial;

use std::fmt;
use std::str::FromStr;

pub use bounds::{bounds_table, run_bounds_sweep, BoundsRow, BoundsSweep};
pub use experiment::{run_experiment, run_experiment_with, ResultRow};
pub use output::{write_bounds_csv, write_results_csv, BOUNDS_HEADER, RESULTS_HEADER};
pub use trial::{run_trial, trial_seed, PointContext, TrialRecord};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::geometry::PortGrid;
use crate::receiver::Constellation;
use crate::selection::{Method, SinrMode, DEFAULT_EPS_CAP};

/// Default training length for estimated CSI.
pub const DEFAULT_TRAINING_SNAPSHOTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Snr,
    Users,
    NRf,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Snr => "snr",
            SweepVariable::Users => "users",
            SweepVariable::NRf => "n_rf",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(SweepVariable::Snr),
            "users" => Ok(SweepVariable::Users),
            "n_rf" => Ok(SweepVariable::NRf),
            other => Err(Error::Config(format!(
                "unknown sweep variable '{other}'; expected snr, users or n_rf"
            ))),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Channel knowledge available to selection and combining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    Perfect,
    /// Covariance estimated from this many training snapshots.
    Estimated { snapshots: usize },
}

impl FromStr for CsiMode {
    type Err = Error;

    /// `perfect`, `estimated` or `estimated:T`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "perfect" => Ok(CsiMode::Perfect),
            None if s == "estimated" => Ok(CsiMode::Estimated {
                snapshots: DEFAULT_TRAINING_SNAPSHOTS,
            }),
            Some(("estimated", t)) => match t.parse::<usize>() {
                Ok(snapshots) if snapshots > 0 => Ok(CsiMode::Estimated { snapshots }),
                _ => Err(Error::Config(format!("invalid training length '{t}'"))),
            },
            _ => Err(Error::Config(format!(
                "unknown CSI mode '{s}'; expected perfect or estimated:T"
            ))),
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsiMode::Perfect => f.write_str("perfect"),
            CsiMode::Estimated { snapshots } => write!(f, "estimated:{snapshots}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: PortGrid,
    pub channel_model: ChannelModel,
    pub users: usize,
    pub n_rf: usize,
    pub methods: Vec<Method>,
    pub mod_order: usize,
    /// Average transmit SNR `sigma2 sigma_s2 / noise_var` in dB.
    pub snr_db: f64,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub csi: CsiMode,
    /// `None` picks the cheaper mode per point.
    pub sinr_mode: Option<SinrMode>,
    pub trials_min: u64,
    /// Trial budget per point; points stopping here short of
    /// `error_events_target` are flagged low-confidence.
    pub trials_max: u64,
    pub error_events_target: u64,
    /// Data symbols detected per channel realization.
    pub symbols_per_block: usize,
    pub master_seed: u64,
    pub eps_cap: u64,
    /// Trials dispatched per scheduling round; fixes where stopping checks
    /// happen, so it is part of the result's identity.
    pub chunk: usize,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults: 10 users, 2 RF chains, the four built-in methods, QPSK,
    /// one point at 35 dB, perfect CSI.
    pub fn new(grid: PortGrid, channel_model: ChannelModel) -> Self {
        Self {
            grid,
            channel_model,
            users: 10,
            n_rf: 2,
            methods: vec![Method::Ss, Method::Eps, Method::Ips, Method::Dps],
            mod_order: 4,
            snr_db: 35.0,
            sweep_variable: SweepVariable::Snr,
            sweep_values: vec![35.0],
            csi: CsiMode::Perfect,
            sinr_mode: None,
            trials_min: 100,
            trials_max: 1_000_000,
            error_events_target: 200,
            symbols_per_block: 1,
            master_seed: 1,
            eps_cap: DEFAULT_EPS_CAP,
            chunk: 64,
            workers: None,
        }
    }

    /// Users, RF chains and SNR in effect at one sweep value.
    pub fn point(&self, sweep_value: f64) -> Result<PointSettings> {
        let mut p = PointSettings {
            users: self.users,
            n_rf: self.n_rf,
            snr_db: self.snr_db,
        };
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!(
                    "sweep value {v} is not a count for '{}'",
                    self.sweep_variable
                )))
            }
        };
        match self.sweep_variable {
            SweepVariable::Snr => {
                if !sweep_value.is_finite() {
                    return Err(Error::Config(format!("SNR sweep value {sweep_value} is not finite")));
                }
                p.snr_db = sweep_value;
            }
            SweepVariable::Users => p.users = as_count(sweep_value)?,
            SweepVariable::NRf => p.n_rf = as_count(sweep_value)?,
        }
        let n = self.grid.len();
        if p.users < 2 {
            return Err(Error::Config(format!("users = {} must be at least 2", p.users)));
        }
        if p.n_rf == 0 || p.n_rf > n {
            return Err(Error::Config(format!("n_rf = {} must lie in 1..={n}", p.n_rf)));
        }
        if matches!(self.csi, CsiMode::Estimated { .. }) && p.users - 1 > n {
            return Err(Error::Config(format!(
                "estimated CSI needs users - 1 <= {n} ports, got users = {}",
                p.users
            )));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, why: String| Err(Error::Config(format!("{key}: {why}")));
        if self.methods.is_empty() {
            return fail("methods", "no selection methods given".into());
        }
        if self.sweep_values.is_empty() {
            return fail("sweep_values", "no sweep values given".into());
        }
        if self.trials_min == 0 {
            return fail("trials_min", "must be at least 1".into());
        }
        if self.trials_max < self.trials_min {
            return fail("trials_max", format!("{} is below trials_min", self.trials_max));
        }
        if self.error_events_target == 0 {
            return fail("error_events_target", "must be at least 1".into());
        }
        if self.symbols_per_block == 0 {
            return fail("symbols_per_block", "must be at least 1".into());
        }
        if self.chunk == 0 {
            return fail("chunk", "must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers", "must be at least 1".into());
        }
        Constellation::qam(self.mod_order)?;
        for &v in &self.sweep_values {
            self.point(v)?;
        }
        Ok(())
    }
}

/// Per-point values after applying the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSettings {
    pub users: usize,
    pub n_rf: usize,
    pub snr_db: f64,
}

impl PointSettings {
    /// `noise_var = sigma2 / 10^(snr_db / 10)` at unit symbol power.
    pub fn noise_var(&self, sigma2: f64) -> f64 {
        sigma2 / 10f64.powf(self.snr_db / 10.0)
    }
}
