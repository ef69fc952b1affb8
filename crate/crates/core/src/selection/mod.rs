//! Port-selection strategies behind one interface.
//!
//! Every strategy maximizes the IRC combining SINR of the selected ports,
//! evaluated either directly (`h^H psi^-1 h`) or successively through
//! rank-one updates of the interference inverse state. All strategies count
//! the complex multiplications spent on SINR evaluation; see
//! [`predicted_mult_count`] for the closed forms those counters must match.

mod complexity;
mod evaluator;
mod strategies;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use complexity::predicted_mult_count;
pub use strategies::{select_dps, select_eps, select_ips, select_ss};

use crate::channel::ChannelSet;
use crate::covariance::interference_covariance;
use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// Default cap on the number of combinations EPS may enumerate.
pub const DEFAULT_EPS_CAP: u64 = 1_000_000;

/// How the combining SINR of a candidate port set is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SinrMode {
    /// Cholesky solve against the selected covariance block.
    Direct,
    /// Matrix inversion lemma over the interference inverse state.
    Successive,
}

impl SinrMode {
    /// Cheaper mode for EPS-sized sets: direct when `n_rf^2 < U^2 - U`.
    pub fn auto(n_rf: usize, users: usize) -> Self {
        if n_rf * n_rf < users * users - users {
            SinrMode::Direct
        } else {
            SinrMode::Successive
        }
    }
}

impl FromStr for SinrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SinrMode::Direct),
            "successive" => Ok(SinrMode::Successive),
            other => Err(Error::Config(format!(
                "unknown SINR mode '{other}'; expected 'direct' or 'successive'"
            ))),
        }
    }
}

impl fmt::Display for SinrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SinrMode::Direct => "direct",
            SinrMode::Successive => "successive",
        })
    }
}

/// Selection method names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ss,
    Eps,
    Ips,
    Dps,
    /// Slot for a user-provided [`ExternalSelector`].
    External,
}

impl Method {
    pub const NAMES: [&'static str; 5] = ["ss", "eps", "ips", "dps", "external"];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ss => "ss",
            Method::Eps => "eps",
            Method::Ips => "ips",
            Method::Dps => "dps",
            Method::External => "external",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ss" => Ok(Method::Ss),
            "eps" => Ok(Method::Eps),
            "ips" => Ok(Method::Ips),
            "dps" => Ok(Method::Dps),
            "external" => Ok(Method::External),
            other => Err(Error::Config(format!(
                "unknown selection method '{other}'; valid names: {}",
                Method::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs shared by every strategy: the desired channel, an interference
/// basis `G` with `phi = noise_var I + G G^H`, and the RF-chain count.
#[derive(Debug, Clone)]
pub struct SelectionProblem {
    desired: CVec,
    interference: CMat,
    noise_var: f64,
    phi: CMat,
    n_rf: usize,
    mode: SinrMode,
    eps_cap: u64,
}

impl SelectionProblem {
    /// `mode = None` picks [`SinrMode::auto`].
    pub fn new(
        desired: CVec,
        interference: CMat,
        noise_var: f64,
        n_rf: usize,
        mode: Option<SinrMode>,
    ) -> Result<Self> {
        let n = desired.len();
        if interference.nrows() != n || interference.ncols() == 0 {
            return Err(Error::Contract(format!(
                "interference matrix is {}x{} for {n} ports",
                interference.nrows(),
                interference.ncols()
            )));
        }
        if n_rf == 0 || n_rf > n {
            return Err(Error::Config(format!(
                "RF-chain count {n_rf} must lie in 1..={n}"
            )));
        }
        let phi = interference_covariance(&interference, noise_var)?;
        let users = interference.ncols() + 1;
        Ok(Self {
            desired,
            interference,
            noise_var,
            phi,
            n_rf,
            mode: mode.unwrap_or_else(|| SinrMode::auto(n_rf, users)),
            eps_cap: DEFAULT_EPS_CAP,
        })
    }

    pub fn from_channel_set(cs: &ChannelSet, n_rf: usize, mode: Option<SinrMode>) -> Result<Self> {
        Self::new(cs.desired.clone(), cs.interference.clone(), cs.noise_var, n_rf, mode)
    }

    pub fn with_eps_cap(mut self, cap: u64) -> Self {
        self.eps_cap = cap;
        self
    }

    pub fn with_mode(mut self, mode: SinrMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn desired(&self) -> &CVec {
        &self.desired
    }

    pub fn interference(&self) -> &CMat {
        &self.interference
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Interference-plus-noise covariance of all ports.
    pub fn phi(&self) -> &CMat {
        &self.phi
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn ports(&self) -> usize {
        self.desired.len()
    }

    pub fn users(&self) -> usize {
        self.interference.ncols() + 1
    }

    pub fn mode(&self) -> SinrMode {
        self.mode
    }

    pub fn eps_cap(&self) -> u64 {
        self.eps_cap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected zero-based port indices, ascending.
    pub kappa: Vec<usize>,
    /// Combining SINR of `kappa`.
    pub sinr: f64,
    /// Complex multiplications spent on SINR evaluation.
    pub mult_count: u64,
    /// Number of candidate-set SINR evaluations.
    pub evaluations: u64,
    /// Ports in the order the strategy committed to them: additions for
    /// SS and IPS, removals for DPS, empty for EPS.
    pub decisions: Vec<usize>,
}

impl SelectionResult {
    /// Checks the result against the problem it claims to solve.
    pub fn validate(&self, problem: &SelectionProblem) -> Result<()> {
        let n = problem.ports();
        if self.kappa.len() != problem.n_rf() {
            return Err(Error::Contract(format!(
                "selected {} ports, expected {}",
                self.kappa.len(),
                problem.n_rf()
            )));
        }
        for (i, &k) in self.kappa.iter().enumerate() {
            if k >= n || self.kappa[..i].contains(&k) {
                return Err(Error::Contract(format!("invalid port set {:?}", self.kappa)));
            }
        }
        if !(self.sinr >= 0.0) {
            return Err(Error::Contract(format!("negative SINR {}", self.sinr)));
        }
        Ok(())
    }
}

/// A port-selection strategy.
pub trait PortSelector: Send + Sync {
    fn name(&self) -> &str;
    fn select(&self, problem: &SelectionProblem) -> Result<SelectionResult>;
}

/// One of the built-in strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Builtin(Method);

impl Builtin {
    pub fn new(method: Method) -> Result<Self> {
        if method == Method::External {
            return Err(Error::Config(
                "the 'external' method needs a registered callback".into(),
            ));
        }
        Ok(Self(method))
    }

    pub fn method(&self) -> Method {
        self.0
    }
}

impl PortSelector for Builtin {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn select(&self, problem: &SelectionProblem) -> Result<SelectionResult> {
        match self.0 {
            Method::Ss => select_ss(problem),
            Method::Eps => select_eps(problem),
            Method::Ips => select_ips(problem),
            Method::Dps => select_dps(problem),
            Method::External => unreachable!("rejected in Builtin::new"),
        }
    }
}

type SelectFn = dyn Fn(&SelectionProblem) -> Result<SelectionResult> + Send + Sync;

/// User-provided selection rule plugged into the "external" slot.
#[derive(Clone)]
pub struct ExternalSelector {
    name: String,
    callback: Arc<SelectFn>,
}

impl ExternalSelector {
    pub fn new<F>(name: impl Into<String>, callback: F) -> Self
    where
        F: Fn(&SelectionProblem) -> Result<SelectionResult> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            callback: Arc::new(callback),
        }
    }
}

impl fmt::Debug for ExternalSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalSelector").field("name", &self.name).finish()
    }
}

impl PortSelector for ExternalSelector {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&self, problem: &SelectionProblem) -> Result<SelectionResult> {
        let result = (self.callback)(problem)?;
        result.validate(problem)?;
        Ok(result)
    }
}

/// Resolves a config name to a selector; "external" requires `external`.
pub fn selector_by_name(
    name: &str,
    external: Option<&ExternalSelector>,
) -> Result<Arc<dyn PortSelector>> {
    match name.parse::<Method>()? {
        Method::External => external
            .map(|e| Arc::new(e.clone()) as Arc<dyn PortSelector>)
            .ok_or_else(|| Error::Config("method 'external' requested but no callback registered".into())),
        m => Ok(Arc::new(Builtin::new(m)?)),
    }
}
