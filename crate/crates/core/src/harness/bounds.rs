use serde::Serialize;

use crate::analysis::{asep_lower, asep_upper, BoundParams};
use crate::error::{Error, Result};
use crate::specfun::QuadratureSpec;

use super::experiment::{run_experiment, ResultRow};
use super::{ExperimentConfig, SweepVariable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub u: usize,
    pub n_star: usize,
    pub n_ports: usize,
    pub m: usize,
    pub asep_lower: f64,
    pub asep_upper: f64,
    /// Set when a quadrature did not converge; the values are then the
    /// partial estimates.
    #[serde(skip)]
    pub note: Option<String>,
}

fn flagged(r: Result<f64>, which: &str, note: &mut Option<String>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::Convergence { estimate, error_bound }) => {
            log::warn!("{which} bound did not converge: {estimate:e} +- {error_bound:e}");
            *note = Some(format!("{which}: error bound {error_bound:e}"));
            Ok(estimate)
        }
        Err(e) => Err(e),
    }
}

/// Bounds for each user count in `users`. Parameters are validated for all
/// rows before any integral is evaluated.
pub fn bounds_table(
    users: &[usize],
    n_star: usize,
    n_ports: usize,
    mod_order: usize,
    quad: &QuadratureSpec,
) -> Result<Vec<BoundsRow>> {
    quad.validate()?;
    let params = users
        .iter()
        .map(|&u| BoundParams::new(u, n_star, n_ports, mod_order))
        .collect::<Result<Vec<_>>>()?;
    params
        .iter()
        .map(|p| {
            let mut note = None;
            let asep_lower = flagged(asep_lower(p, quad), "lower", &mut note)?;
            let asep_upper = flagged(asep_upper(p, quad), "upper", &mut note)?;
            Ok(BoundsRow {
                u: p.users(),
                n_star,
                n_ports,
                m: mod_order,
                asep_lower,
                asep_upper,
                note,
            })
        })
        .collect()
}

/// Bounds next to matched simulation results.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSweep {
    pub bounds: Vec<BoundsRow>,
    pub simulated: Vec<ResultRow>,
}

/// Sweeps the user count of `config`, pairing each point's simulated SER
/// with the bounds at `N* = n_rf` and `N` = number of ports.
pub fn run_bounds_sweep(config: &ExperimentConfig, quad: &QuadratureSpec) -> Result<BoundsSweep> {
    if config.sweep_variable != SweepVariable::Users {
        return Err(Error::Config(format!(
            "sweep_variable: bounds need a users sweep, got '{}'",
            config.sweep_variable
        )));
    }
    config.validate()?;
    let users = config
        .sweep_values
        .iter()
        .map(|&v| config.point(v).map(|p| p.users))
        .collect::<Result<Vec<_>>>()?;
    let bounds = bounds_table(&users, config.n_rf, config.grid.len(), config.mod_order, quad)?;
    let simulated = run_experiment(config)?;
    Ok(BoundsSweep { bounds, simulated })
}
