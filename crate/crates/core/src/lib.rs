//! Port selection, interference rejection combining and symbol-error
//! simulation for multi-port slow fluid antenna multiple access (FAMA).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod covariance;
pub mod error;
pub mod geometry;
pub mod harness;
mod linalg;
pub mod receiver;
pub mod selection;
pub mod specfun;
pub mod validate;

#[cfg(test)]
mod testutil;

pub use analysis::BoundParams;
pub use channel::{ChannelModel, ChannelSet, FiniteScatteringParams};
pub use error::{Error, Result};
pub use geometry::PortGrid;
pub use harness::{CsiMode, ExperimentConfig, ResultRow, SweepVariable, TrialRecord};
pub use linalg::frobenius_rel_error;
pub use receiver::Constellation;
pub use selection::{
    ExternalSelector, Method, PortSelector, SelectionProblem, SelectionResult, SinrMode,
};
pub use specfun::QuadratureSpec;

/// Complex baseband sample.
pub type C64 = num_complex::Complex64;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
