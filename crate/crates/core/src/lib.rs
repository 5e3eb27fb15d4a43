//! Quantum Renyi divergences via convex optimization.
//!
//! State- and channel-level divergences defined through semidefinite
//! programs with weighted-matrix-geometric-mean constraints, plus the
//! closed-form reference divergences, tensor-power hierarchy bounds, and
//! channel capacity / discrimination bounds built on top of them.

pub mod channel_div;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod hermitian;
pub mod meanrep;
pub mod quantum;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete `f64` aliases for the common case.
pub type Matrix = hermitian::CMatrix<f64>;
pub type Operator = hermitian::HermitianOperator<f64>;
pub type State = quantum::QState<f64>;
pub type Channel = quantum::QChannel<f64>;
pub type Solution = sdp::ConicSolution<f64>;
pub type Divergence = divergence::DivergenceResult<f64>;
pub type ChannelDivergence = channel_div::ChannelDivResult<f64>;
