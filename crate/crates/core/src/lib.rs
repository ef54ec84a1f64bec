//! Continuous-time Markov models of adaptive immune learning.
//!
//! Two chains are covered. The single-column chain counts how many of `M`
//! attributes of one component are learned; it climbs one step at a time
//! and is reset to zero by mutation. The matrix chain tracks all `N`
//! components at once as an `M × N` binary matrix whose rows are learned
//! together, whose columns are forgotten together, and whose entries can be
//! learned individually (PAI, rate `λ_m/M`).
//!
//! Modules:
//! - [`model`]: parameters, states, transition rates, operator algebra
//! - [`engine`]: exact Gillespie simulation with reproducible streams
//! - [`analytics`]: invariant laws, hitting-time moments, coupon-collector
//!   formulas, steady-state column counts, transition-time predictions
//! - [`sampler`]: perfect sampling of the matrix chain's invariant law
//! - [`oracle`]: dense solvers and exact enumeration for validation
//! - [`stats`]: confidence intervals, TV distance, chi-square, transition windows

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod engine;
pub mod error;
pub mod gamma;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use model::{ColumnState, MatrixEvent, MatrixParams, MatrixState, SingleColumnParams};
