//! Coverage and cost of downlink cellular networks with Poisson base
//! stations, where base stations whose cells hold no mobile stay silent.
//!
//! [`analytic`] holds the closed forms, [`pointprocess`] and [`montecarlo`]
//! simulate the same model, and [`optimizer`] searches the BS density that
//! minimizes the network cost.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod output;
pub mod pointprocess;
pub mod stats;

pub use analytic::{CostParams, Mode, ModelParams, QuadratureSpec};
pub use error::{Error, Result};
pub use montecarlo::{EstimatorKind, SimConfig, TransmitMode};
pub use optimizer::{GapReport, OptimizeSpec};
pub use pointprocess::{Point, PointPattern, RngStream, Window};
pub use stats::Estimate;
