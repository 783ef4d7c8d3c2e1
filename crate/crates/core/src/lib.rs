//! Nonparametric estimation of the multivariate extremal index function
//! `theta(tau)` of a stationary multivariate series by block declustering,
//! with exact oracles and simulators for three benchmark processes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod oracles;
pub mod series;
pub mod simulators;

pub use error::{Error, Result};
pub use estimators::{block_statistics, theta1, theta2, theta3, EstimatorReport, HomogeneousNorm};
pub use series::{BlockCounts, BlockScheme, Direction, MultivariateSeries, ThresholdVector};
pub use simulators::Seed;
