//! Estimation of the location and scale of a Gaussian P-function model
//! through noisy beam-splitter networks: sampling, estimators, exact moment
//! analysis and Monte Carlo experiments.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod model;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
