//! Exact analysis: trigonometric moments, moment propagation through the
//! noisy binary tree, and closed-form estimator moments.

mod closed;
mod engine;
mod moments;
mod trig;

pub use closed::{
    corrected_closed_forms, hayashi_nu_bias_coefficient, mse_n2, theorem1_closed_forms,
    theorem1_with_engine, CorrectedMoments, MsePair, Theorem1Result,
};
pub use engine::{g2_moment_engine, JointMoments, MomentTables, PairMoments};
pub use moments::{estimator_moments, hayashi_nu_variance, EstimatorMoments, Family};
pub use trig::{trig_moment, TrigTable, MAX_TRIG_ORDER};
