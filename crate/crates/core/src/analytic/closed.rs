//! Closed-form expressions for the Hayashi estimators on the noisy tree, the
//! two-mode mean square errors, and the corrected location estimators.
//!
//! Every expression with a removable singularity (at `epsilon = 0` or where
//! `2^epsilon = 2`) is rewritten as a polynomial or `expm1` sum that is finite
//! and accurate across the whole range.

use super::moments::{estimator_moments, Family};
use crate::error::{invalid, Result};
use crate::estimators::binary_geometric_sum;
use crate::model::ModelParams;
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Theorem1Result {
    pub e_theta: f64,
    pub e_eta: f64,
    pub v_theta: f64,
    pub v_eta: f64,
    pub e_nu: f64,
    /// Only the asymptotic order of this variance has a closed form; it is
    /// filled in from the moment engine where available.
    pub v_nu: Option<f64>,
}

fn check(epsilon: f64, m: u32) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if m == 0 || m > 1000 {
        return Err(invalid("m", format!("need 1 <= m <= 1000, got {m}")));
    }
    Ok(())
}

/// Coefficient `c` in `E(nu_hat) = nu + c (theta² + eta²)`:
/// `sum_{i<m} 2^{m-1-i} u^i (u^{m+1-i} - 1) / (u^{m+1} (n - 1))`, `u = 2^eps`.
pub fn hayashi_nu_bias_coefficient(epsilon: f64, m: u32) -> f64 {
    let d = epsilon * LN_2;
    let u = epsilon.exp2();
    let n = (m as f64).exp2();
    let mut sum = 0.0;
    for i in 0..m {
        let w = ((m - 1 - i) as f64).exp2() * u.powi(i as i32);
        sum += w * (((m + 1 - i) as f64) * d).exp_m1();
    }
    sum / (u.powi(m as i32 + 1) * (n - 1.0))
}

/// Excess of `V(theta_hat)` over the noiseless `(1 + nu)/(2n)`, per unit
/// `theta²`.
fn hayashi_location_excess(epsilon: f64, m: u32) -> f64 {
    let u = epsilon.exp2();
    let n = (m as f64).exp2();
    let um1 = (epsilon * LN_2).exp_m1();
    um1 * um1 * binary_geometric_sum(m, u) / (n * u.powi(m as i32 + 1))
}

/// Means and variances of the Hayashi estimators on `n = 2^m` modes with
/// angle noise `epsilon`. `v_nu` is left empty.
pub fn theorem1_closed_forms(theta: f64, eta: f64, nu: f64, epsilon: f64, m: u32) -> Result<Theorem1Result> {
    ModelParams::new(theta, eta, nu)?;
    check(epsilon, m)?;
    let n = (m as f64).exp2();
    let shrink = (-epsilon * m as f64 / 2.0).exp2();
    let base = (1.0 + nu) / (2.0 * n);
    let excess = hayashi_location_excess(epsilon, m);
    Ok(Theorem1Result {
        e_theta: shrink * theta,
        e_eta: shrink * eta,
        v_theta: base + excess * theta * theta,
        v_eta: base + excess * eta * eta,
        e_nu: nu + hayashi_nu_bias_coefficient(epsilon, m) * (theta * theta + eta * eta),
        v_nu: None,
    })
}

/// Closed forms with `v_nu` completed by the moment engine.
pub fn theorem1_with_engine(params: &ModelParams, epsilon: f64, m: u32) -> Result<Theorem1Result> {
    let mut r = theorem1_closed_forms(params.theta, params.eta, params.nu, epsilon, m)?;
    r.v_nu = Some(estimator_moments(params, epsilon, m, Family::Hayashi)?.var[2]);
    Ok(r)
}

/// Mean square errors of the naive (`m_bar`) and Hayashi (`m_hat`) `nu`
/// estimators for two modes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MsePair {
    pub m_bar: f64,
    pub m_hat: f64,
}

/// Two-mode mean square errors. The quartic term carries `(theta² + eta²)²`,
/// which is what the moment engine gives; the form with `theta⁴ + eta⁴`
/// agrees with it whenever `theta * eta = 0`.
pub fn mse_n2(theta: f64, eta: f64, nu: f64, epsilon: f64) -> Result<MsePair> {
    ModelParams::new(theta, eta, nu)?;
    check(epsilon, 1)?;
    let d = epsilon * LN_2;
    let r2 = theta * theta + eta * eta;
    // 1 - 2^{-2 eps}
    let lin = -(-2.0 * d).exp_m1();
    // (3 + 2^{-8 eps} - 4^{1 - eps}) / 2 = (x^4 - 4x + 3)/2 with x = 2^{-2 eps}
    // = (1 - x)^2 (x^2 + 2x + 3) / 2
    let x = (-2.0 * epsilon).exp2();
    let quartic = lin * lin * (x * x + 2.0 * x + 3.0) / 2.0;
    Ok(MsePair {
        m_bar: (nu + 1.0).powi(2),
        m_hat: nu * nu + nu + (2.0 * nu + 1.0) * lin * r2 + quartic * r2 * r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorrectedMoments {
    pub e_theta: f64,
    pub e_eta: f64,
    pub v_theta: f64,
    pub v_eta: f64,
    pub e_nu: f64,
    pub v_nu: f64,
}

/// Excess of `V(theta_tilde)` per unit `theta²`:
/// `(u - 1)² G_{m0}(u) / (u 2^m)` with `G_k(u) = (2^k - u^k)/(2 - u)`.
fn corrected_location_excess(epsilon: f64, m: u32, m0: u32) -> f64 {
    let u = epsilon.exp2();
    let um1 = (epsilon * LN_2).exp_m1();
    um1 * um1 * binary_geometric_sum(m0, u) / (u * (m as f64).exp2())
}

/// Moments of the corrected estimators. Location moments are closed form;
/// the `nu` moments come from the moment engine.
pub fn corrected_closed_forms(params: &ModelParams, epsilon: f64, m: u32, m0: u32) -> Result<CorrectedMoments> {
    params.validate()?;
    check(epsilon, m)?;
    if m0 > m {
        return Err(invalid("m0", format!("must be in 0..={m}, got {m0}")));
    }
    let base = (1.0 + params.nu) / (1.0 + m as f64 - epsilon * m0 as f64).exp2();
    let excess = corrected_location_excess(epsilon, m, m0);
    let engine = estimator_moments(params, epsilon, m, Family::Corrected(m0))?;
    Ok(CorrectedMoments {
        e_theta: params.theta,
        e_eta: params.eta,
        v_theta: base + excess * params.theta * params.theta,
        v_eta: base + excess * params.eta * params.eta,
        e_nu: engine.mean[2],
        v_nu: engine.var[2],
    })
}
