//! Exact means and variances of every estimator family under the noisy
//! (truncated) binary-tree network, assembled from [`MomentTables`].

use super::engine::{g2_moment_engine, MomentTables};
use crate::error::{invalid, Result};
use crate::estimators::{corrected_location_scale, corrected_nu_coefficients};
use crate::model::ModelParams;

/// Which estimator is evaluated on the `2^m`-mode tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Family {
    /// No network, heterodyne everywhere.
    Naive,
    /// Full tree, `X_1 / sqrt(n)`.
    Hayashi,
    /// Tree stopped after `m0` stages, rescaled block-leader sums.
    Corrected(u32),
}

impl Family {
    pub fn depth(&self, m: u32) -> u32 {
        match self {
            Family::Naive => 0,
            Family::Hayashi => m,
            Family::Corrected(m0) => *m0,
        }
    }
}

/// Mean and variance of `(theta, eta, nu)` estimates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EstimatorMoments {
    pub mean: [f64; 3],
    pub var: [f64; 3],
}

impl EstimatorMoments {
    pub fn bias(&self, params: &ModelParams) -> [f64; 3] {
        let truth = [params.theta, params.eta, params.nu];
        [0, 1, 2].map(|i| self.mean[i] - truth[i])
    }

    /// Per-component mean square error.
    pub fn mse(&self, params: &ModelParams) -> [f64; 3] {
        let b = self.bias(params);
        [0, 1, 2].map(|i| self.var[i] + b[i] * b[i])
    }

    /// Sum of the three mean square errors.
    pub fn total_mse(&self, params: &ModelParams) -> f64 {
        self.mse(params).iter().sum()
    }
}

/// Per-block summary of one tree block of `2^m0` modes: counts on its
/// residuals (`Zb`), heterodyne on its leader (`X`, `Y`) and `H = X² + Y²`.
#[derive(Debug, Clone, Copy)]
struct BlockStats {
    mean_x: f64,
    mean_y: f64,
    ex2: f64,
    ey2: f64,
    exy: f64,
    mean_z: f64,
    var_z: f64,
    mean_h: f64,
    var_h: f64,
    cov_zh: f64,
    cov_zx: f64,
    cov_zy: f64,
    cov_hx: f64,
    cov_hy: f64,
}

fn block_stats(tables: &MomentTables) -> BlockStats {
    let m0 = tables.m0;
    let leader = tables.leader();
    let (mean_x, mean_y) = leader.mean();
    let count = |t: u32| ((m0 - t) as f64).exp2();

    let mut mean_q = 0.0;
    let mut var_q = 0.0;
    let mut cov_zh = 0.0;
    let mut cov_zx = 0.0;
    let mut cov_zy = 0.0;
    let lq = leader.intensity();
    for t in 1..=m0 {
        let r = tables.residual(t);
        let c = count(t);
        mean_q += c * r.intensity();
        var_q += c * r.intensity_var();
        for t2 in (t + 1)..=m0 {
            let joint = tables.residual_pair(t, t2);
            let cov = joint.intensity_product() - r.intensity() * tables.residual(t2).intensity();
            var_q += 2.0 * c * cov;
        }
        let rl = tables.residual_leader(t);
        cov_zh += c * (rl.intensity_product() - r.intensity() * lq);
        let (qa, qb) = rl.intensity_times_mean();
        cov_zx += c * (qa - r.intensity() * mean_x);
        cov_zy += c * (qb - r.intensity() * mean_y);
    }
    // Poisson counts: Var Z = E[Q] + Var Q.
    let var_z = mean_q + var_q;

    // Heterodyne given the leader: E[H|L] = Q + 1, Var[H|L] = 2Q + 1.
    let mean_h = lq + 1.0;
    let var_h = 2.0 * lq + 1.0 + leader.intensity_var();
    let e_aq = leader.get(3, 0) + leader.get(1, 2);
    let e_bq = leader.get(2, 1) + leader.get(0, 3);
    BlockStats {
        mean_x,
        mean_y,
        ex2: leader.get(2, 0) + 0.5,
        ey2: leader.get(0, 2) + 0.5,
        exy: leader.get(1, 1),
        mean_z: mean_q,
        var_z,
        mean_h,
        var_h,
        cov_zh,
        cov_zx,
        cov_zy,
        cov_hx: e_aq + 2.0 * mean_x - mean_h * mean_x,
        cov_hy: e_bq + 2.0 * mean_y - mean_h * mean_y,
    }
}

/// Exact moments of the chosen estimator family on `n = 2^m` modes with
/// splitter angles `N(pi/4, epsilon ln 2)`.
pub fn estimator_moments(params: &ModelParams, epsilon: f64, m: u32, family: Family) -> Result<EstimatorMoments> {
    if m == 0 {
        return Err(invalid("m", "need n = 2^m >= 2"));
    }
    let m0 = family.depth(m);
    let tables = g2_moment_engine(params, epsilon, m, m0)?;
    Ok(moments_from_tables(&tables, epsilon, m, family))
}

pub(crate) fn moments_from_tables(tables: &MomentTables, epsilon: f64, m: u32, family: Family) -> EstimatorMoments {
    let m0 = tables.m0;
    let s = block_stats(tables);
    let k = ((m - m0) as f64).exp2();

    let scale = match family {
        Family::Hayashi => (m as f64 / 2.0).exp2(),
        Family::Naive | Family::Corrected(_) => corrected_location_scale(m, m0, epsilon),
    };
    let mean_theta = k * s.mean_x / scale;
    let mean_eta = k * s.mean_y / scale;
    let var_theta = k * (s.ex2 - s.mean_x * s.mean_x) / (scale * scale);
    let var_eta = k * (s.ey2 - s.mean_y * s.mean_y) / (scale * scale);

    let [count, quad, cross, offset] =
        corrected_nu_coefficients(m, m0, epsilon).expect("validated depth and epsilon");

    // nu = sum_b U_b - cross * P - offset, U_b = count Zb + quad Hb,
    // P = sum_{b != c} (X_b X_c + Y_b Y_c) over independent blocks.
    let mean_u = count * s.mean_z + quad * s.mean_h;
    let var_u = count * count * s.var_z + quad * quad * s.var_h + 2.0 * count * quad * s.cov_zh;
    let cov_ux = count * s.cov_zx + quad * s.cov_hx;
    let cov_uy = count * s.cov_zy + quad * s.cov_hy;

    let w1 = s.mean_x * s.mean_x + s.mean_y * s.mean_y;
    let var_w = s.ex2 * s.ex2 + 2.0 * s.exy * s.exy + s.ey2 * s.ey2 - w1 * w1;
    let shared_one = s.ex2 * s.mean_x * s.mean_x
        + 2.0 * s.exy * s.mean_x * s.mean_y
        + s.ey2 * s.mean_y * s.mean_y
        - w1 * w1;
    let var_p = 4.0 * (k * (k - 1.0) / 2.0 * var_w + k * (k - 1.0) * (k - 2.0) * shared_one);
    let cov_up = 2.0 * k * (k - 1.0) * (s.mean_x * cov_ux + s.mean_y * cov_uy);

    let mean_nu = k * mean_u - cross * k * (k - 1.0) * w1 - offset;
    let var_nu = k * var_u + cross * cross * var_p - 2.0 * cross * cov_up;

    EstimatorMoments {
        mean: [mean_theta, mean_eta, mean_nu],
        var: [var_theta, var_eta, var_nu],
    }
}

/// Exact `V(nu_hat)` of the Hayashi estimator on the noisy full tree.
pub fn hayashi_nu_variance(params: &ModelParams, epsilon: f64, m: u32) -> Result<f64> {
    Ok(estimator_moments(params, epsilon, m, Family::Hayashi)?.var[2])
}
