//! Moment estimators for `(theta, eta, nu)` and their nominal covariances.
//!
//! Three families are provided:
//!
//! * naive: heterodyne on every mode, no network;
//! * Hayashi: heterodyne on mode 1 after a concentrating network, counts on
//!   the rest;
//! * corrected: the binary tree stopped after `m0` stages, heterodyne on the
//!   `2^(m-m0)` block leaders, counts on the rest.
//!
//! Variance estimates of `nu` are returned untruncated and can be negative.

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::model::{Observations, SelectionSet};
use nalgebra::{Matrix3, SymmetricEigen};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimates {
    pub theta_hat: f64,
    pub eta_hat: f64,
    pub nu_hat: f64,
}

impl Estimates {
    pub fn as_array(&self) -> [f64; 3] {
        [self.theta_hat, self.eta_hat, self.nu_hat]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix3(pub [[f64; 3]; 3]);

impl CovarianceMatrix3 {
    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = d[i];
        }
        Self(m)
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= other.0[i][j];
            }
        }
        Self(m)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.0[i][j] == self.0[j][i]))
    }

    /// Smallest eigenvalue of the (symmetric) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = Matrix3::from_fn(|i, j| self.0[i][j]);
        SymmetricEigen::new(m).eigenvalues.min()
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.is_symmetric() && self.min_eigenvalue() >= -tol
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid("n", format!("must be >= 2, got {n}")));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    ensure_finite("nu", nu)?;
    if nu < 0.0 {
        return Err(invalid("nu", format!("must be >= 0, got {nu}")));
    }
    Ok(())
}

/// Sample means of `X`, `Y` and the pooled unbiased sample variance minus the
/// heterodyne noise.
pub fn naive_estimate(obs: &Observations) -> Result<Estimates> {
    obs.validate()?;
    if !obs.counts.is_empty() {
        return Err(Error::SelectionMismatch(
            "naive estimator needs heterodyne on every mode".into(),
        ));
    }
    let n = obs.het.len();
    check_n(n)?;
    let nf = n as f64;
    let theta = obs.het.iter().map(|h| h.x).sum::<f64>() / nf;
    let eta = obs.het.iter().map(|h| h.y).sum::<f64>() / nf;
    let ssx: f64 = obs.het.iter().map(|h| (h.x - theta).powi(2)).sum();
    let ssy: f64 = obs.het.iter().map(|h| (h.y - eta).powi(2)).sum();
    Ok(Estimates {
        theta_hat: theta,
        eta_hat: eta,
        nu_hat: ssx / (nf - 1.0) + ssy / (nf - 1.0) - 1.0,
    })
}

pub fn naive_covariance(nu: f64, n: usize) -> Result<CovarianceMatrix3> {
    check_n(n)?;
    check_nu(nu)?;
    let nf = n as f64;
    let loc = (nu + 1.0) / (2.0 * nf);
    Ok(CovarianceMatrix3::diag([loc, loc, (nu + 1.0).powi(2) / (nf - 1.0)]))
}

/// `X_1/sqrt(n)`, `Y_1/sqrt(n)` and the mean count over modes `2..=n`.
pub fn hayashi_estimate(obs: &Observations) -> Result<Estimates> {
    obs.validate()?;
    let n = obs.n();
    check_n(n)?;
    if obs.het.len() != 1 || obs.het[0].index != 1 {
        return Err(Error::SelectionMismatch(
            "Hayashi estimator needs heterodyne on mode 1 only".into(),
        ));
    }
    let root_n = (n as f64).sqrt();
    let total: u64 = obs.counts.iter().map(|c| c.z).sum();
    Ok(Estimates {
        theta_hat: obs.het[0].x / root_n,
        eta_hat: obs.het[0].y / root_n,
        nu_hat: total as f64 / (n as f64 - 1.0),
    })
}

pub fn hayashi_covariance(nu: f64, n: usize) -> Result<CovarianceMatrix3> {
    check_n(n)?;
    check_nu(nu)?;
    let nf = n as f64;
    let loc = (nu + 1.0) / (2.0 * nf);
    Ok(CovarianceMatrix3::diag([loc, loc, nu * (nu + 1.0) / (nf - 1.0)]))
}

/// `sum_{i=0}^{k-1} 2^{k-1-i} u^i`, i.e. `(2^k - u^k) / (2 - u)` without the
/// removable singularity at `u = 2`.
pub(crate) fn binary_geometric_sum(k: u32, u: f64) -> f64 {
    // Horner from the top power: ((1*u + 2)*u + 4)*u + ... + 2^{k-1}
    let mut sum = 0.0;
    let mut coeff = 1.0;
    for _ in 0..k {
        sum = sum * u + coeff;
        coeff *= 2.0;
    }
    sum
}

/// Coefficient pair of the cross-product term of the corrected `nu` estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    /// Direct evaluation of the numerator display.
    pub alpha: f64,
    /// Direct evaluation of the denominator display.
    pub beta: f64,
    /// `alpha / beta`, evaluated in factored form that stays finite at
    /// `epsilon = 1` (where both displays vanish) and avoids cancellation
    /// for small `epsilon`.
    pub ratio: f64,
}

pub fn alpha_beta(m: u32, m0: u32, epsilon: f64) -> Result<AlphaBeta> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if m0 >= m {
        return Err(invalid(
            "m0",
            format!("cross-term coefficient needs m0 < m, got m0 = {m0}, m = {m}"),
        ));
    }
    let (mf, m0f, e) = (m as f64, m0 as f64, epsilon);
    let p2 = |x: f64| x.exp2();
    let alpha = p2(-e - mf - m0f)
        * (p2((2.0 + e) * m0f) - p2(1.0 + e + 2.0 * m0f + e * m0f)
            + p2(1.0 + e + mf + 2.0 * m0f + e * m0f)
            + p2(2.0 * m0f + e * (2.0 + m0f))
            - p2(mf + 2.0 * m0f + e * (2.0 + m0f))
            - p2(3.0 * m0f));
    let beta = (-2.0 + p2(e)) * (-1.0 + p2(mf)) * (-p2(mf) + p2(m0f));

    let u = p2(e);
    let n = p2(mf);
    let a = p2(m0f);
    let numer = (n - 1.0) * u.powi(m0 as i32 + 1) - binary_geometric_sum(m0, u);
    let ratio = a * numer / (u * n * (n - 1.0) * (n - a));
    Ok(AlphaBeta { alpha, beta, ratio })
}

/// Normalizer `2^{m - m0/2 - epsilon m0/2}` of the corrected location
/// estimators, split so that `m0 = 0` gives exactly `2^m`.
pub fn corrected_location_scale(m: u32, m0: u32, epsilon: f64) -> f64 {
    let blocks = ((m - m0) as f64).exp2();
    blocks * (m0 as f64 * (1.0 - epsilon) / 2.0).exp2()
}

/// Coefficients `(count, quadratic, cross, offset)` of the corrected `nu`
/// estimator
/// `count * sum Z + quadratic * sum (X²+Y²) - cross * sum_{j≠k} (X_j X_k + Y_j Y_k) - offset`.
pub fn corrected_nu_coefficients(m: u32, m0: u32, epsilon: f64) -> Result<[f64; 4]> {
    let n = (m as f64).exp2();
    let count = 1.0 / (n - 1.0);
    if m0 == m {
        return Ok([count, 0.0, 0.0, 0.0]);
    }
    let k = ((m - m0) as f64).exp2();
    let a = (m0 as f64).exp2();
    let quadratic = (k - 1.0) / ((n - 1.0) * k);
    let cross = alpha_beta(m, m0, epsilon)?.ratio;
    let offset = (n - a) / (a * (n - 1.0));
    Ok([count, quadratic, cross, offset])
}

pub fn corrected_estimate(obs: &Observations, m: u32, m0: u32, epsilon: f64) -> Result<Estimates> {
    if m0 > m {
        return Err(invalid("m0", format!("must be in 0..={m}, got {m0}")));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    obs.validate()?;
    let expected = SelectionSet::block_leaders(m, m0)?;
    if obs.n() != expected.n() || obs.het_indices() != expected.indices() {
        return Err(Error::SelectionMismatch(format!(
            "corrected estimator (m = {m}, m0 = {m0}) needs heterodyne exactly on the block leaders"
        )));
    }
    let scale = corrected_location_scale(m, m0, epsilon);
    let sum_x: f64 = obs.het.iter().map(|h| h.x).sum();
    let sum_y: f64 = obs.het.iter().map(|h| h.y).sum();
    let total: u64 = obs.counts.iter().map(|c| c.z).sum();
    let n = (m as f64).exp2();
    let mut nu = total as f64 / (n - 1.0);
    if m0 < m {
        let [_, quadratic, cross, offset] = corrected_nu_coefficients(m, m0, epsilon)?;
        let sum_sq: f64 = obs.het.iter().map(|h| h.x * h.x + h.y * h.y).sum();
        let pairs = sum_x * sum_x + sum_y * sum_y - sum_sq;
        nu += quadratic * sum_sq - cross * pairs - offset;
    }
    Ok(Estimates {
        theta_hat: sum_x / scale,
        eta_hat: sum_y / scale,
        nu_hat: nu,
    })
}
