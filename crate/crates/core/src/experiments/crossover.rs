use crate::analytic::mse_n2;
use crate::error::{invalid, Error, Result};
use serde::Serialize;

/// Largest `theta` searched before giving up.
pub const CROSSOVER_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverPoint {
    pub nu: f64,
    pub epsilon: f64,
    pub theta_star: f64,
    /// `|M_hat - M_bar| / M_bar` at `theta_star`.
    pub residual: f64,
}

fn gap(theta: f64, nu: f64, epsilon: f64) -> Result<f64> {
    let p = mse_n2(theta, 0.0, nu, epsilon)?;
    Ok(p.m_hat - p.m_bar)
}

/// The `theta > 0` (with `eta = 0`) at which the two-mode Hayashi and naive
/// mean square errors for `nu` coincide.
///
/// The gap is negative at the origin and increasing in `theta²`, so the root
/// is unique; it is bracketed by doubling and then bisected down to adjacent
/// floats.
pub fn crossover_theta(nu: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid("epsilon", format!("must be finite and > 0, got {epsilon}")));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(invalid("nu", format!("must be finite and >= 0, got {nu}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while gap(hi, nu, epsilon)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if lo >= CROSSOVER_LIMIT {
            return Err(Error::NoCrossover { limit: CROSSOVER_LIMIT });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid, nu, epsilon)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (gap(lo, nu, epsilon)?.abs(), gap(hi, nu, epsilon)?.abs());
    Ok(if glo < ghi { lo } else { hi })
}

pub fn crossover_point(nu: f64, epsilon: f64) -> Result<CrossoverPoint> {
    let theta_star = crossover_theta(nu, epsilon)?;
    let p = mse_n2(theta_star, 0.0, nu, epsilon)?;
    Ok(CrossoverPoint { nu, epsilon, theta_star, residual: (p.m_hat - p.m_bar).abs() / p.m_bar })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_has_tiny_residual() {
        for &nu in &[0.0, 0.1, 1.0, 10.0, 100.0] {
            for &eps in &[0.01, 0.05, 0.2, 1.0, 3.0] {
                let c = crossover_point(nu, eps).unwrap();
                assert!(c.theta_star > 0.0);
                assert!(c.residual <= 1e-9, "{nu} {eps}: {}", c.residual);
            }
        }
    }

    #[test]
    fn noiseless_has_no_crossover_and_is_rejected() {
        assert!(crossover_theta(1.0, 0.0).is_err());
        assert!(matches!(crossover_theta(1.0, 1e-16), Err(Error::NoCrossover { .. })));
    }

    #[test]
    fn large_nu_approaches_asymptote() {
        for eps in [0.05f64, 0.5] {
            let x = (-2.0 * eps).exp2();
            let limit = (1.0 / (2.0 * (1.0 - x))).sqrt();
            let t = crossover_theta(1e8, eps).unwrap();
            assert!((t / limit - 1.0).abs() < 1e-3, "{t} {limit}");
        }
    }
}
