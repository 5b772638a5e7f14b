//! Expectations of `cos^p(tau) sin^q(tau)` for Gaussian `tau`.

use crate::error::{invalid, Result};
use num_complex::Complex64;

/// Largest total power `p + q` supported.
pub const MAX_TRIG_ORDER: u32 = 8;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[cos^p(tau) sin^q(tau)]` for `tau ~ N(mean, variance)`.
///
/// Expands the product into complex exponentials and uses
/// `E[exp(i w tau)] = exp(i w mean - w² variance / 2)`.
pub fn trig_moment(p: u32, q: u32, mean: f64, variance: f64) -> Result<f64> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(invalid("variance", format!("must be finite and >= 0, got {variance}")));
    }
    if p + q > MAX_TRIG_ORDER {
        return Err(invalid("p + q", format!("must be <= {MAX_TRIG_ORDER}, got {}", p + q)));
    }
    Ok(trig_moment_unchecked(p, q, mean, variance))
}

fn trig_moment_unchecked(p: u32, q: u32, mean: f64, variance: f64) -> f64 {
    // cos = (e^{it} + e^{-it})/2, sin = (e^{it} - e^{-it})/(2i)
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=p {
        for k in 0..=q {
            let w = (2 * j + 2 * k) as f64 - (p + q) as f64;
            let sign = if (q - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            let coeff = sign * binomial(p, j) * binomial(q, k);
            let damp = (-0.5 * w * w * variance).exp();
            let (s, c) = (w * mean).sin_cos();
            acc += Complex64::new(c, s) * (coeff * damp);
        }
    }
    // (2i)^{-q} = 2^{-q} (-i)^q
    let rot = match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    (acc * rot).re / 2f64.powi((p + q) as i32)
}

/// All trigonometric moments up to [`MAX_TRIG_ORDER`] for one angle law.
#[derive(Debug, Clone)]
pub struct TrigTable {
    table: [[f64; (MAX_TRIG_ORDER + 1) as usize]; (MAX_TRIG_ORDER + 1) as usize],
}

impl TrigTable {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        trig_moment(0, 0, mean, variance)?;
        let mut table = [[f64::NAN; (MAX_TRIG_ORDER + 1) as usize]; (MAX_TRIG_ORDER + 1) as usize];
        for p in 0..=MAX_TRIG_ORDER {
            for q in 0..=(MAX_TRIG_ORDER - p) {
                table[p as usize][q as usize] = trig_moment_unchecked(p, q, mean, variance);
            }
        }
        Ok(Self { table })
    }

    /// `E[cos^p sin^q]`.
    #[inline]
    pub fn get(&self, p: u32, q: u32) -> f64 {
        self.table[p as usize][q as usize]
    }
}
