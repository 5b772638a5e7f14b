//! Amplitude prior, measurement channels and their densities.
//!
//! Each mode carries a complex amplitude `A + iB`. Heterodyne detection on a
//! mode returns `(X, Y)` with `X ~ N(A, 1/2)`, `Y ~ N(B, 1/2)`; photon counting
//! returns `Z ~ Poisson(A² + B²)`. Indices are 1-based throughout the public
//! API so that selections and networks read like their mode diagrams.

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::rng::RandomSource;
use std::f64::consts::PI;

/// True parameters of the amplitude prior: `A_j ~ N(theta, nu/2)`,
/// `B_j ~ N(eta, nu/2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub eta: f64,
    pub nu: f64,
}

impl ModelParams {
    pub fn new(theta: f64, eta: f64, nu: f64) -> Result<Self> {
        let p = Self { theta, eta, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("theta", self.theta)?;
        ensure_finite("eta", self.eta)?;
        ensure_finite("nu", self.nu)?;
        if self.nu < 0.0 {
            return Err(invalid("nu", format!("must be >= 0, got {}", self.nu)));
        }
        Ok(())
    }

    /// Prior variance of each amplitude component.
    pub fn component_variance(&self) -> f64 {
        self.nu / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeEnsemble {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl AmplitudeEnsemble {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        if a.is_empty() {
            return Err(invalid("n", "ensemble must be non-empty"));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Total energy `sum_j A_j² + B_j²`.
    pub fn energy(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| a * a + b * b)
            .sum()
    }
}

/// Sorted, duplicate-free set of heterodyne-observed mode indices (1-based).
/// Its complement in `1..=n` is observed by photon counting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSet {
    n: usize,
    indices: Vec<usize>,
}

impl SelectionSet {
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::SelectionMismatch(format!(
                    "duplicate index {}",
                    w[0]
                )));
            }
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(Self { n, indices })
    }

    /// All modes heterodyne-observed.
    pub fn all(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).collect())
    }

    /// Only mode 1 heterodyne-observed.
    pub fn first_only(n: usize) -> Result<Self> {
        Self::new(n, vec![1])
    }

    /// Block leaders `{2^m0 * j + 1 : j = 0..2^(m - m0)}` of a truncated
    /// binary-tree network.
    pub fn block_leaders(m: u32, m0: u32) -> Result<Self> {
        if m0 > m {
            return Err(invalid("m0", format!("must be <= m = {m}, got {m0}")));
        }
        let n = 1usize << m;
        let stride = 1usize << m0;
        Self::new(n, (0..(n / stride)).map(|j| stride * j + 1).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Counting-observed indices, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (1..=self.n).filter(|i| !self.contains(*i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heterodyne {
    pub index: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Count {
    pub index: usize,
    pub z: u64,
}

/// Heterodyne pairs for the selected modes and photon counts for the rest,
/// each list in ascending index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub het: Vec<Heterodyne>,
    pub counts: Vec<Count>,
}

impl Observations {
    pub fn n(&self) -> usize {
        self.het.len() + self.counts.len()
    }

    /// Checks that heterodyne and counting indices partition `1..=n`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n + 1];
        let indices = self
            .het
            .iter()
            .map(|h| h.index)
            .chain(self.counts.iter().map(|c| c.index));
        for i in indices {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::SelectionMismatch(format!(
                    "index {i} observed twice"
                )));
            }
            seen[i] = true;
        }
        Ok(())
    }

    pub fn het_indices(&self) -> Vec<usize> {
        self.het.iter().map(|h| h.index).collect()
    }
}

/// Draws `n` independent amplitudes from the prior.
pub fn sample_amplitudes(
    params: &ModelParams,
    n: usize,
    rng: &mut RandomSource,
) -> Result<AmplitudeEnsemble> {
    params.validate()?;
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let var = params.component_variance();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        a.push(rng.normal(params.theta, var));
        b.push(rng.normal(params.eta, var));
    }
    Ok(AmplitudeEnsemble { a, b })
}

/// Measures every mode: heterodyne on `sel`, counting on its complement.
/// Draws are made in ascending mode order.
pub fn measure(
    ensemble: &AmplitudeEnsemble,
    sel: &SelectionSet,
    rng: &mut RandomSource,
) -> Result<Observations> {
    if sel.n() != ensemble.len() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            actual: sel.n(),
        });
    }
    let mut het = Vec::with_capacity(sel.indices().len());
    let mut counts = Vec::with_capacity(ensemble.len() - sel.indices().len());
    for index in 1..=ensemble.len() {
        let (a, b) = (ensemble.a[index - 1], ensemble.b[index - 1]);
        if sel.contains(index) {
            let x = rng.normal(a, 0.5);
            let y = rng.normal(b, 0.5);
            het.push(Heterodyne { index, x, y });
        } else {
            let z = rng.poisson(a * a + b * b);
            counts.push(Count { index, z });
        }
    }
    Ok(Observations { het, counts })
}

fn ln_factorial(z: u64) -> f64 {
    (1..=z).map(|k| (k as f64).ln()).sum()
}

fn check_partition(obs: &Observations, n: usize) -> Result<()> {
    obs.validate()?;
    if obs.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: obs.n(),
        });
    }
    Ok(())
}

/// Log of the measurement likelihood given the amplitudes. Returns
/// `-inf` when a count is positive on a mode with zero intensity.
pub fn conditional_log_density(obs: &Observations, ensemble: &AmplitudeEnsemble) -> Result<f64> {
    check_partition(obs, ensemble.len())?;
    let mut total = 0.0;
    for h in &obs.het {
        let (a, b) = (ensemble.a[h.index - 1], ensemble.b[h.index - 1]);
        total += -(h.x - a).powi(2) - (h.y - b).powi(2) - PI.ln();
    }
    for c in &obs.counts {
        let (a, b) = (ensemble.a[c.index - 1], ensemble.b[c.index - 1]);
        let intensity = a * a + b * b;
        if intensity == 0.0 {
            // 0^0 = 1
            if c.z > 0 {
                return Ok(f64::NEG_INFINITY);
            }
            continue;
        }
        total += -intensity + c.z as f64 * intensity.ln() - ln_factorial(c.z);
    }
    Ok(total)
}

fn normal_log_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * (2.0 * PI * variance).ln() - (x - mean).powi(2) / (2.0 * variance)
}

/// Log of the marginal likelihood for untransformed independent modes, where
/// modes in `signal` carry means `(theta, eta)` and the remaining modes carry
/// mean zero. `signal` must coincide with the heterodyne-observed set.
pub fn marginal_log_density(
    obs: &Observations,
    params: &ModelParams,
    signal: &SelectionSet,
) -> Result<f64> {
    params.validate()?;
    check_partition(obs, signal.n())?;
    if obs.het_indices() != signal.indices() {
        return Err(Error::SelectionMismatch(
            "signal set must equal the heterodyne-observed set".into(),
        ));
    }
    let var = (params.nu + 1.0) / 2.0;
    let mut total = 0.0;
    for h in &obs.het {
        total += normal_log_pdf(h.x, params.theta, var) + normal_log_pdf(h.y, params.eta, var);
    }
    // Geometric with mean nu.
    let nu = params.nu;
    for c in &obs.counts {
        total -= (nu + 1.0).ln();
        if c.z > 0 {
            if nu == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += c.z as f64 * (nu / (nu + 1.0)).ln();
        }
    }
    Ok(total)
}
