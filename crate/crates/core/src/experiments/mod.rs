//! Monte Carlo harness, crossover solver and the relative-error grid.

mod accum;
mod crossover;
mod mc;
pub mod output;
mod table1;

pub use accum::Moments;
pub use crossover::{crossover_point, crossover_theta, CrossoverPoint, CROSSOVER_LIMIT};
pub use mc::{rao_blackwell_mc, run_monte_carlo, MCSummary};
pub use table1::{table1_exact, table1_grid, M0Policy, RelErrRow};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::network::NoiseSpec;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    None,
    G1,
    G2,
    G2Truncated(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Naive,
    Hayashi,
    Corrected(u32),
}

impl NetworkKind {
    pub fn label(&self) -> String {
        match self {
            NetworkKind::None => "none".into(),
            NetworkKind::G1 => "g1".into(),
            NetworkKind::G2 => "g2".into(),
            NetworkKind::G2Truncated(m0) => format!("g2_truncated({m0})"),
        }
    }
}

impl EstimatorKind {
    pub fn label(&self) -> String {
        match self {
            EstimatorKind::Naive => "naive".into(),
            EstimatorKind::Hayashi => "hayashi".into(),
            EstimatorKind::Corrected(m0) => format!("corrected({m0})"),
        }
    }
}

/// One Monte Carlo experiment. Replicate `r` draws from stream
/// `stream_base + r` of `seed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub params: ModelParams,
    pub n: usize,
    pub network: NetworkKind,
    pub noise: NoiseSpec,
    pub estimator: EstimatorKind,
    pub replicates: u64,
    pub seed: u64,
    pub stream_base: u64,
}

fn log2_exact(n: usize) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

impl Scenario {
    pub fn new(
        params: ModelParams,
        n: usize,
        network: NetworkKind,
        noise: NoiseSpec,
        estimator: EstimatorKind,
        replicates: u64,
        seed: u64,
    ) -> Result<Self> {
        let sc = Self { params, n, network, noise, estimator, replicates, seed, stream_base: 0 };
        sc.validate()?;
        Ok(sc)
    }

    /// Naive estimators on `n` untransformed modes.
    pub fn naive(params: ModelParams, n: usize, replicates: u64, seed: u64) -> Result<Self> {
        Self::new(params, n, NetworkKind::None, NoiseSpec::noiseless(), EstimatorKind::Naive, replicates, seed)
    }

    /// Hayashi estimators after the (noisy) binary tree on `2^m` modes.
    pub fn hayashi(params: ModelParams, m: u32, epsilon: f64, replicates: u64, seed: u64) -> Result<Self> {
        let n = 1usize.checked_shl(m).ok_or_else(|| invalid("m", "too large"))?;
        Self::new(params, n, NetworkKind::G2, NoiseSpec::new(epsilon)?, EstimatorKind::Hayashi, replicates, seed)
    }

    /// Corrected estimators after `m0` noisy tree stages on `2^m` modes.
    pub fn corrected(params: ModelParams, m: u32, m0: u32, epsilon: f64, replicates: u64, seed: u64) -> Result<Self> {
        let n = 1usize.checked_shl(m).ok_or_else(|| invalid("m", "too large"))?;
        Self::new(
            params,
            n,
            NetworkKind::G2Truncated(m0),
            NoiseSpec::new(epsilon)?,
            EstimatorKind::Corrected(m0),
            replicates,
            seed,
        )
    }

    pub fn with_stream_base(mut self, base: u64) -> Result<Self> {
        self.stream_base = base;
        self.validate()?;
        Ok(self)
    }

    /// `log2 n` when `n` is a power of two.
    pub fn m(&self) -> Option<u32> {
        log2_exact(self.n)
    }

    pub fn truth(&self) -> [f64; 3] {
        [self.params.theta, self.params.eta, self.params.nu]
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        NoiseSpec::new(self.noise.epsilon)?;
        if self.n < 2 {
            return Err(invalid("n", format!("need at least 2 modes, got {}", self.n)));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be positive"));
        }
        if self.stream_base.checked_add(self.replicates).is_none() {
            return Err(invalid("stream_base", "stream range overflows"));
        }
        let needs_m = |what: &str| {
            self.m().ok_or_else(|| Error::InconsistentScenario(format!("{what} needs n = 2^m, got n = {}", self.n)))
        };
        match (self.estimator, self.network) {
            (EstimatorKind::Naive, NetworkKind::None) => Ok(()),
            (EstimatorKind::Hayashi, NetworkKind::G1) => Ok(()),
            (EstimatorKind::Hayashi, NetworkKind::G2) => needs_m("the binary tree").map(|_| ()),
            (EstimatorKind::Corrected(e), NetworkKind::G2Truncated(t)) if e == t => {
                let m = needs_m("the truncated tree")?;
                if t > m {
                    return Err(Error::InconsistentScenario(format!("m0 = {t} exceeds m = {m}")));
                }
                Ok(())
            }
            (est, net) => Err(Error::InconsistentScenario(format!(
                "estimator {} cannot be paired with network {}",
                est.label(),
                net.label()
            ))),
        }
    }
}
