//! Beam-splitter networks.
//!
//! A splitter `(j, k, tau)` mixes modes `j` and `k` by the Givens rotation
//!
//! ```text
//! A_j <- A_j cos(tau) + A_k sin(tau)
//! A_k <- -A_j sin(tau) + A_k cos(tau)
//! ```
//!
//! applied identically to the `A` and `B` vectors. A [`Network`] lists its
//! splitters in chronological order: `ops[0]` acts first.

use crate::error::{invalid, Error, Result};
use crate::model::AmplitudeEnsemble;
use crate::rng::RandomSource;
use nalgebra::DMatrix;
use std::f64::consts::{FRAC_PI_4, LN_2};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterOp {
    pub j: usize,
    pub k: usize,
    pub tau: f64,
}

impl BeamSplitterOp {
    pub fn new(j: usize, k: usize, tau: f64) -> Result<Self> {
        if j == k {
            return Err(invalid("k", format!("splitter needs two distinct modes, got ({j}, {k})")));
        }
        if j == 0 {
            return Err(Error::IndexOutOfRange { index: j, n: 0 });
        }
        if k == 0 {
            return Err(Error::IndexOutOfRange { index: k, n: 0 });
        }
        Ok(Self { j, k, tau })
    }

    /// Power transmission `cos²(tau)`.
    pub fn transparency(&self) -> f64 {
        self.tau.cos().powi(2)
    }

    fn check(&self, n: usize) -> Result<()> {
        for index in [self.j, self.k] {
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if self.j == self.k {
            return Err(invalid("k", "splitter needs two distinct modes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    ops: Vec<BeamSplitterOp>,
}

/// Angle noise: each realized angle is `N(nominal, epsilon * ln 2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn noiseless() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn angle_variance(&self) -> f64 {
        self.epsilon * LN_2
    }
}

impl Network {
    pub fn new(n: usize, ops: Vec<BeamSplitterOp>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        for op in &ops {
            op.check(n)?;
        }
        Ok(Self { n, ops })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[BeamSplitterOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Network) -> Result<Network> {
        if self.n != next.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: next.n });
        }
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&next.ops);
        Ok(Network { n: self.n, ops })
    }

    /// One `j,k,tau` line per splitter, angles in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            let _ = writeln!(out, "{},{},{:?}", op.j, op.k, op.tau);
        }
        out
    }

    pub fn from_text(n: usize, text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("line {}: expected `j,k,tau`, got `{line}`", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let j = fields[0].parse().map_err(|_| bad())?;
            let k = fields[1].parse().map_err(|_| bad())?;
            let tau = fields[2].parse().map_err(|_| bad())?;
            ops.push(BeamSplitterOp::new(j, k, tau)?);
        }
        Self::new(n, ops)
    }
}

/// Cascade network concentrating all modes into mode 1:
/// `(1, t+1, atan(t^{-1/2}))` for `t = 1..n-1`.
pub fn build_g1(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(invalid("n", format!("cascade needs n >= 2, got {n}")));
    }
    let ops = (1..n)
        .map(|t| BeamSplitterOp {
            j: 1,
            k: t + 1,
            tau: (1.0 / (t as f64).sqrt()).atan(),
        })
        .collect();
    Network::new(n, ops)
}

/// Splitters of stage `t` (1-based) of the binary tree on `2^m` modes: pairs
/// `(j, j + 2^{t-1})` with `j ≡ 1 (mod 2^t)`, increasing `j`.
pub fn g2_stage(m: u32, t: u32) -> Vec<BeamSplitterOp> {
    let n = 1usize << m;
    let stride = 1usize << t;
    let half = stride / 2;
    (0..n / stride)
        .map(|b| BeamSplitterOp {
            j: b * stride + 1,
            k: b * stride + 1 + half,
            tau: FRAC_PI_4,
        })
        .collect()
}

/// Balanced binary-tree network on `n = 2^m` modes, all splitters at pi/4.
pub fn build_g2(m: u32) -> Result<Network> {
    build_g2_truncated(m, m)
}

/// First `m0` stages of [`build_g2`].
pub fn build_g2_truncated(m: u32, m0: u32) -> Result<Network> {
    if m >= usize::BITS - 1 {
        return Err(invalid("m", format!("too large: {m}")));
    }
    if m0 > m {
        return Err(invalid("m0", format!("must be in 0..={m}, got {m0}")));
    }
    let ops = (1..=m0).flat_map(|t| g2_stage(m, t)).collect();
    Network::new(1usize << m, ops)
}

/// Replaces every angle by an independent `N(tau, epsilon ln 2)` draw, in op
/// order. A noiseless spec returns the network unchanged without drawing.
pub fn perturb(net: &Network, noise: &NoiseSpec, rng: &mut RandomSource) -> Network {
    let var = noise.angle_variance();
    if var == 0.0 {
        return net.clone();
    }
    let ops = net
        .ops
        .iter()
        .map(|op| BeamSplitterOp {
            tau: rng.normal(op.tau, var),
            ..*op
        })
        .collect();
    Network { n: net.n, ops }
}

#[inline]
fn rotate(v: &mut [f64], j: usize, k: usize, c: f64, s: f64) {
    let (x, y) = (v[j], v[k]);
    v[j] = c * x + s * y;
    v[k] = -s * x + c * y;
}

/// In-place splitter; indices must already be validated.
pub(crate) fn apply_op_in_place(e: &mut AmplitudeEnsemble, op: &BeamSplitterOp) {
    let (s, c) = op.tau.sin_cos();
    rotate(&mut e.a, op.j - 1, op.k - 1, c, s);
    rotate(&mut e.b, op.j - 1, op.k - 1, c, s);
}

pub fn apply_op(ensemble: &AmplitudeEnsemble, op: &BeamSplitterOp) -> Result<AmplitudeEnsemble> {
    op.check(ensemble.len())?;
    let mut out = ensemble.clone();
    apply_op_in_place(&mut out, op);
    Ok(out)
}

pub(crate) fn apply_network_in_place(e: &mut AmplitudeEnsemble, net: &Network) -> Result<()> {
    if net.n != e.len() {
        return Err(Error::DimensionMismatch { expected: net.n, actual: e.len() });
    }
    for op in &net.ops {
        apply_op_in_place(e, op);
    }
    Ok(())
}

pub fn apply_network(ensemble: &AmplitudeEnsemble, net: &Network) -> Result<AmplitudeEnsemble> {
    let mut out = ensemble.clone();
    apply_network_in_place(&mut out, net)?;
    Ok(out)
}

/// Orthogonal matrix `R` with `apply_network(A) = R A`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix(pub DMatrix<f64>);

impl RotationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `max |R Rᵀ - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.0.nrows();
        let prod = &self.0 * self.0.transpose();
        (prod - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.0 * x).iter().copied().collect()
    }

    /// `R 1`, the image of the all-ones vector.
    pub fn row_sums(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }
}

/// Product of the network's Givens rotations, later splitters on the left.
pub fn compile_rotation(net: &Network) -> RotationMatrix {
    let n = net.n;
    let mut r = DMatrix::<f64>::identity(n, n);
    for op in &net.ops {
        let (s, c) = op.tau.sin_cos();
        let (j, k) = (op.j - 1, op.k - 1);
        for col in 0..n {
            let (x, y) = (r[(j, col)], r[(k, col)]);
            r[(j, col)] = c * x + s * y;
            r[(k, col)] = -s * x + c * y;
        }
    }
    RotationMatrix(r)
}
