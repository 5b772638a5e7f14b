//! Exact moment propagation through the (possibly truncated) binary-tree
//! network with independently perturbed splitter angles.
//!
//! After stage `t` every block of `2^t` consecutive modes has one *leader*
//! (its first mode) carrying the block's signal, plus one *residual* mode
//! created at each earlier stage. Distinct blocks are independent, and all
//! blocks of one stage are identically distributed, so a handful of joint
//! moment tables describes the whole network:
//!
//! * the leader at each stage (orders `a + b <= 4`);
//! * the residual created at each stage (orders `a + b <= 4`);
//! * a residual jointly with the leader of the block that absorbs it later;
//! * two residuals of the same block created at different stages.
//!
//! Joint tables hold orders `a + b <= 2` per variable. `cos(tau)` and
//! `sin(tau)` are exchangeable for `tau ~ N(pi/4, v)`, so a residual's joint
//! law with a later leader does not depend on which half of the merged block
//! it came from. The residual-residual tables are built for the lower half;
//! the upper half only flips the sign of the later residual, which leaves
//! every even-order entry unchanged.

#![allow(clippy::needless_range_loop)]

use super::trig::TrigTable;
use crate::error::{invalid, Result};
use crate::model::ModelParams;
use std::f64::consts::{FRAC_PI_4, LN_2};

pub const PAIR_ORDER: usize = 4;
pub const JOINT_ORDER: usize = 2;

/// `E[A^a B^b]` for `a + b <= 4`; higher entries are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments(pub [[f64; PAIR_ORDER + 1]; PAIR_ORDER + 1]);

/// `E[U^a V^b W^c Z^d]` for `a + b <= 2`, `c + d <= 2`; other entries are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMoments(pub [[[[f64; JOINT_ORDER + 1]; JOINT_ORDER + 1]; JOINT_ORDER + 1]; JOINT_ORDER + 1]);

fn gaussian_raw_moment(k: usize, mean: f64, var: f64) -> f64 {
    // E[(mean + s Z)^k] with E Z^2 = 1, E Z^4 = 3
    match k {
        0 => 1.0,
        1 => mean,
        2 => mean * mean + var,
        3 => mean.powi(3) + 3.0 * mean * var,
        4 => mean.powi(4) + 6.0 * mean * mean * var + 3.0 * var * var,
        _ => unreachable!("order above 4"),
    }
}

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl PairMoments {
    fn empty() -> Self {
        Self([[f64::NAN; PAIR_ORDER + 1]; PAIR_ORDER + 1])
    }

    /// Independent `A ~ N(theta, nu/2)`, `B ~ N(eta, nu/2)`.
    pub fn prior(params: &ModelParams) -> Self {
        let var = params.nu / 2.0;
        let mut m = Self::empty();
        for a in 0..=PAIR_ORDER {
            for b in 0..=(PAIR_ORDER - a) {
                m.0[a][b] = gaussian_raw_moment(a, params.theta, var)
                    * gaussian_raw_moment(b, params.eta, var);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn mean(&self) -> (f64, f64) {
        (self.0[1][0], self.0[0][1])
    }

    /// `E[A² + B²]`.
    pub fn intensity(&self) -> f64 {
        self.0[2][0] + self.0[0][2]
    }

    /// `E[(A² + B²)²]`.
    pub fn intensity_sq(&self) -> f64 {
        self.0[4][0] + 2.0 * self.0[2][2] + self.0[0][4]
    }

    pub fn intensity_var(&self) -> f64 {
        self.intensity_sq() - self.intensity().powi(2)
    }
}

impl JointMoments {
    fn empty() -> Self {
        Self([[[[f64::NAN; JOINT_ORDER + 1]; JOINT_ORDER + 1]; JOINT_ORDER + 1]; JOINT_ORDER + 1])
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.0[a][b][c][d]
    }

    /// `E[(U² + V²)(W² + Z²)]`.
    pub fn intensity_product(&self) -> f64 {
        self.0[2][0][2][0] + self.0[2][0][0][2] + self.0[0][2][2][0] + self.0[0][2][0][2]
    }

    /// `E[(U² + V²) W]` and `E[(U² + V²) Z]`.
    pub fn intensity_times_mean(&self) -> (f64, f64) {
        (
            self.0[2][0][1][0] + self.0[0][2][1][0],
            self.0[2][0][0][1] + self.0[0][2][0][1],
        )
    }
}

/// A splitter coefficient `±cos(tau)` or `±sin(tau)`.
#[derive(Debug, Clone, Copy)]
struct Coef {
    negative: bool,
    is_cos: bool,
}

const COS: Coef = Coef { negative: false, is_cos: true };
const SIN: Coef = Coef { negative: false, is_cos: false };
const NEG_SIN: Coef = Coef { negative: true, is_cos: false };

/// `E[prod_i coef_i^{power_i}]` over the shared angle.
fn trig_expect(trig: &TrigTable, terms: &[(Coef, usize)]) -> f64 {
    let (mut p, mut q, mut neg) = (0u32, 0u32, 0usize);
    for &(c, k) in terms {
        if c.is_cos {
            p += k as u32;
        } else {
            q += k as u32;
        }
        if c.negative {
            neg += k;
        }
    }
    let v = trig.get(p, q);
    if neg % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Law of `kx X + ky Y` for independent pairs `X`, `Y`.
fn combine(trig: &TrigTable, x: &PairMoments, y: &PairMoments, kx: Coef, ky: Coef) -> PairMoments {
    let mut out = PairMoments::empty();
    for a in 0..=PAIR_ORDER {
        for b in 0..=(PAIR_ORDER - a) {
            let mut acc = 0.0;
            for i in 0..=a {
                for j in 0..=b {
                    let w = BINOM[a][i] * BINOM[b][j];
                    let t = trig_expect(trig, &[(kx, i + j), (ky, a - i + b - j)]);
                    acc += w * t * x.get(i, j) * y.get(a - i, b - j);
                }
            }
            out.0[a][b] = acc;
        }
    }
    out
}

/// Joint law of the residual `-sin X + cos Y` and leader `cos X + sin Y`
/// produced by one splitter acting on independent `X`, `Y`.
fn split(trig: &TrigTable, x: &PairMoments, y: &PairMoments) -> JointMoments {
    let mut out = JointMoments::empty();
    for a in 0..=JOINT_ORDER {
        for b in 0..=(JOINT_ORDER - a) {
            for c in 0..=JOINT_ORDER {
                for d in 0..=(JOINT_ORDER - c) {
                    let mut acc = 0.0;
                    for i1 in 0..=a {
                        for i2 in 0..=b {
                            for i3 in 0..=c {
                                for i4 in 0..=d {
                                    let w = BINOM[a][i1] * BINOM[b][i2] * BINOM[c][i3] * BINOM[d][i4];
                                    let t = trig_expect(
                                        trig,
                                        &[
                                            (NEG_SIN, i1 + i2),
                                            (COS, a - i1 + b - i2),
                                            (COS, i3 + i4),
                                            (SIN, c - i3 + d - i4),
                                        ],
                                    );
                                    let ex = x.get(i1 + i3, i2 + i4);
                                    let ey = y.get(a - i1 + c - i3, b - i2 + d - i4);
                                    acc += w * t * ex * ey;
                                }
                            }
                        }
                    }
                    out.0[a][b][c][d] = acc;
                }
            }
        }
    }
    out
}

/// Given the joint law of `(P, L)` and an independent pair `Y`, the joint law
/// of `(P, kl L + ky Y)`.
fn advance(trig: &TrigTable, joint: &JointMoments, y: &PairMoments, kl: Coef, ky: Coef) -> JointMoments {
    let mut out = JointMoments::empty();
    for a in 0..=JOINT_ORDER {
        for b in 0..=(JOINT_ORDER - a) {
            for c in 0..=JOINT_ORDER {
                for d in 0..=(JOINT_ORDER - c) {
                    let mut acc = 0.0;
                    for i in 0..=c {
                        for j in 0..=d {
                            let w = BINOM[c][i] * BINOM[d][j];
                            let t = trig_expect(trig, &[(kl, i + j), (ky, c - i + d - j)]);
                            acc += w * t * joint.get(a, b, i, j) * y.get(c - i, d - j);
                        }
                    }
                    out.0[a][b][c][d] = acc;
                }
            }
        }
    }
    out
}

/// Moment tables for the binary tree stopped after `m0` stages.
#[derive(Debug, Clone)]
pub struct MomentTables {
    pub m0: u32,
    /// Leader law after stage `t`, `t = 0..=m0` (`sig[0]` is the prior).
    pub sig: Vec<PairMoments>,
    /// `res[t - 1]`: law of the residual created at stage `t`.
    pub res: Vec<PairMoments>,
    /// `res_leader[t - 1]`: residual of stage `t` jointly with its block
    /// leader after stage `m0`.
    pub res_leader: Vec<JointMoments>,
    /// `res_res[t1 - 1][t2 - t1 - 1]`: residuals of stages `t1 < t2` in the
    /// same block.
    pub res_res: Vec<Vec<JointMoments>>,
}

impl MomentTables {
    pub fn residual(&self, t: u32) -> &PairMoments {
        &self.res[t as usize - 1]
    }

    pub fn residual_leader(&self, t: u32) -> &JointMoments {
        &self.res_leader[t as usize - 1]
    }

    pub fn residual_pair(&self, t1: u32, t2: u32) -> &JointMoments {
        &self.res_res[t1 as usize - 1][(t2 - t1) as usize - 1]
    }

    pub fn leader(&self) -> &PairMoments {
        &self.sig[self.m0 as usize]
    }
}

/// Propagates prior moments through `m0` noisy stages with angles
/// `N(pi/4, epsilon ln 2)`. `m` is the network size exponent (`n = 2^m`).
pub fn g2_moment_engine(params: &ModelParams, epsilon: f64, m: u32, m0: u32) -> Result<MomentTables> {
    params.validate()?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if m0 > m {
        return Err(invalid("m0", format!("must be in 0..={m}, got {m0}")));
    }
    if m > 1000 {
        return Err(invalid("m", format!("n = 2^m must fit in f64, got m = {m}")));
    }
    let trig = TrigTable::new(FRAC_PI_4, epsilon * LN_2)?;

    let mut sig = vec![PairMoments::prior(params)];
    let mut res = Vec::with_capacity(m0 as usize);
    for t in 1..=m0 as usize {
        let prev = sig[t - 1];
        sig.push(combine(&trig, &prev, &prev, COS, SIN));
        res.push(combine(&trig, &prev, &prev, NEG_SIN, COS));
    }

    let mut res_leader = Vec::with_capacity(m0 as usize);
    let mut res_res = Vec::with_capacity(m0 as usize);
    for t1 in 1..=m0 as usize {
        let mut joint = split(&trig, &sig[t1 - 1], &sig[t1 - 1]);
        let mut later = Vec::with_capacity(m0 as usize - t1);
        for s in t1..m0 as usize {
            later.push(advance(&trig, &joint, &sig[s], NEG_SIN, COS));
            joint = advance(&trig, &joint, &sig[s], COS, SIN);
        }
        res_leader.push(joint);
        res_res.push(later);
    }

    Ok(MomentTables { m0, sig, res, res_leader, res_res })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_full_tree_concentrates() {
        let p = ModelParams::new(1.5, -0.5, 0.8).unwrap();
        for m in 1..=6u32 {
            let t = g2_moment_engine(&p, 0.0, m, m).unwrap();
            let rn = 2f64.powf(m as f64 / 2.0);
            let (a, b) = t.leader().mean();
            assert!((a - rn * 1.5).abs() < 1e-12);
            assert!((b + rn * 0.5).abs() < 1e-12);
            for s in 1..=m {
                let (ra, rb) = t.residual(s).mean();
                assert!(ra.abs() < 1e-12 && rb.abs() < 1e-12);
                // noiseless residuals are N(0, nu/2) per component
                assert!((t.residual(s).intensity() - 0.8).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_depth_is_prior() {
        let p = ModelParams::new(2.0, 3.0, 0.5).unwrap();
        let t = g2_moment_engine(&p, 0.3, 4, 0).unwrap();
        assert_eq!(t.sig.len(), 1);
        assert!((t.leader().get(2, 0) - (4.0 + 0.25)).abs() < 1e-15);
        assert!(t.res.is_empty());
    }

    #[test]
    fn moment_sanity() {
        let p = ModelParams::new(1.0, 0.5, 1.0).unwrap();
        let t = g2_moment_engine(&p, 0.4, 5, 5).unwrap();
        for pm in t.sig.iter().chain(&t.res) {
            assert_eq!(pm.get(0, 0), 1.0);
            assert!(pm.get(2, 0) >= pm.get(1, 0).powi(2));
            assert!(pm.get(0, 2) >= pm.get(0, 1).powi(2));
            assert!(pm.intensity_var() >= 0.0);
        }
        for j in t.res_leader.iter().chain(t.res_res.iter().flatten()) {
            assert!((j.get(0, 0, 0, 0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_depth() {
        let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        assert!(g2_moment_engine(&p, 0.1, 3, 4).is_err());
        assert!(g2_moment_engine(&p, -0.1, 3, 2).is_err());
    }
}
