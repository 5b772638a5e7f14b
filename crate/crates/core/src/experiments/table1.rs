use super::{run_monte_carlo, Scenario};
use crate::analytic::{estimator_moments, Family};
use crate::error::{invalid, Result};
use crate::model::ModelParams;
use rayon::prelude::*;
use serde::Serialize;

/// How the stopping depth of the corrected family is chosen for each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M0Policy {
    HalfM,
    FullM,
    Explicit(u32),
}

impl M0Policy {
    fn depth(&self, m: u32) -> Result<u32> {
        match *self {
            M0Policy::HalfM if m.is_multiple_of(2) => Ok(m / 2),
            M0Policy::HalfM => Err(invalid("m0", format!("half of m = {m} is not an integer"))),
            M0Policy::FullM => Ok(m),
            M0Policy::Explicit(m0) if m0 <= m => Ok(m0),
            M0Policy::Explicit(m0) => Err(invalid("m0", format!("{m0} exceeds m = {m}"))),
        }
    }
}

/// One grid cell and family: `rel_err = 1 - M/M_0` where `M` sums the three
/// mean square errors and `M_0` is the naive value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelErrRow {
    pub n: usize,
    pub theta: f64,
    pub eta: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub m0: u32,
    pub family: String,
    pub rel_err: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    m: u32,
    theta: f64,
    nu: f64,
}

fn cells(n_list: &[usize], theta_list: &[f64], nu_list: &[f64], policy: M0Policy) -> Result<Vec<Cell>> {
    if n_list.is_empty() || theta_list.is_empty() || nu_list.is_empty() {
        return Err(invalid("grid", "every axis needs at least one value"));
    }
    let mut out = Vec::new();
    for &n in n_list {
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two >= 2, got {n}")));
        }
        let m = n.trailing_zeros();
        policy.depth(m)?;
        for &theta in theta_list {
            for &nu in nu_list {
                ModelParams::new(theta, 0.0, nu)?;
                out.push(Cell { m, theta, nu });
            }
        }
    }
    Ok(out)
}

/// Families compared against naive in each cell: Hayashi, corrected at the
/// policy depth, and the unbiased full-depth corrected variant when that
/// depth differs.
fn families(m: u32, m0: u32) -> Vec<(&'static str, u32, Family)> {
    let mut f = vec![("hayashi", m, Family::Hayashi), ("corrected", m0, Family::Corrected(m0))];
    if m0 != m {
        f.push(("corrected_full", m, Family::Corrected(m)));
    }
    f
}

fn scenario(params: ModelParams, m: u32, epsilon: f64, family: Family, replicates: u64, seed: u64) -> Result<Scenario> {
    match family {
        Family::Naive => Scenario::naive(params, 1 << m, replicates, seed),
        Family::Hayashi => Scenario::hayashi(params, m, epsilon, replicates, seed),
        Family::Corrected(m0) => Scenario::corrected(params, m, m0, epsilon, replicates, seed),
    }
}

/// Relative-error grid by plain Monte Carlo with `eta = 0`. Every family and
/// the naive baseline in every cell run on their own disjoint stream range,
/// so numerator and denominator are independent and the delta-method
/// standard error applies.
pub fn table1_grid(
    n_list: &[usize],
    theta_list: &[f64],
    nu_list: &[f64],
    epsilon: f64,
    policy: M0Policy,
    replicates: u64,
    seed: u64,
) -> Result<Vec<RelErrRow>> {
    if !(2..1 << 40).contains(&replicates) {
        return Err(invalid("replicates", "must be in 2..2^40"));
    }
    let grid = cells(n_list, theta_list, nu_list, policy)?;
    let mut jobs = Vec::new();
    for (ci, cell) in grid.iter().enumerate() {
        let m0 = policy.depth(cell.m)?;
        jobs.push((ci, "naive", 0, Family::Naive));
        for (label, depth, fam) in families(cell.m, m0) {
            jobs.push((ci, label, depth, fam));
        }
    }
    let summaries: Vec<(f64, f64)> = jobs
        .par_iter()
        .enumerate()
        .map(|(j, &(ci, _, _, fam))| {
            let cell = grid[ci];
            let params = ModelParams::new(cell.theta, 0.0, cell.nu)?;
            let sc = scenario(params, cell.m, epsilon, fam, replicates, seed)?.with_stream_base((j as u64) << 40)?;
            let s = run_monte_carlo(&sc)?;
            Ok((s.total_mse, s.se_total_mse))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut base = (f64::NAN, f64::NAN);
    for (&(ci, label, depth, _), &(mse, se)) in jobs.iter().zip(&summaries) {
        if label == "naive" {
            base = (mse, se);
            continue;
        }
        let cell = grid[ci];
        let ratio = mse / base.0;
        rows.push(RelErrRow {
            n: 1 << cell.m,
            theta: cell.theta,
            eta: 0.0,
            nu: cell.nu,
            epsilon,
            m0: depth,
            family: label.to_string(),
            rel_err: 1.0 - ratio,
            se: ratio * (se / mse).hypot(base.1 / base.0),
        });
    }
    Ok(rows)
}

/// The same grid evaluated exactly with the moment engine (`se = 0`).
pub fn table1_exact(
    n_list: &[usize],
    theta_list: &[f64],
    nu_list: &[f64],
    epsilon: f64,
    policy: M0Policy,
) -> Result<Vec<RelErrRow>> {
    let grid = cells(n_list, theta_list, nu_list, policy)?;
    let mut rows = Vec::new();
    for cell in grid {
        let params = ModelParams::new(cell.theta, 0.0, cell.nu)?;
        let m0 = policy.depth(cell.m)?;
        let base = estimator_moments(&params, epsilon, cell.m, Family::Naive)?.total_mse(&params);
        for (label, depth, fam) in families(cell.m, m0) {
            let mse = estimator_moments(&params, epsilon, cell.m, fam)?.total_mse(&params);
            rows.push(RelErrRow {
                n: 1 << cell.m,
                theta: cell.theta,
                eta: 0.0,
                nu: cell.nu,
                epsilon,
                m0: depth,
                family: label.to_string(),
                rel_err: 1.0 - mse / base,
                se: 0.0,
            });
        }
    }
    Ok(rows)
}
