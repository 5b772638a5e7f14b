//! Command-line front end. Every subcommand validates its flags, calls one
//! library routine and writes its records; no numerics live here.

use crate::analytic::{
    corrected_closed_forms, estimator_moments, mse_n2, theorem1_closed_forms, Family,
};
use crate::error::{Error, Result};
use crate::experiments::output::{write_rows, Format, SummaryRecord};
use crate::experiments::{
    crossover_point, rao_blackwell_mc, run_monte_carlo, table1_exact, table1_grid, EstimatorKind, M0Policy,
    NetworkKind, Scenario,
};
use crate::model::ModelParams;
use crate::network::NoiseSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "gpfest", version, about = "Estimators for the Gaussian P-function model under noisy beam-splitter networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args, Clone)]
struct Common {
    /// Output directory (created if missing)
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output file format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args, Clone)]
struct ParamArgs {
    /// Location of the first quadrature
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Location of the second quadrature
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eta: f64,
    /// Scale (prior variance of each amplitude component is nu/2), >= 0
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    nu: f64,
    /// Angle noise: each splitter angle ~ N(nominal, epsilon ln 2), >= 0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Naive,
    Hayashi,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetworkArg {
    G1,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Sample amplitudes, angles and measurements
    Plain,
    /// Sample angles only; integrate the rest exactly
    Rb,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Monte Carlo summary of one estimator; writes summary.{csv,json}
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Estimator family
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        /// log2 of the number of modes (binary-tree networks)
        #[arg(long, conflicts_with = "n")]
        m: Option<u32>,
        /// Number of modes (naive, or Hayashi on the cascade)
        #[arg(long)]
        n: Option<usize>,
        /// Stopping depth of the corrected estimator, 0..=m
        #[arg(long)]
        m0: Option<u32>,
        /// Concentration network for Hayashi estimators
        #[arg(long, value_enum, default_value_t = NetworkArg::G2)]
        network: NetworkArg,
        /// Monte Carlo replicates
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        /// RNG seed
        #[arg(long, env = "GPFEST_SEED", default_value_t = 0)]
        seed: u64,
        /// Monte Carlo method
        #[arg(long, value_enum, default_value_t = MethodArg::Plain)]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Exact moments on the noisy tree: closed forms next to the moment
    /// engine; writes moments.{csv,json}
    Moments {
        #[command(flatten)]
        params: ParamArgs,
        /// log2 of the number of modes, >= 1
        #[arg(long)]
        m: u32,
        /// Also report the corrected estimator stopped at this depth
        #[arg(long)]
        m0: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-mode mean square errors of the naive and Hayashi nu estimators;
    /// writes mse2.{csv,json}
    Mse2 {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Theta at which the two-mode Hayashi and naive MSEs cross (eta = 0);
    /// writes crossover.{csv,json}
    Crossover {
        /// Scale values: a number, a list a,b,c or a range lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        /// Noise values (> 0): a number, a list or a range lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        epsilon: String,
        #[command(flatten)]
        common: Common,
    },
    /// Relative-error grid 1 - M/M0 against the naive estimator (eta = 0);
    /// writes table1.{csv,json}
    Table1 {
        /// Mode counts (powers of two): a number or a list
        #[arg(long)]
        n: String,
        /// Angle noise, >= 0
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        /// Theta values: a number, a list or a range lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Nu values: a number, a list or a range lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        /// Corrected stopping depth: half, full or an integer
        #[arg(long, default_value = "half")]
        m0: String,
        /// Monte Carlo replicates per cell and family
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        /// RNG seed
        #[arg(long, env = "GPFEST_SEED", default_value_t = 0)]
        seed: u64,
        /// Evaluate exactly with the moment engine instead of Monte Carlo
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub out: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Command {
    Simulate { scenario: Scenario, rao_blackwell: bool },
    Moments { params: ModelParams, epsilon: f64, m: u32, m0: Option<u32> },
    Mse2 { params: ModelParams, epsilon: f64 },
    Crossover { nu: Vec<f64>, epsilon: Vec<f64> },
    Table1 {
        n: Vec<usize>,
        theta: Vec<f64>,
        nu: Vec<f64>,
        epsilon: f64,
        m0: M0Policy,
        replicates: u64,
        seed: u64,
        exact: bool,
    },
}

/// Usage error: bad flag value or combination (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub flag: &'static str,
    pub message: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid value for --{}: {}", self.flag, self.message)
    }
}

fn usage(flag: &'static str, message: impl Into<String>) -> UsageError {
    UsageError { flag, message: message.into() }
}

/// Parses `lo:hi:step` (inclusive ends), a comma list, or a single number.
pub fn parse_values(flag: &'static str, text: &str) -> std::result::Result<Vec<f64>, UsageError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| usage(flag, format!("`{s}` is not a finite number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= 0.0 || hi < lo {
                return Err(usage(flag, "range needs lo <= hi and step > 0"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(usage(flag, "range has too many points"));
            }
            // Round to 12 significant digits so 0:1:0.1 yields 0.3, not 0.30000000000000004.
            Ok((0..count)
                .map(|i| format!("{:.12e}", lo + i as f64 * step).parse().expect("formatted float"))
                .collect())
        }
        _ => Err(usage(flag, "expected a number, a list a,b,c or a range lo:hi:step")),
    }
}

fn params(p: &ParamArgs) -> std::result::Result<ModelParams, UsageError> {
    let flag_for = |e: &Error| match e {
        Error::InvalidParameter { name: "theta", .. } => "theta",
        Error::InvalidParameter { name: "eta", .. } => "eta",
        _ => "nu",
    };
    let params = ModelParams::new(p.theta, p.eta, p.nu).map_err(|e| usage(flag_for(&e), e.to_string()))?;
    NoiseSpec::new(p.epsilon).map_err(|e| usage("epsilon", e.to_string()))?;
    Ok(params)
}

fn format(f: FormatArg) -> Format {
    match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_scenario(
    p: &ParamArgs,
    estimator: EstimatorArg,
    m: Option<u32>,
    n: Option<usize>,
    m0: Option<u32>,
    network: NetworkArg,
    replicates: u64,
    seed: u64,
) -> std::result::Result<Scenario, UsageError> {
    let params = params(p)?;
    let noise = NoiseSpec::new(p.epsilon).map_err(|e| usage("epsilon", e.to_string()))?;
    if m.is_some_and(|m| m > 24) {
        return Err(usage("m", "at most 24"));
    }
    let n = match (m, n) {
        (Some(m), None) => 1usize << m,
        (None, Some(n)) => n,
        _ => return Err(usage("m", "give exactly one of --m or --n")),
    };
    if estimator != EstimatorArg::Corrected && m0.is_some() {
        return Err(usage("m0", "only used by the corrected estimator"));
    }
    let (net, est) = match estimator {
        EstimatorArg::Naive => (NetworkKind::None, EstimatorKind::Naive),
        EstimatorArg::Hayashi => (
            match network {
                NetworkArg::G1 => NetworkKind::G1,
                NetworkArg::G2 => NetworkKind::G2,
            },
            EstimatorKind::Hayashi,
        ),
        EstimatorArg::Corrected => {
            let m0 = m0.ok_or_else(|| usage("m0", "required for the corrected estimator"))?;
            (NetworkKind::G2Truncated(m0), EstimatorKind::Corrected(m0))
        }
    };
    if matches!(net, NetworkKind::G2 | NetworkKind::G2Truncated(_)) && !n.is_power_of_two() {
        return Err(usage("n", format!("the binary tree needs a power of two, got {n}")));
    }
    Scenario::new(params, n, net, noise, est, replicates, seed).map_err(|e| {
        let flag = match &e {
            Error::InvalidParameter { name: "replicates", .. } => "replicates",
            Error::InconsistentScenario(_) => "estimator",
            _ => "n",
        };
        usage(flag, e.to_string())
    })
}

fn build(cli: Cli) -> std::result::Result<RunConfig, UsageError> {
    let (command, common) = match cli.command {
        Cmd::Simulate { params: p, estimator, m, n, m0, network, replicates, seed, method, common } => {
            let scenario = simulate_scenario(&p, estimator, m, n, m0, network, replicates, seed)?;
            (Command::Simulate { scenario, rao_blackwell: method == MethodArg::Rb }, common)
        }
        Cmd::Moments { params: p, m, m0, common } => {
            let params = params(&p)?;
            if !(1..=1000).contains(&m) {
                return Err(usage("m", "need 1 <= m <= 1000"));
            }
            if m0.is_some_and(|m0| m0 > m) {
                return Err(usage("m0", format!("must be in 0..={m}")));
            }
            (Command::Moments { params, epsilon: p.epsilon, m, m0 }, common)
        }
        Cmd::Mse2 { params: p, common } => (Command::Mse2 { params: params(&p)?, epsilon: p.epsilon }, common),
        Cmd::Crossover { nu, epsilon, common } => {
            let nu = parse_values("nu", &nu)?;
            let epsilon = parse_values("epsilon", &epsilon)?;
            if nu.iter().any(|&v| v < 0.0) {
                return Err(usage("nu", "must be >= 0"));
            }
            if epsilon.iter().any(|&v| v <= 0.0) {
                return Err(usage("epsilon", "must be > 0 (no crossover without noise)"));
            }
            (Command::Crossover { nu, epsilon }, common)
        }
        Cmd::Table1 { n, epsilon, theta, nu, m0, replicates, seed, exact, common } => {
            let n = n
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|n| *n >= 2 && n.is_power_of_two() && *n <= 1 << 24)
                        .ok_or_else(|| usage("n", format!("`{s}` is not a power of two in 2..=2^24")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let theta = parse_values("theta", &theta)?;
            let nu = parse_values("nu", &nu)?;
            if nu.iter().any(|&v| v < 0.0) {
                return Err(usage("nu", "must be >= 0"));
            }
            NoiseSpec::new(epsilon).map_err(|e| usage("epsilon", e.to_string()))?;
            let policy = match m0.as_str() {
                "half" => M0Policy::HalfM,
                "full" => M0Policy::FullM,
                s => M0Policy::Explicit(s.parse().map_err(|_| usage("m0", "expected half, full or an integer"))?),
            };
            for &n in &n {
                let m = n.trailing_zeros();
                match policy {
                    M0Policy::HalfM if m % 2 == 1 => return Err(usage("m0", format!("half needs even log2 n, got n = {n}"))),
                    M0Policy::Explicit(k) if k > m => return Err(usage("m0", format!("{k} exceeds log2 n = {m}"))),
                    _ => {}
                }
            }
            if !exact && !(2..1 << 40).contains(&replicates) {
                return Err(usage("replicates", "must be in 2..2^40"));
            }
            (Command::Table1 { n, theta, nu, epsilon, m0: policy, replicates, seed, exact }, common)
        }
    };
    if common.threads == Some(0) {
        return Err(usage("threads", "must be positive"));
    }
    Ok(RunConfig { command, out: common.out, format: format(common.format), threads: common.threads })
}

/// Parses and validates a full argument vector (including the program name).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseFailure::Clap)?;
    build(cli).map_err(ParseFailure::Usage)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Usage(UsageError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRecord {
    pub family: String,
    pub quantity: &'static str,
    pub closed_form: Option<f64>,
    pub engine: f64,
    pub rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mse2Record {
    pub theta: f64,
    pub eta: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub m_bar: f64,
    pub m_hat: f64,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn moment_records(params: &ModelParams, epsilon: f64, m: u32, m0: Option<u32>) -> Result<Vec<MomentRecord>> {
    let names = ["e_theta", "e_eta", "v_theta", "v_eta", "e_nu", "v_nu"];
    let row = |family: &str, i: usize, closed: Option<f64>, engine: f64| MomentRecord {
        family: family.to_string(),
        quantity: names[i],
        closed_form: closed,
        engine,
        rel_diff: closed.map(|c| rel_diff(c, engine)),
    };
    let t = theorem1_closed_forms(params.theta, params.eta, params.nu, epsilon, m)?;
    let h = estimator_moments(params, epsilon, m, Family::Hayashi)?;
    let engine = [h.mean[0], h.mean[1], h.var[0], h.var[1], h.mean[2], h.var[2]];
    let closed = [Some(t.e_theta), Some(t.e_eta), Some(t.v_theta), Some(t.v_eta), Some(t.e_nu), None];
    let mut rows: Vec<_> = (0..6).map(|i| row("hayashi", i, closed[i], engine[i])).collect();
    if let Some(m0) = m0 {
        let c = corrected_closed_forms(params, epsilon, m, m0)?;
        let e = estimator_moments(params, epsilon, m, Family::Corrected(m0))?;
        let engine = [e.mean[0], e.mean[1], e.var[0], e.var[1], e.mean[2], e.var[2]];
        let closed = [Some(c.e_theta), Some(c.e_eta), Some(c.v_theta), Some(c.v_eta), None, None];
        let family = format!("corrected({m0})");
        rows.extend((0..6).map(|i| row(&family, i, closed[i], engine[i])));
    }
    Ok(rows)
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.12e}"))
}

fn execute(cfg: &RunConfig) -> Result<String> {
    let dir = &cfg.out;
    match &cfg.command {
        Command::Simulate { scenario, rao_blackwell } => {
            let s = if *rao_blackwell { rao_blackwell_mc(scenario)? } else { run_monte_carlo(scenario)? };
            let path = write_rows(dir, "summary", &[SummaryRecord::new(scenario, &s)], cfg.format)?;
            Ok(format!(
                "{} {}: mean = ({:.6}, {:.6}, {:.6}), total mse = {:.6e} ± {:.1e} in {:.2?} -> {}",
                scenario.estimator.label(),
                s.method,
                s.mean[0],
                s.mean[1],
                s.mean[2],
                s.total_mse,
                s.se_total_mse,
                s.wall_clock,
                path.display()
            ))
        }
        Command::Moments { params, epsilon, m, m0 } => {
            let rows = moment_records(params, *epsilon, *m, *m0)?;
            let mut text = format!("{:<14} {:<8} {:>20} {:>20} {:>10}\n", "family", "quantity", "closed_form", "engine", "rel_diff");
            for r in &rows {
                text += &format!(
                    "{:<14} {:<8} {:>20} {:>20} {:>10}\n",
                    r.family,
                    r.quantity,
                    show(r.closed_form),
                    format!("{:.12e}", r.engine),
                    r.rel_diff.map_or("-".into(), |d| format!("{d:.1e}"))
                );
            }
            let path = write_rows(dir, "moments", &rows, cfg.format)?;
            Ok(format!("{text}-> {}", path.display()))
        }
        Command::Mse2 { params, epsilon } => {
            let p = mse_n2(params.theta, params.eta, params.nu, *epsilon)?;
            let rec = Mse2Record {
                theta: params.theta,
                eta: params.eta,
                nu: params.nu,
                epsilon: *epsilon,
                m_bar: p.m_bar,
                m_hat: p.m_hat,
            };
            let path = write_rows(dir, "mse2", &[rec], cfg.format)?;
            Ok(format!("m_bar = {}, m_hat = {} -> {}", p.m_bar, p.m_hat, path.display()))
        }
        Command::Crossover { nu, epsilon } => {
            let mut rows = Vec::new();
            for &v in nu {
                for &e in epsilon {
                    rows.push(crossover_point(v, e)?);
                }
            }
            let path = write_rows(dir, "crossover", &rows, cfg.format)?;
            let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            Ok(format!("{} crossover points, max residual {worst:.1e} -> {}", rows.len(), path.display()))
        }
        Command::Table1 { n, theta, nu, epsilon, m0, replicates, seed, exact } => {
            let rows = if *exact {
                table1_exact(n, theta, nu, *epsilon, *m0)?
            } else {
                table1_grid(n, theta, nu, *epsilon, *m0, *replicates, *seed)?
            };
            let path = write_rows(dir, "table1", &rows, cfg.format)?;
            Ok(format!("{} rows -> {}", rows.len(), path.display()))
        }
    }
}

/// Runs a validated configuration, returning the one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String> {
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Io { path: "thread pool".into(), reason: e.to_string() })?
            .install(|| execute(cfg)),
        None => execute(cfg),
    }
}

/// Entry point: returns the process exit code (0 ok, 1 runtime error,
/// 2 usage error).
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(ParseFailure::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
        Err(ParseFailure::Usage(e)) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&cfg) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> std::result::Result<RunConfig, ParseFailure> {
        parse_args(std::iter::once("gpfest").chain(args.split_whitespace()))
    }

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_values("x", "0:10:2").unwrap(), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(parse_values("x", "0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_values("x", "1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_values("x", "3").unwrap(), vec![3.0]);
        assert!(parse_values("x", "1:0:1").is_err());
        assert!(parse_values("x", "0:1").is_err());
        assert!(parse_values("x", "nan").is_err());
    }

    #[test]
    fn spec_style_invocations_parse() {
        let c = parse("simulate --estimator hayashi --m 4 --theta 1 --eta 0 --nu 1 --epsilon 0.1 --replicates 100000 --seed 7").unwrap();
        match c.command {
            Command::Simulate { scenario, rao_blackwell } => {
                assert_eq!(scenario.n, 16);
                assert_eq!(scenario.seed, 7);
                assert_eq!(scenario.estimator, EstimatorKind::Hayashi);
                assert!(!rao_blackwell);
            }
            _ => panic!(),
        }
        assert!(matches!(parse("crossover --nu 1 --epsilon 0.2").unwrap().command, Command::Crossover { .. }));
        match parse("table1 --n 64 --epsilon 0.0001 --theta 0:10:2 --nu 0:10:2 --m0 half").unwrap().command {
            Command::Table1 { n, theta, nu, m0, replicates, .. } => {
                assert_eq!(n, vec![64]);
                assert_eq!(theta.len(), 6);
                assert_eq!(nu.len(), 6);
                assert_eq!(m0, M0Policy::HalfM);
                assert_eq!(replicates, 100_000);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn defaults() {
        let c = parse("simulate --estimator naive --n 4").unwrap();
        assert_eq!(c.format, Format::Csv);
        match c.command {
            Command::Simulate { scenario, .. } => {
                assert_eq!(scenario.noise.epsilon, 0.0);
                assert_eq!(scenario.replicates, 100_000);
            }
            _ => panic!(),
        }
    }

    fn usage_flag(args: &str) -> &'static str {
        match parse(args) {
            Err(ParseFailure::Usage(u)) => u.flag,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn bad_values_name_their_flag() {
        assert_eq!(usage_flag("mse2 --nu -1"), "nu");
        assert_eq!(usage_flag("mse2 --epsilon -0.5"), "epsilon");
        assert_eq!(usage_flag("simulate --estimator corrected --m 4"), "m0");
        assert_eq!(usage_flag("simulate --estimator hayashi --n 6"), "n");
        assert_eq!(usage_flag("table1 --n 8 --theta 0 --nu 0"), "m0");
        assert_eq!(usage_flag("table1 --n 12 --theta 0 --nu 0"), "n");
        assert_eq!(usage_flag("crossover --nu 1 --epsilon 0"), "epsilon");
        assert_eq!(usage_flag("moments --m 3 --m0 4"), "m0");
    }

    #[test]
    fn unknown_flags_are_rejected() {
        match parse("mse2 --bogus 1") {
            Err(ParseFailure::Clap(e)) => assert_eq!(e.exit_code(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moments_rows_carry_shrunken_location() {
        let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let rows = moment_records(&p, 1.0, 2, Some(1)).unwrap();
        assert_eq!(rows[0].quantity, "e_theta");
        assert_eq!(rows[0].closed_form, Some(0.5));
        assert!(rows.iter().all(|r| r.rel_diff.is_none_or(|d| d < 1e-10)));
    }
}
