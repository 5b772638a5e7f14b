//! Algebraic and Monte Carlo properties of the three estimator families.

use gpfest::estimators::{
    corrected_estimate, hayashi_covariance, hayashi_estimate, naive_covariance, naive_estimate,
};
use gpfest::experiments::{rao_blackwell_mc, run_monte_carlo, Scenario};
use gpfest::model::{measure, sample_amplitudes, ModelParams, SelectionSet};
use gpfest::network::{apply_network, build_g2_truncated, perturb, NoiseSpec};
use gpfest::rng::RandomSource;
use proptest::prelude::*;

fn noisy_observations(m: u32, m0: u32, eps: f64, seed: u64) -> gpfest::model::Observations {
    let params = ModelParams::new(0.8, -0.3, 1.2).unwrap();
    let mut rng = RandomSource::new(seed, 0);
    let ens = sample_amplitudes(&params, 1 << m, &mut rng).unwrap();
    let net = perturb(&build_g2_truncated(m, m0).unwrap(), &NoiseSpec::new(eps).unwrap(), &mut rng);
    let ens = apply_network(&ens, &net).unwrap();
    measure(&ens, &SelectionSet::block_leaders(m, m0).unwrap(), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_depth_is_naive_bit_for_bit(seed in any::<u64>(), m in 1u32..7, eps in 0.0f64..2.0) {
        let obs = noisy_observations(m, 0, eps, seed);
        let c = corrected_estimate(&obs, m, 0, eps).unwrap();
        let n = naive_estimate(&obs).unwrap();
        prop_assert_eq!(c.theta_hat.to_bits(), n.theta_hat.to_bits());
        prop_assert_eq!(c.eta_hat.to_bits(), n.eta_hat.to_bits());
        prop_assert!((c.nu_hat - n.nu_hat).abs() <= 1e-12 * (1.0 + n.nu_hat.abs()));
    }

    #[test]
    fn full_depth_is_rescaled_hayashi(seed in any::<u64>(), m in 1u32..7, eps in 0.0f64..2.0) {
        let obs = noisy_observations(m, m, eps, seed);
        let c = corrected_estimate(&obs, m, m, eps).unwrap();
        let h = hayashi_estimate(&obs).unwrap();
        let k = ((m as f64) * eps / 2.0).exp2();
        prop_assert!((c.theta_hat - k * h.theta_hat).abs() <= 4.0 * f64::EPSILON * c.theta_hat.abs());
        prop_assert!((c.eta_hat - k * h.eta_hat).abs() <= 4.0 * f64::EPSILON * c.eta_hat.abs());
        prop_assert_eq!(c.nu_hat.to_bits(), h.nu_hat.to_bits());
    }

    #[test]
    fn naive_minus_hayashi_is_psd(nu in 0.0f64..1e3, n in 2usize..10_000) {
        let d = naive_covariance(nu, n).unwrap().sub(&hayashi_covariance(nu, n).unwrap());
        prop_assert!(d.is_symmetric());
        prop_assert!(d.is_positive_semidefinite(1e-12));
    }
}

#[test]
fn corrected_location_is_unbiased_under_noise() {
    let params = ModelParams::new(1.0, 0.5, 1.0).unwrap();
    let mut seed = 1000;
    for &eps in &[0.01, 0.1, 0.5] {
        for m in [4u32, 6] {
            for m0 in 0..=m {
                seed += 1;
                let sc = Scenario::corrected(params, m, m0, eps, 40_000, seed).unwrap();
                let s = run_monte_carlo(&sc).unwrap();
                for i in 0..2 {
                    let z = (s.mean[i] - s.truth[i]) / s.se_mean[i];
                    assert!(z.abs() < 4.0, "eps={eps} m={m} m0={m0} comp={i}: z={z}");
                }
            }
        }
    }
}

#[test]
fn noiseless_hayashi_is_unbiased() {
    let params = ModelParams::new(1.0, 0.0, 2.0).unwrap();
    let s = run_monte_carlo(&Scenario::hayashi(params, 4, 0.0, 200_000, 3).unwrap()).unwrap();
    for i in 0..3 {
        let z = (s.mean[i] - s.truth[i]) / s.se_mean[i];
        assert!(z.abs() < 4.0, "comp {i}: z={z}");
    }
}

#[test]
fn monte_carlo_spot_values() {
    let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
    let h = run_monte_carlo(&Scenario::hayashi(p, 2, 0.5, 1_000_000, 1).unwrap()).unwrap();
    let expected = 4f64.powf(-0.25);
    assert!((h.mean[0] - expected).abs() < 4.0 * h.se_mean[0], "{} vs {expected}", h.mean[0]);

    let z = ModelParams::new(0.0, 0.0, 1.0).unwrap();
    let nv = run_monte_carlo(&Scenario::naive(z, 2, 1_000_000, 2).unwrap()).unwrap();
    assert!((nv.mse[2] - 4.0).abs() < 4.0 * nv.se_mse[2], "{} ± {}", nv.mse[2], nv.se_mse[2]);
}

#[test]
fn zero_depth_corrected_and_naive_share_location_summaries() {
    let p = ModelParams::new(0.4, 0.9, 1.0).unwrap();
    let a = run_monte_carlo(&Scenario::naive(p, 8, 20_000, 77).unwrap()).unwrap();
    let b = run_monte_carlo(&Scenario::corrected(p, 3, 0, 0.3, 20_000, 77).unwrap()).unwrap();
    for i in 0..2 {
        assert_eq!(a.mean[i].to_bits(), b.mean[i].to_bits());
        assert_eq!(a.var[i].to_bits(), b.var[i].to_bits());
        assert_eq!(a.mse[i].to_bits(), b.mse[i].to_bits());
    }
}

// Only the angle-driven part theta² * excess of V(theta_hat) survives
// conditioning, so the reduction factor is
// 1 + ((1 + nu)/(2n)) / (theta² * excess): about 2.6 at theta = 1 and above
// 10 once theta is small.
#[test]
fn rao_blackwell_shrinks_location_noise() {
    use gpfest::analytic::theorem1_closed_forms;
    for (theta, seed) in [(1.0, 9u64), (0.25, 10)] {
        let p = ModelParams::new(theta, 0.0, 1.0).unwrap();
        let sc = Scenario::hayashi(p, 4, 0.5, 40_000, seed).unwrap();
        let plain = run_monte_carlo(&sc).unwrap();
        let rb = rao_blackwell_mc(&sc).unwrap();
        let measured = (plain.se_mean[0] / rb.se_mean[0]).powi(2);
        let t = theorem1_closed_forms(theta, 0.0, 1.0, 0.5, 4).unwrap();
        let noiseless = 2.0 / 32.0;
        let predicted = t.v_theta / (t.v_theta - noiseless);
        assert!((measured / predicted - 1.0).abs() < 0.1, "theta={theta}: {measured} vs {predicted}");
        if theta < 0.5 {
            assert!(measured >= 10.0, "reduction {measured}");
        }
        assert!((plain.mean[0] - rb.mean[0]).abs() < 4.0 * plain.se_mean[0].hypot(rb.se_mean[0]));
    }
}

#[test]
fn cascade_and_tree_agree_without_noise() {
    use gpfest::experiments::{EstimatorKind, NetworkKind};
    let p = ModelParams::new(1.5, -0.5, 0.8).unwrap();
    let g1 = Scenario::new(p, 16, NetworkKind::G1, NoiseSpec::noiseless(), EstimatorKind::Hayashi, 10, 0).unwrap();
    let rb = rao_blackwell_mc(&g1).unwrap();
    let tree = rao_blackwell_mc(&Scenario::hayashi(p, 4, 0.0, 10, 0).unwrap()).unwrap();
    for i in 0..3 {
        assert!((rb.mean[i] - tree.mean[i]).abs() < 1e-12);
        assert!((rb.var[i] - tree.var[i]).abs() < 1e-12);
    }
}
