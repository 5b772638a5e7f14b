//! Sampling, measurement and density properties checked by simulation.

use gpfest::model::{
    conditional_log_density, marginal_log_density, measure, sample_amplitudes, AmplitudeEnsemble, Count, Heterodyne,
    ModelParams, Observations, SelectionSet,
};
use gpfest::rng::RandomSource;
use proptest::prelude::*;

#[test]
fn likelihood_integrates_to_marginal() {
    // Two modes: heterodyne on mode 1 (mean theta, eta), counting on mode 2
    // (mean zero). Average the conditional likelihood of a fixed probe over
    // prior draws.
    let params = ModelParams::new(0.7, -0.4, 1.3).unwrap();
    let sel = SelectionSet::new(2, vec![1]).unwrap();
    let probe = Observations {
        het: vec![Heterodyne { index: 1, x: 0.9, y: -0.1 }],
        counts: vec![Count { index: 2, z: 2 }],
    };
    let target = marginal_log_density(&probe, &params, &sel).unwrap().exp();
    let centered = ModelParams::new(0.0, 0.0, params.nu).unwrap();
    let reps = 100_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut rng = RandomSource::new(21, 0);
    for _ in 0..reps {
        let signal = sample_amplitudes(&params, 1, &mut rng).unwrap();
        let idle = sample_amplitudes(&centered, 1, &mut rng).unwrap();
        let ens = AmplitudeEnsemble::new(vec![signal.a[0], idle.a[0]], vec![signal.b[0], idle.b[0]]).unwrap();
        let l = conditional_log_density(&probe, &ens).unwrap().exp();
        sum += l;
        sum_sq += l * l;
    }
    let mean = sum / reps as f64;
    let se = ((sum_sq / reps as f64 - mean * mean) / reps as f64).sqrt();
    assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target} (se {se})");
}

#[test]
fn heterodyne_and_count_marginal_moments() {
    let params = ModelParams::new(0.0, 0.0, 1.5).unwrap();
    let reps = 1_000_000u64;
    let het = SelectionSet::all(1).unwrap();
    let cnt = SelectionSet::new(1, vec![]).unwrap();
    let (mut sx, mut sxx, mut sz) = (0.0, 0.0, 0.0);
    for r in 0..reps {
        let mut rng = RandomSource::new(5, r);
        let ens = sample_amplitudes(&params, 1, &mut rng).unwrap();
        let x = measure(&ens, &het, &mut rng).unwrap().het[0].x;
        sx += x;
        sxx += x * x;
        sz += measure(&ens, &cnt, &mut rng).unwrap().counts[0].z as f64;
    }
    let n = reps as f64;
    let var = (sxx - sx * sx / n) / (n - 1.0);
    assert!((var / 1.25 - 1.0).abs() < 0.01, "Var X = {var}");
    assert!((sz / n / 1.5 - 1.0).abs() < 0.01, "E Z = {}", sz / n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_key_reproduces_observations(seed in any::<u64>(), stream in any::<u64>(), m in 1u32..6, nu in 0.0f64..5.0) {
        let params = ModelParams::new(0.3, 1.1, nu).unwrap();
        let n = 1usize << m;
        let sel = SelectionSet::block_leaders(m, m / 2).unwrap();
        let draw = || {
            let mut rng = RandomSource::new(seed, stream);
            let ens = sample_amplitudes(&params, n, &mut rng).unwrap();
            measure(&ens, &sel, &mut rng).unwrap()
        };
        let (a, b) = (draw(), draw());
        prop_assert_eq!(a.het.len(), b.het.len());
        for (p, q) in a.het.iter().zip(&b.het) {
            prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
            prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        prop_assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn marginal_density_is_normalized_over_counts(nu in 0.01f64..20.0) {
        let params = ModelParams::new(0.0, 0.0, nu).unwrap();
        let sel = SelectionSet::new(1, vec![]).unwrap();
        let mut total = 0.0;
        let mut mean = 0.0;
        for z in 0..5000u64 {
            let obs = Observations { het: vec![], counts: vec![Count { index: 1, z }] };
            let p = marginal_log_density(&obs, &params, &sel).unwrap().exp();
            total += p;
            mean += z as f64 * p;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((mean - nu).abs() < 1e-6 * nu.max(1.0));
    }
}
