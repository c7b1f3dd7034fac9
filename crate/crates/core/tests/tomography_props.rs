use num_complex::Complex64;
use proptest::prelude::*;
use qdcascade::linalg::ComplexMatrix;
use qdcascade::state::TwoQubitState;
use qdcascade::timebin::{model_state, TimeBinModelParams};
use qdcascade::tomography::{
    gram_rank, reconstruct_linear, reconstruct_mle, simulate_counts, standard_settings,
    state_fidelity, MleOptions, TomographyDataset,
};

fn mixed_state() -> impl Strategy<Value = TwoQubitState> {
    prop::collection::vec(-1.0..1.0f64, 32)
        .prop_filter("non-zero", |a| a.iter().any(|v| v.abs() > 1e-2))
        .prop_map(|a| {
            let g = ComplexMatrix::from_fn(4, |i, j| {
                Complex64::new(a[2 * (4 * i + j)], a[2 * (4 * i + j) + 1])
            });
            let rho = g.checked_mul(&g.adjoint()).unwrap();
            let tr = rho.trace().re;
            TwoQubitState::new(rho.scale_real(1.0 / tr).hermitian_part()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_inversion_is_exact_without_noise(rho in mixed_state(), n in 1.0..1e6f64) {
        let data = TomographyDataset::noiseless(&rho, &standard_settings(), n).unwrap();
        let est = reconstruct_linear(&data).unwrap();
        prop_assert!(est.state.matrix().max_abs_diff(rho.matrix()) < 1e-10);
        prop_assert!(est.physical);
    }

    #[test]
    fn mle_returns_a_physical_state(rho in mixed_state(), seed in 0u64..1000) {
        let data = simulate_counts(&rho, &standard_settings(), 200.0, seed).unwrap();
        let mle = reconstruct_mle(&data, &MleOptions::default()).unwrap();
        prop_assert!((mle.state.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(mle.state.matrix().hermiticity_violation() < 1e-12);
        prop_assert!(mle.state.is_physical(1e-12));
    }

    #[test]
    fn counts_text_round_trip(rho in mixed_state(), seed in 0u64..1000) {
        let data = simulate_counts(&rho, &standard_settings(), 500.0, seed).unwrap();
        let mut buf = Vec::new();
        data.write_text(&mut buf, &["x".into()]).unwrap();
        let back = TomographyDataset::parse_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, data);
    }
}

#[test]
fn settings_are_informationally_complete() {
    assert_eq!(gram_rank(&standard_settings(), 1e-10).unwrap(), 16);
    assert_eq!(gram_rank(&standard_settings()[..15], 1e-10).unwrap(), 15);
}

#[test]
fn poisson_counts_depend_only_on_the_seed() {
    let rho = model_state(&TimeBinModelParams::new(0.0, 0.06, 0.92).unwrap()).unwrap();
    let a = simulate_counts(&rho, &standard_settings(), 1000.0, 42).unwrap();
    let b = simulate_counts(&rho, &standard_settings(), 1000.0, 42).unwrap();
    let c = simulate_counts(&rho, &standard_settings(), 1000.0, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts(), c.counts());
}

#[test]
fn count_mean_and_variance_are_poissonian() {
    // 4000 draws of one setting with mean 250: both moments within 5σ
    let rho = TwoQubitState::maximally_mixed();
    let settings = standard_settings();
    let n_mean = 1000.0;
    let mut first = Vec::new();
    for seed in 0..4000 {
        first.push(
            simulate_counts(&rho, &settings, n_mean, seed)
                .unwrap()
                .counts()[0],
        );
    }
    let n = first.len() as f64;
    let mean = first.iter().sum::<f64>() / n;
    let var = first.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(
        (mean - 250.0).abs() < 5.0 * (250.0 / n).sqrt(),
        "mean {mean}"
    );
    assert!(
        (var - 250.0).abs() < 5.0 * 250.0 * (2.0 / n).sqrt(),
        "var {var}"
    );
}

#[test]
fn mle_approaches_truth_with_counts() {
    let rho = model_state(&TimeBinModelParams::new(0.4, 0.06, 0.92).unwrap()).unwrap();
    let mut prev = 0.0;
    for n_mean in [1e2, 1e4, 1e6] {
        let mean_f: f64 = (0..5)
            .map(|seed| {
                let data = simulate_counts(&rho, &standard_settings(), n_mean, seed).unwrap();
                let mle = reconstruct_mle(&data, &MleOptions::default()).unwrap();
                state_fidelity(&rho, &mle.state).unwrap()
            })
            .sum::<f64>()
            / 5.0;
        assert!(mean_f > prev, "n_mean {n_mean}: {mean_f} after {prev}");
        prev = mean_f;
    }
    assert!(prev > 0.999);
}
