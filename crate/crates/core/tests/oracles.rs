mod common;

use approx::assert_abs_diff_eq;
use common::*;
use less_core::estimators::{fit_forest, fit_linear};
use less_core::eval::mse;
use less_core::seed::rng_from_seed;
use less_core::synthetic::{random_linear, smooth_nonlinear, uniform_matrix};
use less_core::{compute_weights, fit, fit_with_threads, normalize, Dataset, LambdaMode, LessConfig};
use ndarray::Array1;

#[test]
fn linear_fit_matches_qr() {
    for seed in 0..10 {
        let (data, _) = random_linear::<f64>(40 + seed as usize, 1 + seed as usize % 5, 0.3, seed);
        let rows = to_rows(&data.x().to_owned());
        let want = ols_qr(&rows, &data.y().to_vec(), true);
        let got = fit_linear(data.x(), data.y());
        for (a, b) in got.coefficients.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}

#[test]
fn zero_lambda_matches_qr_ols() {
    // p + 1 <= m, so the local coefficient vectors can span the design
    let (data, _) = random_linear::<f64>(300, 3, 1.0, 17);
    let cfg = LessConfig {
        frac_of_samples: 0.1,
        n_replications: 1,
        lambda: LambdaMode::Fixed(0.0),
        ..LessConfig::default()
    };
    let model = fit(&data, &cfg).unwrap();
    let (nd, _) = normalize(&data).unwrap();
    let rows = to_rows(&nd.x().to_owned());
    let coef = ols_qr(&rows, &nd.y().to_vec(), true);
    for r in &rows {
        let ols = r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() + coef[3];
        assert_abs_diff_eq!(model.predict_normalized(r).unwrap(), ols, epsilon = 1e-8);
    }
}

#[test]
fn weights_match_direct_formula() {
    // lambda = 1, distances [0, 1]
    let w = compute_weights(&[0.0], &[vec![0.0], vec![1.0]], 1.0, true).unwrap();
    let e = (-1.0f64).exp();
    assert_abs_diff_eq!(w.w[0], 1.0 / (1.0 + e), epsilon = 1e-12);
    assert_abs_diff_eq!(w.w[1], e / (1.0 + e), epsilon = 1e-12);
    assert_abs_diff_eq!(w.w[0], 0.73106, epsilon = 1e-5);
}

#[test]
fn mse_matches_summation() {
    let mut rng = rng_from_seed(5);
    let m = uniform_matrix(&mut rng, 2, 500);
    let (a, b) = (m.row(0).to_vec(), m.row(1).to_vec());
    let mut oracle = 0.0;
    for i in 0..a.len() {
        oracle += (a[i] - b[i]).powi(2);
    }
    oracle /= a.len() as f64;
    assert_abs_diff_eq!(mse(&a, &b).unwrap(), oracle, epsilon = 1e-12);
}

#[test]
fn forest_is_thread_count_invariant() {
    let data: Dataset<f64> = smooth_nonlinear(300, 4, 2);
    let fit_on = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fit_forest(data.x(), data.y(), 12, &mut rng_from_seed(8)))
    };
    assert_eq!(fit_on(1), fit_on(3));
}

#[test]
fn fits_are_thread_count_invariant() {
    let data: Dataset<f64> = smooth_nonlinear(600, 3, 4);
    let cfg = LessConfig {
        frac_of_samples: 0.02,
        n_replications: 6,
        use_validation_split: true,
        ..LessConfig::default()
    };
    let a = fit_with_threads(&data, &cfg, 1).unwrap().to_json().unwrap();
    let b = fit_with_threads(&data, &cfg, 4).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn normalization_is_fit_on_training_rows_only() {
    let (data, _) = random_linear::<f64>(50, 2, 0.1, 1);
    let train = data.select_rows(&(0..25).collect::<Vec<_>>()).unwrap();
    let model = fit(&train, &LessConfig { n_replications: 1, ..LessConfig::default() }).unwrap();
    let y: Array1<f64> = train.y().to_owned();
    assert_abs_diff_eq!(model.norm.y_mean, y.mean().unwrap(), epsilon = 1e-12);
}
