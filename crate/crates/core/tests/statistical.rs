//! Statistical behaviour of the generator, the estimator and the tests.

use care_core::simulation::{
    generate_truth, rng_stream, sample_comparisons, sample_comparisons_with, SyntheticSpec,
};
use care_core::{
    beta_inference, build_projection, fit_mle_with_projection, is_connected, preprocess_covariates,
    variance_model_at, FitConfig,
};

#[test]
fn generator_laws() {
    let spec = SyntheticSpec::new(200, 5, 31);
    let t = generate_truth(&spec).unwrap();
    let m = 200.0f64;

    let (lo, hi) = (spec.alpha_low, spec.alpha_high);
    let mean = t.alpha_raw.mean();
    let sd = (hi - lo) / 12f64.sqrt();
    assert!((mean - (lo + hi) / 2.0).abs() <= 3.0 * sd / m.sqrt());
    assert!(t.alpha_raw.iter().all(|a| (lo..=hi).contains(a)));

    assert!((t.beta_raw.norm() - 0.5 * (200.0f64 / 6.0).sqrt()).abs() < 1e-12);

    let raw = t.covariates.raw();
    let count = raw.len() as f64;
    let cov_mean = raw.mean();
    let cov_var = raw.iter().map(|x| (x - cov_mean).powi(2)).sum::<f64>() / count;
    assert!(cov_mean.abs() <= 4.0 * (1.0f64 / 12.0).sqrt() / count.sqrt());
    // Var of Uniform[-1/2, 1/2] is 1/12; the sample variance has sd about 0.0745 / sqrt(count).
    assert!((cov_var - 1.0 / 12.0).abs() <= 4.0 * 0.0745 / count.sqrt());

    assert!(t.projection.params_residual(&t.truth) <= 1e-8);
    assert!(t.kappa1 >= 1.0);
}

#[test]
fn dense_well_sampled_design_recovers_intercepts() {
    let t = generate_truth(&SyntheticSpec::new(200, 5, 1)).unwrap();
    let data = sample_comparisons(&t.covariates, &t.truth, 1.0, 50, 1, 0).unwrap();
    let fit = fit_mle_with_projection(&data, &t.covariates, &t.projection, &FitConfig::default()).unwrap();
    assert!(fit.converged);
    let err = (&fit.params.alpha - &t.truth.alpha).amax();
    assert!(err < 0.1, "alpha error {err}");
}

#[test]
fn pipeline_on_generated_data_matches_stages() {
    let t = generate_truth(&SyntheticSpec::new(60, 3, 2)).unwrap();
    let data = sample_comparisons(&t.covariates, &t.truth, 0.3, 5, 2, 0).unwrap();
    let cov = preprocess_covariates(t.covariates.raw(), true).unwrap();
    let proj = build_projection(&cov).unwrap();
    let staged = fit_mle_with_projection(&data, &cov, &proj, &FitConfig::default()).unwrap();
    let piped =
        care_core::fit_care_scores_pipeline(&data, t.covariates.raw(), true, &FitConfig::default()).unwrap();
    assert_eq!(staged, piped.fit);
    assert_eq!(cov.scaled(), t.covariates.scaled());
}

#[test]
fn loading_test_has_nominal_size_under_the_null() {
    let mut spec = SyntheticSpec::new(60, 2, 17);
    spec.beta_norm = 0.0;
    let t = generate_truth(&spec).unwrap();
    assert_eq!(t.truth.beta.amax(), 0.0);

    let reps = 400;
    let mut rejections = 0;
    let mut tests = 0;
    for rep in 0..reps {
        let mut rng = rng_stream(17, rep);
        let data = loop {
            let data = sample_comparisons_with(&t.covariates, &t.truth, 0.3, 5, &mut rng).unwrap();
            if is_connected(&data) {
                break data;
            }
        };
        let fit = fit_mle_with_projection(&data, &t.covariates, &t.projection, &FitConfig::default()).unwrap();
        let vm = variance_model_at(&data, &t.covariates, &fit.params, &t.projection).unwrap();
        for row in beta_inference(&fit, &vm, 0.95).unwrap() {
            tests += 1;
            if row.p_value < 0.05 {
                rejections += 1;
            }
        }
    }
    let rate = rejections as f64 / tests as f64;
    assert!((0.03..=0.08).contains(&rate), "rejection rate {rate}");
}
