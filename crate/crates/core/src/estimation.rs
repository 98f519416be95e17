//! Covariate preprocessing and the constrained maximum-likelihood fit by
//! projected gradient descent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{ComparisonData, CovariateMatrix, ParamVector};
use crate::error::{CareError, Result};
use crate::graph::require_connected;
use crate::model::{lift_gradient, nll_from_scores, score_gradient};
use crate::projection::{build_projection, ProjectionOperator};

/// Standardizes (optionally) and rescales covariates so that the largest row
/// norm equals `sqrt((d + 1) / n)`.
///
/// Standardization uses the population standard deviation.
pub fn preprocess_covariates(raw: &DMatrix<f64>, standardize: bool) -> Result<CovariateMatrix> {
    let n = raw.nrows();
    let d = raw.ncols();
    if n < 2 {
        return Err(CareError::InvalidArgument(format!("need at least 2 items, got {n}")));
    }
    if d + 1 >= n {
        return Err(CareError::DimensionMismatch {
            context: "covariate dimension must satisfy d + 1 < n",
            expected: n.saturating_sub(2),
            actual: d,
        });
    }
    if let Some(pos) = raw.iter().position(|v| !v.is_finite()) {
        return Err(CareError::InvalidArgument(format!(
            "non-finite covariate at row {}, column {}",
            pos % n,
            pos / n
        )));
    }

    let mut column_means = DVector::zeros(d);
    let mut column_sds = DVector::from_element(d, 1.0);
    let mut centered = raw.clone();
    if standardize {
        for c in 0..d {
            let col = raw.column(c);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            if sd <= 1e-12 * mean.abs().max(1.0) {
                return Err(CareError::DegenerateColumn { column: c });
            }
            column_means[c] = mean;
            column_sds[c] = sd;
            centered.column_mut(c).apply(|v| *v = (*v - mean) / sd);
        }
    }

    let scale_k = if d == 0 {
        1.0
    } else {
        let max_norm = centered.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        if max_norm == 0.0 {
            return Err(CareError::InvalidArgument("all covariates are zero".into()));
        }
        max_norm / ((d + 1) as f64 / n as f64).sqrt()
    };
    let scaled = centered / scale_k;
    let mut augmented = DMatrix::from_element(n, d + 1, 1.0);
    augmented.view_mut((0, 1), (n, d)).copy_from(&scaled);

    Ok(CovariateMatrix {
        raw: raw.clone(),
        scale_k,
        scaled,
        augmented,
        column_means,
        column_sds,
    })
}

/// Projects parameters onto the identifiable subspace.
pub fn project_to_theta(params: &ParamVector, proj: &ProjectionOperator) -> Result<ParamVector> {
    if params.n() != proj.n() || params.d() != proj.d() {
        return Err(CareError::DimensionMismatch {
            context: "parameter length vs projection",
            expected: proj.n() + proj.d(),
            actual: params.n() + params.d(),
        });
    }
    let mut out = ParamVector::from_joint(&proj.apply(&params.joint()), params.n());
    out.identified = true;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSize {
    /// `1 / (ridge + lambda_max / 4)` with `lambda_max` the largest eigenvalue
    /// of the trial-weighted, scaled design.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub step_size: StepSize,
    pub max_iters: usize,
    /// Stop once the projected gradient norm falls to this value.
    pub grad_tol: f64,
    /// Stop once an accepted step is this short.
    pub step_tol: f64,
    /// Ridge penalty `(lambda / 2) ||alpha||^2`; `beta` is never penalized.
    pub ridge_alpha: f64,
    /// Divisor applied to the log-likelihood. `None` divides by the total
    /// number of trials.
    pub likelihood_scale: Option<f64>,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            step_size: StepSize::Auto,
            max_iters: 20_000,
            grad_tol: 1e-8,
            step_tol: 1e-12,
            ridge_alpha: 0.0,
            likelihood_scale: None,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if let StepSize::Fixed(eta) = self.step_size {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(CareError::Config(format!("step_size must be positive, got {eta}")));
            }
        }
        if self.max_iters == 0 {
            return Err(CareError::Config("max_iters must be positive".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.step_tol > 0.0) {
            return Err(CareError::Config("tolerances must be positive".into()));
        }
        if !(self.ridge_alpha >= 0.0 && self.ridge_alpha.is_finite()) {
            return Err(CareError::Config(format!(
                "ridge_alpha must be nonnegative, got {}",
                self.ridge_alpha
            )));
        }
        if let Some(s) = self.likelihood_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CareError::Config(format!("likelihood_scale must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// Backtracking could not find a non-increasing step.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `exp(max_i s_i - min_j s_j)` over fitted scores.
    pub kappa1: f64,
    pub incoherence: f64,
    pub connected: bool,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub step_size: f64,
    pub likelihood_scale: f64,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ParamVector,
    pub diagnostics: FitDiagnostics,
    /// True when the projected gradient norm is within `grad_tol`.
    pub converged: bool,
    /// Objective value at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
}

struct Objective<'a> {
    data: &'a ComparisonData,
    cov: &'a CovariateMatrix,
    proj: &'a ProjectionOperator,
    inv_scale: f64,
    ridge: f64,
}

impl Objective<'_> {
    fn value_and_projected_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let n = self.cov.n();
        let params = ParamVector::from_joint(x, n);
        let scores = params.scores(self.cov);
        let mut value = nll_from_scores(self.data, &scores) * self.inv_scale;
        let mut grad = lift_gradient(self.cov, &score_gradient(self.data, &scores)) * self.inv_scale;
        if self.ridge > 0.0 {
            value += 0.5 * self.ridge * params.alpha.norm_squared();
            let mut head = grad.rows_mut(0, n);
            head.axpy(self.ridge, &params.alpha, 1.0);
        }
        (value, self.proj.apply(&grad))
    }

    /// Largest eigenvalue of the trial-weighted design divided by the
    /// likelihood scale, by power iteration on `v -> T W T' v`.
    fn design_lambda_max(&self) -> f64 {
        let n = self.cov.n();
        let d = self.cov.d();
        let x = self.cov.scaled();
        let apply = |v: &DVector<f64>| -> DVector<f64> {
            // u = T' v, item-space scores of v.
            let mut u = v.rows(0, n).into_owned();
            if d > 0 {
                u += x * v.rows(n, d);
            }
            let mut wu = DVector::zeros(n);
            for e in self.data.edges() {
                let diff = e.trials as f64 * (u[e.j] - u[e.i]);
                wu[e.j] += diff;
                wu[e.i] -= diff;
            }
            lift_gradient(self.cov, &wu)
        };
        let mut v = DVector::from_fn(n + d, |k, _| {
            ((k as u64).wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0 - 0.5
        });
        v /= v.norm();
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w = apply(&v);
            let next = v.dot(&w);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
            if (next - lambda).abs() <= 1e-6 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda * self.inv_scale
    }
}

/// Constrained maximum-likelihood fit over the identifiable subspace.
pub fn fit_mle(data: &ComparisonData, cov: &CovariateMatrix, config: &FitConfig) -> Result<FitResult> {
    let proj = build_projection(cov)?;
    fit_mle_with_projection(data, cov, &proj, config)
}

/// Same as [`fit_mle`] with a precomputed projection.
pub fn fit_mle_with_projection(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    proj: &ProjectionOperator,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    if data.n_items() != cov.n() {
        return Err(CareError::DimensionMismatch {
            context: "comparison items vs covariate rows",
            expected: cov.n(),
            actual: data.n_items(),
        });
    }
    if proj.n() != cov.n() || proj.d() != cov.d() {
        return Err(CareError::DimensionMismatch {
            context: "projection vs covariates",
            expected: cov.n() + cov.d(),
            actual: proj.n() + proj.d(),
        });
    }
    require_connected(data)?;

    let scale = config
        .likelihood_scale
        .unwrap_or_else(|| data.total_trials() as f64);
    let objective = Objective {
        data,
        cov,
        proj,
        inv_scale: 1.0 / scale,
        ridge: config.ridge_alpha,
    };

    let mut eta = match config.step_size {
        StepSize::Fixed(eta) => eta,
        StepSize::Auto => 1.0 / (config.ridge_alpha + objective.design_lambda_max() / 4.0),
    };
    let initial_eta = eta;

    let n = cov.n();
    let mut x = DVector::zeros(n + cov.d());
    let (mut fx, mut g) = objective.value_and_projected_gradient(&x);
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut stop_reason = StopReason::MaxIterations;

    while iterations < config.max_iters {
        if g.norm() <= config.grad_tol {
            stop_reason = StopReason::GradientTolerance;
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = proj.apply(&(&x - &g * eta));
            let (fc, gc) = objective.value_and_projected_gradient(&candidate);
            // Near the optimum the decrease drops below rounding error.
            if fc <= fx + 16.0 * f64::EPSILON * fx.abs() {
                accepted = Some((candidate, fc, gc));
                break;
            }
            eta *= 0.5;
        }
        let Some((candidate, fc, gc)) = accepted else {
            stop_reason = StopReason::LineSearchStalled;
            break;
        };
        iterations += 1;
        // Backtracks caused by rounding noise should not shrink the step for good.
        eta = (2.0 * eta).min(initial_eta);
        let step = (&candidate - &x).norm();
        x = candidate;
        fx = fc;
        g = gc;
        trace.push(fx);
        if step <= config.step_tol {
            stop_reason = StopReason::StepTolerance;
            break;
        }
    }

    let final_grad_norm = g.norm();
    let converged = final_grad_norm <= config.grad_tol;
    if converged {
        stop_reason = StopReason::GradientTolerance;
    }
    let mut params = ParamVector::from_joint(&x, n);
    params.identified = true;
    let scores = params.scores(cov);
    let spread = scores.max() - scores.min();

    Ok(FitResult {
        diagnostics: FitDiagnostics {
            kappa1: spread.exp(),
            incoherence: proj.incoherence(),
            connected: true,
            iterations,
            final_grad_norm,
            step_size: initial_eta,
            likelihood_scale: scale,
            stop_reason,
        },
        params,
        converged,
        objective_trace: trace,
    })
}

/// Everything produced by the preprocess, project, fit pipeline.
#[derive(Debug, Clone)]
pub struct PipelineFit {
    pub covariates: CovariateMatrix,
    pub projection: ProjectionOperator,
    pub fit: FitResult,
}

/// Preprocesses raw covariates, builds the projection and fits.
pub fn fit_care_scores_pipeline(
    data: &ComparisonData,
    raw_covariates: &DMatrix<f64>,
    standardize: bool,
    config: &FitConfig,
) -> Result<PipelineFit> {
    let covariates = preprocess_covariates(raw_covariates, standardize)?;
    let projection = build_projection(&covariates)?;
    let fit = fit_mle_with_projection(data, &covariates, &projection, config)?;
    Ok(PipelineFit { covariates, projection, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Edge;
    use crate::model::neg_log_likelihood;
    use crate::simulation::{generate_truth, sample_comparisons, SyntheticSpec};
    use rand::Rng;

    fn instance(n: usize, d: usize, p: f64, trials: u64, seed: u64) -> (CovariateMatrix, ProjectionOperator, ComparisonData) {
        let truth = generate_truth(&SyntheticSpec::new(n, d, seed)).unwrap();
        let data = sample_comparisons(&truth.covariates, &truth.truth, p, trials, seed, 7).unwrap();
        (truth.covariates, truth.projection, data)
    }

    fn edge(i: usize, j: usize, trials: u64, wins_j: u64) -> Edge {
        Edge { i, j, trials, wins_j }
    }

    #[test]
    fn tight_tolerance_converges_quickly() {
        // Rounding-noise backtracks used to shrink the step permanently.
        let (cov, proj, data) = instance(200, 5, 0.5, 25, 3);
        let fit = fit_mle_with_projection(&data, &cov, &proj, &FitConfig { grad_tol: 1e-10, ..FitConfig::default() }).unwrap();
        assert!(fit.converged);
        assert!(fit.diagnostics.iterations < 500, "{} iterations", fit.diagnostics.iterations);
    }

    #[test]
    fn no_covariates_gives_intercept_only_design() {
        let cov = preprocess_covariates(&DMatrix::zeros(4, 0), true).unwrap();
        assert_eq!(cov.scale_k(), 1.0);
        assert_eq!(cov.augmented(), &DMatrix::from_element(4, 1, 1.0));
    }

    #[test]
    fn alternating_column_scale() {
        let raw = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let cov = preprocess_covariates(&raw, true).unwrap();
        assert!((cov.scale_k() - 2f64.sqrt()).abs() < 1e-12);
        assert!((cov.scaled()[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rescaled_rows_hit_target_norm() {
        let mut rng = crate::simulation::rng_stream(11, 0);
        let raw = DMatrix::from_fn(200, 5, |_, _| rng.random_range(-3.0..5.0));
        let cov = preprocess_covariates(&raw, true).unwrap();
        let max_norm = cov.scaled().row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        assert!((max_norm - (6.0f64 / 200.0).sqrt()).abs() < 1e-12);
        for c in 0..5 {
            assert!(cov.scaled().column(c).mean().abs() < 1e-12);
        }
    }

    #[test]
    fn preprocessing_errors() {
        let constant = DMatrix::from_fn(5, 2, |i, j| if j == 1 { 3.0 } else { i as f64 });
        assert_eq!(
            preprocess_covariates(&constant, true).unwrap_err(),
            CareError::DegenerateColumn { column: 1 }
        );
        assert!(matches!(
            preprocess_covariates(&DMatrix::from_fn(3, 2, |i, j| (i * j) as f64), false),
            Err(CareError::DimensionMismatch { .. })
        ));
        assert!(preprocess_covariates(&DMatrix::zeros(1, 0), true).is_err());
    }

    #[test]
    fn projection_to_theta() {
        let (cov, proj, _) = instance(5, 2, 1.0, 1, 3);
        let mut rng = crate::simulation::rng_stream(4, 0);
        let v = ParamVector::new(
            DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0)),
            DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)),
        );
        let once = project_to_theta(&v, &proj).unwrap();
        assert!(once.identified);
        assert!((cov.augmented().transpose() * &once.alpha).amax() <= 1e-10);
        let twice = project_to_theta(&once, &proj).unwrap();
        assert!((twice.joint() - once.joint()).amax() <= 1e-12);

        let cov0 = preprocess_covariates(&DMatrix::zeros(3, 0), true).unwrap();
        let proj0 = build_projection(&cov0).unwrap();
        let flat = ParamVector::new(DVector::from_element(3, 1.0), DVector::zeros(0));
        assert!(project_to_theta(&flat, &proj0).unwrap().alpha.amax() < 1e-15);
    }

    #[test]
    fn symmetric_pair_fits_equal_scores() {
        let cov = preprocess_covariates(&DMatrix::zeros(2, 0), true).unwrap();
        let data = ComparisonData::new(2, vec![edge(0, 1, 2, 1)]).unwrap();
        let fit = fit_mle(&data, &cov, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.params.alpha.amax() < 1e-12);
    }

    #[test]
    fn balanced_three_cycle_pipeline() {
        let data = ComparisonData::new(3, vec![edge(0, 1, 1, 1), edge(1, 2, 1, 1), edge(0, 2, 1, 0)]).unwrap();
        let out = fit_care_scores_pipeline(&data, &DMatrix::zeros(3, 0), true, &FitConfig::default()).unwrap();
        assert!(out.fit.params.alpha.amax() < 1e-9);
    }

    #[test]
    fn two_item_closed_form() {
        // 3 of 4 wins for item 1: alpha_1 - alpha_0 = ln 3, centered.
        let cov = preprocess_covariates(&DMatrix::zeros(2, 0), true).unwrap();
        let data = ComparisonData::new(2, vec![edge(0, 1, 4, 3)]).unwrap();
        let fit = fit_mle(&data, &cov, &FitConfig { grad_tol: 1e-12, ..FitConfig::default() }).unwrap();
        let half = 3f64.ln() / 2.0;
        assert!((fit.params.alpha[0] + half).abs() < 1e-9 && (fit.params.alpha[1] - half).abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let cov = preprocess_covariates(&DMatrix::zeros(4, 0), true).unwrap();
        let data = ComparisonData::new(4, vec![edge(0, 1, 1, 1), edge(2, 3, 1, 0)]).unwrap();
        match fit_mle(&data, &cov, &FitConfig::default()) {
            Err(CareError::Disconnected { components }) => assert_eq!(components, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let (cov, _, data) = instance(20, 2, 0.5, 3, 1);
        let fit = fit_mle(&data, &cov, &FitConfig { max_iters: 2, ..FitConfig::default() }).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.diagnostics.stop_reason, StopReason::MaxIterations);
        assert_eq!(fit.diagnostics.iterations, 2);
    }

    #[test]
    fn descent_feasibility_and_optimality() {
        for seed in 0..5 {
            let (cov, proj, data) = instance(15, 2, 0.6, 4, seed);
            let fit = fit_mle_with_projection(&data, &cov, &proj, &FitConfig::default()).unwrap();
            assert!(fit.converged);
            assert!(fit.diagnostics.final_grad_norm <= 1e-8);
            assert!(fit.diagnostics.kappa1 >= 1.0);
            for w in fit.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
            assert!(proj.params_residual(&fit.params) <= 1e-8);

            let basis = proj.theta_basis();
            let base = neg_log_likelihood(&data, &cov, &fit.params).unwrap();
            let mut rng = crate::simulation::rng_stream(seed, 1);
            for _ in 0..10 {
                let u = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
                let delta = &basis * u;
                let delta = &delta * (1e-3 / delta.norm());
                let moved = ParamVector::from_joint(&(fit.params.joint() + delta), 15);
                assert!(neg_log_likelihood(&data, &cov, &moved).unwrap() >= base - 1e-8);
            }
        }
    }

    #[test]
    fn edge_order_does_not_matter() {
        let (cov, proj, data) = instance(25, 3, 0.4, 5, 9);
        let mut edges = data.edges().to_vec();
        edges.reverse();
        edges.swap(0, 3);
        let shuffled = ComparisonData::new(data.n_items(), edges).unwrap();
        let a = fit_mle_with_projection(&data, &cov, &proj, &FitConfig::default()).unwrap();
        let b = fit_mle_with_projection(&shuffled, &cov, &proj, &FitConfig::default()).unwrap();
        assert!((a.params.joint() - b.params.joint()).amax() <= 1e-6);
    }

    #[test]
    fn ridge_shrinks_alpha_monotonically() {
        let (cov, proj, data) = instance(20, 2, 0.7, 3, 5);
        let plain = fit_mle_with_projection(&data, &cov, &proj, &FitConfig::default()).unwrap();
        let zero = fit_mle_with_projection(&data, &cov, &proj, &FitConfig { ridge_alpha: 0.0, ..FitConfig::default() })
            .unwrap();
        assert_eq!(plain.params, zero.params);
        let mut last = plain.params.alpha.norm();
        for lambda in [0.01, 0.1, 0.5, 1.0, 5.0] {
            let cfg = FitConfig { ridge_alpha: lambda, ..FitConfig::default() };
            let norm = fit_mle_with_projection(&data, &cov, &proj, &cfg).unwrap().params.alpha.norm();
            assert!(norm <= last + 1e-9, "lambda {lambda}: {norm} > {last}");
            last = norm;
        }
    }

    #[test]
    fn likelihood_scale_leaves_argmin() {
        let (cov, proj, data) = instance(15, 1, 0.8, 2, 2);
        let a = fit_mle_with_projection(&data, &cov, &proj, &FitConfig::default()).unwrap();
        let cfg = FitConfig { likelihood_scale: Some(1.0), grad_tol: 1e-6, ..FitConfig::default() };
        let b = fit_mle_with_projection(&data, &cov, &proj, &cfg).unwrap();
        assert!((a.params.joint() - b.params.joint()).amax() <= 1e-5);
    }

    #[test]
    fn fixed_step_too_large_backtracks() {
        let (cov, proj, data) = instance(15, 1, 0.8, 2, 2);
        let cfg = FitConfig { step_size: StepSize::Fixed(1e4), ..FitConfig::default() };
        let fit = fit_mle_with_projection(&data, &cov, &proj, &cfg).unwrap();
        assert!(fit.converged);
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn pipeline_matches_manual_stages_bitwise() {
        let truth = generate_truth(&SyntheticSpec::new(30, 2, 4)).unwrap();
        let raw = truth.covariates.raw().clone();
        let data = sample_comparisons(&truth.covariates, &truth.truth, 0.5, 4, 4, 0).unwrap();
        let cfg = FitConfig::default();
        let one = fit_care_scores_pipeline(&data, &raw, true, &cfg).unwrap();
        let two = fit_care_scores_pipeline(&data, &raw, true, &cfg).unwrap();
        assert_eq!(one.fit, two.fit);
        let cov = preprocess_covariates(&raw, true).unwrap();
        let manual = fit_mle(&data, &cov, &cfg).unwrap();
        assert_eq!(one.fit, manual);
    }

    #[test]
    fn config_validation() {
        let bad = [
            FitConfig { step_size: StepSize::Fixed(0.0), ..FitConfig::default() },
            FitConfig { max_iters: 0, ..FitConfig::default() },
            FitConfig { grad_tol: 0.0, ..FitConfig::default() },
            FitConfig { ridge_alpha: -1.0, ..FitConfig::default() },
            FitConfig { likelihood_scale: Some(0.0), ..FitConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(CareError::Config(_))));
        }
    }
}
