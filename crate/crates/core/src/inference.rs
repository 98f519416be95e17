//! Plug-in uncertainty quantification for the constrained MLE.
//!
//! Variances come from the Moore-Penrose inverse of the Hessian compressed
//! to the identifiable subspace, `[P H P]^+`. The Hessian already carries
//! each edge's trial count, so the variance of `c' beta` is
//! `c̄' [P H P]^+ c̄` with no further division (`effective_l = 1`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{ComparisonData, CovariateMatrix, ParamVector};
use crate::error::{CareError, Result};
use crate::estimation::FitResult;
use crate::graph::require_connected;
use crate::model::{gradient, hessian};
use crate::normal;
use crate::projection::ProjectionOperator;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const DEFAULT_EIGEN_CUTOFF: f64 = 1e-10;

/// Default level for the soft-threshold quantile `Phi^{-1}(q)`.
pub const DEFAULT_THRESHOLD_QUANTILE: f64 = 0.995;

#[derive(Debug, Clone)]
pub struct VarianceModel {
    pub projected_hessian: DMatrix<f64>,
    pub pseudoinverse: DMatrix<f64>,
    pub eigen_threshold: f64,
    pub effective_l: f64,
    /// Number of eigenvalues treated as zero.
    pub null_dimension: usize,
    /// Set when more than `d + 1` eigenvalues vanish, which points at a
    /// disconnected graph or a collinear design.
    pub rank_deficient: bool,
    projection: ProjectionOperator,
}

impl VarianceModel {
    pub fn projection(&self) -> &ProjectionOperator {
        &self.projection
    }

    /// `c' [P H P]^+ c / effective_l`.
    pub fn contrast_variance(&self, c: &DVector<f64>) -> f64 {
        (c.dot(&(&self.pseudoinverse * c)) / self.effective_l).max(0.0)
    }
}

pub fn projected_hessian_pinv(
    hess: &DMatrix<f64>,
    proj: &ProjectionOperator,
    rel_eigen_cutoff: f64,
) -> Result<VarianceModel> {
    let dim = proj.matrix_p().nrows();
    if hess.nrows() != dim || hess.ncols() != dim {
        return Err(CareError::DimensionMismatch {
            context: "Hessian size vs projection",
            expected: dim,
            actual: hess.nrows(),
        });
    }
    if !(0.0..1.0).contains(&rel_eigen_cutoff) {
        return Err(CareError::InvalidArgument(format!(
            "eigenvalue cutoff must lie in [0, 1), got {rel_eigen_cutoff}"
        )));
    }
    let p = proj.matrix_p();
    let mut m = p * hess * p;
    m = (&m + m.transpose()) * 0.5;
    let eig = m.clone().symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    let threshold = rel_eigen_cutoff * lambda_max;

    let mut pinv = DMatrix::zeros(dim, dim);
    let mut retained = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > threshold && lambda > 0.0 {
            let v = eig.eigenvectors.column(k);
            pinv.ger(1.0 / lambda, &v, &v, 1.0);
            retained += 1;
        }
    }
    let null_dimension = dim - retained;
    Ok(VarianceModel {
        projected_hessian: m,
        pseudoinverse: pinv,
        eigen_threshold: rel_eigen_cutoff,
        effective_l: 1.0,
        null_dimension,
        rank_deficient: null_dimension > dim - proj.theta_dim(),
        projection: proj.clone(),
    })
}

/// Variance model from the Hessian at `params` (plug-in when `params` is the
/// fitted value, oracle when it is the truth).
pub fn variance_model_at(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    params: &ParamVector,
    proj: &ProjectionOperator,
) -> Result<VarianceModel> {
    projected_hessian_pinv(&hessian(data, cov, params)?, proj, DEFAULT_EIGEN_CUTOFF)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub estimate: f64,
    pub std_error: f64,
    pub z_stat: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// `max(||c_{1:n}||_1, sqrt(n/(d+1)) ||c_{n+1:}||_2) / ||P c||_2`; the
    /// normal approximation is only trustworthy when this stays bounded.
    pub validity_ratio: f64,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CareError::InvalidArgument(format!("confidence level must lie in (0, 1), got {level}")))
    }
}

/// Wald test of `c' beta = 0` with a two-sided confidence interval.
pub fn contrast_inference(
    c: &DVector<f64>,
    fit: &FitResult,
    vm: &VarianceModel,
    level: f64,
) -> Result<ContrastResult> {
    check_level(level)?;
    let proj = vm.projection();
    let n = proj.n();
    let d = proj.d();
    if c.len() != n + d {
        return Err(CareError::DimensionMismatch {
            context: "contrast length",
            expected: n + d,
            actual: c.len(),
        });
    }
    let c_bar = proj.apply(c);
    let c_bar_norm = c_bar.norm();
    if c_bar_norm <= 1e-12 * c.norm().max(1.0) {
        return Err(CareError::DegenerateContrast);
    }
    let variance = vm.contrast_variance(&c_bar);
    if variance <= 0.0 {
        return Err(CareError::DegenerateContrast);
    }
    let std_error = variance.sqrt();
    let estimate = c.dot(&fit.params.joint());
    let z_stat = estimate / std_error;
    let half_width = normal::quantile(0.5 + level / 2.0)? * std_error;

    let head_l1 = c.rows(0, n).lp_norm(1);
    let tail_l2 = if d > 0 { c.rows(n, d).norm() } else { 0.0 };
    let validity_ratio = head_l1.max((n as f64 / (d + 1) as f64).sqrt() * tail_l2) / c_bar_norm;

    Ok(ContrastResult {
        estimate,
        std_error,
        z_stat,
        p_value: normal::two_sided_p(z_stat),
        ci_low: estimate - half_width,
        ci_high: estimate + half_width,
        level,
        validity_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub kind: Coefficient,
    pub index: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub z_stat: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
}

fn coefficient_rows(
    kind: Coefficient,
    fit: &FitResult,
    vm: &VarianceModel,
    level: f64,
) -> Result<Vec<CoefficientRow>> {
    let n = vm.projection().n();
    let d = vm.projection().d();
    let (offset, count) = match kind {
        Coefficient::Alpha => (0, n),
        Coefficient::Beta => (n, d),
    };
    (0..count)
        .map(|index| {
            let mut c = DVector::zeros(n + d);
            c[offset + index] = 1.0;
            let r = contrast_inference(&c, fit, vm, level)?;
            Ok(CoefficientRow {
                kind,
                index,
                estimate: r.estimate,
                std_error: r.std_error,
                z_stat: r.z_stat,
                p_value: r.p_value,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                level,
            })
        })
        .collect()
}

/// Significance tests and intervals for each covariate loading.
pub fn beta_inference(fit: &FitResult, vm: &VarianceModel, level: f64) -> Result<Vec<CoefficientRow>> {
    coefficient_rows(Coefficient::Beta, fit, vm, level)
}

/// Tests and intervals for each intrinsic score.
pub fn alpha_inference(fit: &FitResult, vm: &VarianceModel, level: f64) -> Result<Vec<CoefficientRow>> {
    coefficient_rows(Coefficient::Alpha, fit, vm, level)
}

/// Minimizer over the identifiable subspace of the second-order expansion of
/// the likelihood around `truth`.
pub fn quadratic_approx_minimizer(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    truth: &ParamVector,
    proj: &ProjectionOperator,
) -> Result<ParamVector> {
    require_connected(data)?;
    let g = proj.apply(&gradient(data, cov, truth)?);
    let vm = variance_model_at(data, cov, truth, proj)?;
    let step = &vm.pseudoinverse * g;
    let mut out = ParamVector::from_joint(&proj.apply(&(truth.joint() - step)), truth.n());
    out.identified = true;
    Ok(out)
}

/// `SOFT(x, tau) = sign(x) max(|x| - tau, 0)`.
pub fn soft_threshold(x: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(CareError::InvalidArgument(format!("threshold must be nonnegative, got {tau}")));
    }
    Ok(x.signum() * (x.abs() - tau).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CareScores {
    /// Covariate-only scores `x_i' beta`.
    pub scores1: Vec<f64>,
    /// `SOFT(alpha_i, tau_i) + x_i' beta`.
    pub scores2: Vec<f64>,
    pub taus: Vec<f64>,
    /// 1-based rank of each item under `scores1`, best first.
    pub ranks1: Vec<usize>,
    pub ranks2: Vec<usize>,
}

/// Ranks by descending score; ties go to the lower item index.
pub fn descending_ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; scores.len()];
    for (pos, &item) in order.iter().enumerate() {
        ranks[item] = pos + 1;
    }
    ranks
}

pub fn care_ranking_scores(
    fit: &FitResult,
    cov: &CovariateMatrix,
    vm: &VarianceModel,
    quantile_level: f64,
) -> Result<CareScores> {
    if !(quantile_level > 0.5 && quantile_level < 1.0) {
        return Err(CareError::InvalidArgument(format!(
            "threshold quantile must lie in (0.5, 1), got {quantile_level}"
        )));
    }
    let params = &fit.params;
    params.check_dims(cov)?;
    let n = params.n();
    let covariate_part = if params.d() == 0 {
        DVector::zeros(n)
    } else {
        cov.scaled() * &params.beta
    };
    let z = normal::quantile(quantile_level)?;
    let mut taus = Vec::with_capacity(n);
    let mut scores2 = Vec::with_capacity(n);
    for i in 0..n {
        let tau = z * (vm.pseudoinverse[(i, i)].max(0.0) / vm.effective_l).sqrt();
        taus.push(tau);
        scores2.push(soft_threshold(params.alpha[i], tau)? + covariate_part[i]);
    }
    let scores1: Vec<f64> = covariate_part.iter().copied().collect();
    Ok(CareScores {
        ranks1: descending_ranks(&scores1),
        ranks2: descending_ranks(&scores2),
        scores1,
        scores2,
        taus,
    })
}

/// The standardized statistics `A` (oracle variance at the truth) and `B`
/// (plug-in variance at the fit) for contrast `c`.
pub fn standardized_stats(
    fit: &FitResult,
    vm_true: &VarianceModel,
    vm_plugin: &VarianceModel,
    c: &DVector<f64>,
    truth: &ParamVector,
) -> Result<(f64, f64)> {
    let proj = vm_plugin.projection();
    if c.len() != proj.n() + proj.d() {
        return Err(CareError::DimensionMismatch {
            context: "contrast length",
            expected: proj.n() + proj.d(),
            actual: c.len(),
        });
    }
    let c_bar = proj.apply(c);
    if c_bar.norm() <= 1e-12 * c.norm().max(1.0) {
        return Err(CareError::DegenerateContrast);
    }
    let diff = c.dot(&fit.params.joint()) - c.dot(&truth.joint());
    let var_a = vm_true.contrast_variance(&c_bar);
    let var_b = vm_plugin.contrast_variance(&c_bar);
    if var_a <= 0.0 || var_b <= 0.0 {
        return Err(CareError::DegenerateContrast);
    }
    Ok((diff / var_a.sqrt(), diff / var_b.sqrt()))
}

/// Full per-coefficient report plus ranking scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub rows: Vec<CoefficientRow>,
    pub care: CareScores,
    pub rank_deficient: bool,
}

/// Plug-in inference at the fitted parameters.
pub fn infer(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    proj: &ProjectionOperator,
    fit: &FitResult,
    level: f64,
    quantile_level: f64,
) -> Result<(VarianceModel, InferenceReport)> {
    let vm = variance_model_at(data, cov, &fit.params, proj)?;
    let mut rows = beta_inference(fit, &vm, level)?;
    rows.extend(alpha_inference(fit, &vm, level)?);
    let care = care_ranking_scores(fit, cov, &vm, quantile_level)?;
    let rank_deficient = vm.rank_deficient;
    Ok((vm, InferenceReport { rows, care, rank_deficient }))
}
