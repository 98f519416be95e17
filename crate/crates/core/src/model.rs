//! The comparison likelihood: win probabilities, negative log-likelihood,
//! gradient and Hessian in the joint `(alpha, beta)` parametrization.
//!
//! For an edge `(i, j)` with score gap `t = s_j - s_i` and observed
//! fraction `y` of trials won by `j`, the per-trial loss is
//! `log(1 + e^t) - y t`. Edges contribute in proportion to their trial count.

use nalgebra::{DMatrix, DVector};

use crate::data::{ComparisonData, CovariateMatrix, ParamVector};
use crate::error::{CareError, Result};

/// Logistic function, evaluated without overflow for large `|t|`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` as `max(t, 0) + log1p(e^{-|t|})`.
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Probability that item `j` (score `score_j`) is preferred over item `i`.
pub fn win_probability(score_i: f64, score_j: f64) -> Result<f64> {
    if !score_i.is_finite() || !score_j.is_finite() {
        return Err(CareError::InvalidArgument(format!(
            "scores must be finite, got ({score_i}, {score_j})"
        )));
    }
    Ok(sigmoid(score_j - score_i))
}

fn check_inputs(data: &ComparisonData, cov: &CovariateMatrix, params: &ParamVector) -> Result<()> {
    if data.n_items() != cov.n() {
        return Err(CareError::DimensionMismatch {
            context: "comparison items vs covariate rows",
            expected: cov.n(),
            actual: data.n_items(),
        });
    }
    params.check_dims(cov)
}

/// Negative log-likelihood as a function of the item scores.
pub(crate) fn nll_from_scores(data: &ComparisonData, scores: &DVector<f64>) -> f64 {
    data.edges()
        .iter()
        .map(|e| {
            let t = scores[e.j] - scores[e.i];
            let wins_j = e.wins_j as f64;
            let wins_i = (e.trials - e.wins_j) as f64;
            // wins_j * log(1 + e^{-t}) + wins_i * log(1 + e^{t})
            wins_j * softplus(-t) + wins_i * softplus(t)
        })
        .sum()
}

/// Gradient with respect to the item scores; the joint gradient is
/// `(g, X' g)`.
pub(crate) fn score_gradient(data: &ComparisonData, scores: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(scores.len());
    for e in data.edges() {
        let t = scores[e.j] - scores[e.i];
        let coef = e.trials as f64 * sigmoid(t) - e.wins_j as f64;
        g[e.j] += coef;
        g[e.i] -= coef;
    }
    g
}

/// Lifts a gradient in score space to the joint `(alpha, beta)` space.
pub(crate) fn lift_gradient(cov: &CovariateMatrix, g: &DVector<f64>) -> DVector<f64> {
    let n = cov.n();
    let d = cov.d();
    let mut out = DVector::zeros(n + d);
    out.rows_mut(0, n).copy_from(g);
    if d > 0 {
        out.rows_mut(n, d).copy_from(&(cov.scaled().transpose() * g));
    }
    out
}

pub fn neg_log_likelihood(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    params: &ParamVector,
) -> Result<f64> {
    check_inputs(data, cov, params)?;
    Ok(nll_from_scores(data, &params.scores(cov)))
}

pub fn gradient(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    params: &ParamVector,
) -> Result<DVector<f64>> {
    check_inputs(data, cov, params)?;
    Ok(lift_gradient(cov, &score_gradient(data, &params.scores(cov))))
}

/// Per-trial curvature `sigma(t)(1 - sigma(t))` of each edge, in edge order.
pub fn hessian_weights(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    params: &ParamVector,
) -> Result<Vec<f64>> {
    check_inputs(data, cov, params)?;
    let s = params.scores(cov);
    Ok(data
        .edges()
        .iter()
        .map(|e| {
            let p = sigmoid(s[e.j] - s[e.i]);
            p * (1.0 - p)
        })
        .collect())
}

/// Expands a weighted graph Laplacian over items into the joint space:
/// with `T = [I; X']`, returns `T W T'`.
pub(crate) fn lift_laplacian(cov: &CovariateMatrix, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.n();
    let d = cov.d();
    let mut h = DMatrix::zeros(n + d, n + d);
    h.view_mut((0, 0), (n, n)).copy_from(w);
    if d > 0 {
        let x = cov.scaled();
        let wx = w * x;
        let xtwx = x.transpose() * &wx;
        h.view_mut((0, n), (n, d)).copy_from(&wx);
        h.view_mut((n, 0), (d, n)).copy_from(&wx.transpose());
        h.view_mut((n, n), (d, d)).copy_from(&xtwx);
    }
    h
}

/// Laplacian `sum_e weight(e) (e_j - e_i)(e_j - e_i)'` over items.
pub(crate) fn weighted_laplacian<F>(data: &ComparisonData, mut weight: F) -> DMatrix<f64>
where
    F: FnMut(&crate::data::Edge) -> f64,
{
    let n = data.n_items();
    let mut w = DMatrix::zeros(n, n);
    for e in data.edges() {
        let we = weight(e);
        w[(e.i, e.i)] += we;
        w[(e.j, e.j)] += we;
        w[(e.i, e.j)] -= we;
        w[(e.j, e.i)] -= we;
    }
    w
}

/// Hessian of the negative log-likelihood, each edge weighted by its trial
/// count.
pub fn hessian(
    data: &ComparisonData,
    cov: &CovariateMatrix,
    params: &ParamVector,
) -> Result<DMatrix<f64>> {
    check_inputs(data, cov, params)?;
    let s = params.scores(cov);
    let w = weighted_laplacian(data, |e| {
        let p = sigmoid(s[e.j] - s[e.i]);
        e.trials as f64 * p * (1.0 - p)
    });
    Ok(lift_laplacian(cov, &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Edge;
    use crate::estimation::preprocess_covariates;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn no_covariates(n: usize) -> CovariateMatrix {
        preprocess_covariates(&DMatrix::zeros(n, 0), false).unwrap()
    }

    #[test]
    fn win_probability_examples() {
        assert_eq!(win_probability(0.0, 0.0).unwrap(), 0.5);
        assert!(close(win_probability(0.0, 3f64.ln()).unwrap(), 0.75, 1e-15));
        assert!(close(win_probability(2f64.ln(), 0.0).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(win_probability(f64::NAN, 0.0).is_err());
        assert!(win_probability(0.0, f64::INFINITY).is_err());
        let hi = win_probability(-350.0, 350.0).unwrap();
        let lo = win_probability(350.0, -350.0).unwrap();
        assert!(hi.is_finite() && lo.is_finite() && hi <= 1.0 && lo >= 0.0);
    }

    #[test]
    fn softplus_is_stable() {
        assert!(close(softplus(0.0), 2f64.ln(), 1e-15));
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0 && softplus(-800.0) < 1e-300);
    }

    #[test]
    fn likelihood_trivial_values() {
        let cov = no_covariates(2);
        let zero = ParamVector::zeros(2, 0);
        let one = ComparisonData::new(2, vec![Edge { i: 0, j: 1, trials: 1, wins_j: 1 }]).unwrap();
        assert!(close(neg_log_likelihood(&one, &cov, &zero).unwrap(), 2f64.ln(), 1e-15));
        let two = ComparisonData::new(2, vec![Edge { i: 0, j: 1, trials: 2, wins_j: 1 }]).unwrap();
        assert!(close(neg_log_likelihood(&two, &cov, &zero).unwrap(), 2.0 * 2f64.ln(), 1e-15));
    }

    #[test]
    fn single_edge_gradient() {
        let cov = no_covariates(2);
        let data = ComparisonData::new(2, vec![Edge { i: 0, j: 1, trials: 1, wins_j: 1 }]).unwrap();
        let g = gradient(&data, &cov, &ParamVector::zeros(2, 0)).unwrap();
        assert!(close(g[0], 0.5, 1e-15) && close(g[1], -0.5, 1e-15));
    }

    #[test]
    fn equal_scores_give_quarter_weights() {
        let cov = no_covariates(3);
        let data = ComparisonData::new(
            3,
            vec![
                Edge { i: 0, j: 1, trials: 3, wins_j: 1 },
                Edge { i: 1, j: 2, trials: 1, wins_j: 0 },
            ],
        )
        .unwrap();
        let w = hessian_weights(&data, &cov, &ParamVector::zeros(3, 0)).unwrap();
        assert!(w.iter().all(|&x| x == 0.25));
    }

    #[test]
    fn empty_graph_has_zero_hessian() {
        let cov = no_covariates(3);
        let data = ComparisonData::new(3, vec![]).unwrap();
        let h = hessian(&data, &cov, &ParamVector::zeros(3, 0)).unwrap();
        assert_eq!(h, DMatrix::zeros(3, 3));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let cov = no_covariates(3);
        let data = ComparisonData::new(2, vec![]).unwrap();
        assert!(matches!(
            neg_log_likelihood(&data, &cov, &ParamVector::zeros(3, 0)),
            Err(CareError::DimensionMismatch { .. })
        ));
        let data = ComparisonData::new(3, vec![]).unwrap();
        assert!(gradient(&data, &cov, &ParamVector::zeros(3, 1)).is_err());
    }
}
