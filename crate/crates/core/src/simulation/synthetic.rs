//! Synthetic instances: uniform covariates, uniform intrinsic scores and a
//! loading vector drawn uniformly from a sphere, then Erdős–Rényi comparison
//! graphs with binomial outcomes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::rng::{rng_stream, SimRng};
use crate::data::{ComparisonData, CovariateMatrix, Edge, ParamVector};
use crate::error::{CareError, Result};
use crate::estimation::{preprocess_covariates, project_to_theta};
use crate::model::win_probability;
use crate::projection::{build_projection, ProjectionOperator};

/// Stream reserved for drawing the ground truth.
pub const TRUTH_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub alpha_low: f64,
    pub alpha_high: f64,
    /// Raw covariates are Uniform[-h, h] entrywise.
    pub covariate_half_width: f64,
    pub beta_norm: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Defaults: alpha ~ Uniform[0.5, ln 5 - 0.5], covariates ~
    /// Uniform[-0.5, 0.5], `||beta|| = 0.5 sqrt(n / (d + 1))`.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            alpha_low: 0.5,
            alpha_high: 5f64.ln() - 0.5,
            covariate_half_width: 0.5,
            beta_norm: 0.5 * (n as f64 / (d + 1) as f64).sqrt(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CareError::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.d + 1 >= self.n {
            return Err(CareError::Config(format!("need d + 1 < n, got n={}, d={}", self.n, self.d)));
        }
        if !(self.alpha_low <= self.alpha_high) || !(self.covariate_half_width > 0.0) || !(self.beta_norm >= 0.0) {
            return Err(CareError::Config("invalid synthetic law parameters".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub covariates: CovariateMatrix,
    pub projection: ProjectionOperator,
    /// Identified truth, the projection of `(alpha_raw, beta_raw)`.
    pub truth: ParamVector,
    pub alpha_raw: DVector<f64>,
    pub beta_raw: DVector<f64>,
    pub kappa1: f64,
}

pub fn generate_truth(spec: &SyntheticSpec) -> Result<SyntheticTruth> {
    spec.validate()?;
    let mut rng = rng_stream(spec.seed, TRUTH_STREAM);
    let (n, d) = (spec.n, spec.d);
    let h = spec.covariate_half_width;
    // Column-major fill keeps the draw order independent of nalgebra layout.
    let mut raw = DMatrix::zeros(n, d);
    for c in 0..d {
        for r in 0..n {
            raw[(r, c)] = rng.random_range(-h..=h);
        }
    }
    let covariates = preprocess_covariates(&raw, true)?;
    let alpha_raw = DVector::from_fn(n, |_, _| rng.random_range(spec.alpha_low..=spec.alpha_high));
    let mut beta_raw = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    if d > 0 {
        let norm = beta_raw.norm();
        beta_raw *= spec.beta_norm / norm;
    }
    let projection = build_projection(&covariates)?;
    let truth = project_to_theta(&ParamVector::new(alpha_raw.clone(), beta_raw.clone()), &projection)?;
    let scores = truth.scores(&covariates);
    let kappa1 = (scores.max() - scores.min()).exp();
    Ok(SyntheticTruth { covariates, projection, truth, alpha_raw, beta_raw, kappa1 })
}

/// Samples an Erdős–Rényi graph with edge probability `p` and `trials`
/// Bernoulli outcomes per edge from `rng`.
pub fn sample_comparisons_with(
    cov: &CovariateMatrix,
    truth: &ParamVector,
    p: f64,
    trials: u64,
    rng: &mut SimRng,
) -> Result<ComparisonData> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(CareError::InvalidArgument(format!("edge probability must lie in (0, 1], got {p}")));
    }
    if trials == 0 {
        return Err(CareError::InvalidArgument("trials per edge must be positive".into()));
    }
    let scores = truth.scores(cov);
    let n = cov.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if p < 1.0 && rng.random::<f64>() >= p {
                continue;
            }
            let prob = win_probability(scores[i], scores[j])?;
            let binom = Binomial::new(trials, prob)
                .map_err(|e| CareError::InvalidArgument(format!("binomial law: {e}")))?;
            edges.push(Edge { i, j, trials, wins_j: binom.sample(rng) });
        }
    }
    ComparisonData::new(n, edges)
}

/// [`sample_comparisons_with`] on stream `stream_id` of `seed`.
pub fn sample_comparisons(
    cov: &CovariateMatrix,
    truth: &ParamVector,
    p: f64,
    trials: u64,
    seed: u64,
    stream_id: u64,
) -> Result<ComparisonData> {
    sample_comparisons_with(cov, truth, p, trials, &mut rng_stream(seed, stream_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_connected;

    #[test]
    fn truth_follows_construction() {
        let spec = SyntheticSpec::new(200, 5, 11);
        let t = generate_truth(&spec).unwrap();
        assert!((t.beta_raw.norm() - 0.5 * (200.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!(t.projection.params_residual(&t.truth) < 1e-8);
        assert!(t.truth.identified);
        // Uniform[0.5, ln5 - 0.5]: mean and sd of the law.
        let (lo, hi) = (0.5, 5f64.ln() - 0.5);
        let mid = 0.5 * (lo + hi);
        let sd = (hi - lo) / 12f64.sqrt();
        assert!((t.alpha_raw.mean() - mid).abs() <= 3.0 * sd / 200f64.sqrt());
        assert!(t.alpha_raw.iter().all(|&a| a >= lo && a <= hi));
        assert!(t.kappa1 >= 1.0 && t.kappa1.ln() <= 5f64.ln() + 0.5);
    }

    #[test]
    fn truth_is_deterministic() {
        let spec = SyntheticSpec::new(30, 2, 5);
        let a = generate_truth(&spec).unwrap();
        let b = generate_truth(&spec).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.covariates, b.covariates);
    }

    #[test]
    fn complete_graph_when_p_is_one() {
        let t = generate_truth(&SyntheticSpec::new(20, 2, 1)).unwrap();
        let data = sample_comparisons(&t.covariates, &t.truth, 1.0, 3, 9, 0).unwrap();
        assert_eq!(data.edges().len(), 20 * 19 / 2);
        assert!(data.edges().iter().all(|e| e.trials == 3 && e.wins_j <= 3));
    }

    #[test]
    fn equal_scores_split_wins_evenly() {
        let cov = preprocess_covariates(&DMatrix::zeros(10, 0), false).unwrap();
        let truth = ParamVector::zeros(10, 0);
        let data = sample_comparisons(&cov, &truth, 1.0, 10_000, 3, 0).unwrap();
        let wins: u64 = data.edges().iter().map(|e| e.wins_j).sum();
        let frac = wins as f64 / data.total_trials() as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn edge_count_matches_binomial_law() {
        let t = generate_truth(&SyntheticSpec::new(200, 5, 2)).unwrap();
        let data = sample_comparisons(&t.covariates, &t.truth, 0.5, 1, 4, 0).unwrap();
        let pairs = 19_900.0;
        let mean = pairs * 0.5;
        let sd = (pairs * 0.25f64).sqrt();
        assert!((data.edges().len() as f64 - mean).abs() <= 4.0 * sd);
    }

    #[test]
    fn erdos_renyi_above_threshold_is_connected() {
        let n = 100;
        let p = 3.0 * (n as f64).ln() / n as f64;
        let cov = preprocess_covariates(&DMatrix::zeros(n, 0), false).unwrap();
        let truth = ParamVector::zeros(n, 0);
        let connected = (0..100)
            .filter(|&seed| is_connected(&sample_comparisons(&cov, &truth, p, 1, seed, 0).unwrap()))
            .count();
        assert!(connected >= 99, "{connected}/100");
    }

    #[test]
    fn rejects_bad_probability() {
        let cov = preprocess_covariates(&DMatrix::zeros(3, 0), false).unwrap();
        let truth = ParamVector::zeros(3, 0);
        assert!(sample_comparisons(&cov, &truth, 0.0, 1, 0, 0).is_err());
        assert!(sample_comparisons(&cov, &truth, 1.5, 1, 0, 0).is_err());
        assert!(sample_comparisons(&cov, &truth, 0.5, 0, 0, 0).is_err());
    }
}
