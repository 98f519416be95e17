//! Covariate-assisted ranking from pairwise comparisons.
//!
//! Item `i` carries the score `alpha_i + x_i^T beta`, and item `j` beats item
//! `i` with probability `sigmoid(s_j - s_i)`. The crate fits the constrained
//! maximum likelihood estimate, computes plug-in standard errors and ranking
//! scores, and runs Monte Carlo studies of the estimator.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod inference;
pub mod io;
pub mod model;
pub mod normal;
pub mod projection;
pub mod simulation;

pub use data::{ComparisonData, CovariateMatrix, Edge, ParamVector};
pub use error::{CareError, Result};
pub use estimation::{
    fit_care_scores_pipeline, fit_mle, fit_mle_with_projection, preprocess_covariates,
    project_to_theta, FitConfig, FitDiagnostics, FitResult, PipelineFit, StepSize, StopReason,
};
pub use graph::{connected_components, graph_design, is_connected, require_connected, GraphDesign};
pub use inference::{
    alpha_inference, beta_inference, care_ranking_scores, contrast_inference, infer,
    projected_hessian_pinv, quadratic_approx_minimizer, soft_threshold, standardized_stats,
    variance_model_at, CareScores, Coefficient, CoefficientRow, ContrastResult, InferenceReport,
    VarianceModel,
};
pub use model::{gradient, hessian, hessian_weights, neg_log_likelihood, win_probability};
pub use projection::{build_projection, ProjectionOperator};
