//! Synthetic data generation and Monte Carlo experiments.

pub mod experiment;
pub mod rng;
pub mod synthetic;

pub use experiment::{
    distribution_pairs, effective_sample_size, first_intercept_plus_first_loading, ks_distance,
    linear_fit, qq_points, run_distribution_experiment, run_rate_experiment, scaling_fit,
    ExperimentPlan, ExperimentResult, Histogram, LinearFit, PairResult, QqPoint, ReplicationRecord,
    Statistic, Summary, VarianceCheck, RATE_PAIRS,
};
pub use rng::{replication_stream, rng_stream, SimRng};
pub use synthetic::{
    generate_truth, sample_comparisons, sample_comparisons_with, SyntheticSpec, SyntheticTruth,
};
