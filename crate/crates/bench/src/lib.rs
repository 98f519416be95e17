//! Fixed synthetic instances shared by the benchmarks.

use care_core::simulation::{generate_truth, sample_comparisons, SyntheticSpec, SyntheticTruth};
use care_core::ComparisonData;

/// A ground truth and one comparison draw with edge probability `p` and
/// `trials` comparisons per edge.
pub fn instance(n: usize, d: usize, p: f64, trials: u64, seed: u64) -> (SyntheticTruth, ComparisonData) {
    let truth = generate_truth(&SyntheticSpec::new(n, d, seed)).expect("valid synthetic spec");
    let data = sample_comparisons(&truth.covariates, &truth.truth, p, trials, seed, 0)
        .expect("valid sampling arguments");
    (truth, data)
}
