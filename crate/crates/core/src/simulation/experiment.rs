//! Monte Carlo replication harness for the rate and distributional studies.
//!
//! Each replication draws its graph and outcomes from its own RNG stream, so
//! results do not depend on how replications are spread over worker threads.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{replication_stream, rng_stream};
use super::synthetic::{generate_truth, sample_comparisons_with, SyntheticSpec, SyntheticTruth};
use crate::error::{CareError, Result};
use crate::estimation::{fit_mle_with_projection, FitConfig};
use crate::graph::is_connected;
use crate::inference::{standardized_stats, variance_model_at};
use crate::normal;

/// `(p, L)` grid of the rate study.
pub const RATE_PAIRS: [(f64, u64); 6] =
    [(1.0, 50), (0.5, 25), (0.222, 25), (0.625, 5), (0.4, 5), (0.278, 5)];

/// Upper bound on resamples for a single replication.
const MAX_ATTEMPTS: usize = 1000;

pub const HISTOGRAM_BINS: usize = 30;
pub const HISTOGRAM_RANGE: (f64, f64) = (-4.0, 4.0);

/// Effective sample size `n / ((d + 1) ln n)`.
pub fn effective_sample_size(n: usize, d: usize) -> f64 {
    n as f64 / ((d + 1) as f64 * (n as f64).ln())
}

/// `p in {1.25 / n_a, 2 / n_a}` crossed with `L in {2, 6, 20}`.
pub fn distribution_pairs(n: usize, d: usize) -> Vec<(f64, u64)> {
    let na = effective_sample_size(n, d);
    let mut out = Vec::new();
    for scale in [1.25, 2.0] {
        for trials in [2, 6, 20] {
            out.push(((scale / na).min(1.0), trials));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    AlphaLinf,
    BetaRelL2,
    QqAlpha1,
    HistA,
    HistB,
    Coverage,
}

impl Statistic {
    fn is_distributional(self) -> bool {
        matches!(self, Statistic::QqAlpha1 | Statistic::HistA | Statistic::HistB | Statistic::Coverage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub pl_pairs: Vec<(f64, u64)>,
    pub replications: usize,
    pub statistics: BTreeSet<Statistic>,
    /// Sparse contrast `(index, weight)` for the A and B statistics.
    pub contrast: Option<Vec<(usize, f64)>>,
    /// Confidence level for coverage.
    pub level: f64,
    pub seed: u64,
    pub fit: FitConfig,
    /// Worker threads; `None` uses the global pool. Not serialized since it
    /// has no effect on results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentPlan {
    fn experiment_fit() -> FitConfig {
        FitConfig { grad_tol: 1e-10, ..FitConfig::default() }
    }

    /// Rate study over [`RATE_PAIRS`] with 200 replications.
    pub fn rate(seed: u64) -> Self {
        Self {
            pl_pairs: RATE_PAIRS.to_vec(),
            replications: 200,
            statistics: [Statistic::AlphaLinf, Statistic::BetaRelL2].into_iter().collect(),
            contrast: None,
            level: 0.95,
            seed,
            fit: Self::experiment_fit(),
            threads: None,
        }
    }

    /// Distributional study over [`distribution_pairs`] with 250
    /// replications and the contrast `e_1 + e_{n+1}`.
    pub fn distribution(n: usize, d: usize, seed: u64) -> Self {
        Self {
            pl_pairs: distribution_pairs(n, d),
            replications: 250,
            statistics: [
                Statistic::QqAlpha1,
                Statistic::HistA,
                Statistic::HistB,
                Statistic::Coverage,
            ]
            .into_iter()
            .collect(),
            contrast: Some(first_intercept_plus_first_loading(n, d)),
            level: 0.95,
            seed,
            fit: Self::experiment_fit(),
            threads: None,
        }
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.replications == 0 {
            return Err(CareError::Config("replications must be at least 1".into()));
        }
        if self.pl_pairs.is_empty() {
            return Err(CareError::Config("no (p, L) pairs given".into()));
        }
        for &(p, l) in &self.pl_pairs {
            if !(p > 0.0 && p <= 1.0) || l == 0 {
                return Err(CareError::Config(format!("invalid (p, L) pair ({p}, {l})")));
            }
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CareError::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if let Some(c) = &self.contrast {
            if c.iter().any(|&(k, _)| k >= n + d) {
                return Err(CareError::Config("contrast index out of range".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(CareError::Config("threads must be positive".into()));
        }
        self.fit.validate()
    }
}

/// `e_1 + e_{n+1}` (or `e_1` without covariates).
pub fn first_intercept_plus_first_loading(n: usize, d: usize) -> Vec<(usize, f64)> {
    if d > 0 {
        vec![(0, 1.0), (n, 1.0)]
    } else {
        vec![(0, 1.0)]
    }
}

/// Outcome of one replication. Optional fields are filled by the
/// distributional study only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub stream_id: u64,
    pub resamples: usize,
    pub converged: bool,
    pub iterations: usize,
    pub edges: usize,
    pub alpha_linf: f64,
    pub beta_rel_l2: Option<f64>,
    pub alpha1_estimate: Option<f64>,
    pub alpha1_oracle_var: Option<f64>,
    /// `(alpha_1 - alpha*_1) / sd` with the oracle variance.
    pub alpha1_z: Option<f64>,
    pub beta1_estimate: Option<f64>,
    pub beta1_oracle_var: Option<f64>,
    pub a_stat: Option<f64>,
    pub b_stat: Option<f64>,
    pub alpha1_covered: Option<bool>,
    pub beta1_covered: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { count, mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub low: f64,
    pub high: f64,
    pub counts: Vec<usize>,
    pub below: usize,
    pub above: usize,
}

impl Histogram {
    pub fn of(values: &[f64]) -> Self {
        let (low, high) = HISTOGRAM_RANGE;
        let width = (high - low) / HISTOGRAM_BINS as f64;
        let mut counts = vec![0; HISTOGRAM_BINS];
        let (mut below, mut above) = (0, 0);
        for &v in values {
            if v < low {
                below += 1;
            } else if v > high {
                above += 1;
            } else {
                let bin = (((v - low) / width) as usize).min(HISTOGRAM_BINS - 1);
                counts[bin] += 1;
            }
        }
        Self { low, high, counts, below, above }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub sample: f64,
}

/// Normal Q-Q coordinates with plotting positions `(i - 0.5) / m`.
pub fn qq_points(values: &[f64]) -> Vec<QqPoint> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, sample)| QqPoint {
            theoretical: normal::quantile((i as f64 + 0.5) / m).expect("plotting position in (0, 1)"),
            sample,
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and
/// N(0, 1).
pub fn ks_distance(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal::cdf(x);
            ((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Monte Carlo variance of an estimate against the mean oracle variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub monte_carlo: f64,
    pub oracle: f64,
    pub relative_error: f64,
}

impl VarianceCheck {
    fn of(estimates: &[f64], oracle_vars: &[f64]) -> Self {
        let monte_carlo = Summary::of(estimates).sd.powi(2);
        let oracle = oracle_vars.iter().sum::<f64>() / oracle_vars.len() as f64;
        Self { monte_carlo, oracle, relative_error: (monte_carlo - oracle).abs() / oracle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub p: f64,
    pub trials: u64,
    pub resamples: usize,
    pub nonconverged: usize,
    pub summaries: BTreeMap<String, Summary>,
    pub ks: BTreeMap<String, f64>,
    pub coverage: BTreeMap<String, f64>,
    pub variance: BTreeMap<String, VarianceCheck>,
    pub qq_alpha1: Vec<QqPoint>,
    pub hist_a: Option<Histogram>,
    pub hist_b: Option<Histogram>,
    pub records: Vec<ReplicationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: SyntheticSpec,
    pub plan: ExperimentPlan,
    /// Streams are `rng_stream(plan.seed, replication_stream(pair, rep, attempt))`.
    pub stream_layout: String,
    pub kappa1: f64,
    pub pairs: Vec<PairResult>,
}

fn run_replication(
    truth: &SyntheticTruth,
    plan: &ExperimentPlan,
    pair_index: usize,
    replication: usize,
    p: f64,
    trials: u64,
    detailed: bool,
) -> Result<ReplicationRecord> {
    let cov = &truth.covariates;
    let proj = &truth.projection;
    let (n, d) = (cov.n(), cov.d());

    let mut attempt = 0;
    let (data, stream_id) = loop {
        let stream_id = replication_stream(pair_index, replication, attempt);
        let mut rng = rng_stream(plan.seed, stream_id);
        let data = sample_comparisons_with(cov, &truth.truth, p, trials, &mut rng)?;
        if is_connected(&data) {
            break (data, stream_id);
        }
        attempt += 1;
        if attempt >= MAX_ATTEMPTS {
            return Err(CareError::Config(format!(
                "replication {replication} at p={p} stayed disconnected after {MAX_ATTEMPTS} draws; increase p"
            )));
        }
    };

    let fit = fit_mle_with_projection(&data, cov, proj, &plan.fit)?;
    let est = &fit.params;
    let star = &truth.truth;
    let alpha_linf = (&est.alpha - &star.alpha).amax();
    let beta_rel_l2 = (d > 0).then(|| (&est.beta - &star.beta).norm() / star.beta.norm());

    let mut record = ReplicationRecord {
        replication,
        stream_id,
        resamples: attempt,
        converged: fit.converged,
        iterations: fit.diagnostics.iterations,
        edges: data.edges().len(),
        alpha_linf,
        beta_rel_l2,
        alpha1_estimate: None,
        alpha1_oracle_var: None,
        alpha1_z: None,
        beta1_estimate: None,
        beta1_oracle_var: None,
        a_stat: None,
        b_stat: None,
        alpha1_covered: None,
        beta1_covered: None,
    };
    if !detailed {
        return Ok(record);
    }

    let vm_true = variance_model_at(&data, cov, star, proj)?;
    let vm_plugin = variance_model_at(&data, cov, est, proj)?;
    let z = normal::quantile(0.5 + plan.level / 2.0)?;
    let unit = |k: usize| {
        let mut c = DVector::zeros(n + d);
        c[k] = 1.0;
        c
    };

    let e1 = unit(0);
    let oracle_var = vm_true.contrast_variance(&proj.apply(&e1));
    let plugin_sd = vm_plugin.contrast_variance(&proj.apply(&e1)).sqrt();
    record.alpha1_estimate = Some(est.alpha[0]);
    record.alpha1_oracle_var = Some(oracle_var);
    record.alpha1_z = Some((est.alpha[0] - star.alpha[0]) / oracle_var.sqrt());
    record.alpha1_covered = Some((est.alpha[0] - star.alpha[0]).abs() <= z * plugin_sd);

    if d > 0 {
        let en1 = unit(n);
        let oracle_var = vm_true.contrast_variance(&proj.apply(&en1));
        let plugin_sd = vm_plugin.contrast_variance(&proj.apply(&en1)).sqrt();
        record.beta1_estimate = Some(est.beta[0]);
        record.beta1_oracle_var = Some(oracle_var);
        record.beta1_covered = Some((est.beta[0] - star.beta[0]).abs() <= z * plugin_sd);
    }

    if let Some(entries) = &plan.contrast {
        let mut c = DVector::zeros(n + d);
        for &(k, w) in entries {
            c[k] += w;
        }
        let (a, b) = standardized_stats(&fit, &vm_true, &vm_plugin, &c, star)?;
        record.a_stat = Some(a);
        record.b_stat = Some(b);
    }
    Ok(record)
}

fn collect<F>(records: &[ReplicationRecord], field: F) -> Vec<f64>
where
    F: Fn(&ReplicationRecord) -> Option<f64>,
{
    records.iter().filter_map(field).collect()
}

type Field = fn(&ReplicationRecord) -> Option<f64>;

fn summarize(p: f64, trials: u64, records: Vec<ReplicationRecord>, plan: &ExperimentPlan) -> PairResult {
    let mut summaries = BTreeMap::new();
    let mut ks = BTreeMap::new();
    let mut coverage = BTreeMap::new();
    let mut variance = BTreeMap::new();

    let fields: [(&str, Field); 6] = [
        ("alpha_linf", |r| Some(r.alpha_linf)),
        ("beta_rel_l2", |r| r.beta_rel_l2),
        ("alpha1_estimate", |r| r.alpha1_estimate),
        ("alpha1_z", |r| r.alpha1_z),
        ("a_stat", |r| r.a_stat),
        ("b_stat", |r| r.b_stat),
    ];
    for (name, field) in fields {
        let values = collect(&records, field);
        if !values.is_empty() {
            summaries.insert(name.to_string(), Summary::of(&values));
        }
    }

    let alpha1_z = collect(&records, |r| r.alpha1_z);
    let a = collect(&records, |r| r.a_stat);
    let b = collect(&records, |r| r.b_stat);
    for (name, values) in [("alpha1_z", &alpha1_z), ("a_stat", &a), ("b_stat", &b)] {
        if !values.is_empty() {
            ks.insert(name.to_string(), ks_distance(values));
        }
    }

    if plan.statistics.contains(&Statistic::Coverage) {
        for (name, field) in [
            ("alpha1", (|r: &ReplicationRecord| r.alpha1_covered) as fn(&ReplicationRecord) -> Option<bool>),
            ("beta1", |r: &ReplicationRecord| r.beta1_covered),
        ] {
            let flags: Vec<bool> = records.iter().filter_map(field).collect();
            if !flags.is_empty() {
                let rate = flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64;
                coverage.insert(name.to_string(), rate);
            }
        }
    }

    let alpha1 = collect(&records, |r| r.alpha1_estimate);
    if !alpha1.is_empty() {
        variance.insert("alpha1".into(), VarianceCheck::of(&alpha1, &collect(&records, |r| r.alpha1_oracle_var)));
    }
    let beta1 = collect(&records, |r| r.beta1_estimate);
    if !beta1.is_empty() {
        variance.insert("beta1".into(), VarianceCheck::of(&beta1, &collect(&records, |r| r.beta1_oracle_var)));
    }

    let qq_alpha1 = if plan.statistics.contains(&Statistic::QqAlpha1) {
        qq_points(&alpha1_z)
    } else {
        Vec::new()
    };
    let hist_a = (plan.statistics.contains(&Statistic::HistA) && !a.is_empty()).then(|| Histogram::of(&a));
    let hist_b = (plan.statistics.contains(&Statistic::HistB) && !b.is_empty()).then(|| Histogram::of(&b));

    PairResult {
        p,
        trials,
        resamples: records.iter().map(|r| r.resamples).sum(),
        nonconverged: records.iter().filter(|r| !r.converged).count(),
        summaries,
        ks,
        coverage,
        variance,
        qq_alpha1,
        hist_a,
        hist_b,
        records,
    }
}

fn run_experiment(spec: &SyntheticSpec, plan: &ExperimentPlan, detailed: bool) -> Result<ExperimentResult> {
    spec.validate()?;
    plan.validate(spec.n, spec.d)?;
    let truth = generate_truth(spec)?;

    let pool = match plan.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CareError::Config(format!("thread pool: {e}")))?,
        ),
        None => None,
    };

    let mut pairs = Vec::with_capacity(plan.pl_pairs.len());
    for (pair_index, &(p, trials)) in plan.pl_pairs.iter().enumerate() {
        let work = || {
            (0..plan.replications)
                .into_par_iter()
                .map(|rep| run_replication(&truth, plan, pair_index, rep, p, trials, detailed))
                .collect::<Vec<_>>()
        };
        let outcomes = match &pool {
            Some(pool) => pool.install(work),
            None => work(),
        };
        let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let resamples: usize = records.iter().map(|r| r.resamples).sum();
        if resamples * 2 > resamples + records.len() {
            return Err(CareError::Config(format!(
                "{resamples} of {} draws at (p={p}, L={trials}) were disconnected; increase p",
                resamples + records.len()
            )));
        }
        pairs.push(summarize(p, trials, records, plan));
    }

    Ok(ExperimentResult {
        spec: spec.clone(),
        plan: plan.clone(),
        stream_layout: "chacha20(seed_from_u64(plan.seed)), stream = pair << 48 | attempt << 32 | replication".into(),
        kappa1: truth.kappa1,
        pairs,
    })
}

/// Estimation-error study: `||alpha - alpha*||_inf` and
/// `||beta - beta*|| / ||beta*||` for every `(p, L)` pair.
pub fn run_rate_experiment(spec: &SyntheticSpec, plan: &ExperimentPlan) -> Result<ExperimentResult> {
    if !plan.statistics.contains(&Statistic::AlphaLinf) && !plan.statistics.contains(&Statistic::BetaRelL2) {
        return Err(CareError::Config("rate experiment needs alpha_linf or beta_rel_l2".into()));
    }
    run_experiment(spec, plan, false)
}

/// Distributional study: Q-Q data for the first intercept, A/B statistics for
/// the plan's contrast, interval coverage and Monte Carlo variances.
pub fn run_distribution_experiment(spec: &SyntheticSpec, plan: &ExperimentPlan) -> Result<ExperimentResult> {
    if !plan.statistics.iter().any(|s| s.is_distributional()) {
        return Err(CareError::Config(
            "distribution experiment needs one of qq_alpha1, hist_a, hist_b, coverage".into(),
        ));
    }
    run_experiment(spec, plan, true)
}

/// Least-squares line through `(x, y)` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    LinearFit { slope, intercept: my - slope * mx, r_squared: sxy * sxy / (sxx * syy) }
}

/// Regresses `log(mean statistic)` on `log(1 / sqrt(p L))` across pairs.
pub fn scaling_fit(result: &ExperimentResult, statistic: &str) -> Option<LinearFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for pair in &result.pairs {
        let s = pair.summaries.get(statistic)?;
        x.push((1.0 / (pair.p * pair.trials as f64).sqrt()).ln());
        y.push(s.mean.ln());
    }
    Some(linear_fit(&x, &y))
}
