//! The five subcommands. Each renders all of its output in memory and only
//! writes once nothing can fail any more.

use std::collections::BTreeMap;
use std::path::PathBuf;

use care_core::io::{comparisons_to_csv, covariates_to_csv, parse_comparisons_csv, parse_covariates_csv, ParsedComparisons};
use care_core::simulation::{
    generate_truth, run_distribution_experiment, run_rate_experiment, sample_comparisons, scaling_fit,
    ExperimentResult, LinearFit, ReplicationRecord, SyntheticSpec,
};
use care_core::{
    fit_care_scores_pipeline, graph_design, infer, is_connected, Coefficient, InferenceReport, PipelineFit,
    StopReason,
};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, InputConfig, RunConfig, Settings, SimulateConfig};
use crate::error::{CliError, CliResult};
use crate::output::{to_json, Cell, Csv, Provenance, Stamped, Staged};

pub fn execute(run: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let prov = Provenance::of(run);
    let staged = match &run.settings {
        Settings::Simulate(cfg) => simulate(cfg, &prov)?,
        Settings::Input(cfg) => {
            let loaded = load_and_fit(cfg)?;
            let mut staged = Staged::default();
            staged.add("items.csv", items_csv(&prov, &loaded.parsed.items));
            staged.add("fit.json", fit_json(&prov, &loaded)?);
            match run.command {
                crate::config::CommandName::Infer => {
                    let report = report(cfg, &loaded)?;
                    staged.add("inference.csv", inference_csv(&prov, &loaded, &report));
                }
                crate::config::CommandName::Rank => {
                    let report = report(cfg, &loaded)?;
                    staged.add("ranking.csv", ranking_csv(&prov, &loaded, &report));
                }
                _ => {}
            }
            staged
        }
        Settings::Experiment(cfg) => experiment(cfg, &prov)?,
    };
    staged.commit(&run.out)
}

fn item_ids(n: usize, prefix: &str) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|k| format!("{prefix}{k:0width$}")).collect()
}

fn items_csv(prov: &Provenance, items: &[String]) -> Vec<u8> {
    let mut csv = Csv::new(prov, &["index", "item"]);
    for (k, id) in items.iter().enumerate() {
        csv.row(&[Cell::Int(k as u64), Cell::Str(id)]);
    }
    csv.into_bytes()
}

#[derive(Serialize)]
struct TruthDocument<'a> {
    spec: &'a SyntheticSpec,
    p: f64,
    trials: u64,
    items: &'a [String],
    connected: bool,
    edges: usize,
    kappa1: f64,
    /// Identified truth on the standardized, rescaled covariates.
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn simulate(cfg: &SimulateConfig, prov: &Provenance) -> CliResult<Staged> {
    let spec = SyntheticSpec::new(cfg.n, cfg.d, cfg.seed);
    spec.validate()?;
    let truth = generate_truth(&spec)?;
    let data = sample_comparisons(&truth.covariates, &truth.truth, cfg.p, cfg.trials, cfg.seed, 0)?;
    let connected = is_connected(&data);
    if !connected {
        eprintln!("warning: the sampled comparison graph is disconnected; fitting it will fail");
    }
    let items = item_ids(cfg.n, "item");
    let features: Vec<String> = (1..=cfg.d).map(|k| format!("x{k}")).collect();

    let mut staged = Staged::default();
    let mut comparisons = prov.csv_comment();
    comparisons.push_str(&comparisons_to_csv(&data, &items)?);
    staged.add("comparisons.csv", comparisons.into_bytes());
    let mut covariates = prov.csv_comment();
    covariates.push_str(&covariates_to_csv(truth.covariates.raw(), &items, &features)?);
    staged.add("covariates.csv", covariates.into_bytes());
    let doc = TruthDocument {
        spec: &spec,
        p: cfg.p,
        trials: cfg.trials,
        items: &items,
        connected,
        edges: data.edges().len(),
        kappa1: truth.kappa1,
        alpha: truth.truth.alpha.iter().copied().collect(),
        beta: truth.truth.beta.iter().copied().collect(),
    };
    staged.add("truth.json", to_json(&Stamped { provenance: prov, body: &doc })?);
    Ok(staged)
}

pub struct Loaded {
    pub parsed: ParsedComparisons,
    pub feature_names: Vec<String>,
    pub pipeline: PipelineFit,
}

fn load_and_fit(cfg: &InputConfig) -> CliResult<Loaded> {
    let parsed = parse_comparisons_csv(&cfg.comparisons)?;
    if parsed.ties_dropped > 0 {
        eprintln!("note: dropped {} tied comparisons", parsed.ties_dropped);
    }
    let (feature_names, raw) = match &cfg.covariates {
        Some(path) => {
            let table = parse_covariates_csv(path, &parsed.items)?;
            (table.feature_names, table.matrix)
        }
        None => (Vec::new(), DMatrix::zeros(parsed.items.len(), 0)),
    };
    let pipeline = fit_care_scores_pipeline(&parsed.data, &raw, cfg.standardize, &cfg.fit)?;
    let diag = &pipeline.fit.diagnostics;
    if !pipeline.fit.converged {
        let reason = match diag.stop_reason {
            StopReason::MaxIterations => "iteration limit reached",
            StopReason::StepTolerance => "steps became shorter than step_tol",
            StopReason::LineSearchStalled => "backtracking could not decrease the objective",
            StopReason::GradientTolerance => "gradient tolerance",
        };
        return Err(CliError::Convergence(format!(
            "{reason} after {} iterations with projected gradient norm {:e} (grad_tol {:e})",
            diag.iterations, diag.final_grad_norm, cfg.fit.grad_tol
        )));
    }
    Ok(Loaded { parsed, feature_names, pipeline })
}

#[derive(Serialize)]
struct FitDocument<'a> {
    items: &'a [String],
    feature_names: &'a [String],
    n_items: usize,
    n_edges: usize,
    total_trials: u64,
    ties_dropped: usize,
    converged: bool,
    diagnostics: &'a care_core::FitDiagnostics,
    objective: f64,
    lambda_min_perp: f64,
    lambda_max: f64,
    scale_k: f64,
    column_means: Vec<f64>,
    column_sds: Vec<f64>,
    /// Intrinsic scores, in item order.
    alpha: Vec<f64>,
    /// Loadings on the standardized, rescaled covariates.
    beta: Vec<f64>,
}

fn fit_json(prov: &Provenance, loaded: &Loaded) -> CliResult<Vec<u8>> {
    let data = &loaded.parsed.data;
    let cov = &loaded.pipeline.covariates;
    let fit = &loaded.pipeline.fit;
    let design = graph_design(data, cov)?;
    let doc = FitDocument {
        items: &loaded.parsed.items,
        feature_names: &loaded.feature_names,
        n_items: data.n_items(),
        n_edges: data.edges().len(),
        total_trials: data.total_trials(),
        ties_dropped: loaded.parsed.ties_dropped,
        converged: fit.converged,
        diagnostics: &fit.diagnostics,
        objective: fit.objective_trace.last().copied().unwrap_or(f64::NAN),
        lambda_min_perp: design.lambda_min_perp,
        lambda_max: design.lambda_max,
        scale_k: cov.scale_k(),
        column_means: cov.column_means().iter().copied().collect(),
        column_sds: cov.column_sds().iter().copied().collect(),
        alpha: fit.params.alpha.iter().copied().collect(),
        beta: fit.params.beta.iter().copied().collect(),
    };
    to_json(&Stamped { provenance: prov, body: &doc })
}

fn report(cfg: &InputConfig, loaded: &Loaded) -> CliResult<InferenceReport> {
    let p = &loaded.pipeline;
    let (_, report) = infer(&loaded.parsed.data, &p.covariates, &p.projection, &p.fit, cfg.level, cfg.quantile_level)?;
    if report.rank_deficient {
        eprintln!("warning: the projected Hessian has extra null directions; standard errors may be unreliable");
    }
    Ok(report)
}

fn inference_csv(prov: &Provenance, loaded: &Loaded, report: &InferenceReport) -> Vec<u8> {
    let mut csv = Csv::new(
        prov,
        &["coefficient", "index", "name", "estimate", "std_error", "z_stat", "p_value", "ci_low", "ci_high", "level"],
    );
    for row in &report.rows {
        let (kind, name) = match row.kind {
            Coefficient::Alpha => ("alpha", loaded.parsed.items[row.index].as_str()),
            Coefficient::Beta => ("beta", loaded.feature_names[row.index].as_str()),
        };
        csv.row(&[
            Cell::Str(kind),
            Cell::Int(row.index as u64),
            Cell::Str(name),
            Cell::Float(row.estimate),
            Cell::Float(row.std_error),
            Cell::Float(row.z_stat),
            Cell::Float(row.p_value),
            Cell::Float(row.ci_low),
            Cell::Float(row.ci_high),
            Cell::Float(row.level),
        ]);
    }
    csv.into_bytes()
}

fn ranking_csv(prov: &Provenance, loaded: &Loaded, report: &InferenceReport) -> Vec<u8> {
    let care = &report.care;
    let mut csv = Csv::new(prov, &["item", "score1", "score2", "tau", "rank1", "rank2"]);
    for (k, id) in loaded.parsed.items.iter().enumerate() {
        csv.row(&[
            Cell::Str(id),
            Cell::Float(care.scores1[k]),
            Cell::Float(care.scores2[k]),
            Cell::Float(care.taus[k]),
            Cell::Int(care.ranks1[k] as u64),
            Cell::Int(care.ranks2[k] as u64),
        ]);
    }
    csv.into_bytes()
}

#[derive(Serialize)]
struct ExperimentDocument<'a> {
    kind: ExperimentKind,
    /// Least-squares fit of log(mean error) on log(1 / sqrt(p L)).
    scaling: BTreeMap<String, LinearFit>,
    result: &'a ExperimentResult,
}

fn record_values(r: &ReplicationRecord) -> Vec<(&'static str, f64)> {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut out = vec![
        ("alpha_linf", r.alpha_linf),
        ("resamples", r.resamples as f64),
        ("converged", flag(r.converged)),
        ("iterations", r.iterations as f64),
        ("edges", r.edges as f64),
    ];
    let optional = [
        ("beta_rel_l2", r.beta_rel_l2),
        ("alpha1_estimate", r.alpha1_estimate),
        ("alpha1_oracle_var", r.alpha1_oracle_var),
        ("alpha1_z", r.alpha1_z),
        ("beta1_estimate", r.beta1_estimate),
        ("beta1_oracle_var", r.beta1_oracle_var),
        ("a_stat", r.a_stat),
        ("b_stat", r.b_stat),
        ("alpha1_covered", r.alpha1_covered.map(flag)),
        ("beta1_covered", r.beta1_covered.map(flag)),
    ];
    out.extend(optional.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
    out
}

fn experiment(cfg: &ExperimentConfig, prov: &Provenance) -> CliResult<Staged> {
    let spec = SyntheticSpec::new(cfg.n, cfg.d, cfg.plan.seed);
    let result = match cfg.kind {
        ExperimentKind::Rate => run_rate_experiment(&spec, &cfg.plan)?,
        ExperimentKind::Distribution => run_distribution_experiment(&spec, &cfg.plan)?,
    };

    let mut records = Csv::new(prov, &["p", "trials", "replication", "stream_id", "statistic", "value"]);
    let mut summary = Csv::new(prov, &["p", "trials", "statistic", "count", "mean", "sd"]);
    let mut qq = Csv::new(prov, &["p", "trials", "theoretical", "sample"]);
    let mut hist = Csv::new(prov, &["p", "trials", "statistic", "bin", "low", "high", "count"]);
    let mut ks = Csv::new(prov, &["p", "trials", "statistic", "ks_distance"]);
    let mut coverage = Csv::new(prov, &["p", "trials", "coefficient", "coverage"]);
    let mut variance = Csv::new(prov, &["p", "trials", "coefficient", "monte_carlo", "oracle", "relative_error"]);

    for pair in &result.pairs {
        let key = || [Cell::Float(pair.p), Cell::Int(pair.trials)];
        for r in &pair.records {
            for (name, value) in record_values(r) {
                let [p, l] = key();
                records.row(&[p, l, Cell::Int(r.replication as u64), Cell::Int(r.stream_id), Cell::Str(name), Cell::Float(value)]);
            }
        }
        for (name, s) in &pair.summaries {
            let [p, l] = key();
            summary.row(&[p, l, Cell::Str(name), Cell::Int(s.count as u64), Cell::Float(s.mean), Cell::Float(s.sd)]);
        }
        for point in &pair.qq_alpha1 {
            let [p, l] = key();
            qq.row(&[p, l, Cell::Float(point.theoretical), Cell::Float(point.sample)]);
        }
        for (name, h) in [("a_stat", &pair.hist_a), ("b_stat", &pair.hist_b)] {
            let Some(h) = h else { continue };
            let width = (h.high - h.low) / h.counts.len() as f64;
            for (bin, &count) in h.counts.iter().enumerate() {
                let [p, l] = key();
                let low = h.low + bin as f64 * width;
                hist.row(&[
                    p,
                    l,
                    Cell::Str(name),
                    Cell::Int(bin as u64),
                    Cell::Float(low),
                    Cell::Float(low + width),
                    Cell::Int(count as u64),
                ]);
            }
            for (label, count, low, high) in
                [("below", h.below, f64::NEG_INFINITY, h.low), ("above", h.above, h.high, f64::INFINITY)]
            {
                let [p, l] = key();
                hist.row(&[p, l, Cell::Str(name), Cell::Str(label), Cell::Float(low), Cell::Float(high), Cell::Int(count as u64)]);
            }
        }
        for (name, d) in &pair.ks {
            let [p, l] = key();
            ks.row(&[p, l, Cell::Str(name), Cell::Float(*d)]);
        }
        for (name, c) in &pair.coverage {
            let [p, l] = key();
            coverage.row(&[p, l, Cell::Str(name), Cell::Float(*c)]);
        }
        for (name, v) in &pair.variance {
            let [p, l] = key();
            variance.row(&[p, l, Cell::Str(name), Cell::Float(v.monte_carlo), Cell::Float(v.oracle), Cell::Float(v.relative_error)]);
        }
        eprintln!(
            "p={} L={}: {} replications, {} resamples, {} not converged",
            pair.p,
            pair.trials,
            pair.records.len(),
            pair.resamples,
            pair.nonconverged
        );
    }

    let mut scaling = BTreeMap::new();
    if cfg.kind == ExperimentKind::Rate && result.pairs.len() >= 2 {
        for stat in ["alpha_linf", "beta_rel_l2"] {
            if let Some(fit) = scaling_fit(&result, stat) {
                scaling.insert(stat.to_string(), fit);
            }
        }
    }
    let mut scaling_csv = Csv::new(prov, &["statistic", "slope", "intercept", "r_squared"]);
    for (name, f) in &scaling {
        scaling_csv.row(&[Cell::Str(name), Cell::Float(f.slope), Cell::Float(f.intercept), Cell::Float(f.r_squared)]);
    }

    let mut staged = Staged::default();
    staged.add("experiment/records.csv", records.into_bytes());
    staged.add("experiment/summary.csv", summary.into_bytes());
    staged.add("experiment/ks.csv", ks.into_bytes());
    staged.add("experiment/variance.csv", variance.into_bytes());
    staged.add("experiment/coverage.csv", coverage.into_bytes());
    staged.add("experiment/qq_alpha1.csv", qq.into_bytes());
    staged.add("experiment/histograms.csv", hist.into_bytes());
    staged.add("experiment/scaling.csv", scaling_csv.into_bytes());
    let doc = ExperimentDocument { kind: cfg.kind, scaling, result: &result };
    staged.add("experiment/result.json", to_json(&Stamped { provenance: prov, body: &doc })?);
    Ok(staged)
}
