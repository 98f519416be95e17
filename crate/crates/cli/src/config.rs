//! Command-line arguments, the flat TOML config file and their resolution.
//!
//! Every setting can come from a flag, from the config file or from the
//! built-in default, in that order of precedence.

use std::path::{Path, PathBuf};

use care_core::inference::DEFAULT_THRESHOLD_QUANTILE;
use care_core::simulation::{distribution_pairs, ExperimentPlan, Statistic, RATE_PAIRS};
use care_core::{FitConfig, StepSize};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "CARE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "care", version, about = "Covariate-assisted ranking from pairwise comparisons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic instance and write its comparisons, covariates and truth.
    Simulate(SimulateArgs),
    /// Fit the constrained MLE and write fit.json.
    Fit(FitArgs),
    /// Fit, then write plug-in tests and intervals to inference.csv.
    Infer(InferArgs),
    /// Fit, then write covariate-only and thresholded scores to ranking.csv.
    Rank(InferArgs),
    /// Run a Monte Carlo study and write experiment/*.csv.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML file with default values for any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Comparison CSV (`item_i,item_j,trials,wins_j` or `item_i,item_j,winner`).
    #[arg(long)]
    pub comparisons: Option<PathBuf>,
    /// Covariate CSV with header `item,f1,...,fd`; omit to fit intercepts only.
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    /// Standardize covariate columns before rescaling.
    #[arg(long)]
    pub standardize: Option<bool>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// `auto` or a positive step size.
    #[arg(long)]
    pub step_size: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub step_tol: Option<f64>,
    /// Ridge penalty on the intrinsic scores.
    #[arg(long)]
    pub ridge_alpha: Option<f64>,
    /// Divisor for the log-likelihood; defaults to the total trial count.
    #[arg(long)]
    pub likelihood_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LevelArgs {
    /// Confidence level of the intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// Normal quantile used for the soft thresholds.
    #[arg(long)]
    pub quantile_level: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    /// Edge probability of the comparison graph.
    #[arg(long)]
    pub p: Option<f64>,
    /// Comparisons per edge.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Rate,
    Distribution,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum)]
    pub kind: Option<ExperimentKind>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Comma-separated `p:L` pairs, e.g. `1:50,0.5:25`.
    #[arg(long)]
    pub pairs: Option<String>,
    /// Comma-separated statistics to record.
    #[arg(long)]
    pub statistics: Option<String>,
    /// Confidence level for coverage.
    #[arg(long)]
    pub level: Option<f64>,
    /// Worker threads; defaults to $CARE_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Keys accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    pub out: Option<PathBuf>,
    pub comparisons: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    pub standardize: Option<bool>,
    pub step_size: Option<StepValue>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub ridge_alpha: Option<f64>,
    pub likelihood_scale: Option<f64>,
    pub level: Option<f64>,
    pub quantile_level: Option<f64>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub trials: Option<u64>,
    pub kind: Option<ExperimentKind>,
    pub replications: Option<usize>,
    pub pairs: Option<Vec<(f64, u64)>>,
    pub statistics: Option<Vec<Statistic>>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StepValue {
    Number(f64),
    Text(String),
}

impl FileSettings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|source| CliError::ConfigFile { path: path.display().to_string(), source })
    }
}

fn parse_step(value: StepValue) -> CliResult<StepSize> {
    match value {
        StepValue::Number(eta) => Ok(StepSize::Fixed(eta)),
        StepValue::Text(t) if t.eq_ignore_ascii_case("auto") => Ok(StepSize::Auto),
        StepValue::Text(t) => t
            .parse::<f64>()
            .map(StepSize::Fixed)
            .map_err(|_| CliError::Config(format!("step_size must be `auto` or a number, got {t:?}"))),
    }
}

fn parse_pairs(text: &str) -> CliResult<Vec<(f64, u64)>> {
    text.split(',')
        .map(|item| {
            let (p, l) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("pair {item:?} is not of the form p:L")))?;
            let p = p.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad p in {item:?}")))?;
            let l = l.trim().parse::<u64>().map_err(|_| CliError::Config(format!("bad L in {item:?}")))?;
            Ok((p, l))
        })
        .collect()
}

fn parse_statistics(text: &str) -> CliResult<Vec<Statistic>> {
    text.split(',')
        .map(|name| {
            serde_json::from_value(serde_json::Value::String(name.trim().to_string()))
                .map_err(|_| CliError::Config(format!("unknown statistic {name:?}")))
        })
        .collect()
}

fn solver_config(args: &SolverArgs, file: &FileSettings, base: FitConfig, seed: u64) -> CliResult<FitConfig> {
    let step_size = match (&args.step_size, &file.step_size) {
        (Some(s), _) => parse_step(StepValue::Text(s.clone()))?,
        (None, Some(v)) => parse_step(v.clone())?,
        (None, None) => base.step_size,
    };
    let cfg = FitConfig {
        step_size,
        max_iters: args.max_iters.or(file.max_iters).unwrap_or(base.max_iters),
        grad_tol: args.grad_tol.or(file.grad_tol).unwrap_or(base.grad_tol),
        step_tol: args.step_tol.or(file.step_tol).unwrap_or(base.step_tol),
        ridge_alpha: args.ridge_alpha.or(file.ridge_alpha).unwrap_or(base.ridge_alpha),
        likelihood_scale: args.likelihood_scale.or(file.likelihood_scale).or(base.likelihood_scale),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Simulate,
    Fit,
    Infer,
    Rank,
    Experiment,
}

/// Settings for reading and fitting a comparison file.
#[derive(Debug, Clone, Serialize)]
pub struct InputConfig {
    pub comparisons: PathBuf,
    pub covariates: Option<PathBuf>,
    pub standardize: bool,
    pub fit: FitConfig,
    pub level: f64,
    pub quantile_level: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub plan: ExperimentPlan,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Settings {
    Simulate(SimulateConfig),
    Input(InputConfig),
    Experiment(ExperimentConfig),
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    /// Excluded from the config hash.
    #[serde(skip)]
    pub out: PathBuf,
    pub settings: Settings,
    pub seed: u64,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form of every setting that can change
    /// results (the output directory and thread count are left out).
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn level_in_unit(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn existing(path: PathBuf, what: &str) -> CliResult<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::Config(format!("{what} file {} does not exist", path.display())))
    }
}

fn output_dir(common: &CommonArgs, file: &FileSettings) -> PathBuf {
    common.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn input_config(
    input: &InputArgs,
    solver: &SolverArgs,
    levels: Option<&LevelArgs>,
    file: &FileSettings,
) -> CliResult<InputConfig> {
    let comparisons = input
        .comparisons
        .clone()
        .or_else(|| file.comparisons.clone())
        .ok_or_else(|| CliError::Config("no comparison file given (--comparisons)".into()))?;
    let covariates = input.covariates.clone().or_else(|| file.covariates.clone());
    let level = levels.and_then(|l| l.level).or(file.level).unwrap_or(0.95);
    let quantile_level = levels
        .and_then(|l| l.quantile_level)
        .or(file.quantile_level)
        .unwrap_or(DEFAULT_THRESHOLD_QUANTILE);
    if !(quantile_level > 0.5 && quantile_level < 1.0) {
        return Err(CliError::Config(format!("quantile_level must lie in (0.5, 1), got {quantile_level}")));
    }
    Ok(InputConfig {
        comparisons: existing(comparisons, "comparison")?,
        covariates: covariates.map(|p| existing(p, "covariate")).transpose()?,
        standardize: input.standardize.or(file.standardize).unwrap_or(true),
        fit: solver_config(solver, file, FitConfig::default(), 0)?,
        level: level_in_unit("level", level)?,
        quantile_level,
    })
}

fn default_threads() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    pub fn resolve(command: &Command) -> CliResult<Self> {
        match command {
            Command::Simulate(a) => {
                let file = FileSettings::load(a.common.config.as_deref())?;
                let seed = a.size.seed.or(file.seed).unwrap_or(0);
                let cfg = SimulateConfig {
                    n: a.size.n.or(file.n).unwrap_or(200),
                    d: a.size.d.or(file.d).unwrap_or(5),
                    p: a.p.or(file.p).unwrap_or(0.5),
                    trials: a.trials.or(file.trials).unwrap_or(25),
                    seed,
                };
                if !(cfg.p > 0.0 && cfg.p <= 1.0) || cfg.trials == 0 {
                    return Err(CliError::Config("need p in (0, 1] and trials >= 1".into()));
                }
                Ok(Self {
                    command: CommandName::Simulate,
                    out: output_dir(&a.common, &file),
                    settings: Settings::Simulate(cfg),
                    seed,
                })
            }
            Command::Fit(a) => {
                let file = FileSettings::load(a.common.config.as_deref())?;
                let cfg = input_config(&a.input, &a.solver, None, &file)?;
                Ok(Self {
                    command: CommandName::Fit,
                    out: output_dir(&a.common, &file),
                    seed: cfg.fit.seed,
                    settings: Settings::Input(cfg),
                })
            }
            Command::Infer(a) | Command::Rank(a) => {
                let file = FileSettings::load(a.common.config.as_deref())?;
                let cfg = input_config(&a.input, &a.solver, Some(&a.levels), &file)?;
                let name = if matches!(command, Command::Infer(_)) { CommandName::Infer } else { CommandName::Rank };
                Ok(Self {
                    command: name,
                    out: output_dir(&a.common, &file),
                    seed: cfg.fit.seed,
                    settings: Settings::Input(cfg),
                })
            }
            Command::Experiment(a) => {
                let file = FileSettings::load(a.common.config.as_deref())?;
                let kind = a.kind.or(file.kind).unwrap_or(ExperimentKind::Rate);
                let n = a.size.n.or(file.n).unwrap_or(200);
                let d = a.size.d.or(file.d).unwrap_or(5);
                let seed = a.size.seed.or(file.seed).unwrap_or(0);
                let mut plan = match kind {
                    ExperimentKind::Rate => ExperimentPlan::rate(seed),
                    ExperimentKind::Distribution => ExperimentPlan::distribution(n, d, seed),
                };
                plan.fit = solver_config(&a.solver, &file, plan.fit.clone(), seed)?;
                if let Some(r) = a.replications.or(file.replications) {
                    plan.replications = r;
                }
                if let Some(text) = &a.pairs {
                    plan.pl_pairs = parse_pairs(text)?;
                } else if let Some(pairs) = &file.pairs {
                    plan.pl_pairs = pairs.clone();
                } else {
                    plan.pl_pairs = match kind {
                        ExperimentKind::Rate => RATE_PAIRS.to_vec(),
                        ExperimentKind::Distribution => distribution_pairs(n, d),
                    };
                }
                if let Some(text) = &a.statistics {
                    plan.statistics = parse_statistics(text)?.into_iter().collect();
                } else if let Some(stats) = &file.statistics {
                    plan.statistics = stats.iter().copied().collect();
                }
                plan.level = a.level.or(file.level).unwrap_or(plan.level);
                plan.threads = match a.threads.or(file.threads) {
                    Some(t) => Some(t),
                    None => default_threads()?,
                };
                plan.validate(n, d)?;
                Ok(Self {
                    command: CommandName::Experiment,
                    out: output_dir(&a.common, &file),
                    settings: Settings::Experiment(ExperimentConfig { kind, n, d, plan }),
                    seed,
                })
            }
        }
    }
}
