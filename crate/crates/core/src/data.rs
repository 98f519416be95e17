//! Core data types: comparison sufficient statistics, covariates and parameters.

use nalgebra::{DMatrix, DVector};

use crate::error::{CareError, Result};

/// One compared pair with its aggregated outcomes.
///
/// `wins_j` counts the trials in which item `j` was preferred over item `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub trials: u64,
    pub wins_j: u64,
}

impl Edge {
    /// Fraction of trials won by `j`.
    pub fn y(&self) -> f64 {
        self.wins_j as f64 / self.trials as f64
    }
}

/// Edge list of compared pairs, stored with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonData {
    n_items: usize,
    edges: Vec<Edge>,
}

impl ComparisonData {
    /// Validates and canonicalizes the edge list. Edges given with `i > j`
    /// are flipped so that the win count keeps referring to the same item.
    pub fn new(n_items: usize, edges: Vec<Edge>) -> Result<Self> {
        if n_items == 0 {
            return Err(CareError::InvalidArgument("n_items must be positive".into()));
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for e in edges {
            if e.i >= n_items || e.j >= n_items {
                return Err(CareError::InvalidArgument(format!(
                    "edge ({}, {}) references an item outside [0, {n_items})",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(CareError::InvalidArgument(format!("self-comparison on item {}", e.i)));
            }
            if e.trials == 0 {
                return Err(CareError::InvalidArgument(format!(
                    "edge ({}, {}) has zero trials",
                    e.i, e.j
                )));
            }
            if e.wins_j > e.trials {
                return Err(CareError::InvalidArgument(format!(
                    "edge ({}, {}) has {} wins out of {} trials",
                    e.i, e.j, e.wins_j, e.trials
                )));
            }
            canonical.push(if e.i < e.j {
                e
            } else {
                Edge { i: e.j, j: e.i, trials: e.trials, wins_j: e.trials - e.wins_j }
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(canonical.len());
        for e in &canonical {
            if !seen.insert((e.i, e.j)) {
                return Err(CareError::InvalidArgument(format!(
                    "duplicate edge ({}, {})",
                    e.i, e.j
                )));
            }
        }
        Ok(Self { n_items, edges: canonical })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_trials(&self) -> u64 {
        self.edges.iter().map(|e| e.trials).sum()
    }

    /// Same comparisons with every trial count multiplied by `factor`.
    pub fn scale_trials(&self, factor: u64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { trials: e.trials * factor, wins_j: e.wins_j * factor, ..*e })
            .collect();
        Self { n_items: self.n_items, edges }
    }
}

/// Item covariates after standardization and rescaling.
///
/// `scaled` rows satisfy `max_i ||x_i|| = sqrt((d + 1) / n)`; `augmented`
/// prepends a column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix {
    pub(crate) raw: DMatrix<f64>,
    pub(crate) scale_k: f64,
    pub(crate) scaled: DMatrix<f64>,
    pub(crate) augmented: DMatrix<f64>,
    pub(crate) column_means: DVector<f64>,
    pub(crate) column_sds: DVector<f64>,
}

impl CovariateMatrix {
    pub fn n(&self) -> usize {
        self.scaled.nrows()
    }

    pub fn d(&self) -> usize {
        self.scaled.ncols()
    }

    pub fn raw(&self) -> &DMatrix<f64> {
        &self.raw
    }

    pub fn scale_k(&self) -> f64 {
        self.scale_k
    }

    pub fn scaled(&self) -> &DMatrix<f64> {
        &self.scaled
    }

    pub fn augmented(&self) -> &DMatrix<f64> {
        &self.augmented
    }

    pub fn column_means(&self) -> &DVector<f64> {
        &self.column_means
    }

    pub fn column_sds(&self) -> &DVector<f64> {
        &self.column_sds
    }
}

/// Intrinsic scores `alpha` and covariate loadings `beta`, viewed jointly as
/// one vector of length `n + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
    /// Set once the vector has been projected onto the identifiable subspace.
    pub identified: bool,
}

impl ParamVector {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { alpha: DVector::zeros(n), beta: DVector::zeros(d), identified: false }
    }

    pub fn new(alpha: DVector<f64>, beta: DVector<f64>) -> Self {
        Self { alpha, beta, identified: false }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn d(&self) -> usize {
        self.beta.len()
    }

    pub fn joint(&self) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(n + self.d(), |k, _| if k < n { self.alpha[k] } else { self.beta[k - n] })
    }

    pub fn from_joint(v: &DVector<f64>, n: usize) -> Self {
        let d = v.len() - n;
        Self {
            alpha: v.rows(0, n).into_owned(),
            beta: v.rows(n, d).into_owned(),
            identified: false,
        }
    }

    /// Total item scores `alpha_i + x_i' beta` on the scaled covariates.
    pub fn scores(&self, cov: &CovariateMatrix) -> DVector<f64> {
        if self.d() == 0 {
            self.alpha.clone()
        } else {
            &self.alpha + cov.scaled() * &self.beta
        }
    }

    pub(crate) fn check_dims(&self, cov: &CovariateMatrix) -> Result<()> {
        if self.n() != cov.n() {
            return Err(CareError::DimensionMismatch {
                context: "alpha length vs covariate rows",
                expected: cov.n(),
                actual: self.n(),
            });
        }
        if self.d() != cov.d() {
            return Err(CareError::DimensionMismatch {
                context: "beta length vs covariate columns",
                expected: cov.d(),
                actual: self.d(),
            });
        }
        Ok(())
    }
}
