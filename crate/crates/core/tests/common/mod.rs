#![allow(dead_code)]

use care_core::simulation::rng_stream;
use care_core::{preprocess_covariates, ComparisonData, CovariateMatrix, Edge, ParamVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random covariates, parameters and a random comparison graph in which every
/// pair is present with probability `p`.
pub struct Instance {
    pub cov: CovariateMatrix,
    pub data: ComparisonData,
    pub params: ParamVector,
}

pub fn random_instance(n: usize, d: usize, p: f64, seed: u64) -> Instance {
    let mut rng = rng_stream(seed, 0);
    let raw = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    let cov = preprocess_covariates(&raw, true).unwrap();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let trials = rng.random_range(1..6);
                edges.push(Edge { i, j, trials, wins_j: rng.random_range(0..=trials) });
            }
        }
    }
    let data = ComparisonData::new(n, edges).unwrap();
    let params = ParamVector::new(
        DVector::from_fn(n, |_, _| rng.random_range(-1.5..1.5)),
        DVector::from_fn(d, |_, _| rng.random_range(-1.5..1.5)),
    );
    Instance { cov, data, params }
}

/// Direct term-by-term log-likelihood: each trial contributes
/// `-log P(observed winner)`.
pub fn reference_nll(inst: &Instance, v: &DVector<f64>) -> f64 {
    let n = inst.cov.n();
    let d = inst.cov.d();
    let x = inst.cov.scaled();
    let score = |k: usize| {
        let mut s = v[k];
        for c in 0..d {
            s += x[(k, c)] * v[n + c];
        }
        s
    };
    let mut total = 0.0;
    for e in inst.data.edges() {
        let (si, sj) = (score(e.i), score(e.j));
        let p_j = sj.exp() / (si.exp() + sj.exp());
        total -= e.wins_j as f64 * p_j.ln() + (e.trials - e.wins_j) as f64 * (1.0 - p_j).ln();
    }
    total
}
