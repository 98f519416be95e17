//! Comparison-graph structure: connectivity and the design matrix
//! `L_G = sum_{(i,j) in E} (x̃_i - x̃_j)(x̃_i - x̃_j)'`.

use nalgebra::DMatrix;

use crate::data::{ComparisonData, CovariateMatrix};
use crate::error::{CareError, Result};
use crate::model::{lift_laplacian, weighted_laplacian};
use crate::projection::build_projection;

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the undirected comparison graph, each sorted, in
/// order of their smallest item.
pub fn connected_components(data: &ComparisonData) -> Vec<Vec<usize>> {
    let n = data.n_items();
    let mut uf = UnionFind::new(n);
    for e in data.edges() {
        uf.union(e.i, e.j);
    }
    let mut by_root: Vec<Option<usize>> = vec![None; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for item in 0..n {
        let root = uf.find(item);
        match by_root[root] {
            Some(c) => components[c].push(item),
            None => {
                by_root[root] = Some(components.len());
                components.push(vec![item]);
            }
        }
    }
    components
}

pub fn is_connected(data: &ComparisonData) -> bool {
    connected_components(data).len() == 1
}

/// `Ok(())` for a connected graph, otherwise the component listing.
pub fn require_connected(data: &ComparisonData) -> Result<()> {
    let components = connected_components(data);
    if components.len() == 1 {
        Ok(())
    } else {
        Err(CareError::Disconnected { components })
    }
}

/// Measured spectral quantities of the comparison design.
#[derive(Debug, Clone)]
pub struct GraphDesign {
    pub sigma_g: DMatrix<f64>,
    /// Smallest eigenvalue of `L_G` restricted to the identifiable subspace.
    pub lambda_min_perp: f64,
    pub lambda_max: f64,
}

pub fn graph_design(data: &ComparisonData, cov: &CovariateMatrix) -> Result<GraphDesign> {
    if data.n_items() != cov.n() {
        return Err(CareError::DimensionMismatch {
            context: "comparison items vs covariate rows",
            expected: cov.n(),
            actual: data.n_items(),
        });
    }
    let sigma_g = lift_laplacian(cov, &weighted_laplacian(data, |_| 1.0));
    let lambda_max = sigma_g.clone().symmetric_eigenvalues().max().max(0.0);
    let basis = build_projection(cov)?.theta_basis();
    let restricted = basis.transpose() * &sigma_g * &basis;
    let lambda_min_perp = if restricted.nrows() == 0 {
        0.0
    } else {
        restricted.symmetric_eigenvalues().min()
    };
    Ok(GraphDesign { sigma_g, lambda_min_perp, lambda_max })
}
