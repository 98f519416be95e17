//! Orthogonal projection onto the identifiable subspace
//! `{(alpha, beta) : X̄' alpha = 0}`.

use nalgebra::{DMatrix, DVector};

use crate::data::{CovariateMatrix, ParamVector};
use crate::error::{CareError, Result};

/// Relative singular-value cutoff used to decide that the augmented design
/// has full column rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// The projector `P = I - Z (Z'Z)^{-1} Z'` where `Z` is the augmented design
/// padded with `d` zero rows.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    matrix_p: DMatrix<f64>,
    z_pad: DMatrix<f64>,
    // Orthonormal basis of the column space of the augmented design.
    column_basis: DMatrix<f64>,
}

pub fn build_projection(cov: &CovariateMatrix) -> Result<ProjectionOperator> {
    let xbar = cov.augmented();
    let n = cov.n();
    let d = cov.d();
    let cols = d + 1;
    if n < cols {
        return Err(CareError::DegenerateDesign { rank: n, required: cols });
    }
    let svd = xbar.clone().svd(true, false);
    let largest = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * largest)
        .count();
    if rank < cols {
        return Err(CareError::DegenerateDesign { rank, required: cols });
    }
    let u = svd.u.expect("left singular vectors requested");

    let mut matrix_p = DMatrix::identity(n + d, n + d);
    let uut = &u * u.transpose();
    let mut block = matrix_p.view_mut((0, 0), (n, n));
    block -= &uut;

    let mut z_pad = DMatrix::zeros(n + d, cols);
    z_pad.view_mut((0, 0), (n, cols)).copy_from(xbar);

    Ok(ProjectionOperator { matrix_p, z_pad, column_basis: u })
}

impl ProjectionOperator {
    pub fn matrix_p(&self) -> &DMatrix<f64> {
        &self.matrix_p
    }

    pub fn z_pad(&self) -> &DMatrix<f64> {
        &self.z_pad
    }

    pub fn n(&self) -> usize {
        self.column_basis.nrows()
    }

    pub fn d(&self) -> usize {
        self.matrix_p.nrows() - self.n()
    }

    /// Dimension of the identifiable subspace, `n - 1`.
    pub fn theta_dim(&self) -> usize {
        self.matrix_p.nrows() - self.z_pad.ncols()
    }

    /// `P v`, computed in `O((n + d) d)` without touching the dense matrix.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let mut out = v.clone();
        let alpha = v.rows(0, n);
        let coef = self.column_basis.tr_mul(&alpha);
        let mut head = out.rows_mut(0, n);
        head -= &self.column_basis * coef;
        out
    }

    /// `||Z' v||_inf`; zero exactly when `v` lies in the identifiable subspace.
    pub fn constraint_residual(&self, v: &DVector<f64>) -> f64 {
        self.z_pad.tr_mul(v).amax()
    }

    pub fn params_residual(&self, params: &ParamVector) -> f64 {
        self.constraint_residual(&params.joint())
    }

    /// Orthonormal basis of the identifiable subspace, one column per
    /// dimension.
    pub fn theta_basis(&self) -> DMatrix<f64> {
        let eig = self.matrix_p.clone().symmetric_eigen();
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] > 0.5)
            .collect();
        DMatrix::from_fn(self.matrix_p.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
    }

    /// `||X̄ (X̄'X̄)^{-1} X̄'||_{2,inf}`, the largest row norm of the hat
    /// matrix of the augmented design.
    pub fn incoherence(&self) -> f64 {
        self.column_basis
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }
}
