//! Internal dense linear algebra helpers: SVD-based rank decisions,
//! condition numbers, and least-squares solves with a relative singular
//! value cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular value threshold for rank decisions.
pub(crate) const RANK_TOL: f64 = 1e-9;

/// Relative singular value cutoff for least-squares pseudo-inversion.
pub(crate) const LSTSQ_CUTOFF: f64 = 1e-10;

/// Sorted (descending) singular values of `m`.
pub(crate) fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Rank of `m` with singular values below `rel_tol * sigma_max` treated as
/// zero, together with the condition number `sigma_1 / sigma_r` where `r`
/// is `min(nrows, ncols)`; the condition is infinite when the matrix is
/// rank deficient in that sense.
pub(crate) fn rank_and_condition(m: &DMatrix<Complex64>, rel_tol: f64) -> (usize, f64) {
    let sv = singular_values(m);
    if sv.is_empty() || sv[0] == 0.0 {
        return (0, f64::INFINITY);
    }
    let tol = rel_tol * sv[0];
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let smallest = sv[sv.len() - 1];
    let condition = if smallest > 0.0 && rank == sv.len() {
        sv[0] / smallest
    } else {
        f64::INFINITY
    };
    (rank, condition)
}

/// Least-squares solution of `m x = rhs` via SVD with relative cutoff
/// `LSTSQ_CUTOFF`. Returns the solution, the rank, and the condition number
/// `sigma_1 / sigma_k` where `k = ncols` (infinite when column-rank
/// deficient).
pub(crate) fn lstsq(
    m: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
) -> (DVector<Complex64>, usize, f64) {
    let svd = m.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let eps = LSTSQ_CUTOFF * sigma_max;
    let rank = sv.iter().filter(|&&s| s > eps).count();
    let ncols = m.ncols();
    let condition = if rank >= ncols && ncols > 0 && sv[ncols - 1] > 0.0 {
        sigma_max / sv[ncols - 1]
    } else {
        f64::INFINITY
    };
    let x = svd
        .solve(rhs, eps)
        .unwrap_or_else(|_| DVector::zeros(ncols));
    (x, rank, condition)
}

/// Frobenius norm.
pub(crate) fn fro_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
