//! Small dense linear-algebra helpers shared by the sampling modules.

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};

/// Relative numerical rank tolerance: `sigma > RANK_TOL * sigma_max`.
pub const RANK_TOL: f64 = 1e-10;

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(sv: &[f64], tol: f64) -> usize {
    let Some(&max) = sv.first() else { return 0 };
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Moore-Penrose pseudo-inverse of a full-column-rank matrix, via SVD.
pub fn pseudo_inverse(m: &CMatrix) -> Result<CMatrix> {
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * max)
        .count();
    if rank < m.ncols() {
        return Err(Error::RankDeficient {
            rank,
            expected: m.ncols(),
        });
    }
    svd.pseudo_inverse(RANK_TOL * max)
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - I|` over all entries.
pub fn identity_residual(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}
