//! Finite-dimensional model of the ambient Hilbert space.
//!
//! Vectors live in `ℂ^D`; the inner product is linear in the first argument
//! and conjugate-linear in the second, `⟨x, y⟩ = Σ x_i conj(y_i)`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{identity_residual, singular_values, RANK_TOL};

pub type C64 = nalgebra::Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub const DEFAULT_MAX_POWER: u32 = 4096;

/// `⟨x, y⟩`, conjugate-linear in `y`.
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    y.dotc(x)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// An invertible operator `T` on `ℂ^D`, with its inverse cached.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    matrix: CMatrix,
    inverse: CMatrix,
    max_power: u32,
}

impl LinearOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "operator must be a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let sv = singular_values(&matrix);
        let ratio = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
        if !(ratio > RANK_TOL) {
            return Err(Error::Singular { ratio });
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { ratio })?;
        if identity_residual(&(&inverse * &matrix)) > 1e-10 {
            return Err(Error::Singular { ratio });
        }
        Ok(Self {
            matrix,
            inverse,
            max_power: DEFAULT_MAX_POWER,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = CMatrix::identity(dim, dim);
        Self {
            inverse: matrix.clone(),
            matrix,
            max_power: DEFAULT_MAX_POWER,
        }
    }

    /// The cyclic shift `P δ_k = δ_{k+1 mod D}`.
    pub fn cyclic_shift(dim: usize) -> Self {
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            if i == (j + 1) % dim {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            inverse: matrix.adjoint(),
            matrix,
            max_power: DEFAULT_MAX_POWER,
        }
    }

    pub fn with_max_power(mut self, max_power: u32) -> Self {
        self.max_power = max_power;
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn max_power(&self) -> u32 {
        self.max_power
    }

    /// `T*`, whose inverse is `(T^{-1})*`.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            inverse: self.inverse.adjoint(),
            max_power: self.max_power,
        }
    }

    fn check_power(&self, k: i64) -> Result<()> {
        if k.unsigned_abs() > u64::from(self.max_power) {
            return Err(Error::PowerBound {
                power: k,
                max: self.max_power,
            });
        }
        Ok(())
    }

    /// `T^k v` by repeated multiplication with `T` or the cached `T^{-1}`.
    pub fn apply_power(&self, k: i64, v: &CVector) -> Result<CVector> {
        check_dim(self.dim(), v.len())?;
        self.check_power(k)?;
        let step = if k >= 0 { &self.matrix } else { &self.inverse };
        let mut out = v.clone();
        for _ in 0..k.unsigned_abs() {
            out = step * out;
        }
        Ok(out)
    }

    /// The matrix of `T^k`.
    pub fn power_matrix(&self, k: i64) -> Result<CMatrix> {
        self.check_power(k)?;
        let step = if k >= 0 { &self.matrix } else { &self.inverse };
        let mut out = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..k.unsigned_abs() {
            out = step * out;
        }
        Ok(out)
    }
}

/// Values `r(k) = ⟨T^k a, b⟩` over a window of integers, optionally periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    start: i64,
    values: Vec<C64>,
    period: Option<usize>,
}

impl CrossCorrelation {
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    /// `r(k)`; with a period set any integer is accepted.
    pub fn get(&self, k: i64) -> Option<C64> {
        let idx = match self.period {
            Some(n) => (k - self.start).rem_euclid(n as i64),
            None => k - self.start,
        };
        usize::try_from(idx).ok().and_then(|i| self.values.get(i).copied())
    }
}

/// `⟨T^k a, b⟩` for `k` in `range`.
pub fn cross_correlation(
    op: &LinearOperator,
    a: &CVector,
    b: &CVector,
    range: Range<i64>,
) -> Result<CrossCorrelation> {
    check_dim(op.dim(), a.len())?;
    check_dim(op.dim(), b.len())?;
    op.check_power(range.end.saturating_sub(1))?;
    let mut current = op.apply_power(range.start, a)?;
    let mut values = Vec::with_capacity(range.clone().count());
    for _ in range.clone() {
        values.push(inner(&current, b));
        current = op.matrix() * current;
    }
    Ok(CrossCorrelation {
        start: range.start,
        values,
        period: None,
    })
}

/// One period `k = 0..period` of `⟨T^k a, b⟩` for a generator with
/// `T^period a = a`; `get` then reduces every index modulo the period.
pub fn periodic_cross_correlation(
    op: &LinearOperator,
    a: &CVector,
    b: &CVector,
    period: usize,
) -> Result<CrossCorrelation> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    let mut cc = cross_correlation(op, a, b, 0..period as i64)?;
    cc.period = Some(period);
    Ok(cc)
}

/// Gram matrix with entry `(k, l) = ⟨v_l, v_k⟩`.
pub fn gram_matrix(vectors: &[CVector]) -> Result<CMatrix> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidParameter("empty vector list".into()));
    };
    for v in vectors {
        check_dim(first.len(), v.len())?;
    }
    let n = vectors.len();
    Ok(CMatrix::from_fn(n, n, |k, l| inner(&vectors[l], &vectors[k])))
}

/// Stack vectors as the columns of a `D × n` matrix.
pub fn column_matrix(vectors: &[CVector]) -> Result<CMatrix> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidParameter("empty vector list".into()));
    };
    for v in vectors {
        check_dim(first.len(), v.len())?;
    }
    Ok(CMatrix::from_columns(vectors))
}
