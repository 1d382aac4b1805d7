//! Seeded random problem instances for experiments and tests.

use nalgebra::Complex;
use rand::Rng;

use crate::hilbert::{CMatrix, CVector, LinearOperator, C64};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| random_complex(rng))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// `I + 0.3 X / sqrt(dim)` with uniform complex `X`; condition number stays small.
pub fn well_conditioned_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let scale = 0.3 / (dim as f64).sqrt();
    CMatrix::identity(dim, dim) + random_matrix(rng, dim, dim) * C64::new(scale, 0.0)
}

/// Permutation matrix of `δ_i ↦ δ_{perm[i]}`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = C64::new(1.0, 0.0);
    }
    m
}

/// A random operator on `ℂ^dim` together with generators of the given orders.
///
/// `T = V B V^{-1}` where `B` acts on the first `Σ orders` coordinates as
/// a direct sum of cyclic shifts and on the rest as a random invertible
/// block. The generators are `a_l = V δ_{offset_l}`, so their orbits are
/// linearly independent and `T^{N_l} a_l = a_l`.
pub fn cyclic_instance<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    orders: &[usize],
) -> (LinearOperator, Vec<CVector>) {
    let total: usize = orders.iter().sum();
    assert!(total <= dim, "orders exceed the ambient dimension");
    let mut perm: Vec<usize> = Vec::with_capacity(dim);
    let mut offsets = Vec::with_capacity(orders.len());
    let mut offset = 0;
    for &n in orders {
        offsets.push(offset);
        perm.extend((0..n).map(|k| offset + (k + 1) % n));
        offset += n;
    }
    perm.extend(total..dim);
    let mut block = permutation_matrix(&perm);
    if dim > total {
        let rest = well_conditioned_matrix(rng, dim - total);
        block.view_mut((total, total), (dim - total, dim - total)).copy_from(&rest);
    }
    let v = well_conditioned_matrix(rng, dim);
    let v_inv = v.clone().try_inverse().expect("well-conditioned matrix is invertible");
    let op = LinearOperator::new(&v * block * v_inv).expect("similarity of an invertible matrix");
    let generators = offsets.iter().map(|&o| v.column(o).into_owned()).collect();
    (op, generators)
}
