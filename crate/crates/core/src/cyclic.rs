//! Sampling in finite-dimensional cyclic subspaces.
//!
//! Generators `a_1, …, a_L` with `T^{N_l} a_l = a_l` span
//! `A_a = span{T^k a_l}`; an element `x = Σ α^l(k) T^k a_l` is sampled as
//! `L_j x(rn) = ⟨x, (T*)^{-rn} b_j⟩` for `n = 0..ℓ`, `ℓ = N / r`,
//! `N = lcm(N_l)`. The samples satisfy `samples = R α` and any left inverse
//! of `R` recovers `α`. The left inverses built here have the column-shift
//! structure that turns the recovery into the sampling formula
//! `x = Σ_j Σ_n L_j x(rn) T^{rn} c_j`.
//!
//! Ordering conventions: sample rows are sampler-major (`j * ℓ + n`) and
//! coefficient columns are grouped by generator in declaration order.

use num::integer::{gcd, lcm};

use crate::error::{Error, Result};
use crate::hilbert::{inner, periodic_cross_correlation, CMatrix, CVector, LinearOperator, C64};
use crate::linalg::{identity_residual, max_abs, numerical_rank, pseudo_inverse, singular_values, RANK_TOL};

/// Relative tolerance on `‖T^{N_l} a_l - a_l‖`.
pub const PERIOD_TOL: f64 = 1e-8;
/// Residual bound for accepting a caller-supplied left inverse.
pub const LEFT_INVERSE_TOL: f64 = 1e-8;

/// The subspace spanned by the orbits of cyclic generators.
#[derive(Debug, Clone)]
pub struct CyclicSubspace {
    operator: LinearOperator,
    generators: Vec<CVector>,
    orders: Vec<usize>,
    lcm_order: usize,
    orbit: CMatrix,
}

impl CyclicSubspace {
    pub fn new(operator: LinearOperator, generators: Vec<CVector>, orders: Vec<usize>) -> Result<Self> {
        if generators.is_empty() || generators.len() != orders.len() {
            return Err(Error::InvalidParameter(format!(
                "{} generators but {} orders",
                generators.len(),
                orders.len()
            )));
        }
        let dim = operator.dim();
        let mut lcm_order = 1usize;
        let mut columns = Vec::new();
        for (index, (a, &order)) in generators.iter().zip(&orders).enumerate() {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.len(),
                });
            }
            if order == 0 {
                return Err(Error::InvalidParameter("generator orders must be positive".into()));
            }
            let mut current = a.clone();
            for _ in 0..order {
                columns.push(current.clone());
                current = operator.matrix() * current;
            }
            let residual = (&current - a).norm();
            if residual > PERIOD_TOL * a.norm() {
                return Err(Error::NotPeriodic {
                    index,
                    order,
                    residual,
                });
            }
            lcm_order = lcm(lcm_order, order);
        }
        let orbit = CMatrix::from_columns(&columns);
        let rank = numerical_rank(&singular_values(&orbit), RANK_TOL);
        if rank < orbit.ncols() {
            return Err(Error::RankDeficient {
                rank,
                expected: orbit.ncols(),
            });
        }
        Ok(Self {
            operator,
            generators,
            orders,
            lcm_order,
            orbit,
        })
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.operator
    }

    pub fn generators(&self) -> &[CVector] {
        &self.generators
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// `N = lcm(N_1, …, N_L)`.
    pub fn lcm_order(&self) -> usize {
        self.lcm_order
    }

    /// `N_1 + … + N_L`.
    pub fn dimension(&self) -> usize {
        self.orbit.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.operator.dim()
    }

    /// Columns `T^k a_l`, generator-major.
    pub fn orbit_matrix(&self) -> &CMatrix {
        &self.orbit
    }

    /// `x = Σ α^l(k) T^k a_l`.
    pub fn synthesize(&self, alpha: &CVector) -> Result<CVector> {
        if alpha.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: alpha.len(),
            });
        }
        Ok(&self.orbit * alpha)
    }

    /// Least-squares coefficients of `x` in the orbit basis.
    pub fn coefficients(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: x.len(),
            });
        }
        let gram = self.orbit.adjoint() * &self.orbit;
        let rhs = self.orbit.adjoint() * x;
        let rank = self.dimension();
        gram.cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(Error::RankDeficient { rank: 0, expected: rank })
    }
}

/// Samplers `b_1, …, b_s` and the sampling period `r | N`.
#[derive(Debug, Clone)]
pub struct SamplingScheme {
    samplers: Vec<CVector>,
    period: usize,
    ell: usize,
}

impl SamplingScheme {
    pub fn new(subspace: &CyclicSubspace, samplers: Vec<CVector>, period: usize) -> Result<Self> {
        if samplers.is_empty() {
            return Err(Error::InvalidParameter("at least one sampler is required".into()));
        }
        for b in &samplers {
            if b.len() != subspace.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: subspace.ambient_dim(),
                    found: b.len(),
                });
            }
        }
        let n = subspace.lcm_order();
        if period == 0 || !n.is_multiple_of(period) {
            return Err(Error::InvalidParameter(format!(
                "sampling period {period} does not divide N = {n}"
            )));
        }
        Ok(Self {
            samplers,
            period,
            ell: n / period,
        })
    }

    pub fn samplers(&self) -> &[CVector] {
        &self.samplers
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// `s * ℓ`.
    pub fn sample_count(&self) -> usize {
        self.samplers.len() * self.ell
    }
}

/// Shape bookkeeping shared by `R` and its structured left inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub samplers: usize,
    pub ell: usize,
    pub period: usize,
    pub orders: Vec<usize>,
}

impl BlockLayout {
    fn offsets(&self) -> Vec<usize> {
        self.orders
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect()
    }

    fn columns(&self) -> usize {
        self.orders.iter().sum()
    }
}

/// The `sℓ × ΣN_l` matrix `R_{a,b}`.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    matrix: CMatrix,
    layout: BlockLayout,
}

impl SampleMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn apply(&self, alpha: &CVector) -> CVector {
        &self.matrix * alpha
    }
}

/// Block `(j, l)`, row `n`, column `k` holds `r_{a_l,b_j}(k - rn)`, reduced
/// modulo `N_l`.
pub fn build_sample_matrix(subspace: &CyclicSubspace, scheme: &SamplingScheme) -> Result<SampleMatrix> {
    let n = subspace.lcm_order();
    if !n.is_multiple_of(scheme.period) {
        return Err(Error::InvalidParameter(format!(
            "sampling period {} does not divide N = {n}",
            scheme.period
        )));
    }
    let layout = BlockLayout {
        samplers: scheme.samplers.len(),
        ell: scheme.ell,
        period: scheme.period,
        orders: subspace.orders.clone(),
    };
    let offsets = layout.offsets();
    let mut matrix = CMatrix::zeros(scheme.sample_count(), subspace.dimension());
    for (j, b) in scheme.samplers.iter().enumerate() {
        for (l, (a, &order)) in subspace.generators.iter().zip(&subspace.orders).enumerate() {
            let cc = periodic_cross_correlation(&subspace.operator, a, b, order)?;
            for row in 0..scheme.ell {
                let shift = (scheme.period * row) as i64;
                for k in 0..order {
                    matrix[(j * scheme.ell + row, offsets[l] + k)] =
                        cc.get(k as i64 - shift).expect("periodic lookup");
                }
            }
        }
    }
    Ok(SampleMatrix { matrix, layout })
}

/// `L_j x(rn) = ⟨x, (T*)^{-rn} b_j⟩`, computed directly from the operator.
///
/// `x` need not lie in the subspace.
pub fn take_samples(subspace: &CyclicSubspace, scheme: &SamplingScheme, x: &CVector) -> Result<CVector> {
    if x.len() != subspace.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: subspace.ambient_dim(),
            found: x.len(),
        });
    }
    let step = subspace
        .operator
        .adjoint()
        .power_matrix(-(scheme.period as i64))?;
    let mut out = CVector::zeros(scheme.sample_count());
    for (j, b) in scheme.samplers.iter().enumerate() {
        let mut analyzer = b.clone();
        for n in 0..scheme.ell {
            out[j * scheme.ell + n] = inner(x, &analyzer);
            analyzer = &step * analyzer;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RankReport {
    pub full_rank: bool,
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl RankReport {
    /// Optimal lower frame bound `σ_min²` of the analysis family.
    pub fn lower_frame_bound(&self) -> f64 {
        if self.full_rank {
            self.singular_values.last().map_or(0.0, |s| s * s)
        } else {
            0.0
        }
    }

    pub fn upper_frame_bound(&self) -> f64 {
        self.singular_values.first().map_or(0.0, |s| s * s)
    }
}

pub fn check_rank(r: &SampleMatrix) -> RankReport {
    let cols = r.matrix.ncols();
    let mut sv = singular_values(&r.matrix);
    sv.resize(cols, 0.0);
    let rank = numerical_rank(&sv, RANK_TOL);
    RankReport {
        full_rank: rank == cols,
        rank,
        singular_values: sv,
    }
}

/// `H = R† + U (I - R R†)`; `u = None` gives the pseudo-inverse.
pub fn left_inverse(r: &SampleMatrix, u: Option<&CMatrix>) -> Result<CMatrix> {
    let pinv = pseudo_inverse(&r.matrix)?;
    match u {
        None => Ok(pinv),
        Some(u) => {
            let rows = r.matrix.nrows();
            if u.nrows() != pinv.nrows() || u.ncols() != rows {
                return Err(Error::DimensionMismatch {
                    expected: pinv.nrows() * rows,
                    found: u.nrows() * u.ncols(),
                });
            }
            let projector = CMatrix::identity(rows, rows) - &r.matrix * &pinv;
            Ok(pinv + u * projector)
        }
    }
}

/// A left inverse of `R` whose column `(j, n)` is column `(j, 0)` shifted
/// down by `rn` inside every generator block, with `N_l`-periodic wraparound.
#[derive(Debug, Clone)]
pub struct StructuredLeftInverse {
    matrix: CMatrix,
    layout: BlockLayout,
}

impl StructuredLeftInverse {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    /// Column `(j, n)`.
    pub fn column(&self, j: usize, n: usize) -> CVector {
        self.matrix.column(j * self.layout.ell + n).into_owned()
    }

    /// `α = H̃ · samples`.
    pub fn apply(&self, samples: &CVector) -> Result<CVector> {
        if samples.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: samples.len(),
            });
        }
        Ok(&self.matrix * samples)
    }
}

/// Modular inverse of `a` modulo `m` (`gcd(a, m) = 1`).
fn mod_inverse(a: usize, m: usize) -> usize {
    if m == 1 {
        return 0;
    }
    (1..m).find(|&x| (a * x) % m == 1).expect("coprime inputs")
}

/// Rebuild a left inverse so that its columns carry the T-shift structure.
///
/// For each generator block and sampler the seed rows are the first
/// `g = gcd(r, N_l)` rows of `h`'s block. Row `q ≡ p + r i (mod N_l)` of the
/// first column is entry `-i mod ℓ` of seed row `p`, and column `n` is the
/// first column shifted down by `rn`. With a single generator (`g = r`) this
/// concatenates the columns `1, ℓ, ℓ-1, …, 2` of the `r × ℓ` seed block and
/// every entry is copied from `h`. When `r·(N_l/g) < N`, a seed row is first
/// averaged over the sample shifts that fix its generator block, which is
/// what makes the shifted columns agree modulo `N_l`.
pub fn structurize_left_inverse(r: &SampleMatrix, h: Option<&CMatrix>) -> Result<StructuredLeftInverse> {
    let layout = r.layout.clone();
    let cols = layout.columns();
    let rows = r.matrix.nrows();
    let report = check_rank(r);
    if !report.full_rank {
        return Err(Error::RankDeficient {
            rank: report.rank,
            expected: cols,
        });
    }
    let seed = match h {
        Some(h) => {
            if h.nrows() != cols || h.ncols() != rows {
                return Err(Error::DimensionMismatch {
                    expected: cols * rows,
                    found: h.nrows() * h.ncols(),
                });
            }
            let residual = identity_residual(&(h * &r.matrix));
            if residual > LEFT_INVERSE_TOL {
                return Err(Error::NotLeftInverse { residual });
            }
            h.clone()
        }
        None => left_inverse(r, None)?,
    };

    let ell = layout.ell;
    let period = layout.period;
    let mut out = CMatrix::zeros(cols, rows);
    for (&offset, &order) in layout.offsets().iter().zip(&layout.orders) {
        let g = gcd(period, order);
        let cycle = order / g;
        let reduced_inv = mod_inverse((period / g) % cycle, cycle);
        let repeats = ell / cycle;
        for j in 0..layout.samplers {
            let seeds: Vec<Vec<C64>> = (0..g)
                .map(|p| {
                    (0..ell)
                        .map(|n| {
                            if repeats == 1 {
                                seed[(offset + p, j * ell + n)]
                            } else {
                                let sum: C64 = (0..repeats)
                                    .map(|t| seed[(offset + p, j * ell + (n + t * cycle) % ell)])
                                    .sum();
                                sum / repeats as f64
                            }
                        })
                        .collect()
                })
                .collect();
            let first: Vec<C64> = (0..order)
                .map(|q| {
                    let p = q % g;
                    let i = ((q - p) / g * reduced_inv) % cycle;
                    seeds[p][(ell - i % ell) % ell]
                })
                .collect();
            for n in 0..ell {
                let shift = (period * n) % order;
                for q in 0..order {
                    out[(offset + q, j * ell + n)] = first[(q + order - shift) % order];
                }
            }
        }
    }
    Ok(StructuredLeftInverse { matrix: out, layout })
}

/// The vectors `c_j = Σ_l Σ_k h̃_{j,0}[l, k] T^k a_l`.
#[derive(Debug, Clone)]
pub struct ReconstructionBasis {
    vectors: Vec<CVector>,
}

impl ReconstructionBasis {
    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }
}

pub fn reconstruction_vectors(subspace: &CyclicSubspace, hs: &StructuredLeftInverse) -> Result<ReconstructionBasis> {
    if hs.matrix.nrows() != subspace.dimension() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dimension(),
            found: hs.matrix.nrows(),
        });
    }
    let vectors = (0..hs.layout.samplers)
        .map(|j| subspace.synthesize(&hs.column(j, 0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReconstructionBasis { vectors })
}

/// `x = Σ_j Σ_n samples(j, n) T^{rn} c_j`.
pub fn reconstruct(
    subspace: &CyclicSubspace,
    scheme: &SamplingScheme,
    basis: &ReconstructionBasis,
    samples: &CVector,
) -> Result<CVector> {
    if samples.len() != scheme.sample_count() {
        return Err(Error::DimensionMismatch {
            expected: scheme.sample_count(),
            found: samples.len(),
        });
    }
    if basis.vectors.len() != scheme.samplers.len() {
        return Err(Error::DimensionMismatch {
            expected: scheme.samplers.len(),
            found: basis.vectors.len(),
        });
    }
    let step = subspace.operator.power_matrix(scheme.period as i64)?;
    let mut x = CVector::zeros(subspace.ambient_dim());
    for (j, c) in basis.vectors.iter().enumerate() {
        let mut shifted = c.clone();
        for n in 0..scheme.ell {
            x += &shifted * samples[j * scheme.ell + n];
            shifted = &step * shifted;
        }
    }
    Ok(x)
}

/// `α^l(m) = Σ_j Σ_n samples(j, n) β_j^l((m - rn) mod N_l)` where `β_j^l`
/// is block `l` of column `(j, 0)`: periodic synthesis filtering with the
/// first columns as impulse responses.
pub fn filter_bank_coefficients(hs: &StructuredLeftInverse, samples: &CVector) -> Result<Vec<CVector>> {
    let layout = &hs.layout;
    if samples.len() != hs.matrix.ncols() {
        return Err(Error::DimensionMismatch {
            expected: hs.matrix.ncols(),
            found: samples.len(),
        });
    }
    let ell = layout.ell;
    let mut out = Vec::with_capacity(layout.orders.len());
    for (&offset, &order) in layout.offsets().iter().zip(&layout.orders) {
        let mut alpha = CVector::zeros(order);
        for j in 0..layout.samplers {
            for n in 0..ell {
                let y = samples[j * ell + n];
                let shift = (layout.period * n) % order;
                for m in 0..order {
                    alpha[m] += y * hs.matrix[(offset + (m + order - shift) % order, j * ell)];
                }
            }
        }
        out.push(alpha);
    }
    Ok(out)
}

/// Whether every `ℓ`-row block of `c` is `r`-circulant: row `n` equals row
/// `n - 1` shifted right by `r`, with wraparound modulo `N_l` inside each
/// column block of width `N_l`. Entries are compared to within
/// `tol * max(1, max|c|)`.
pub fn is_r_circulant(c: &CMatrix, ell: usize, period: usize, col_blocks: &[usize], tol: f64) -> Result<bool> {
    if ell == 0 || !c.nrows().is_multiple_of(ell) {
        return Err(Error::InvalidParameter(format!(
            "row count {} is not a multiple of {ell}",
            c.nrows()
        )));
    }
    if col_blocks.iter().sum::<usize>() != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: c.ncols(),
            found: col_blocks.iter().sum(),
        });
    }
    let bound = tol * max_abs(c).max(1.0);
    let mut offset = 0;
    for &width in col_blocks {
        for block in 0..c.nrows() / ell {
            for n in 0..ell {
                let prev = block * ell + (n + ell - 1) % ell;
                let row = block * ell + n;
                for k in 0..width {
                    let src = offset + (k + width - period % width) % width;
                    if (c[(row, offset + k)] - c[(prev, src)]).norm() > bound {
                        return Ok(false);
                    }
                }
            }
        }
        offset += width;
    }
    Ok(true)
}

/// Orthogonal projection onto `A_a` through the normal equations.
pub fn project_onto_subspace(subspace: &CyclicSubspace, v: &CVector) -> Result<CVector> {
    let coeffs = subspace.coefficients(v)?;
    subspace.synthesize(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{cyclic_instance, random_matrix, random_vector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn delta(dim: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        v
    }

    fn shift_problem(samplers: &[usize], r: usize) -> (CyclicSubspace, SamplingScheme) {
        let sub = CyclicSubspace::new(LinearOperator::cyclic_shift(4), vec![delta(4, 0)], vec![4]).unwrap();
        let scheme = SamplingScheme::new(&sub, samplers.iter().map(|&k| delta(4, k)).collect(), r).unwrap();
        (sub, scheme)
    }

    fn real(m: &CMatrix) -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
            .collect()
    }

    /// Direct `⟨T^k a_l, (T*)^{-rn} b_j⟩`.
    fn brute_force_r(sub: &CyclicSubspace, scheme: &SamplingScheme) -> CMatrix {
        let op = sub.operator();
        let adj = op.adjoint();
        let total = sub.dimension();
        let mut m = CMatrix::zeros(scheme.sample_count(), total);
        for (j, b) in scheme.samplers().iter().enumerate() {
            for n in 0..scheme.ell() {
                let analyzer = adj.apply_power(-((scheme.period() * n) as i64), b).unwrap();
                let mut col = 0;
                for (a, &order) in sub.generators().iter().zip(sub.orders()) {
                    for k in 0..order {
                        let v = op.apply_power(k as i64, a).unwrap();
                        m[(j * scheme.ell() + n, col)] = inner(&v, &analyzer);
                        col += 1;
                    }
                }
            }
        }
        m
    }

    fn random_problem(seed: u64, orders: &[usize], extra: usize, r: usize, s: usize) -> (CyclicSubspace, SamplingScheme) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = orders.iter().sum::<usize>() + extra;
        let (op, gens) = cyclic_instance(&mut rng, dim, orders);
        let sub = CyclicSubspace::new(op, gens, orders.to_vec()).unwrap();
        let samplers = (0..s).map(|_| random_vector(&mut rng, dim)).collect();
        let scheme = SamplingScheme::new(&sub, samplers, r).unwrap();
        (sub, scheme)
    }

    fn assert_shift_structure(hs: &StructuredLeftInverse) {
        let layout = hs.layout();
        let mut offset = 0;
        for &order in &layout.orders {
            for j in 0..layout.samplers {
                let first = hs.column(j, 0);
                for n in 0..layout.ell {
                    let col = hs.column(j, n);
                    let shift = (layout.period * n) % order;
                    for q in 0..order {
                        assert_eq!(col[offset + q], first[offset + (q + order - shift) % order]);
                    }
                }
            }
            offset += order;
        }
    }

    #[test]
    fn undersampled_shift_is_rank_deficient() {
        let (sub, scheme) = shift_problem(&[0], 2);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert_eq!(real(r.matrix()), vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]);
        assert_eq!(r.matrix(), &brute_force_r(&sub, &scheme));
        let report = check_rank(&r);
        assert!(!report.full_rank);
        assert_eq!(report.rank, 2);
        assert!(structurize_left_inverse(&r, None).is_err());
    }

    #[test]
    fn two_samplers_give_permutation() {
        let (sub, scheme) = shift_problem(&[0, 1], 2);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert_eq!(r.matrix(), &brute_force_r(&sub, &scheme));
        let report = check_rank(&r);
        assert!(report.full_rank);
        assert!(report.singular_values.iter().all(|s| (s - 1.0).abs() < 1e-12));
        // Every row and column holds exactly one 1.
        let m = real(r.matrix());
        for i in 0..4 {
            assert_eq!(m[i].iter().sum::<f64>(), 1.0);
            assert_eq!((0..4).map(|k| m[k][i]).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn orthonormal_orbit_gives_identity() {
        let (sub, scheme) = shift_problem(&[0], 1);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert_eq!(r.matrix(), &CMatrix::identity(4, 4));
        let hs = structurize_left_inverse(&r, None).unwrap();
        assert!((hs.matrix() - CMatrix::identity(4, 4)).norm() < 1e-14);
        let basis = reconstruction_vectors(&sub, &hs).unwrap();
        assert!((&basis.vectors()[0] - delta(4, 0)).norm() < 1e-14);
        let samples = take_samples(&sub, &scheme, &delta(4, 0)).unwrap();
        assert_eq!(samples, delta(4, 0));
        let coeffs = filter_bank_coefficients(&hs, &samples).unwrap();
        assert!((&coeffs[0] - &samples).norm() < 1e-14);
    }

    #[test]
    fn shifted_generator_samples() {
        let (sub, scheme) = shift_problem(&[0, 1], 2);
        // x = T^r a.
        let x = delta(4, 2);
        let samples = take_samples(&sub, &scheme, &x).unwrap();
        let mut alpha = CVector::zeros(4);
        alpha[2] = C64::new(1.0, 0.0);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert!((samples - r.apply(&alpha)).norm() < 1e-14);
    }

    #[test]
    fn invalid_scheme_errors() {
        let sub = CyclicSubspace::new(LinearOperator::cyclic_shift(4), vec![delta(4, 0)], vec![4]).unwrap();
        assert!(SamplingScheme::new(&sub, vec![delta(4, 0)], 3).is_err());
        assert!(SamplingScheme::new(&sub, vec![delta(3, 0)], 2).is_err());
        assert!(CyclicSubspace::new(LinearOperator::cyclic_shift(4), vec![delta(4, 0)], vec![3]).is_err());
        // Orbits of δ0 and δ2 under the 4-shift overlap.
        assert!(matches!(
            CyclicSubspace::new(LinearOperator::cyclic_shift(4), vec![delta(4, 0), delta(4, 2)], vec![4, 4]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn samples_equal_r_times_alpha() {
        let (sub, scheme) = random_problem(5, &[6], 2, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let alpha = random_vector(&mut rng, 6);
        let x = sub.synthesize(&alpha).unwrap();
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert!((r.matrix() - brute_force_r(&sub, &scheme)).norm() < 1e-12);
        let direct = take_samples(&sub, &scheme, &x).unwrap();
        assert!((direct - r.apply(&alpha)).norm() < 1e-10);
    }

    #[test]
    fn square_r_inverse_is_already_structured() {
        // N = 6, r = 2, s = 2: R is 6 x 6.
        let (sub, scheme) = random_problem(8, &[6], 1, 2, 2);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        let inv = r.matrix().clone().try_inverse().unwrap();
        let hs = structurize_left_inverse(&r, Some(&inv)).unwrap();
        assert!(max_abs(&(hs.matrix() - &inv)) < 1e-10);
        let basis = reconstruction_vectors(&sub, &hs).unwrap();
        // Interpolation: L_{j'} c_j(rn) = δ_{jj'} δ_{n0}.
        for (j, c) in basis.vectors().iter().enumerate() {
            let samples = take_samples(&sub, &scheme, c).unwrap();
            for jp in 0..2 {
                for n in 0..scheme.ell() {
                    let expected = if jp == j && n == 0 { 1.0 } else { 0.0 };
                    assert!((samples[jp * scheme.ell() + n] - C64::new(expected, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn single_generator_structure_from_arbitrary_left_inverse() {
        // N = 12, r = 3, s = 5, ℓ = 4.
        let (sub, scheme) = random_problem(21, &[12], 3, 3, 5);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_matrix(&mut rng, 12, 20);
        let h = left_inverse(&r, Some(&u)).unwrap();
        assert!(identity_residual(&(&h * r.matrix())) < 1e-10);
        let hs = structurize_left_inverse(&r, Some(&h)).unwrap();
        assert!(identity_residual(&(hs.matrix() * r.matrix())) < 1e-10);
        assert_shift_structure(&hs);
        // Every entry is copied from the first r rows of h.
        for q in 0..12 {
            for col in 0..20 {
                let v = hs.matrix()[(q, col)];
                assert!((0..3).any(|p| (0..20).any(|c| h[(p, c)] == v)));
            }
        }
    }

    #[test]
    fn multi_generator_wraparound() {
        // L = 2, N1 = 4, N2 = 2, r = 2, N = 4, ℓ = 2, s = 4. Both frequencies of
        // the second block alias onto the same sample frequency, so s = 3 is
        // never enough.
        let (sub, scheme) = random_problem(31, &[4, 2], 1, 2, 4);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert!(is_r_circulant(r.matrix(), 2, 2, &[4, 2], 1e-12).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_matrix(&mut rng, 6, 8);
        let h = left_inverse(&r, Some(&u)).unwrap();
        let hs = structurize_left_inverse(&r, Some(&h)).unwrap();
        assert!(identity_residual(&(hs.matrix() * r.matrix())) < 1e-10);
        assert_shift_structure(&hs);
        let samples = random_vector(&mut rng, 8);
        let coeffs = filter_bank_coefficients(&hs, &samples).unwrap();
        let direct = hs.apply(&samples).unwrap();
        let stacked = CVector::from_iterator(6, coeffs.iter().flat_map(|c| c.iter().copied()));
        assert!((stacked - direct).norm() < 1e-12);
    }

    #[test]
    fn non_dividing_orders() {
        // N1 = 4, N2 = 3, N = 12, r = 3 does not divide N1.
        let (sub, scheme) = random_problem(41, &[4, 3], 2, 3, 4);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        assert!(check_rank(&r).full_rank);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_matrix(&mut rng, 7, 16);
        let h = left_inverse(&r, Some(&u)).unwrap();
        let hs = structurize_left_inverse(&r, Some(&h)).unwrap();
        assert!(identity_residual(&(hs.matrix() * r.matrix())) < 1e-10);
        assert_shift_structure(&hs);
        let alpha = random_vector(&mut rng, 7);
        let x = sub.synthesize(&alpha).unwrap();
        let basis = reconstruction_vectors(&sub, &hs).unwrap();
        let samples = take_samples(&sub, &scheme, &x).unwrap();
        let back = reconstruct(&sub, &scheme, &basis, &samples).unwrap();
        assert!((back - &x).norm() < 1e-9 * x.norm());
    }

    #[test]
    fn rejects_bad_left_inverse() {
        let (sub, scheme) = random_problem(2, &[4], 0, 2, 3);
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        let bogus = CMatrix::zeros(4, 6);
        assert!(matches!(
            structurize_left_inverse(&r, Some(&bogus)),
            Err(Error::NotLeftInverse { .. })
        ));
        let wrong_shape = CMatrix::zeros(3, 6);
        assert!(structurize_left_inverse(&r, Some(&wrong_shape)).is_err());
        let basis = reconstruction_vectors(&sub, &structurize_left_inverse(&r, None).unwrap()).unwrap();
        assert!(reconstruct(&sub, &scheme, &basis, &CVector::zeros(5)).is_err());
    }

    #[test]
    fn random_dense_matrix_is_not_circulant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 4, 8);
        assert!(!is_r_circulant(&m, 2, 4, &[8], 1e-12).unwrap());
        assert!(is_r_circulant(&CMatrix::identity(5, 5), 5, 1, &[5], 1e-12).unwrap());
        assert!(is_r_circulant(&m, 3, 4, &[8], 1e-12).is_err());
    }

    #[test]
    fn projection_properties() {
        let (sub, scheme) = random_problem(17, &[4], 3, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alpha = random_vector(&mut rng, 4);
        let x = sub.synthesize(&alpha).unwrap();
        assert!((project_onto_subspace(&sub, &x).unwrap() - &x).norm() < 1e-10 * x.norm());

        // Component orthogonal to A_a projects to zero.
        let v = random_vector(&mut rng, 7);
        let perp = &v - project_onto_subspace(&sub, &v).unwrap();
        assert!(project_onto_subspace(&sub, &perp).unwrap().norm() < 1e-10 * v.norm());

        // Projected analyzers P((T*)^{-rn} b_j) against the T^{rn} c_j
        // expansion reproduce x.
        let r = build_sample_matrix(&sub, &scheme).unwrap();
        let hs = structurize_left_inverse(&r, None).unwrap();
        let basis = reconstruction_vectors(&sub, &hs).unwrap();
        let adj = sub.operator().adjoint();
        let mut rebuilt = CVector::zeros(7);
        for (j, b) in scheme.samplers().iter().enumerate() {
            for n in 0..scheme.ell() {
                let k = (scheme.period() * n) as i64;
                let analyzer = project_onto_subspace(&sub, &adj.apply_power(-k, b).unwrap()).unwrap();
                let frame_vec = sub.operator().apply_power(k, &basis.vectors()[j]).unwrap();
                rebuilt += frame_vec * inner(&x, &analyzer);
            }
        }
        assert!((rebuilt - &x).norm() < 1e-9 * x.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn structured_inverse_invariants(seed in any::<u64>(), case in 0usize..4) {
            let (orders, r, s): (&[usize], usize, usize) = match case {
                0 => (&[6], 2, 3),
                1 => (&[6, 3], 3, 6),
                2 => (&[4, 2, 2], 2, 6),
                _ => (&[3, 2], 6, 5),
            };
            let (sub, scheme) = random_problem(seed, orders, 1, r, s);
            let rmat = build_sample_matrix(&sub, &scheme).unwrap();
            prop_assume!(check_rank(&rmat).full_rank);
            let hs = structurize_left_inverse(&rmat, None).unwrap();
            prop_assert!(identity_residual(&(hs.matrix() * rmat.matrix())) <= 1e-10);
            assert_shift_structure(&hs);

            let pinv = left_inverse(&rmat, None).unwrap();
            let rr = rmat.matrix() * &pinv * rmat.matrix();
            prop_assert!(max_abs(&(rr - rmat.matrix())) <= 1e-10);
            let pp = &pinv * rmat.matrix() * &pinv;
            prop_assert!(max_abs(&(pp - &pinv)) <= 1e-10);
            prop_assert!(is_r_circulant(rmat.matrix(), scheme.ell(), r, orders, 1e-12).unwrap());
            prop_assert!(is_r_circulant(&pinv.transpose(), scheme.ell(), r, orders, 1e-10).unwrap());

            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
            let alpha = random_vector(&mut rng, sub.dimension());
            let x = sub.synthesize(&alpha).unwrap();
            let basis = reconstruction_vectors(&sub, &hs).unwrap();
            let samples = take_samples(&sub, &scheme, &x).unwrap();
            let back = reconstruct(&sub, &scheme, &basis, &samples).unwrap();
            prop_assert!((back - &x).norm() <= 1e-8 * x.norm());

            let report = check_rank(&rmat);
            let ratio = rmat.apply(&alpha).norm_squared() / alpha.norm_squared();
            prop_assert!(ratio >= report.lower_frame_bound() * (1.0 - 1e-12));
            prop_assert!(ratio <= report.upper_frame_bound() * (1.0 + 1e-12));
        }
    }
}
