//! Sampling on finite abelian groups `G = ℤ_{d_1} × … × ℤ_{d_k}`.
//!
//! A representation `Π` of a subgroup `H < G` generates
//! `A_a = span{Π(h) a : h ∈ H}`; samples are taken on `M < H` as
//! `L_j x(m) = ⟨x, Π*(-m) b_j⟩`. Characters of `H` are written as labels
//! `j ∈ ℤ_{d_1} × …` acting by `(h, γ) = exp(2πi Σ j_i h_i / d_i)`; labels that
//! agree on `H` are identified and the lexicographically first one is kept.
//!
//! With `F = Σ α_h χ_h` the samples read `L_j x(m) = ⟨F, conj(G_j) χ_m⟩` for
//! `G_j(γ) = Σ_k L_j a(k) (k, γ)`. Inner products on `Ĥ` are averages.

use std::collections::{HashMap, VecDeque};

use num::integer::lcm;

use crate::error::{Error, Result};
use crate::hilbert::{inner, CMatrix, CVector, LinearOperator, C64};
use crate::linalg::{max_abs, numerical_rank, pseudo_inverse, singular_values, RANK_TOL};

/// Tolerance for `Π(h + h') = Π(h) Π(h')`.
pub const HOMOMORPHISM_TOL: f64 = 1e-8;
/// Smallest `α_G` accepted when building duals.
pub const FRAME_THRESHOLD: f64 = 1e-8;

pub type Element = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    moduli: Vec<usize>,
    exponent: usize,
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidParameter(format!("invalid moduli {moduli:?}")));
        }
        let exponent = moduli.iter().fold(1, |acc, &d| lcm(acc, d));
        Ok(Self { moduli, exponent })
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().product()
    }

    pub fn zero(&self) -> Element {
        vec![0; self.moduli.len()]
    }

    pub fn add(&self, a: &[usize], b: &[usize]) -> Element {
        a.iter().zip(b).zip(&self.moduli).map(|((x, y), d)| (x + y) % d).collect()
    }

    pub fn neg(&self, a: &[usize]) -> Element {
        a.iter().zip(&self.moduli).map(|(x, d)| (d - x % d) % d).collect()
    }

    pub fn check(&self, e: &[usize]) -> Result<()> {
        if e.len() != self.moduli.len() || e.iter().zip(&self.moduli).any(|(x, d)| x >= d) {
            return Err(Error::InvalidParameter(format!(
                "{e:?} is not an element of ℤ{:?}",
                self.moduli
            )));
        }
        Ok(())
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.order());
        let mut current = self.zero();
        loop {
            out.push(current.clone());
            let mut i = self.moduli.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                current[i] += 1;
                if current[i] < self.moduli[i] {
                    break;
                }
                current[i] = 0;
            }
        }
    }

    /// Row-major position of `e`, used to index `ℂ^{|G|}`.
    pub fn index_of(&self, e: &[usize]) -> usize {
        e.iter().zip(&self.moduli).fold(0, |acc, (x, d)| acc * d + x)
    }

    /// `(h, γ)` as an exact phase `p` with value `exp(2πi p / exponent)`.
    pub fn pairing_phase(&self, h: &[usize], label: &[usize]) -> usize {
        h.iter()
            .zip(label)
            .zip(&self.moduli)
            .map(|((x, j), d)| (x * j % d) * (self.exponent / d))
            .sum::<usize>()
            % self.exponent
    }

    pub fn pairing(&self, h: &[usize], label: &[usize]) -> C64 {
        let phase = self.pairing_phase(h, label) as f64 / self.exponent as f64;
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
    }

    /// `Π(g) δ_k = δ_{k+g}` on `ℂ^{|G|}`.
    pub fn translation(&self, g: &[usize]) -> Result<LinearOperator> {
        self.check(g)?;
        let n = self.order();
        let mut m = CMatrix::zeros(n, n);
        for k in self.elements() {
            m[(self.index_of(&self.add(&k, g)), self.index_of(&k))] = C64::new(1.0, 0.0);
        }
        LinearOperator::new(m)
    }
}

/// The subgroup generated by a list of elements, enumerated breadth first
/// from the identity.
#[derive(Debug, Clone)]
pub struct Subgroup {
    generators: Vec<Element>,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
}

impl Subgroup {
    pub fn generate(group: &FiniteAbelianGroup, generators: Vec<Element>) -> Result<Self> {
        for g in &generators {
            group.check(g)?;
        }
        let zero = group.zero();
        let mut elements = vec![zero.clone()];
        let mut index = HashMap::from([(zero.clone(), 0)]);
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = group.add(&x, g);
                if !index.contains_key(&y) {
                    index.insert(y.clone(), elements.len());
                    elements.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(Self {
            generators,
            elements,
            index,
        })
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, e: &[usize]) -> bool {
        self.index.contains_key(e)
    }

    pub fn position(&self, e: &[usize]) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.generators.iter().all(|g| other.contains(g))
    }
}

/// `Ĥ`: character labels of `G` modulo those trivial on `H`.
#[derive(Debug, Clone)]
pub struct DualGroup {
    labels: Vec<Element>,
    lookup: HashMap<Vec<usize>, usize>,
    h_generators: Vec<Element>,
}

impl DualGroup {
    pub fn of(group: &FiniteAbelianGroup, h: &Subgroup) -> Self {
        let h_generators = h.generators().to_vec();
        let mut labels = Vec::new();
        let mut lookup = HashMap::new();
        for label in group.elements() {
            let signature: Vec<usize> = h_generators.iter().map(|g| group.pairing_phase(g, &label)).collect();
            lookup.entry(signature).or_insert_with(|| {
                labels.push(label.clone());
                labels.len() - 1
            });
        }
        Self {
            labels,
            lookup,
            h_generators,
        }
    }

    /// Canonical labels in lexicographic order; index 0 is the trivial character.
    pub fn labels(&self) -> &[Element] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of the character represented by any label.
    pub fn index_of(&self, group: &FiniteAbelianGroup, label: &[usize]) -> usize {
        let signature: Vec<usize> = self.h_generators.iter().map(|g| group.pairing_phase(g, label)).collect();
        self.lookup[&signature]
    }

    pub fn add(&self, group: &FiniteAbelianGroup, a: usize, b: usize) -> usize {
        self.index_of(group, &group.add(&self.labels[a], &self.labels[b]))
    }
}

/// `M⊥ = {γ ∈ Ĥ : (m, γ) = 1 for m ∈ M}` as indices into `dual`, ascending.
pub fn annihilator(group: &FiniteAbelianGroup, h: &Subgroup, m: &Subgroup, dual: &DualGroup) -> Result<Vec<usize>> {
    if !m.is_subgroup_of(h) {
        return Err(Error::InvalidParameter("M is not a subgroup of H".into()));
    }
    Ok((0..dual.len())
        .filter(|&i| m.generators().iter().all(|g| group.pairing_phase(g, &dual.labels[i]) == 0))
        .collect())
}

/// `Ω`: the lexicographically smallest label of every `M⊥` coset.
pub fn section(group: &FiniteAbelianGroup, dual: &DualGroup, m_perp: &[usize]) -> Vec<usize> {
    let mut covered = vec![false; dual.len()];
    let mut omega = Vec::new();
    for gamma in 0..dual.len() {
        if covered[gamma] {
            continue;
        }
        omega.push(gamma);
        for &mu in m_perp {
            covered[dual.add(group, gamma, mu)] = true;
        }
    }
    omega
}

/// `Π` on every element of `H`, extended from generator operators.
#[derive(Debug, Clone)]
pub struct GroupRepresentation {
    group: FiniteAbelianGroup,
    h: Subgroup,
    operators: Vec<CMatrix>,
}

impl GroupRepresentation {
    /// One operator per generator of `h`; the homomorphism property is
    /// checked on all pairs.
    pub fn new(group: FiniteAbelianGroup, h: Subgroup, generator_ops: Vec<LinearOperator>) -> Result<Self> {
        if generator_ops.len() != h.generators().len() {
            return Err(Error::DimensionMismatch {
                expected: h.generators().len(),
                found: generator_ops.len(),
            });
        }
        let Some(dim) = generator_ops.first().map(LinearOperator::dim) else {
            return Err(Error::InvalidParameter("H needs at least one generator".into()));
        };
        if let Some(op) = generator_ops.iter().find(|op| op.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.dim(),
            });
        }
        let mut operators: Vec<Option<CMatrix>> = vec![None; h.order()];
        operators[0] = Some(CMatrix::identity(dim, dim));
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (g, op) in h.generators().iter().zip(&generator_ops) {
                let j = h.position(&group.add(&h.elements()[i], g)).expect("closed subgroup");
                if operators[j].is_none() {
                    operators[j] = Some(operators[i].as_ref().expect("visited") * op.matrix());
                    queue.push_back(j);
                }
            }
        }
        let operators: Vec<CMatrix> = operators.into_iter().map(|m| m.expect("connected")).collect();
        let scale = operators.iter().map(max_abs).fold(1.0, f64::max);
        let mut residual: f64 = 0.0;
        for (i, x) in h.elements().iter().enumerate() {
            for (j, y) in h.elements().iter().enumerate() {
                let k = h.position(&group.add(x, y)).expect("closed subgroup");
                residual = residual.max(max_abs(&(&operators[k] - &operators[i] * &operators[j])));
            }
        }
        if residual > HOMOMORPHISM_TOL * scale * scale {
            return Err(Error::NotHomomorphic { residual });
        }
        Ok(Self { group, h, operators })
    }

    /// Translations of `G` restricted to `H`, acting on `ℂ^{|G|}`.
    pub fn regular(group: FiniteAbelianGroup, h: Subgroup) -> Result<Self> {
        let ops = h
            .generators()
            .iter()
            .map(|g| group.translation(g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, h, ops)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// `Π(h)` for `h ∈ H`.
    pub fn operator(&self, h: &[usize]) -> Option<&CMatrix> {
        self.h.position(h).map(|i| &self.operators[i])
    }

    /// Operators in the element order of `H`.
    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }
}

/// Everything needed to sample `A_a` on `M` and rebuild it.
#[derive(Debug, Clone)]
pub struct GroupSampling {
    rep: GroupRepresentation,
    m: Subgroup,
    dual: DualGroup,
    m_perp: Vec<usize>,
    omega: Vec<usize>,
    a: CVector,
    samplers: Vec<CVector>,
    orbit: CMatrix,
    /// `[j][γ]`.
    g_values: Vec<Vec<C64>>,
}

/// `H_j(γ)` on all of `Ĥ`.
#[derive(Debug, Clone)]
pub struct GroupDual {
    pub h_values: Vec<Vec<C64>>,
    pub max_residual: f64,
}

impl GroupSampling {
    pub fn new(rep: GroupRepresentation, a: CVector, samplers: Vec<CVector>, m_generators: Vec<Element>) -> Result<Self> {
        let group = rep.group.clone();
        let h = rep.h.clone();
        let dim = rep.dim();
        if samplers.is_empty() {
            return Err(Error::InvalidParameter("at least one sampler is required".into()));
        }
        for v in std::iter::once(&a).chain(&samplers) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let m = Subgroup::generate(&group, m_generators)?;
        let dual = DualGroup::of(&group, &h);
        let m_perp = annihilator(&group, &h, &m, &dual)?;
        let omega = section(&group, &dual, &m_perp);

        let columns: Vec<CVector> = rep.operators.iter().map(|op| op * &a).collect();
        let orbit = CMatrix::from_columns(&columns);
        let rank = numerical_rank(&singular_values(&orbit), RANK_TOL);
        if rank < h.order() {
            return Err(Error::RankDeficient {
                rank,
                expected: h.order(),
            });
        }

        // L_j a(k) = ⟨Π(-k) a, b_j⟩.
        let g_values = samplers
            .iter()
            .map(|b| {
                let la: Vec<C64> = h
                    .elements()
                    .iter()
                    .map(|k| inner(&(rep.operator(&group.neg(k)).expect("closed") * &a), b))
                    .collect();
                dual.labels()
                    .iter()
                    .map(|label| {
                        h.elements()
                            .iter()
                            .zip(&la)
                            .map(|(k, v)| v * group.pairing(k, label))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            rep,
            m,
            dual,
            m_perp,
            omega,
            a,
            samplers,
            orbit,
            g_values,
        })
    }

    pub fn representation(&self) -> &GroupRepresentation {
        &self.rep
    }

    pub fn sample_subgroup(&self) -> &Subgroup {
        &self.m
    }

    pub fn dual_group(&self) -> &DualGroup {
        &self.dual
    }

    /// Indices of `M⊥` in the dual group; the first is the trivial character.
    pub fn annihilator(&self) -> &[usize] {
        &self.m_perp
    }

    pub fn section(&self) -> &[usize] {
        &self.omega
    }

    /// `r = |M⊥| = [H : M]`.
    pub fn r(&self) -> usize {
        self.m_perp.len()
    }

    pub fn samplers(&self) -> &[CVector] {
        &self.samplers
    }

    pub fn generator(&self) -> &CVector {
        &self.a
    }

    /// Columns `Π(h) a` in the element order of `H`.
    pub fn orbit_matrix(&self) -> &CMatrix {
        &self.orbit
    }

    pub fn g_values(&self) -> &[Vec<C64>] {
        &self.g_values
    }

    /// `G(ξ)`, `s × r`, with entries `G_j(ξ + μ_k)`, for `ξ = omega[i]`.
    pub fn g_matrix(&self, i: usize) -> CMatrix {
        let group = &self.rep.group;
        let xi = self.omega[i];
        CMatrix::from_fn(self.samplers.len(), self.r(), |j, k| {
            self.g_values[j][self.dual.add(group, xi, self.m_perp[k])]
        })
    }

    /// `(α_G, β_G)` as exact minima and maxima over `Ω`.
    pub fn frame_constants(&self) -> (f64, f64) {
        let mut alpha = f64::INFINITY;
        let mut beta: f64 = 0.0;
        for i in 0..self.omega.len() {
            let mut sv = singular_values(&self.g_matrix(i));
            sv.resize(self.r(), 0.0);
            alpha = alpha.min(sv.last().map_or(0.0, |s| s * s));
            beta = beta.max(sv[0] * sv[0]);
        }
        (alpha, beta)
    }

    /// `L_j x(m) = ⟨Π(-m) x, b_j⟩`, sampler-major, `m` in the order of `M`.
    pub fn samples(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rep.dim(),
                found: x.len(),
            });
        }
        let group = &self.rep.group;
        let shifted: Vec<CVector> = self
            .m
            .elements()
            .iter()
            .map(|m| self.rep.operator(&group.neg(m)).expect("M < H") * x)
            .collect();
        Ok(CVector::from_iterator(
            self.samplers.len() * self.m.order(),
            self.samplers
                .iter()
                .flat_map(|b| shifted.iter().map(move |v| inner(v, b))),
        ))
    }

    /// `x = Σ_h α_h Π(h) a`.
    pub fn synthesize(&self, alpha: &CVector) -> Result<CVector> {
        if alpha.len() != self.orbit.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.orbit.ncols(),
                found: alpha.len(),
            });
        }
        Ok(&self.orbit * alpha)
    }

    /// First rows of `G† + U (I - G G†)` over `Ω`, spread over `Ĥ`:
    /// `H_j(ξ + μ_k)` is row `k`. `u` receives the index of `ξ` in `Ω`.
    pub fn dual(&self, u: Option<&dyn Fn(usize) -> CMatrix>) -> Result<GroupDual> {
        let (alpha, _) = self.frame_constants();
        if alpha <= FRAME_THRESHOLD {
            return Err(Error::NotAFrame {
                alpha,
                threshold: FRAME_THRESHOLD,
            });
        }
        let group = &self.rep.group;
        let s = self.samplers.len();
        let mut h_values = vec![vec![C64::new(0.0, 0.0); self.dual.len()]; s];
        let mut max_residual: f64 = 0.0;
        for i in 0..self.omega.len() {
            let g = self.g_matrix(i);
            let pinv = pseudo_inverse(&g)?;
            let h = match u {
                None => pinv,
                Some(u) => {
                    let um = u(i);
                    if um.nrows() != self.r() || um.ncols() != s {
                        return Err(Error::DimensionMismatch {
                            expected: self.r() * s,
                            found: um.nrows() * um.ncols(),
                        });
                    }
                    let projector = CMatrix::identity(s, s) - &g * &pinv;
                    pinv + um * projector
                }
            };
            let first = h.rows(0, 1) * &g;
            for k in 0..self.r() {
                let target = if k == 0 { 1.0 } else { 0.0 };
                max_residual = max_residual.max((first[(0, k)] - C64::new(target, 0.0)).norm());
                let gamma = self.dual.add(group, self.omega[i], self.m_perp[k]);
                for j in 0..s {
                    h_values[j][gamma] = h[(k, j)];
                }
            }
        }
        Ok(GroupDual { h_values, max_residual })
    }

    /// `c_j = T_{H,a}(r H_j)`: coefficients `α_h = r · avg_γ H_j(γ) conj((h, γ))`.
    pub fn reconstruction_vectors(&self, dual: &GroupDual) -> Result<Vec<CVector>> {
        let group = &self.rep.group;
        let r = self.r() as f64;
        let count = self.dual.len() as f64;
        dual.h_values
            .iter()
            .map(|hj| {
                let alpha = CVector::from_iterator(
                    self.orbit.ncols(),
                    self.rep.h.elements().iter().map(|h| {
                        let sum: C64 = self
                            .dual
                            .labels()
                            .iter()
                            .zip(hj)
                            .map(|(label, v)| v * group.pairing(h, label).conj())
                            .sum();
                        sum * r / count
                    }),
                );
                self.synthesize(&alpha)
            })
            .collect()
    }

    /// `x = Σ_j Σ_m L_j x(m) Π(m) c_j`.
    pub fn reconstruct(&self, c: &[CVector], samples: &CVector) -> Result<CVector> {
        let per = self.m.order();
        if samples.len() != self.samplers.len() * per {
            return Err(Error::DimensionMismatch {
                expected: self.samplers.len() * per,
                found: samples.len(),
            });
        }
        if c.len() != self.samplers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.samplers.len(),
                found: c.len(),
            });
        }
        let mut x = CVector::zeros(self.rep.dim());
        for (j, cj) in c.iter().enumerate() {
            for (n, m) in self.m.elements().iter().enumerate() {
                x += self.rep.operator(m).expect("M < H") * cj * samples[j * per + n];
            }
        }
        Ok(x)
    }
}
