//! Shift-invariant sampling with infinitely many shifts, in a desk model
//! where every cross-correlation sequence is finitely supported.
//!
//! A spectrum `g(w) = Σ_k c(k) e^{2πikw}` is stored as its coefficient
//! sequence `c(k) = ⟨(T*)^k b, a⟩`. Grid quantities are sampled at
//! `w_q = q / Q`; essential infima and suprema become grid minima and maxima.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};
use crate::laurent::{self, LaurentPoly};
use crate::linalg::{pseudo_inverse, singular_values};

/// Default grid size per unit of `r`.
pub const DEFAULT_GRID_FACTOR: usize = 1024;
/// Minimum grid size per unit of `r`.
pub const MIN_GRID_FACTOR: usize = 64;
/// Smallest `α_G` accepted when building dual fields.
pub const FRAME_THRESHOLD: f64 = 1e-8;
/// Largest relative tail energy accepted when truncating dual coefficients.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Polyphase residual accepted as perfect reconstruction.
pub const PR_TOL: f64 = 1e-9;
/// Relative round-trip error accepted as perfect reconstruction.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

/// `e^{2πi k / n}` with the phase reduced exactly.
fn root_of_unity(k: i64, n: usize) -> C64 {
    let n = n as i64;
    let k = k.rem_euclid(n);
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// A complex sequence supported on `offset..offset + values.len()`.
///
/// Also serves as a Laurent polynomial with complex coefficients: entry `n`
/// is the coefficient of `z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSequence {
    offset: i64,
    values: Vec<C64>,
}

impl FiniteSequence {
    pub fn new(offset: i64, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sequence window must be nonempty".into()));
        }
        Ok(Self { offset, values })
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Result<Self> {
        Self::new(offset, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            values: vec![C64::new(0.0, 0.0)],
        }
    }

    /// `δ_m`.
    pub fn delta(m: i64) -> Self {
        Self {
            offset: m,
            values: vec![C64::new(1.0, 0.0)],
        }
    }

    /// Coefficient of `z^n` becomes entry `n`.
    pub fn from_laurent(p: &LaurentPoly) -> Self {
        if p.is_zero() {
            return Self::zero();
        }
        Self {
            offset: p.min_deg(),
            values: p.coeffs().iter().map(|c| C64::new(laurent::to_f64(c), 0.0)).collect(),
        }
    }

    fn from_map(map: BTreeMap<i64, C64>) -> Self {
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Self::zero();
        };
        let mut values = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (k, v) in map {
            values[(k - lo) as usize] = v;
        }
        Self { offset: lo, values }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: i64) -> C64 {
        if n < self.offset || n >= self.end() {
            C64::new(0.0, 0.0)
        } else {
            self.values[(n - self.offset) as usize]
        }
    }

    pub fn indices(&self) -> std::ops::Range<i64> {
        self.offset..self.end()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Drop zero entries at both ends.
    pub fn trimmed(&self) -> Self {
        let Some(first) = self.values.iter().position(|v| *v != C64::new(0.0, 0.0)) else {
            return Self::zero();
        };
        let last = self.values.iter().rposition(|v| *v != C64::new(0.0, 0.0)).unwrap_or(first);
        Self {
            offset: self.offset + first as i64,
            values: self.values[first..=last].to_vec(),
        }
    }

    /// Full linear convolution.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut values = vec![C64::new(0.0, 0.0); self.len() + other.len() - 1];
        for (i, x) in self.values.iter().enumerate() {
            for (j, y) in other.values.iter().enumerate() {
                values[i + j] += x * y;
            }
        }
        Self {
            offset: self.offset + other.offset,
            values,
        }
    }

    /// `n ↦ conj(c(-n))`.
    pub fn conj_reflect(&self) -> Self {
        let mut values: Vec<C64> = self.values.iter().map(|v| v.conj()).collect();
        values.reverse();
        Self {
            offset: -(self.end() - 1),
            values,
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Self {
            offset: lo,
            values: (lo..hi).map(|n| self.get(n) + other.get(n) * sign).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `Σ_k c(k) e^{2πikw}`.
    pub fn spectrum(&self, w: f64) -> C64 {
        self.indices()
            .map(|k| {
                let phase = (k as f64 * w).rem_euclid(1.0);
                self.get(k) * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
            })
            .sum()
    }

    /// Spectrum at `w = q / big_q`, i.e. the Laurent polynomial at
    /// `z = e^{2πiq/Q}`, with exact phase reduction.
    pub fn spectrum_on_grid(&self, q: usize, big_q: usize) -> C64 {
        self.indices()
            .map(|k| self.get(k) * root_of_unity(k * q as i64, big_q))
            .sum()
    }

    /// Laurent evaluation `Σ_n c(n) z^n`.
    pub fn eval_laurent(&self, z: C64) -> C64 {
        self.indices().map(|n| self.get(n) * z.powi(n as i32)).sum()
    }
}

/// `Σ_k c(k) e^{2πikw}`.
pub fn spectrum_from_sequence(c: &FiniteSequence, w: f64) -> C64 {
    c.spectrum(w)
}

/// `G(w)` sampled at `w_q = q/Q`, `q < Q/r`. Column `k L + l` of the
/// `s × rL` matrix holds `g_j^l(w + k/r)`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    r: usize,
    l: usize,
    grid_size: usize,
    spectra: Vec<Vec<FiniteSequence>>,
    matrices: Vec<CMatrix>,
}

fn g_matrix_on_grid(spectra: &[Vec<FiniteSequence>], r: usize, q: usize, big_q: usize) -> CMatrix {
    let s = spectra.len();
    let l = spectra[0].len();
    let step = big_q / r;
    CMatrix::from_fn(s, r * l, |j, col| {
        let (k, gen) = (col / l, col % l);
        spectra[j][gen].spectrum_on_grid(q + k * step, big_q)
    })
}

/// `spectra[j][l]` is the coefficient sequence of `g_j^l`.
pub fn build_spectral_field(spectra: &[Vec<FiniteSequence>], r: usize, grid_size: usize) -> Result<SpectralField> {
    let Some(first) = spectra.first() else {
        return Err(Error::InvalidParameter("at least one sampler spectrum is required".into()));
    };
    let l = first.len();
    if l == 0 || spectra.iter().any(|row| row.len() != l) {
        return Err(Error::InvalidParameter(
            "every sampler needs one spectrum per generator".into(),
        ));
    }
    if r == 0 || !grid_size.is_multiple_of(r) {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid_size} is not a multiple of r = {r}"
        )));
    }
    if grid_size < MIN_GRID_FACTOR * r {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid_size} is below {} r",
            MIN_GRID_FACTOR
        )));
    }
    let matrices = (0..grid_size / r)
        .map(|q| g_matrix_on_grid(spectra, r, q, grid_size))
        .collect();
    Ok(SpectralField {
        r,
        l,
        grid_size,
        spectra: spectra.to_vec(),
        matrices,
    })
}

impl SpectralField {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn generators(&self) -> usize {
        self.l
    }

    pub fn samplers(&self) -> usize {
        self.spectra.len()
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn spectra(&self) -> &[Vec<FiniteSequence>] {
        &self.spectra
    }

    /// `w_q = q / Q` for `q < Q / r`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.matrices.len()).map(|q| q as f64 / self.grid_size as f64).collect()
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `G(w)` at an arbitrary point.
    pub fn g_matrix(&self, w: f64) -> CMatrix {
        let (s, l, r) = (self.samplers(), self.l, self.r);
        CMatrix::from_fn(s, r * l, |j, col| {
            let (k, gen) = (col / l, col % l);
            self.spectra[j][gen].spectrum(w + k as f64 / r as f64)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameConstants {
    /// Grid minimum of `λ_min[G*G]`.
    pub alpha_g: f64,
    /// Grid maximum of `λ_max[G*G]`.
    pub beta_g: f64,
    /// Grid minimum of `det[G*G]`.
    pub min_det: f64,
    /// Where `alpha_g` is attained.
    pub argmin: f64,
    pub r: usize,
}

impl FrameConstants {
    pub fn is_frame(&self, threshold: f64) -> bool {
        self.alpha_g > threshold && self.beta_g.is_finite()
    }

    /// `(α_G / r, β_G / r)`.
    pub fn frame_bounds(&self) -> (f64, f64) {
        (self.alpha_g / self.r as f64, self.beta_g / self.r as f64)
    }
}

pub fn frame_constants(field: &SpectralField) -> FrameConstants {
    let mut out = FrameConstants {
        alpha_g: f64::INFINITY,
        beta_g: 0.0,
        min_det: f64::INFINITY,
        argmin: 0.0,
        r: field.r,
    };
    let cols = field.r * field.l;
    for (q, g) in field.matrices.iter().enumerate() {
        let mut sv = singular_values(g);
        sv.resize(cols, 0.0);
        let lo = sv.last().map_or(0.0, |s| s * s);
        let hi = sv.first().map_or(0.0, |s| s * s);
        let det: f64 = sv.iter().map(|s| s * s).product();
        if lo < out.alpha_g {
            out.alpha_g = lo;
            out.argmin = q as f64 / field.grid_size as f64;
        }
        out.beta_g = out.beta_g.max(hi);
        out.min_det = out.min_det.min(det);
    }
    out
}

/// `H(w) = G†(w) + U(w)(I - G(w)G†(w))` on the grid; the first `L` rows of
/// `H(w)` are the dual functions `h(w)`, and row block `k` is `h(w + k/r)`.
#[derive(Debug, Clone)]
pub struct DualField {
    r: usize,
    l: usize,
    s: usize,
    grid_size: usize,
    h_values: Vec<CMatrix>,
    max_residual: f64,
    exact: Option<Vec<Vec<FiniteSequence>>>,
}

/// `max |h(w) G(w) - (I_L, 0)|` over the grid.
fn dual_residual(field: &SpectralField, h_values: &[CMatrix]) -> f64 {
    let l = field.l;
    let cols = field.r * l;
    let mut worst: f64 = 0.0;
    for (g, h) in field.matrices.iter().zip(h_values) {
        let product = h.rows(0, l) * g;
        for i in 0..l {
            for c in 0..cols {
                let target = if i == c { 1.0 } else { 0.0 };
                worst = worst.max((product[(i, c)] - C64::new(target, 0.0)).norm());
            }
        }
    }
    worst
}

/// Dual field from the pseudo-inverse family. `u`, when given, returns the
/// `rL × s` matrix `U(w)`.
pub fn dual_field(field: &SpectralField, u: Option<&dyn Fn(f64) -> CMatrix>) -> Result<DualField> {
    let constants = frame_constants(field);
    if !constants.is_frame(FRAME_THRESHOLD) {
        return Err(Error::NotAFrame {
            alpha: constants.alpha_g,
            threshold: FRAME_THRESHOLD,
        });
    }
    let s = field.samplers();
    let mut h_values = Vec::with_capacity(field.matrices.len());
    for (q, g) in field.matrices.iter().enumerate() {
        let pinv = pseudo_inverse(g)?;
        let h = match u {
            None => pinv,
            Some(u) => {
                let w = q as f64 / field.grid_size as f64;
                let um = u(w);
                if um.nrows() != pinv.nrows() || um.ncols() != s {
                    return Err(Error::DimensionMismatch {
                        expected: pinv.nrows() * s,
                        found: um.nrows() * um.ncols(),
                    });
                }
                let projector = CMatrix::identity(s, s) - g * &pinv;
                pinv + um * projector
            }
        };
        h_values.push(h);
    }
    let max_residual = dual_residual(field, &h_values);
    Ok(DualField {
        r: field.r,
        l: field.l,
        s,
        grid_size: field.grid_size,
        h_values,
        max_residual,
        exact: None,
    })
}

impl DualField {
    /// Dual given in closed form: `h_j^l(w) = Σ_k d[j][l](k) e^{2πikw}`.
    pub fn from_sequences(field: &SpectralField, d: &[Vec<FiniteSequence>]) -> Result<Self> {
        let (s, l, r) = (field.samplers(), field.l, field.r);
        if d.len() != s || d.iter().any(|row| row.len() != l) {
            return Err(Error::DimensionMismatch {
                expected: s * l,
                found: d.iter().map(Vec::len).sum(),
            });
        }
        let step = field.grid_size / r;
        let h_values: Vec<CMatrix> = (0..field.matrices.len())
            .map(|q| {
                CMatrix::from_fn(r * l, s, |row, j| {
                    let (k, gen) = (row / l, row % l);
                    d[j][gen].spectrum_on_grid(q + k * step, field.grid_size)
                })
            })
            .collect();
        let max_residual = dual_residual(field, &h_values);
        // Fourier coefficients of r conj(h): n ↦ r conj(d(-n)).
        let exact = d
            .iter()
            .map(|row| {
                row.iter()
                    .map(|seq| {
                        let mut c = seq.conj_reflect();
                        c.values.iter_mut().for_each(|v| *v *= r as f64);
                        c
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            r,
            l,
            s,
            grid_size: field.grid_size,
            h_values,
            max_residual,
            exact: Some(exact),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// `rL × s` matrices `H(w_q)`, `q < Q / r`.
    pub fn h_values(&self) -> &[CMatrix] {
        &self.h_values
    }

    /// `h(w_q)` (`L × s`) for any `q < Q`.
    pub fn h_at(&self, q: usize) -> CMatrix {
        let step = self.grid_size / self.r;
        let (k, base) = (q / step, q % step);
        self.h_values[base].rows(k * self.l, self.l).into_owned()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionCoefficients {
    /// `[j][l]`: coefficients of `c_j` along `T^n a_l`.
    pub sequences: Vec<Vec<FiniteSequence>>,
    /// Discarded energy over total energy; zero for exact duals.
    pub relative_tail: f64,
}

/// Fourier coefficients of `r conj(h_j^l)`, kept on `|n| ≤ half_width`.
///
/// Exact duals return their closed-form coefficients. Otherwise the
/// coefficients come from a DFT over the full `[0, 1)` grid and the call
/// fails if more than [`TAIL_LIMIT`] of the energy falls outside the window.
pub fn reconstruction_coefficients(dual: &DualField, half_width: usize) -> Result<ReconstructionCoefficients> {
    if let Some(exact) = &dual.exact {
        return Ok(ReconstructionCoefficients {
            sequences: exact.iter().map(|row| row.iter().map(FiniteSequence::trimmed).collect()).collect(),
            relative_tail: 0.0,
        });
    }
    let big_q = dual.grid_size;
    if 2 * half_width + 1 > big_q {
        return Err(Error::InvalidParameter(format!(
            "window of half width {half_width} exceeds the grid of size {big_q}"
        )));
    }
    let r = dual.r as f64;
    let samples: Vec<CMatrix> = (0..big_q).map(|q| dual.h_at(q)).collect();
    let mut total = 0.0;
    let mut kept = 0.0;
    let mut sequences = Vec::with_capacity(dual.s);
    for j in 0..dual.s {
        let mut row = Vec::with_capacity(dual.l);
        for l in 0..dual.l {
            let values: Vec<C64> = samples.iter().map(|h| h[(l, j)].conj() * r).collect();
            total += values.iter().map(|v| v.norm_sqr()).sum::<f64>() / big_q as f64;
            let hw = half_width as i64;
            let coeffs: Vec<C64> = (-hw..=hw)
                .map(|n| {
                    let sum: C64 = values
                        .iter()
                        .enumerate()
                        .map(|(q, v)| v * root_of_unity(-n * q as i64, big_q))
                        .sum();
                    sum / big_q as f64
                })
                .collect();
            kept += coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>();
            row.push(FiniteSequence::new(-hw, coeffs)?);
        }
        sequences.push(row);
    }
    let relative_tail = if total > 0.0 { ((total - kept) / total).max(0.0) } else { 0.0 };
    if relative_tail > TAIL_LIMIT {
        return Err(Error::TruncationRefused {
            tail: relative_tail,
            limit: TAIL_LIMIT,
        });
    }
    Ok(ReconstructionCoefficients {
        sequences,
        relative_tail,
    })
}

/// Analysis impulse response `h(n) = ⟨a, (T*)^{-n} b⟩ = conj(c(-n))` from
/// the spectrum sequence `c`.
pub fn analysis_filter(spectrum: &FiniteSequence) -> FiniteSequence {
    spectrum.conj_reflect()
}

/// Analysis filters `h_j` and synthesis filters `g_j` with downsampling `r`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    r: usize,
    analysis: Vec<FiniteSequence>,
    synthesis: Vec<FiniteSequence>,
}

/// Polyphase matrices: `h` is `s × r`, `g` is `r × s`, entries as Laurent
/// polynomials.
#[derive(Debug, Clone)]
pub struct Polyphase {
    pub h: Vec<Vec<FiniteSequence>>,
    pub g: Vec<Vec<FiniteSequence>>,
}

impl Polyphase {
    /// `G(z) H(z)` at `z = e^{2πiq/Q}`.
    pub fn product_on_grid(&self, q: usize, big_q: usize) -> CMatrix {
        let eval = |rows: &Vec<Vec<FiniteSequence>>| {
            CMatrix::from_fn(rows.len(), rows[0].len(), |i, k| rows[i][k].spectrum_on_grid(q, big_q))
        };
        eval(&self.g) * eval(&self.h)
    }
}

#[derive(Debug, Clone)]
pub struct PrReport {
    pub pass: bool,
    pub max_residual: f64,
    pub round_trip_error: f64,
    pub trials: usize,
}

impl FilterBank {
    pub fn new(r: usize, analysis: Vec<FiniteSequence>, synthesis: Vec<FiniteSequence>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("downsampling factor must be positive".into()));
        }
        if analysis.is_empty() || analysis.len() != synthesis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} analysis and {} synthesis filters",
                analysis.len(),
                synthesis.len()
            )));
        }
        Ok(Self {
            r,
            analysis,
            synthesis,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn analysis_filters(&self) -> &[FiniteSequence] {
        &self.analysis
    }

    pub fn synthesis_filters(&self) -> &[FiniteSequence] {
        &self.synthesis
    }

    /// `y_j(m) = (α ∗ h_j)(rm)`.
    pub fn analysis(&self, alpha: &FiniteSequence) -> Vec<FiniteSequence> {
        let r = self.r as i64;
        self.analysis
            .iter()
            .map(|h| {
                let full = alpha.convolve(h);
                let lo = full.offset().div_euclid(r) + i64::from(full.offset().rem_euclid(r) != 0);
                let hi = (full.end() - 1).div_euclid(r);
                if hi < lo {
                    return FiniteSequence::zero();
                }
                FiniteSequence {
                    offset: lo,
                    values: (lo..=hi).map(|m| full.get(m * r)).collect(),
                }
            })
            .collect()
    }

    /// `Σ_j Σ_m y_j(m) g_j(n - mr)`.
    pub fn synthesis(&self, ys: &[FiniteSequence]) -> Result<FiniteSequence> {
        if ys.len() != self.synthesis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.synthesis.len(),
                found: ys.len(),
            });
        }
        let r = self.r as i64;
        let lo = ys
            .iter()
            .zip(&self.synthesis)
            .map(|(y, g)| y.offset() * r + g.offset())
            .min()
            .expect("nonempty bank");
        let hi = ys
            .iter()
            .zip(&self.synthesis)
            .map(|(y, g)| (y.end() - 1) * r + g.end())
            .max()
            .expect("nonempty bank");
        let mut values = vec![C64::new(0.0, 0.0); (hi - lo) as usize];
        for (y, g) in ys.iter().zip(&self.synthesis) {
            for m in y.indices() {
                let ym = y.get(m);
                for k in g.indices() {
                    values[(m * r + k - lo) as usize] += ym * g.get(k);
                }
            }
        }
        FiniteSequence::new(lo, values)
    }

    /// `H_{j,k}(z) = Σ_m h_j(rm - k) z^{-m}`, `G_{k,j}(z) = Σ_m g_j(rm + k) z^{-m}`.
    pub fn polyphase(&self) -> Polyphase {
        let r = self.r as i64;
        let phase = |seq: &FiniteSequence, k: i64, sign: i64| {
            let mut map = BTreeMap::new();
            for n in seq.indices() {
                // h: n = rm - k; g: n = rm + k. Power of z is -m.
                let shifted = n + sign * k;
                if shifted.rem_euclid(r) == 0 {
                    map.insert(-shifted / r, seq.get(n));
                }
            }
            FiniteSequence::from_map(map)
        };
        let h = self
            .analysis
            .iter()
            .map(|hj| (0..r).map(|k| phase(hj, k, 1)).collect())
            .collect();
        let g = (0..r)
            .map(|k| self.synthesis.iter().map(|gj| phase(gj, k, -1)).collect())
            .collect();
        Polyphase { h, g }
    }
}

/// `max |G(z)H(z) - I_r|` over `z = e^{2πiq/Q}`, `q < Q`.
pub fn polyphase_residual(fb: &FilterBank, torus_grid: usize) -> f64 {
    let poly = fb.polyphase();
    let r = fb.r;
    let mut worst: f64 = 0.0;
    for q in 0..torus_grid {
        let m = poly.product_on_grid(q, torus_grid) - CMatrix::identity(r, r);
        worst = worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    worst
}

/// Random complex sequence with support length in `1..=max_len`.
pub fn random_sequence<R: Rng>(rng: &mut R, max_len: usize) -> FiniteSequence {
    let len = rng.random_range(1..=max_len);
    let offset = rng.random_range(-(max_len as i64)..=max_len as i64);
    let values = (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    FiniteSequence { offset, values }
}

/// Largest relative error of synthesis(analysis(α)) against α over
/// `trials` random sequences of support at most `max_len`.
pub fn round_trip_error(fb: &FilterBank, trials: usize, max_len: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let alpha = random_sequence(&mut rng, max_len);
        let back = fb.synthesis(&fb.analysis(&alpha))?;
        let err = back.sub(&alpha).norm_squared().sqrt() / alpha.norm_squared().sqrt();
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Polyphase certification on the torus plus a time-domain round trip on
/// random sequences of support at most 64.
pub fn perfect_reconstruction_check(fb: &FilterBank, torus_grid: usize, trials: usize, seed: u64) -> Result<PrReport> {
    if torus_grid == 0 {
        return Err(Error::InvalidParameter("torus grid must be positive".into()));
    }
    let max_residual = polyphase_residual(fb, torus_grid);
    let round_trip_error = round_trip_error(fb, trials, 64, seed)?;
    Ok(PrReport {
        pass: max_residual <= PR_TOL && round_trip_error <= ROUND_TRIP_TOL,
        max_residual,
        round_trip_error,
        trials,
    })
}

/// Samples `x(Kn)` and `x(Kn + 1)` of `x = Σ α(k) M_p(· - Kk)` and their
/// Bezout duals.
#[derive(Debug, Clone)]
pub struct SplineBank {
    pub k: usize,
    pub p: usize,
    pub g1: LaurentPoly,
    pub g2: LaurentPoly,
    pub h1: LaurentPoly,
    pub h2: LaurentPoly,
    pub residual: LaurentPoly,
    pub bank: FilterBank,
}

impl SplineBank {
    pub fn new(k: usize, p: usize) -> Result<Self> {
        let m = laurent::bspline(k, p)?;
        let g1 = laurent::polyphase_sample(&m, 0)?;
        let g2 = laurent::polyphase_sample(&m, 1)?;
        let (h1, h2) = laurent::bezout(&g1, &g2)?;
        let residual = laurent::bezout_residual(&g1, &g2, &h1, &h2);
        // Analysis h_j(n) = M_p(nK + j); synthesis g_j(n) = coefficient of z^n in H_j.
        let bank = FilterBank::new(
            1,
            vec![FiniteSequence::from_laurent(&g1), FiniteSequence::from_laurent(&g2)],
            vec![FiniteSequence::from_laurent(&h1), FiniteSequence::from_laurent(&h2)],
        )?;
        Ok(Self {
            k,
            p,
            g1,
            g2,
            h1,
            h2,
            residual,
            bank,
        })
    }

    /// Spectrum sequences `c_j(k)` with `g_j(w) = G_j(e^{-2πiw})`.
    pub fn spectra(&self) -> Vec<Vec<FiniteSequence>> {
        vec![
            vec![FiniteSequence::from_laurent(&self.g1.reflect())],
            vec![FiniteSequence::from_laurent(&self.g2.reflect())],
        ]
    }

    /// Dual functions `h_j(w) = H_j(e^{-2πiw})` as spectrum sequences.
    pub fn dual_sequences(&self) -> Vec<Vec<FiniteSequence>> {
        vec![
            vec![FiniteSequence::from_laurent(&self.h1.reflect())],
            vec![FiniteSequence::from_laurent(&self.h2.reflect())],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real_seq(offset: i64, v: &[f64]) -> FiniteSequence {
        FiniteSequence::from_real(offset, v).unwrap()
    }

    fn brute_convolution(a: &FiniteSequence, b: &FiniteSequence, n: i64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for k in a.offset() - 5..a.end() + 5 {
            sum += a.get(k) * b.get(n - k);
        }
        sum
    }

    fn cubic() -> FiniteSequence {
        real_seq(-1, &[4.0, 19.0, 4.0])
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(FiniteSequence::delta(0).spectrum(0.37), C64::new(1.0, 0.0));
        for i in 0..40 {
            let w = i as f64 / 40.0;
            let expected = 19.0 + 8.0 * (2.0 * std::f64::consts::PI * w).cos();
            assert!((cubic().spectrum(w) - C64::new(expected, 0.0)).norm() < 1e-12);
            let e3 = FiniteSequence::delta(3).spectrum(w);
            assert!((e3 - C64::from_polar(1.0, 6.0 * std::f64::consts::PI * w)).norm() < 1e-12);
            assert!((cubic().spectrum_on_grid(i, 40) - cubic().spectrum(w)).norm() < 1e-12);
        }
        assert!(FiniteSequence::new(0, vec![]).is_err());
    }

    #[test]
    fn trivial_field() {
        let field = build_spectral_field(&[vec![FiniteSequence::delta(0)]], 1, 64).unwrap();
        assert_eq!(field.points().len(), 64);
        assert!(field.matrices().iter().all(|m| *m == CMatrix::from_element(1, 1, C64::new(1.0, 0.0))));
        let fc = frame_constants(&field);
        assert!((fc.alpha_g - 1.0).abs() < 1e-14 && (fc.beta_g - 1.0).abs() < 1e-14);
        let dual = dual_field(&field, None).unwrap();
        let coeffs = reconstruction_coefficients(&dual, 8).unwrap();
        let c = &coeffs.sequences[0][0];
        for n in c.indices() {
            let expected = if n == 0 { 1.0 } else { 0.0 };
            assert!((c.get(n) - C64::new(expected, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn field_errors() {
        let d = vec![vec![FiniteSequence::delta(0)]];
        assert!(build_spectral_field(&d, 2, 129).is_err());
        assert!(build_spectral_field(&d, 2, 64).is_err());
        assert!(build_spectral_field(&[], 1, 64).is_err());
        let ragged = vec![vec![FiniteSequence::delta(0)], vec![]];
        assert!(build_spectral_field(&ragged, 1, 64).is_err());
    }

    #[test]
    fn aliased_columns_differ_by_sign() {
        let field = build_spectral_field(&[vec![FiniteSequence::delta(1)]], 2, 128).unwrap();
        for m in field.matrices() {
            assert!((m[(0, 1)] + m[(0, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn spline_field_matches_laurent() {
        let bank = SplineBank::new(3, 4).unwrap();
        let field = build_spectral_field(&bank.spectra(), 1, 1024).unwrap();
        for (q, w) in field.points().into_iter().enumerate() {
            let m = &field.matrices()[q];
            assert!((m[(0, 0)] - bank.g1.eval_torus(w)).norm() < 1e-12);
            assert!((m[(1, 0)] - bank.g2.eval_torus(w)).norm() < 1e-12);
        }
        let fc = frame_constants(&field);
        assert!(fc.alpha_g > 0.0 && fc.min_det > 0.0);

        let pinv_dual = dual_field(&field, None).unwrap();
        assert!(pinv_dual.max_residual() <= 1e-9);
        let exact = DualField::from_sequences(&field, &bank.dual_sequences()).unwrap();
        assert!(exact.max_residual() <= 1e-9);
        let coeffs = reconstruction_coefficients(&exact, 0).unwrap();
        assert_eq!(coeffs.sequences[0][0], FiniteSequence::from_laurent(&bank.h1));
        assert_eq!(coeffs.sequences[1][0], FiniteSequence::from_laurent(&bank.h2));
        assert_eq!(coeffs.relative_tail, 0.0);
    }

    #[test]
    fn vanishing_spectrum_is_not_a_frame() {
        let g = real_seq(0, &[-1.0, 1.0]);
        let field = build_spectral_field(&[vec![g]], 1, 64).unwrap();
        let fc = frame_constants(&field);
        assert!(fc.alpha_g < 1e-28);
        assert_eq!(fc.argmin, 0.0);
        assert!(matches!(dual_field(&field, None), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn inverse_cosine_dual_against_toeplitz_solve() {
        let field = build_spectral_field(&[vec![cubic()]], 1, 1024).unwrap();
        let dual = dual_field(&field, None).unwrap();
        for (q, w) in field.points().into_iter().enumerate().step_by(37) {
            let expected = 1.0 / (19.0 + 8.0 * (2.0 * std::f64::consts::PI * w).cos());
            assert!((dual.h_values()[q][(0, 0)] - C64::new(expected, 0.0)).norm() < 1e-14);
        }
        let coeffs = reconstruction_coefficients(&dual, 40).unwrap();
        assert!(coeffs.relative_tail < 1e-12);
        assert!(matches!(
            reconstruction_coefficients(&dual, 2),
            Err(Error::TruncationRefused { .. })
        ));

        // Oracle: solve the banded Toeplitz system (c ∗ β) = δ on 401 indices.
        let n = 401usize;
        let half = (n / 2) as i64;
        let mut t = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut rhs = nalgebra::DVector::<f64>::zeros(n);
        for i in 0..n {
            t[(i, i)] = 19.0;
            if i > 0 {
                t[(i, i - 1)] = 4.0;
            }
            if i + 1 < n {
                t[(i, i + 1)] = 4.0;
            }
        }
        rhs[n / 2] = 1.0;
        let beta = t.lu().solve(&rhs).unwrap();
        let c = &coeffs.sequences[0][0];
        let mut prev = f64::INFINITY;
        for k in -40i64..=40 {
            let oracle = beta[(k + half) as usize];
            assert!((c.get(k).re - oracle).abs() < 1e-13);
            assert!(c.get(k).im.abs() < 1e-13);
            if k >= 0 {
                assert!(oracle.abs() < prev);
                prev = oracle.abs();
            }
        }
    }

    #[test]
    fn identity_field_dual() {
        // s = 2, L = 1, r = 2 with G(w) = I up to phases.
        let spectra = vec![
            vec![real_seq(0, &[0.5, 0.5])],
            vec![real_seq(0, &[0.5, -0.5])],
        ];
        let field = build_spectral_field(&spectra, 2, 128).unwrap();
        let dual = dual_field(&field, None).unwrap();
        assert!(dual.max_residual() < 1e-14);
    }

    #[test]
    fn trivial_filter_banks() {
        let alpha = real_seq(-3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let id = FilterBank::new(1, vec![FiniteSequence::delta(0)], vec![FiniteSequence::delta(0)]).unwrap();
        assert_eq!(id.analysis(&alpha)[0], alpha);
        assert_eq!(id.synthesis(&[alpha.clone()]).unwrap(), alpha);
        let report = perfect_reconstruction_check(&id, 64, 10, 1).unwrap();
        assert!(report.pass && report.max_residual == 0.0);
        let poly = id.polyphase();
        assert_eq!(poly.h[0][0], FiniteSequence::delta(0));
        assert_eq!(poly.g[0][0], FiniteSequence::delta(0));

        let down = FilterBank::new(2, vec![FiniteSequence::delta(0)], vec![FiniteSequence::delta(0)]).unwrap();
        let y = &down.analysis(&alpha)[0];
        assert_eq!(y.offset(), -1);
        assert_eq!(y.values(), &[C64::new(2.0, 0.0), C64::new(4.0, 0.0), C64::new(6.0, 0.0)]);
        let up = down.synthesis(&[real_seq(0, &[1.0, 2.0])]).unwrap();
        assert_eq!(up.values(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)]);

        // δ_0 with r = 2 has a single nonzero polyphase component.
        let poly = down.polyphase();
        assert_eq!(poly.h[0][0], FiniteSequence::delta(0));
        assert_eq!(poly.h[0][1], FiniteSequence::zero());

        // Lazy wavelet: δ_0 and δ_{-1} analysis, δ_0 and δ_1 synthesis.
        let lazy = FilterBank::new(
            2,
            vec![FiniteSequence::delta(0), FiniteSequence::delta(-1)],
            vec![FiniteSequence::delta(0), FiniteSequence::delta(1)],
        )
        .unwrap();
        assert!(perfect_reconstruction_check(&lazy, 64, 20, 2).unwrap().pass);
    }

    #[test]
    fn spline_bank_reconstructs() {
        let bank = SplineBank::new(3, 4).unwrap();
        assert!(bank.residual.is_zero());
        let report = perfect_reconstruction_check(&bank.bank, 256, 50, 7).unwrap();
        assert!(report.pass);
        assert!(report.max_residual <= 1e-12);
        assert!(report.round_trip_error <= 1e-10);
    }

    #[test]
    fn mismatched_bank_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let analysis = (0..2).map(|_| random_sequence(&mut rng, 4)).collect();
        let synthesis = (0..2).map(|_| random_sequence(&mut rng, 4)).collect();
        let fb = FilterBank::new(2, analysis, synthesis).unwrap();
        let report = perfect_reconstruction_check(&fb, 64, 10, 3).unwrap();
        assert!(!report.pass);
        assert!(report.round_trip_error > 1e-3);
    }

    #[test]
    fn parseval_consistency() {
        // Samples by convolution equal ⟨F, g e^{2πirmw}⟩ by grid quadrature.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = 2usize;
        let c = random_sequence(&mut rng, 6);
        let alpha = random_sequence(&mut rng, 10);
        let fb = FilterBank::new(r, vec![analysis_filter(&c)], vec![FiniteSequence::delta(0)]).unwrap();
        let y = &fb.analysis(&alpha)[0];
        let big_q = 256;
        for m in y.offset() - 2..y.end() + 2 {
            let quad: C64 = (0..big_q)
                .map(|q| {
                    alpha.spectrum_on_grid(q, big_q)
                        * (c.spectrum_on_grid(q, big_q) * root_of_unity(r as i64 * m * q as i64, big_q)).conj()
                })
                .sum::<C64>()
                / big_q as f64;
            assert!((quad - y.get(m)).norm() < 1e-8);
            assert!((y.get(m) - brute_convolution(&alpha, &analysis_filter(&c), r as i64 * m)).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_refinement_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spectra: Vec<Vec<FiniteSequence>> = (0..3).map(|_| vec![random_sequence(&mut rng, 5)]).collect();
        let coarse = frame_constants(&build_spectral_field(&spectra, 2, 128).unwrap());
        let fine = frame_constants(&build_spectral_field(&spectra, 2, 256).unwrap());
        assert!(fine.alpha_g <= coarse.alpha_g);
        assert!(fine.beta_g >= coarse.beta_g);
    }

    #[test]
    fn u_family_is_still_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spectra: Vec<Vec<FiniteSequence>> = (0..3).map(|_| vec![random_sequence(&mut rng, 4)]).collect();
        let field = build_spectral_field(&spectra, 2, 256).unwrap();
        let u = |w: f64| CMatrix::from_fn(2, 3, |i, j| C64::new((i + j) as f64 * w, 1.0 - w));
        let dual = dual_field(&field, Some(&u)).unwrap();
        assert!(dual.max_residual() <= 1e-9);
        let bad_u = |_: f64| CMatrix::zeros(1, 3);
        assert!(dual_field(&field, Some(&bad_u)).is_err());
    }

    fn multi_generator_case(seed: u64, r: usize, l: usize, s: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // A dominant tap on the diagonal keeps G well conditioned and the dual smooth.
        let spectra: Vec<Vec<FiniteSequence>> = (0..s)
            .map(|j| {
                (0..l)
                    .map(|gen| {
                        let c = random_sequence(&mut rng, 3).scale(C64::new(0.3, 0.0));
                        if j % l == gen {
                            c.add(&FiniteSequence::delta((j / l) as i64).scale(C64::new(2.0, 0.0)))
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        let field = build_spectral_field(&spectra, r, 1024 * r).unwrap();
        let fc = frame_constants(&field);
        assert!(fc.alpha_g > 1e-4, "alpha_G = {}", fc.alpha_g);
        let dual = dual_field(&field, None).unwrap();
        assert!(dual.max_residual() <= 1e-9);
        let coeffs = reconstruction_coefficients(&dual, 200).unwrap();

        // Samples of x = Σ_l Σ_n α^l(n) T^n a_l are Σ_l (α^l ∗ h_j^l)(rm).
        let alphas: Vec<FiniteSequence> = (0..l).map(|_| random_sequence(&mut rng, 16)).collect();
        let ys: Vec<FiniteSequence> = (0..s)
            .map(|j| {
                let mut total: Option<FiniteSequence> = None;
                for (gen, alpha) in alphas.iter().enumerate() {
                    let fb = FilterBank::new(r, vec![analysis_filter(&spectra[j][gen])], vec![FiniteSequence::delta(0)])
                        .unwrap();
                    let y = fb.analysis(alpha).remove(0);
                    total = Some(match total {
                        None => y,
                        Some(t) => t.add(&y),
                    });
                }
                total.unwrap()
            })
            .collect();
        for (gen, alpha) in alphas.iter().enumerate() {
            let synth = FilterBank::new(
                r,
                vec![FiniteSequence::delta(0); s],
                (0..s).map(|j| coeffs.sequences[j][gen].clone()).collect(),
            )
            .unwrap();
            let back = synth.synthesis(&ys).unwrap();
            let err = back.sub(alpha).norm_squared().sqrt() / alpha.norm_squared().sqrt();
            assert!(err < 1e-6, "generator {gen}: relative error {err}");
        }
    }

    #[test]
    fn multi_generator_round_trip() {
        multi_generator_case(1, 2, 2, 5);
        multi_generator_case(2, 1, 3, 4);
    }

    #[test]
    fn single_generator_paths_agree() {
        // L = 1 through the multi-generator layout is the single-generator field.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spectra: Vec<Vec<FiniteSequence>> = (0..3).map(|_| vec![random_sequence(&mut rng, 4)]).collect();
        let field = build_spectral_field(&spectra, 3, 192).unwrap();
        for (q, w) in field.points().into_iter().enumerate() {
            for j in 0..3 {
                for k in 0..3 {
                    let direct = spectra[j][0].spectrum(w + k as f64 / 3.0);
                    assert!((field.matrices()[q][(j, k)] - direct).norm() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn analysis_synthesis_match_brute_force(seed in any::<u64>(), r in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_sequence(&mut rng, 6);
            let g = random_sequence(&mut rng, 6);
            let alpha = random_sequence(&mut rng, 12);
            let fb = FilterBank::new(r, vec![h.clone()], vec![g.clone()]).unwrap();
            let y = fb.analysis(&alpha).remove(0);
            for m in y.offset() - 3..y.end() + 3 {
                let oracle = brute_convolution(&alpha, &h, r as i64 * m);
                prop_assert!((y.get(m) - oracle).norm() < 1e-12);
            }
            let out = fb.synthesis(&[alpha.clone()]).unwrap();
            for n in out.offset() - 3..out.end() + 3 {
                let mut oracle = C64::new(0.0, 0.0);
                for m in alpha.indices() {
                    oracle += alpha.get(m) * g.get(n - m * r as i64);
                }
                prop_assert!((out.get(n) - oracle).norm() < 1e-12);
            }
        }

        #[test]
        fn polyphase_agrees_with_time_domain(seed in any::<u64>(), r in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fb = FilterBank::new(
                r,
                (0..2).map(|_| random_sequence(&mut rng, 5)).collect(),
                (0..2).map(|_| random_sequence(&mut rng, 5)).collect(),
            ).unwrap();
            // The analysis-synthesis cascade on δ_k, read at n, is entry
            // (n mod r, k mod r) of the polyphase product's coefficients.
            let poly = fb.polyphase();
            let big_q = 64;
            for k in 0..r as i64 {
                let out = fb.synthesis(&fb.analysis(&FiniteSequence::delta(k))).unwrap();
                for phase in 0..r as i64 {
                    // Coefficient of z^p in (GH)_{phase,k} is out(phase - r p).
                    let expected: Vec<C64> = (0..big_q)
                        .map(|q| {
                            let mut sum = C64::new(0.0, 0.0);
                            for n in out.indices() {
                                if (n - phase).rem_euclid(r as i64) == 0 {
                                    let p = -(n - phase) / r as i64;
                                    sum += out.get(n) * root_of_unity(p * q as i64, big_q);
                                }
                            }
                            sum
                        })
                        .collect();
                    for (q, e) in expected.into_iter().enumerate() {
                        let m = poly.product_on_grid(q, big_q);
                        prop_assert!((m[(phase as usize, k as usize)] - e).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
