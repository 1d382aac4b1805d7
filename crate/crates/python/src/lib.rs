//! Python bindings. Vectors are lists of `complex`, matrices are lists of
//! rows, exact coefficients are `(numerator, denominator)` integer pairs.

use num::{BigInt, BigRational};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tsampling::cyclic::{
    self, build_sample_matrix, check_rank, reconstruction_vectors, structurize_left_inverse, take_samples,
    CyclicSubspace, ReconstructionBasis, SamplingScheme,
};
use tsampling::laurent::{self, LaurentPoly};
use tsampling::lca::{FiniteAbelianGroup, GroupRepresentation, GroupSampling, Subgroup};
use tsampling::spectral::{self, FiniteSequence, SplineBank};
use tsampling::{CMatrix, CVector, LinearOperator, C64};

create_exception!(pytsampling, TsamplingError, PyValueError);

fn err(e: tsampling::Error) -> PyErr {
    TsamplingError::new_err(e.to_string())
}

fn to_vector(v: Vec<C64>) -> CVector {
    CVector::from_vec(v)
}

fn from_vector(v: &CVector) -> Vec<C64> {
    v.iter().copied().collect()
}

fn to_matrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows differ in length"));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, k| rows[i][k]))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn operator(rows: Vec<Vec<C64>>) -> PyResult<LinearOperator> {
    LinearOperator::new(to_matrix(rows)?).map_err(err)
}

/// Laurent polynomial with exact rational coefficients.
#[pyclass(name = "LaurentPoly", module = "pytsampling", frozen)]
struct PyLaurent {
    inner: LaurentPoly,
}

#[pymethods]
impl PyLaurent {
    /// `coeffs[i] = (numerator, denominator)` multiplies `z^(min_deg + i)`.
    #[new]
    fn new(min_deg: i64, coeffs: Vec<(BigInt, BigInt)>) -> PyResult<Self> {
        if coeffs.iter().any(|(_, d)| *d == BigInt::from(0)) {
            return Err(PyValueError::new_err("zero denominator"));
        }
        let coeffs = coeffs.into_iter().map(|(n, d)| BigRational::new(n, d)).collect();
        Ok(Self {
            inner: LaurentPoly::new(min_deg, coeffs),
        })
    }

    #[staticmethod]
    fn from_integers(min_deg: i64, coeffs: Vec<i64>) -> Self {
        Self {
            inner: LaurentPoly::from_integers(min_deg, &coeffs),
        }
    }

    #[getter]
    fn min_deg(&self) -> i64 {
        self.inner.min_deg()
    }

    #[getter]
    fn max_deg(&self) -> i64 {
        self.inner.max_deg()
    }

    /// Exact coefficient of `z^k` as `(numerator, denominator)`.
    fn coeff(&self, k: i64) -> (BigInt, BigInt) {
        let c = self.inner.coeff(k);
        (c.numer().clone(), c.denom().clone())
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn eval(&self, z: C64) -> C64 {
        self.inner.eval(z)
    }

    /// Value at `z = exp(-2πiw)`.
    fn eval_torus(&self, w: f64) -> C64 {
        self.inner.eval_torus(w)
    }

    fn reflect(&self) -> Self {
        Self {
            inner: self.inner.reflect(),
        }
    }

    fn __add__(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner + &other.inner,
        }
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner - &other.inner,
        }
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("LaurentPoly({})", self.inner)
    }
}

/// `(H1, H2)` with `G1 H1 + G2 H2 = 1`.
#[pyfunction]
fn bezout(g1: &PyLaurent, g2: &PyLaurent) -> PyResult<(PyLaurent, PyLaurent)> {
    let (h1, h2) = laurent::bezout(&g1.inner, &g2.inner).map_err(err)?;
    Ok((PyLaurent { inner: h1 }, PyLaurent { inner: h2 }))
}

/// Values `M_p(n)` for `n = -half_support ..= half_support`.
#[pyfunction]
fn bspline(k: usize, p: usize) -> PyResult<(i64, Vec<BigInt>)> {
    let m = laurent::bspline(k, p).map_err(err)?;
    Ok((-m.half_support(), m.values().to_vec()))
}

/// `(min, argmin, strictly_positive)` of `P(exp(-2πiw))` on a uniform grid.
#[pyfunction]
#[pyo3(signature = (poly, grid = 4096))]
fn positivity_certificate(poly: &PyLaurent, grid: usize) -> PyResult<(f64, f64, bool)> {
    let c = laurent::positivity_certificate(&poly.inner, grid).map_err(err)?;
    Ok((c.min_value, c.argmin, c.strictly_positive))
}

/// Two-channel B-spline filter bank with exact Bezout duals.
#[pyclass(name = "SplineBank", module = "pytsampling", frozen)]
struct PySplineBank {
    inner: SplineBank,
}

#[pymethods]
impl PySplineBank {
    #[new]
    #[pyo3(signature = (k = 3, p = 4))]
    fn new(k: usize, p: usize) -> PyResult<Self> {
        Ok(Self {
            inner: SplineBank::new(k, p).map_err(err)?,
        })
    }

    #[getter]
    fn g1(&self) -> PyLaurent {
        PyLaurent { inner: self.inner.g1.clone() }
    }

    #[getter]
    fn g2(&self) -> PyLaurent {
        PyLaurent { inner: self.inner.g2.clone() }
    }

    #[getter]
    fn h1(&self) -> PyLaurent {
        PyLaurent { inner: self.inner.h1.clone() }
    }

    #[getter]
    fn h2(&self) -> PyLaurent {
        PyLaurent { inner: self.inner.h2.clone() }
    }

    #[getter]
    fn residual(&self) -> PyLaurent {
        PyLaurent {
            inner: self.inner.residual.clone(),
        }
    }

    /// `(pass, torus_residual, round_trip_error)`.
    #[pyo3(signature = (grid = 4096, trials = 100, seed = 0))]
    fn pr_check(&self, grid: usize, trials: usize, seed: u64) -> PyResult<(bool, f64, f64)> {
        let r = spectral::perfect_reconstruction_check(&self.inner.bank, grid, trials, seed).map_err(err)?;
        Ok((r.pass, r.max_residual, r.round_trip_error))
    }
}

/// Sampling of `span{T^n a_l}` at multiples of `r`.
#[pyclass(name = "CyclicProblem", module = "pytsampling", frozen)]
struct PyCyclic {
    subspace: CyclicSubspace,
    scheme: SamplingScheme,
    basis: Option<ReconstructionBasis>,
}

#[pymethods]
impl PyCyclic {
    #[new]
    fn new(
        operator_rows: Vec<Vec<C64>>,
        generators: Vec<Vec<C64>>,
        orders: Vec<usize>,
        samplers: Vec<Vec<C64>>,
        r: usize,
    ) -> PyResult<Self> {
        let op = operator(operator_rows)?;
        let subspace =
            CyclicSubspace::new(op, generators.into_iter().map(to_vector).collect(), orders).map_err(err)?;
        let scheme = SamplingScheme::new(&subspace, samplers.into_iter().map(to_vector).collect(), r).map_err(err)?;
        let rmat = build_sample_matrix(&subspace, &scheme).map_err(err)?;
        let basis = if check_rank(&rmat).full_rank {
            let hs = structurize_left_inverse(&rmat, None).map_err(err)?;
            Some(reconstruction_vectors(&subspace, &hs).map_err(err)?)
        } else {
            None
        };
        Ok(Self {
            subspace,
            scheme,
            basis,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.subspace.dimension()
    }

    fn sample_matrix(&self) -> PyResult<Vec<Vec<C64>>> {
        let r = build_sample_matrix(&self.subspace, &self.scheme).map_err(err)?;
        Ok(from_matrix(r.matrix()))
    }

    /// `(rank, singular_values)` of the sample matrix.
    fn rank(&self) -> PyResult<(usize, Vec<f64>)> {
        let r = build_sample_matrix(&self.subspace, &self.scheme).map_err(err)?;
        let report = check_rank(&r);
        Ok((report.rank, report.singular_values))
    }

    fn is_recoverable(&self) -> bool {
        self.basis.is_some()
    }

    fn synthesize(&self, alpha: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(from_vector(&self.subspace.synthesize(&to_vector(alpha)).map_err(err)?))
    }

    fn samples(&self, x: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(from_vector(&take_samples(&self.subspace, &self.scheme, &to_vector(x)).map_err(err)?))
    }

    fn reconstruction_vectors(&self) -> PyResult<Vec<Vec<C64>>> {
        let basis = self.basis()?;
        Ok(basis.vectors().iter().map(from_vector).collect())
    }

    fn reconstruct(&self, samples: Vec<C64>) -> PyResult<Vec<C64>> {
        let x = cyclic::reconstruct(&self.subspace, &self.scheme, self.basis()?, &to_vector(samples)).map_err(err)?;
        Ok(from_vector(&x))
    }
}

impl PyCyclic {
    fn basis(&self) -> PyResult<&ReconstructionBasis> {
        self.basis
            .as_ref()
            .ok_or_else(|| TsamplingError::new_err("sample matrix is rank deficient"))
    }
}

/// Sampling on a finite abelian group `ℤ_{d_1} × …`.
#[pyclass(name = "GroupSampling", module = "pytsampling", frozen)]
struct PyGroupSampling {
    inner: GroupSampling,
    c: Vec<CVector>,
}

#[pymethods]
impl PyGroupSampling {
    /// One operator per generator of `H`.
    #[new]
    fn new(
        moduli: Vec<usize>,
        h_gens: Vec<Vec<usize>>,
        m_gens: Vec<Vec<usize>>,
        operators: Vec<Vec<Vec<C64>>>,
        a: Vec<C64>,
        samplers: Vec<Vec<C64>>,
    ) -> PyResult<Self> {
        let group = FiniteAbelianGroup::new(moduli).map_err(err)?;
        let h = Subgroup::generate(&group, h_gens).map_err(err)?;
        let ops = operators.into_iter().map(operator).collect::<PyResult<Vec<_>>>()?;
        let rep = GroupRepresentation::new(group, h, ops).map_err(err)?;
        let inner = GroupSampling::new(rep, to_vector(a), samplers.into_iter().map(to_vector).collect(), m_gens)
            .map_err(err)?;
        let dual = inner.dual(None).map_err(err)?;
        let c = inner.reconstruction_vectors(&dual).map_err(err)?;
        Ok(Self { inner, c })
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    /// `(α_G, β_G)`.
    fn frame_constants(&self) -> (f64, f64) {
        self.inner.frame_constants()
    }

    fn annihilator(&self) -> Vec<Vec<usize>> {
        let labels = self.inner.dual_group().labels();
        self.inner.annihilator().iter().map(|&i| labels[i].clone()).collect()
    }

    fn section(&self) -> Vec<Vec<usize>> {
        let labels = self.inner.dual_group().labels();
        self.inner.section().iter().map(|&i| labels[i].clone()).collect()
    }

    fn synthesize(&self, alpha: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(from_vector(&self.inner.synthesize(&to_vector(alpha)).map_err(err)?))
    }

    fn samples(&self, x: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(from_vector(&self.inner.samples(&to_vector(x)).map_err(err)?))
    }

    fn reconstruction_vectors(&self) -> Vec<Vec<C64>> {
        self.c.iter().map(from_vector).collect()
    }

    fn reconstruct(&self, samples: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(from_vector(&self.inner.reconstruct(&self.c, &to_vector(samples)).map_err(err)?))
    }
}

fn sequences(spectra: Vec<Vec<(i64, Vec<C64>)>>) -> PyResult<Vec<Vec<FiniteSequence>>> {
    spectra
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(offset, values)| FiniteSequence::new(offset, values).map_err(err))
                .collect()
        })
        .collect()
}

/// `(α_G, β_G)` for spectra given as `spectra[j][l] = (offset, coefficients)`.
#[pyfunction]
#[pyo3(signature = (spectra, r, grid = None))]
fn spectral_frame_constants(spectra: Vec<Vec<(i64, Vec<C64>)>>, r: usize, grid: Option<usize>) -> PyResult<(f64, f64)> {
    let field = spectral::build_spectral_field(&sequences(spectra)?, r, grid.unwrap_or(1024 * r)).map_err(err)?;
    let fc = spectral::frame_constants(&field);
    Ok((fc.alpha_g, fc.beta_g))
}

/// Largest `|h(w) G(w) - (I, 0)|` of the pseudo-inverse dual on the grid.
#[pyfunction]
#[pyo3(signature = (spectra, r, grid = None))]
fn spectral_dual_residual(spectra: Vec<Vec<(i64, Vec<C64>)>>, r: usize, grid: Option<usize>) -> PyResult<f64> {
    let field = spectral::build_spectral_field(&sequences(spectra)?, r, grid.unwrap_or(1024 * r)).map_err(err)?;
    Ok(spectral::dual_field(&field, None).map_err(err)?.max_residual())
}

#[pymodule]
fn pytsampling(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TsamplingError", m.py().get_type::<TsamplingError>())?;
    m.add_class::<PyLaurent>()?;
    m.add_class::<PySplineBank>()?;
    m.add_class::<PyCyclic>()?;
    m.add_class::<PyGroupSampling>()?;
    m.add_function(wrap_pyfunction!(bezout, m)?)?;
    m.add_function(wrap_pyfunction!(bspline, m)?)?;
    m.add_function(wrap_pyfunction!(positivity_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_frame_constants, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_dual_residual, m)?)?;
    Ok(())
}
