//! JSON problem files.
//!
//! ```json
//! {
//!   "model": "cyclic",
//!   "dimension": 4,
//!   "operator": [[[0,0],[0,0],[0,0],[1,0]], ...],
//!   "generators": [[[1,0],[0,0],[0,0],[0,0]]],
//!   "orders": [4],
//!   "samplers": [[[1,0],[0,0],[0,0],[0,0]]],
//!   "r": 1
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs; a bare number is read as real.
//! The shift model describes the spectra directly by their coefficient
//! sequences `g_{j}_{l}` (or `g_{j}` with one generator), and filter banks by
//! `analysis_{j}` / `synthesis_{j}`. The lca model adds `group` and one
//! operator per generator of `H` under `operators`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use tsampling::cyclic::{CyclicSubspace, SamplingScheme};
use tsampling::lca::{FiniteAbelianGroup, GroupRepresentation, GroupSampling, Subgroup};
use tsampling::spectral::FiniteSequence;
use tsampling::{CMatrix, CVector, LinearOperator, C64};

use crate::CliError;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Complex> for C64 {
    fn from(c: Complex) -> Self {
        match c {
            Complex::Pair([re, im]) => C64::new(re, im),
            Complex::Real(re) => C64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Cyclic,
    Shift,
    Lca,
}

#[derive(Debug, Deserialize)]
pub struct GroupSpec {
    pub moduli: Vec<usize>,
    #[serde(rename = "H_gens")]
    pub h_gens: Vec<Vec<usize>>,
    #[serde(rename = "M_gens")]
    pub m_gens: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
pub struct SequenceSpec {
    pub offset: i64,
    pub values: Vec<Complex>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub model: Model,
    pub dimension: Option<usize>,
    pub operator: Option<Vec<Vec<Complex>>>,
    pub generators: Option<Vec<Vec<Complex>>>,
    pub orders: Option<Vec<usize>>,
    pub samplers: Option<Vec<Vec<Complex>>>,
    pub r: Option<usize>,
    pub grid: Option<usize>,
    pub group: Option<GroupSpec>,
    pub operators: Option<Vec<Vec<Vec<Complex>>>>,
    pub sequences: Option<BTreeMap<String, SequenceSpec>>,
}

pub struct CyclicProblem {
    pub subspace: CyclicSubspace,
    pub scheme: SamplingScheme,
}

pub struct ShiftProblem {
    pub r: usize,
    pub grid: Option<usize>,
    /// `[j][l]`, empty when the file only describes a filter bank.
    pub spectra: Vec<Vec<FiniteSequence>>,
    pub analysis: Vec<FiniteSequence>,
    pub synthesis: Vec<FiniteSequence>,
}

pub enum Problem {
    Cyclic(CyclicProblem),
    Shift(ShiftProblem),
    Lca(Box<GroupSampling>),
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T>(field: Option<T>, name: &str, model: &str) -> Result<T, CliError> {
    field.ok_or_else(|| schema(format!("field \"{name}\" is required for the {model} model")))
}

pub fn vector(values: &[Complex], dim: usize, what: &str) -> Result<CVector, CliError> {
    if values.len() != dim {
        return Err(schema(format!("{what} has length {}, expected {dim}", values.len())));
    }
    Ok(CVector::from_iterator(dim, values.iter().map(|&c| c.into())))
}

pub fn matrix(rows: &[Vec<Complex>], nrows: usize, ncols: usize, what: &str) -> Result<CMatrix, CliError> {
    if rows.len() != nrows || rows.iter().any(|row| row.len() != ncols) {
        return Err(schema(format!("{what} must be {nrows} x {ncols}")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, k| rows[i][k].into()))
}

fn vectors(list: &[Vec<Complex>], dim: usize, what: &str) -> Result<Vec<CVector>, CliError> {
    list.iter()
        .enumerate()
        .map(|(i, v)| vector(v, dim, &format!("{what} {}", i + 1)))
        .collect()
}

fn operator(rows: &[Vec<Complex>], dim: usize, what: &str) -> Result<LinearOperator, CliError> {
    LinearOperator::new(matrix(rows, dim, dim, what)?).map_err(|e| schema(format!("{what}: {e}")))
}

fn sequence(spec: &SequenceSpec) -> FiniteSequence {
    FiniteSequence::new(spec.offset, spec.values.iter().map(|&c| c.into()).collect()).expect("offset is in range")
}

/// Reads and validates a problem file. Every failure is a schema error.
pub fn load(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    match file.model {
        Model::Cyclic => load_cyclic(file).map(Problem::Cyclic),
        Model::Shift => load_shift(file).map(Problem::Shift),
        Model::Lca => load_lca(file).map(|s| Problem::Lca(Box::new(s))),
    }
}

fn load_cyclic(file: ProblemFile) -> Result<CyclicProblem, CliError> {
    let dim = required(file.dimension, "dimension", "cyclic")?;
    let op = operator(&required(file.operator, "operator", "cyclic")?, dim, "operator")?;
    let generators = vectors(&required(file.generators, "generators", "cyclic")?, dim, "generator")?;
    let orders = required(file.orders, "orders", "cyclic")?;
    let samplers = vectors(&required(file.samplers, "samplers", "cyclic")?, dim, "sampler")?;
    let r = required(file.r, "r", "cyclic")?;
    let subspace = CyclicSubspace::new(op, generators, orders).map_err(|e| schema(e.to_string()))?;
    let scheme = SamplingScheme::new(&subspace, samplers, r).map_err(|e| schema(e.to_string()))?;
    Ok(CyclicProblem { subspace, scheme })
}

/// Collects `prefix_1, prefix_2, …` in order.
fn numbered(seqs: &BTreeMap<String, SequenceSpec>, prefix: &str) -> Result<Vec<FiniteSequence>, CliError> {
    let mut out = Vec::new();
    while let Some(spec) = seqs.get(&format!("{prefix}_{}", out.len() + 1)) {
        out.push(sequence(spec));
    }
    let stray = seqs
        .keys()
        .filter_map(|k| k.strip_prefix(&format!("{prefix}_")))
        .filter_map(|k| k.parse::<usize>().ok())
        .any(|i| i == 0 || i > out.len());
    if stray {
        return Err(schema(format!("sequences \"{prefix}_*\" must be numbered 1, 2, … without gaps")));
    }
    Ok(out)
}

fn load_shift(file: ProblemFile) -> Result<ShiftProblem, CliError> {
    let r = required(file.r, "r", "shift")?;
    if r == 0 {
        return Err(schema("r must be positive"));
    }
    let seqs = required(file.sequences, "sequences", "shift")?;
    for name in seqs.keys() {
        let known = ["g_", "analysis_", "synthesis_"].iter().any(|p| name.starts_with(p));
        if !known {
            return Err(schema(format!("unknown sequence name \"{name}\"")));
        }
    }
    let mut spectra: Vec<Vec<FiniteSequence>> = Vec::new();
    let two_index = seqs.keys().any(|k| k.starts_with("g_") && k[2..].contains('_'));
    if two_index {
        let l = seqs
            .keys()
            .filter_map(|k| k.strip_prefix("g_1_"))
            .filter_map(|k| k.parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        for j in 1.. {
            if !seqs.contains_key(&format!("g_{j}_1")) {
                break;
            }
            let row = (1..=l)
                .map(|i| {
                    seqs.get(&format!("g_{j}_{i}"))
                        .map(sequence)
                        .ok_or_else(|| schema(format!("missing sequence g_{j}_{i}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            spectra.push(row);
        }
        let count = seqs.keys().filter(|k| k.starts_with("g_")).count();
        if count != spectra.len() * l {
            return Err(schema("spectra g_{j}_{l} must form a full s x L table"));
        }
    } else {
        spectra = numbered(&seqs, "g")?.into_iter().map(|g| vec![g]).collect();
    }
    let analysis = numbered(&seqs, "analysis")?;
    let synthesis = numbered(&seqs, "synthesis")?;
    if analysis.len() != synthesis.len() {
        return Err(schema("analysis and synthesis filters must come in pairs"));
    }
    if spectra.is_empty() && analysis.is_empty() {
        return Err(schema("the shift model needs spectra g_* or filters analysis_*/synthesis_*"));
    }
    Ok(ShiftProblem {
        r,
        grid: file.grid,
        spectra,
        analysis,
        synthesis,
    })
}

fn load_lca(file: ProblemFile) -> Result<GroupSampling, CliError> {
    let dim = required(file.dimension, "dimension", "lca")?;
    let spec = required(file.group, "group", "lca")?;
    let ops = required(file.operators, "operators", "lca")?;
    let generators = vectors(&required(file.generators, "generators", "lca")?, dim, "generator")?;
    let samplers = vectors(&required(file.samplers, "samplers", "lca")?, dim, "sampler")?;
    let [a] = <[CVector; 1]>::try_from(generators).map_err(|_| schema("the lca model takes exactly one generator"))?;
    let group = FiniteAbelianGroup::new(spec.moduli).map_err(|e| schema(e.to_string()))?;
    let h = Subgroup::generate(&group, spec.h_gens).map_err(|e| schema(e.to_string()))?;
    if ops.len() != h.generators().len() {
        return Err(schema(format!(
            "{} operators given for {} generators of H",
            ops.len(),
            h.generators().len()
        )));
    }
    let ops = ops
        .iter()
        .enumerate()
        .map(|(i, rows)| operator(rows, dim, &format!("operator {}", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = GroupRepresentation::new(group, h, ops).map_err(|e| schema(e.to_string()))?;
    GroupSampling::new(rep, a, samplers, spec.m_gens).map_err(|e| schema(e.to_string()))
}

/// A complex matrix stored as JSON rows of `[re, im]` pairs.
pub fn load_matrix(path: &Path, nrows: usize, ncols: usize) -> Result<CMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<Complex>> = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    matrix(&rows, nrows, ncols, "U matrix")
}
