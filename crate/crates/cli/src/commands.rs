use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsampling::cyclic::{
    build_sample_matrix, check_rank, reconstruct, reconstruction_vectors, structurize_left_inverse, take_samples,
    StructuredLeftInverse,
};
use tsampling::laurent::{bezout, bezout_residual, bspline, polyphase_sample, positivity_certificate};
use tsampling::lca::{FiniteAbelianGroup, GroupRepresentation, GroupSampling, Subgroup};
use tsampling::linalg::identity_residual;
use tsampling::random::random_vector;
use tsampling::spectral::{
    build_spectral_field, dual_field, frame_constants, perfect_reconstruction_check, reconstruction_coefficients,
    FilterBank, FiniteSequence, ReconstructionCoefficients, SpectralField, SplineBank, DEFAULT_GRID_FACTOR,
    FRAME_THRESHOLD,
};
use tsampling::{CMatrix, CVector, Error, C64};

use crate::output::{cnum, derived_path, num, read_dense, read_vector, write_vector};
use crate::problem::{load, load_matrix, CyclicProblem, Problem, ShiftProblem};
use crate::CliError;

const DEMO_SEED: u64 = 7;
const PR_TRIALS: usize = 100;

pub struct Options {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub grid: Option<usize>,
}

impl Options {
    fn problem(&self) -> Result<Problem, CliError> {
        let path = self.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
        load(path)
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn delta_deviation(values: &CVector, hit: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - C64::new(if i == hit { 1.0 } else { 0.0 }, 0.0)).norm())
        .fold(0.0, f64::max)
}

fn print_vector(name: &str, v: &CVector) {
    println!("{name}:");
    for (i, z) in v.iter().enumerate() {
        println!("  {i:>4}  {}", cnum(*z));
    }
}

fn print_sequence(name: &str, seq: &FiniteSequence) {
    let terms: Vec<String> = seq
        .indices()
        .filter(|&n| seq.get(n) != C64::new(0.0, 0.0))
        .map(|n| format!("({}) z^{n}", cnum(seq.get(n))))
        .collect();
    println!("{name} = {}", if terms.is_empty() { "0".to_string() } else { terms.join(" + ") });
}

/// Writes `c_j` as `<out>_c{j}.csv`, or prints them without `--out`.
fn emit_vectors(out: Option<&Path>, vectors: &[CVector]) -> Result<(), CliError> {
    for (j, c) in vectors.iter().enumerate() {
        match out {
            Some(out) => {
                let path = derived_path(out, &format!("_c{}", j + 1));
                write_vector(&path, c.iter().enumerate().map(|(i, &z)| (i as i64, z)))?;
                println!("wrote {}", path.display());
            }
            None => print_vector(&format!("c_{}", j + 1), c),
        }
    }
    Ok(())
}

/// Rows `j`, entries `ℒ_{j'} c_j(rn)` in sampler-major order.
fn interpolation_table(rows: &[CVector], per_sampler: usize, tol: f64) -> bool {
    println!("interpolation table (row j: L_j' c_j at sample n, sampler-major):");
    let mut worst: f64 = 0.0;
    for (j, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|z| cnum(*z)).collect();
        println!("  c_{}: {}", j + 1, cells.join(", "));
        worst = worst.max(delta_deviation(row, j * per_sampler));
    }
    let ok = worst <= tol;
    println!("interpolation deviation {} ({})", num(worst), if ok { "holds" } else { "fails" });
    ok
}

fn grid_for(opts: &Options, p: &ShiftProblem) -> usize {
    opts.grid.or(p.grid).unwrap_or(DEFAULT_GRID_FACTOR * p.r)
}

fn spectral_field(opts: &Options, p: &ShiftProblem) -> Result<SpectralField, CliError> {
    if p.spectra.is_empty() {
        return Err(CliError::Usage("the problem file has no spectra g_*".into()));
    }
    build_spectral_field(&p.spectra, p.r, grid_for(opts, p)).map_err(usage)
}

fn cyclic_inverse(p: &CyclicProblem, u: Option<&CMatrix>) -> Result<Option<(StructuredLeftInverse, f64)>, CliError> {
    let r = build_sample_matrix(&p.subspace, &p.scheme)?;
    let report = check_rank(&r);
    if !report.full_rank {
        println!("rank {}/{}, not recoverable", report.rank, p.subspace.dimension());
        return Ok(None);
    }
    let hs = structurize_left_inverse(&r, u)?;
    let residual = identity_residual(&(hs.matrix() * r.matrix()));
    Ok(Some((hs, residual)))
}

/// Widens the coefficient window until the relative tail energy drops to
/// `tol²` (floored at round-off) or the window reaches a quarter of the grid.
fn shift_coefficients(
    field: &SpectralField,
    u: Option<&CMatrix>,
    tol: f64,
) -> Result<(f64, ReconstructionCoefficients), CliError> {
    let constant = u.cloned();
    let u_fn = move |_: f64| constant.clone().expect("checked");
    let dual = dual_field(field, if u.is_some() { Some(&u_fn) } else { None })?;
    let target = (tol * tol).max(1e-14);
    let mut half_width = 16.min(field.grid_size() / 4);
    loop {
        let wider = 2 * half_width <= field.grid_size() / 4;
        match reconstruction_coefficients(&dual, half_width) {
            Ok(c) if c.relative_tail <= target || !wider => return Ok((dual.max_residual(), c)),
            Ok(_) | Err(Error::TruncationRefused { .. }) if wider => half_width *= 2,
            Ok(c) => return Ok((dual.max_residual(), c)),
            Err(e) => return Err(e.into()),
        }
    }
}

pub fn analyze(opts: &Options) -> Result<bool, CliError> {
    match opts.problem()? {
        Problem::Cyclic(p) => {
            let r = build_sample_matrix(&p.subspace, &p.scheme)?;
            let report = check_rank(&r);
            println!(
                "cyclic model: D = {}, N = {}, r = {}, s = {}, ell = {}",
                p.subspace.ambient_dim(),
                p.subspace.dimension(),
                p.scheme.period(),
                p.scheme.samplers().len(),
                p.scheme.ell()
            );
            println!("singular values of R:");
            for s in &report.singular_values {
                println!("  {}", num(*s));
            }
            println!("frame bounds A = {}, B = {}", num(report.lower_frame_bound()), num(report.upper_frame_bound()));
            let verdict = if report.full_rank { "recoverable" } else { "not recoverable" };
            println!("rank {}/{}, {verdict}", report.rank, p.subspace.dimension());
            Ok(report.full_rank)
        }
        Problem::Shift(p) => {
            let field = spectral_field(opts, &p)?;
            let fc = frame_constants(&field);
            println!(
                "shift model: L = {}, s = {}, r = {}, grid = {}",
                field.generators(),
                field.samplers(),
                p.r,
                field.grid_size()
            );
            println!("α_G = {}", num(fc.alpha_g));
            println!("β_G = {}", num(fc.beta_g));
            if (fc.alpha_g - fc.beta_g).abs() <= opts.tol * fc.beta_g.max(1.0) {
                println!("α_G = β_G = {}", num(fc.beta_g));
            }
            println!("min det G*G = {} at w = {}", num(fc.min_det), num(fc.argmin));
            let ok = fc.is_frame(FRAME_THRESHOLD);
            println!("{}", if ok { "recoverable" } else { "not recoverable" });
            Ok(ok)
        }
        Problem::Lca(s) => {
            let (alpha, beta) = describe_lca(&s);
            let ok = alpha > FRAME_THRESHOLD;
            println!("α_G = {}", num(alpha));
            println!("β_G = {}", num(beta));
            println!("{}", if ok { "recoverable" } else { "not recoverable" });
            Ok(ok)
        }
    }
}

fn describe_lca(s: &GroupSampling) -> (f64, f64) {
    let rep = s.representation();
    let group = rep.group();
    let dual = s.dual_group();
    let names = |idx: &[usize]| idx.iter().map(|&i| format!("{:?}", dual.labels()[i])).collect::<Vec<_>>().join(" ");
    println!(
        "lca model: G = ℤ{:?}, |H| = {}, |M| = {}, r = {}, s = {}, dimension {}",
        group.moduli(),
        rep.subgroup().order(),
        s.sample_subgroup().order(),
        s.r(),
        s.samplers().len(),
        rep.dim()
    );
    println!("M⊥ = {}", names(s.annihilator()));
    println!("Ω = {}", names(s.section()));
    s.frame_constants()
}

fn lca_u(opts_u: Option<&Path>, s: &GroupSampling) -> Result<Option<CMatrix>, CliError> {
    opts_u.map(|path| load_matrix(path, s.r(), s.samplers().len())).transpose()
}

pub fn dual(opts: &Options, u_path: Option<&Path>) -> Result<bool, CliError> {
    match opts.problem()? {
        Problem::Cyclic(p) => {
            let rows = p.scheme.sample_count();
            let u = u_path.map(|path| load_matrix(path, p.subspace.dimension(), rows)).transpose()?;
            let Some((hs, residual)) = cyclic_inverse(&p, u.as_ref())? else {
                return Ok(false);
            };
            println!("left inverse residual |H R - I| = {}", num(residual));
            let basis = reconstruction_vectors(&p.subspace, &hs)?;
            emit_vectors(opts.out.as_deref(), basis.vectors())?;
            if rows == p.subspace.dimension() {
                let table = basis
                    .vectors()
                    .iter()
                    .map(|c| take_samples(&p.subspace, &p.scheme, c))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(interpolation_table(&table, p.scheme.ell(), opts.tol));
            }
            Ok(true)
        }
        Problem::Shift(p) => {
            let field = spectral_field(opts, &p)?;
            let u = u_path
                .map(|path| load_matrix(path, p.r * field.generators(), field.samplers()))
                .transpose()?;
            let (residual, coeffs) = match shift_coefficients(&field, u.as_ref(), opts.tol) {
                Err(CliError::Core(e @ Error::NotAFrame { .. })) => {
                    println!("not recoverable: {e}");
                    return Ok(false);
                }
                other => other?,
            };
            println!("dual residual max |hG - (I, 0)| = {}", num(residual));
            println!("relative tail of truncated coefficients = {}", num(coeffs.relative_tail));
            for (j, row) in coeffs.sequences.iter().enumerate() {
                for (l, seq) in row.iter().enumerate() {
                    let suffix = if row.len() == 1 {
                        format!("_c{}", j + 1)
                    } else {
                        format!("_c{}_{}", j + 1, l + 1)
                    };
                    match &opts.out {
                        Some(out) => {
                            let path = derived_path(out, &suffix);
                            write_vector(&path, seq.indices().map(|n| (n, seq.get(n))))?;
                            println!("wrote {}", path.display());
                        }
                        None => print_sequence(&format!("c{suffix}"), seq),
                    }
                }
            }
            Ok(true)
        }
        Problem::Lca(s) => {
            describe_lca(&s);
            let u = lca_u(u_path, &s)?;
            let constant = u.clone();
            let u_fn = move |_: usize| constant.clone().expect("checked");
            let d = match s.dual(if u.is_some() { Some(&u_fn) } else { None }) {
                Err(e @ Error::NotAFrame { .. }) => {
                    println!("not recoverable: {e}");
                    return Ok(false);
                }
                other => other?,
            };
            println!("dual residual = {}", num(d.max_residual));
            let c = s.reconstruction_vectors(&d)?;
            emit_vectors(opts.out.as_deref(), &c)?;
            if s.samplers().len() == s.r() {
                let table = c.iter().map(|cj| s.samples(cj)).collect::<Result<Vec<_>, _>>()?;
                return Ok(interpolation_table(&table, s.sample_subgroup().order(), opts.tol));
            }
            Ok(true)
        }
    }
}

fn dense_samples(paths: &[PathBuf], expected: usize) -> Result<CVector, CliError> {
    let [path] = paths else {
        return Err(CliError::Usage("exactly one --samples file is required".into()));
    };
    let values = read_dense(path)?;
    if values.len() != expected {
        return Err(CliError::Usage(format!(
            "{} holds {} samples, the scheme takes {expected}",
            path.display(),
            values.len()
        )));
    }
    Ok(CVector::from_vec(values))
}

fn read_sequence(path: &Path) -> Result<FiniteSequence, CliError> {
    let entries = read_vector(path)?;
    let Some(&(offset, _)) = entries.first() else {
        return Ok(FiniteSequence::zero());
    };
    if entries.iter().enumerate().any(|(i, (k, _))| *k != offset + i as i64) {
        return Err(CliError::Usage(format!("{}: indices must be consecutive", path.display())));
    }
    Ok(FiniteSequence::new(offset, entries.into_iter().map(|(_, z)| z).collect())?)
}

/// Relative residual against the ground truth; flags values above `tol`.
fn report_residual(error: f64, scale: f64, tol: f64) -> bool {
    let residual = if scale > 0.0 { error / scale } else { error };
    let ok = residual <= tol;
    println!("residual {}{}", num(residual), if ok { "" } else { " FLAGGED: samples inconsistent with the truth" });
    ok
}

fn emit_reconstruction(out: Option<&Path>, x: &CVector) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_vector(path, x.iter().enumerate().map(|(i, &z)| (i as i64, z)))?;
            println!("wrote {}", path.display());
        }
        None => print_vector("x", x),
    }
    Ok(())
}

pub fn reconstruct_cmd(opts: &Options, samples: &[PathBuf], truth: &[PathBuf]) -> Result<bool, CliError> {
    let truth_vector = |dim: usize| -> Result<Option<CVector>, CliError> {
        match truth {
            [] => Ok(None),
            [path] => {
                let v = read_dense(path)?;
                if v.len() != dim {
                    return Err(CliError::Usage(format!("{} has length {}, expected {dim}", path.display(), v.len())));
                }
                Ok(Some(CVector::from_vec(v)))
            }
            _ => Err(CliError::Usage("at most one --truth file is accepted for this model".into())),
        }
    };
    match opts.problem()? {
        Problem::Cyclic(p) => {
            let y = dense_samples(samples, p.scheme.sample_count())?;
            let Some((hs, _)) = cyclic_inverse(&p, None)? else {
                return Ok(false);
            };
            let basis = reconstruction_vectors(&p.subspace, &hs)?;
            let x = reconstruct(&p.subspace, &p.scheme, &basis, &y)?;
            emit_reconstruction(opts.out.as_deref(), &x)?;
            match truth_vector(x.len())? {
                Some(t) => Ok(report_residual((&x - &t).norm(), t.norm(), opts.tol)),
                None => Ok(true),
            }
        }
        Problem::Lca(s) => {
            let y = dense_samples(samples, s.samplers().len() * s.sample_subgroup().order())?;
            let d = match s.dual(None) {
                Err(e @ Error::NotAFrame { .. }) => {
                    println!("not recoverable: {e}");
                    return Ok(false);
                }
                other => other?,
            };
            let x = s.reconstruct(&s.reconstruction_vectors(&d)?, &y)?;
            emit_reconstruction(opts.out.as_deref(), &x)?;
            match truth_vector(x.len())? {
                Some(t) => Ok(report_residual((&x - &t).norm(), t.norm(), opts.tol)),
                None => Ok(true),
            }
        }
        Problem::Shift(p) => {
            let field = spectral_field(opts, &p)?;
            if samples.len() != field.samplers() {
                return Err(CliError::Usage(format!(
                    "{} --samples files given, one per sampler ({}) is required",
                    samples.len(),
                    field.samplers()
                )));
            }
            let ys = samples.iter().map(|p| read_sequence(p)).collect::<Result<Vec<_>, _>>()?;
            let (_, coeffs) = match shift_coefficients(&field, None, opts.tol) {
                Err(CliError::Core(e @ Error::NotAFrame { .. })) => {
                    println!("not recoverable: {e}");
                    return Ok(false);
                }
                other => other?,
            };
            let mut alphas = Vec::new();
            for l in 0..field.generators() {
                let filters: Vec<FiniteSequence> = coeffs.sequences.iter().map(|row| row[l].clone()).collect();
                let bank = FilterBank::new(p.r, filters.clone(), filters)?;
                alphas.push(bank.synthesis(&ys)?.trimmed());
            }
            for (l, alpha) in alphas.iter().enumerate() {
                match &opts.out {
                    Some(out) => {
                        let path = derived_path(out, &format!("_alpha{}", l + 1));
                        write_vector(&path, alpha.indices().map(|n| (n, alpha.get(n))))?;
                        println!("wrote {}", path.display());
                    }
                    None => print_sequence(&format!("alpha_{}", l + 1), alpha),
                }
            }
            if truth.is_empty() {
                return Ok(true);
            }
            if truth.len() != alphas.len() {
                return Err(CliError::Usage("one --truth file per generator is required".into()));
            }
            let mut error = 0.0;
            let mut scale = 0.0;
            for (alpha, path) in alphas.iter().zip(truth) {
                let t = read_sequence(path)?;
                error += alpha.sub(&t).norm_squared();
                scale += t.norm_squared();
            }
            Ok(report_residual(error.sqrt(), scale.sqrt(), opts.tol))
        }
    }
}

pub fn spline_demo(k: usize, p: usize, opts: &Options) -> Result<bool, CliError> {
    if k % 2 == 0 || p == 0 {
        return Err(CliError::Usage("K must be odd and p positive".into()));
    }
    let m = bspline(k, p)?;
    println!("discrete B-spline M_{p} with node spacing K = {k}:");
    for n in -m.half_support()..=m.half_support() {
        println!("  M({n}) = {}", m.value(n));
    }
    let g1 = polyphase_sample(&m, 0)?;
    let g2 = polyphase_sample(&m, 1)?;
    println!("G1(z) = {g1}");
    println!("G2(z) = {g2}");
    let (h1, h2) = match bezout(&g1, &g2) {
        Err(Error::NotCoprime { factor }) => {
            println!("G1 and G2 are not coprime: common factor {factor}");
            return Ok(false);
        }
        other => other?,
    };
    println!("H1(z) = {h1}");
    println!("H2(z) = {h2}");
    let residual = bezout_residual(&g1, &g2, &h1, &h2);
    println!("G1 H1 + G2 H2 - 1 = {residual}");

    let grid = opts.grid.unwrap_or(4096);
    let bank = SplineBank::new(k, p)?;
    let pr = perfect_reconstruction_check(&bank.bank, grid, PR_TRIALS, DEMO_SEED)?;
    println!(
        "perfect reconstruction: torus residual {}, round trip error {} over {} sequences, {}",
        num(pr.max_residual),
        num(pr.round_trip_error),
        pr.trials,
        if pr.pass { "pass" } else { "fail" }
    );
    let cert = positivity_certificate(&g1, grid)?;
    println!(
        "positivity of g(w): min {} at w = {} on {grid} points, {}",
        num(cert.min_value),
        num(cert.argmin),
        if cert.strictly_positive { "strictly positive" } else { "not positive" }
    );
    Ok(residual.is_zero() && pr.pass)
}

pub fn pr_check(opts: &Options) -> Result<bool, CliError> {
    let Problem::Shift(p) = opts.problem()? else {
        return Err(CliError::Usage("pr-check needs a shift model with analysis_* and synthesis_* sequences".into()));
    };
    if p.analysis.is_empty() {
        return Err(CliError::Usage("the problem file has no analysis_*/synthesis_* sequences".into()));
    }
    let fb = FilterBank::new(p.r, p.analysis, p.synthesis).map_err(usage)?;
    let poly = fb.polyphase();
    for (j, row) in poly.h.iter().enumerate() {
        for (k, seq) in row.iter().enumerate() {
            print_sequence(&format!("H_{},{}(z)", j + 1, k), seq);
        }
    }
    for (k, row) in poly.g.iter().enumerate() {
        for (j, seq) in row.iter().enumerate() {
            print_sequence(&format!("G_{},{}(z)", k, j + 1), seq);
        }
    }
    let grid = opts.grid.unwrap_or(4096);
    let report = perfect_reconstruction_check(&fb, grid, PR_TRIALS, DEMO_SEED)?;
    println!("torus residual max |G(z)H(z) - I| = {} on {grid} points", num(report.max_residual));
    println!("round trip relative error = {} over {} sequences", num(report.round_trip_error), report.trials);
    println!("{}", if report.pass { "perfect reconstruction" } else { "not perfect reconstruction" });
    Ok(report.pass)
}

/// `ℤ2 × ℤ2` translations on `ℂ⁴` sampled on `{(0,0), (1,0)}` by two deltas.
pub fn default_lca() -> Result<GroupSampling, CliError> {
    let group = FiniteAbelianGroup::new(vec![2, 2])?;
    let h = Subgroup::generate(&group, vec![vec![1, 0], vec![0, 1]])?;
    let rep = GroupRepresentation::regular(group, h)?;
    let real = |v: &[f64]| CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)));
    let a = real(&[1.0, 0.5, 0.25, 0.125]);
    let samplers = vec![real(&[1.0, 0.0, 0.0, 0.0]), real(&[0.0, 1.0, 0.0, 0.0])];
    Ok(GroupSampling::new(rep, a, samplers, vec![vec![1, 0]])?)
}

pub fn lca_demo(opts: &Options) -> Result<bool, CliError> {
    let s = match &opts.input {
        None => default_lca()?,
        Some(_) => match opts.problem()? {
            Problem::Lca(s) => *s,
            _ => return Err(CliError::Usage("lca-demo needs an lca model".into())),
        },
    };
    let (alpha, beta) = describe_lca(&s);
    println!("α_G = {}, β_G = {}", num(alpha), num(beta));
    for (j, values) in s.g_values().iter().enumerate() {
        let cells: Vec<String> = values.iter().map(|z| cnum(*z)).collect();
        println!("G_{}: {}", j + 1, cells.join(", "));
    }
    let d = match s.dual(None) {
        Err(e @ Error::NotAFrame { .. }) => {
            println!("not recoverable: {e}");
            return Ok(false);
        }
        other => other?,
    };
    println!("dual residual = {}", num(d.max_residual));
    let c = s.reconstruction_vectors(&d)?;
    emit_vectors(opts.out.as_deref(), &c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEMO_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x = s.synthesize(&random_vector(&mut rng, s.orbit_matrix().ncols()))?;
        let back = s.reconstruct(&c, &s.samples(&x)?)?;
        worst = worst.max((back - &x).norm() / x.norm());
    }
    let mut ok = worst <= opts.tol;
    println!("round trip relative error over 10 elements = {} ({})", num(worst), if ok { "pass" } else { "fail" });
    if s.samplers().len() == s.r() {
        let table = c.iter().map(|cj| s.samples(cj)).collect::<Result<Vec<_>, _>>()?;
        ok &= interpolation_table(&table, s.sample_subgroup().order(), opts.tol);
    }
    Ok(ok)
}
