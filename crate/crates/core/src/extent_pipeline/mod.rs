//! End-to-end extent computation and the analyses built on it.
//!
//! `compute_extent` detects the symmetries of a target, picks the smallest
//! Clifford dictionary that still contains an optimal decomposition,
//! optionally collapses it by permutation twirls, solves the l1 problem and
//! checks the dual certificate.

mod analyses;
mod export;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use num_complex::Complex64;

pub use analyses::{
    cz_category_study, property_suite, qft_report, runtime_exponent, submultiplicativity_report,
    synthesis_lower_bound, sweep, t_count_extent, Block, BlockRow, CategoryRow, CheckResult, GateFamily,
    PropertyReport, QftReport, SubmultiplicativityReport, SweepTable, TCountExtent, KNOWN_QFT_U4_EXTENT,
};
pub use export::{
    export_state_decomposition, DecompositionJson, ReductionJson, StateDecomposition, StateTerm, TermJson,
};

use crate::binary_symplectic::CliffordId;
use crate::clifford_dictionaries::{
    build_dictionary_with_caps, load_or_build, ColumnId, DiagonalCliffordCode, DiagonalCodeStream, Dictionary,
    DictionaryCaps, DictionaryKind,
};
use crate::error::{Error, Result};
use crate::l1_solver::{self, verify_certificate, ColumnSource, L1Problem, L1Solution, SolverConfig};
use crate::operator::DenseOperator;
use crate::symmetry_reduction::{
    detect_symmetries, generate_group, weak_reduce, CodeSource, OrbitMap, Permutation, SymmetryProfile,
    WeakReduceOptions, DEFAULT_DETECTION_TOLERANCE,
};

/// Which dictionary to solve over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictionaryChoice {
    Auto,
    Full,
    Real,
    Diagonal,
    RealDiagonal,
    TranspositionInvariant,
    PermutationInvariant,
}

impl DictionaryChoice {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => DictionaryChoice::Auto,
            "full" => DictionaryChoice::Full,
            "real" => DictionaryChoice::Real,
            "diagonal" => DictionaryChoice::Diagonal,
            "real-diagonal" => DictionaryChoice::RealDiagonal,
            "transposition-invariant" => DictionaryChoice::TranspositionInvariant,
            "permutation-invariant" => DictionaryChoice::PermutationInvariant,
            _ => return Err(Error::InvalidInput(format!("unknown dictionary '{s}'"))),
        })
    }
}

/// Weak reduction policy; only applies to diagonal dictionaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakReduction {
    /// Use the detected permutation group when it is nontrivial.
    Auto,
    Off,
    /// Generators of a group the target is known to be invariant under.
    Subgroup(Vec<Permutation>),
}

#[derive(Clone, Debug)]
pub struct ExtentOptions {
    pub dictionary: DictionaryChoice,
    pub weak_reduce: WeakReduction,
    pub solver: SolverConfig,
    pub caps: DictionaryCaps,
    /// Allows streamed diagonal solves one qubit beyond the caps.
    pub extended: bool,
    /// Restrict diagonal dictionaries to these CZ counts.
    pub categories: Option<Vec<u32>>,
    pub merge_categories: bool,
    pub detection_tolerance: f64,
    /// Expand the decomposition to original dictionary members.
    pub decompose: bool,
    /// Directory for persistent dictionary files; `None` keeps them in memory.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExtentOptions {
    fn default() -> Self {
        ExtentOptions {
            dictionary: DictionaryChoice::Auto,
            weak_reduce: WeakReduction::Auto,
            solver: SolverConfig::default(),
            caps: DictionaryCaps::default(),
            extended: false,
            categories: None,
            merge_categories: false,
            detection_tolerance: DEFAULT_DETECTION_TOLERANCE,
            decompose: true,
            cache_dir: None,
        }
    }
}

/// Original-dictionary identifier of a decomposition term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermId {
    Diagonal(DiagonalCliffordCode),
    Clifford(CliffordId),
}

impl TermId {
    pub fn operator(&self, n: usize) -> Result<DenseOperator> {
        match self {
            TermId::Diagonal(c) => Ok(c.to_operator()),
            TermId::Clifford(id) => id.unitary(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionInfo {
    pub group_order: usize,
    pub generators: Vec<Permutation>,
    pub reduced_columns: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateStatus {
    Verified,
    Failed,
    Unverified,
}

#[derive(Clone, Debug)]
pub struct Timings {
    pub dictionary: Duration,
    pub solve: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug)]
pub struct ExtentResult {
    pub n: usize,
    pub target: String,
    pub target_matrix: DenseOperator,
    pub dictionary: DictionaryKind,
    pub dictionary_columns: usize,
    pub dictionary_checksum: String,
    pub reduction: Option<ReductionInfo>,
    pub profile: SymmetryProfile,
    pub extent: f64,
    pub l1: f64,
    pub residual: f64,
    pub certificate: CertificateStatus,
    pub solution: L1Solution,
    pub timings: Timings,
    /// Terms over the original dictionary; empty when not requested.
    pub decomposition: Vec<(TermId, Complex64)>,
    pub warnings: Vec<String>,
}

impl ExtentResult {
    /// `sum_k x_k C_k` as a dense operator.
    pub fn reconstruct(&self) -> Result<DenseOperator> {
        let mut acc = DenseOperator::zeros(self.n);
        for (id, x) in &self.decomposition {
            acc = acc.add(&id.operator(self.n)?.scale(*x))?;
        }
        Ok(acc)
    }
}

/// Shared in-memory dictionaries, keyed by their construction parameters.
enum CachedDict {
    Plain(Arc<Dictionary>),
    Reduced(Arc<(Dictionary, OrbitMap)>),
}

fn memo() -> &'static Mutex<HashMap<String, Arc<CachedDict>>> {
    static M: OnceLock<Mutex<HashMap<String, Arc<CachedDict>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memoized(key: String, build: impl FnOnce() -> Result<CachedDict>) -> Result<Arc<CachedDict>> {
    if let Some(d) = memo().lock().expect("poisoned").get(&key) {
        return Ok(d.clone());
    }
    let d = Arc::new(build()?);
    memo().lock().expect("poisoned").insert(key, d.clone());
    Ok(d)
}

/// Drops every in-memory dictionary.
pub fn clear_dictionary_memo() {
    memo().lock().expect("poisoned").clear();
}

fn plain_dictionary(kind: DictionaryKind, n: usize, opts: &ExtentOptions) -> Result<Arc<Dictionary>> {
    let key = format!("plain:{}:{n}:{:?}", kind.name(), opts.caps);
    let d = memoized(key, || {
        let d = match &opts.cache_dir {
            Some(dir) if kind != DictionaryKind::Custom => load_or_build(dir, kind, n, &opts.caps)?,
            _ => build_dictionary_with_caps(kind, n, &opts.caps)?,
        };
        Ok(CachedDict::Plain(Arc::new(d)))
    })?;
    match &*d {
        CachedDict::Plain(d) => Ok(d.clone()),
        CachedDict::Reduced(_) => unreachable!("key prefix"),
    }
}

fn reduced_dictionary(
    kind: DictionaryKind,
    n: usize,
    gens: &[Permutation],
    opts: &ExtentOptions,
) -> Result<Arc<(Dictionary, OrbitMap)>> {
    let group = generate_group(n, gens)?;
    let key = format!("reduced:{}:{n}:{group:?}:{:?}:{}", kind.name(), opts.categories, opts.merge_categories);
    let d = memoized(key, || {
        let source = if kind == DictionaryKind::RealDiagonal { CodeSource::RealDiagonal(n) } else { CodeSource::Diagonal(n) };
        let wopts = WeakReduceOptions { merge_categories: opts.merge_categories, categories: opts.categories.clone() };
        Ok(CachedDict::Reduced(Arc::new(weak_reduce(source, gens, &wopts)?)))
    })?;
    match &*d {
        CachedDict::Reduced(r) => Ok(r.clone()),
        CachedDict::Plain(_) => unreachable!("key prefix"),
    }
}

fn choose_kind(profile: &SymmetryProfile, opts: &ExtentOptions) -> Result<DictionaryKind> {
    let n = profile.n;
    let kind = match opts.dictionary {
        DictionaryChoice::Auto => match (profile.is_real, profile.is_diagonal) {
            (true, true) => DictionaryKind::RealDiagonal,
            (false, true) => DictionaryKind::Diagonal,
            (true, false) => DictionaryKind::Real,
            (false, false) => DictionaryKind::Full,
        },
        DictionaryChoice::Full => DictionaryKind::Full,
        DictionaryChoice::Real => DictionaryKind::Real,
        DictionaryChoice::Diagonal => DictionaryKind::Diagonal,
        DictionaryChoice::RealDiagonal => DictionaryKind::RealDiagonal,
        DictionaryChoice::TranspositionInvariant => DictionaryKind::TranspositionInvariant,
        DictionaryChoice::PermutationInvariant => DictionaryKind::PermutationInvariant,
    };
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Capability(format!("{} dictionary needs a {what} target", kind.name())))
        }
    };
    match kind {
        DictionaryKind::Real => need(profile.is_real, "real")?,
        DictionaryKind::Diagonal => need(profile.is_diagonal, "diagonal")?,
        DictionaryKind::RealDiagonal => need(profile.is_real && profile.is_diagonal, "real diagonal")?,
        _ => {}
    }
    if !kind.is_diagonal() && n > opts.caps.full {
        return Err(Error::Capability(format!(
            "no dictionary available for a {} target on {n} qubits: only real, diagonal or real-diagonal targets are supported beyond n = {}",
            if profile.is_real { "real non-diagonal" } else { "non-diagonal" },
            opts.caps.full
        )));
    }
    Ok(kind)
}

/// Columns plus a way back to original dictionary ids.
enum Prepared {
    Plain(Arc<Dictionary>),
    Reduced(Arc<(Dictionary, OrbitMap)>, ReductionInfo),
    Streamed(DiagonalCodeStream, DictionaryKind),
}

impl Prepared {
    fn columns(&self) -> &dyn ColumnSource {
        match self {
            Prepared::Plain(d) => d.as_ref(),
            Prepared::Reduced(r, _) => &r.0,
            Prepared::Streamed(s, _) => s,
        }
    }
}

/// Computes the stabilizer extent of `u`.
pub fn compute_extent(u: &DenseOperator, target: &str, opts: &ExtentOptions) -> Result<ExtentResult> {
    let t0 = Instant::now();
    let n = u.n();
    let mut warnings = Vec::new();
    if !u.is_unitary(1e-9) {
        warnings.push("target is not unitary; the extent may be below 1".to_string());
    }
    let profile = detect_symmetries(u, opts.detection_tolerance)?;
    let kind = choose_kind(&profile, opts)?;

    let generators: Option<Vec<Permutation>> = match (&opts.weak_reduce, kind.is_diagonal()) {
        (_, false) | (WeakReduction::Off, _) => None,
        (WeakReduction::Auto, true) => {
            if profile.has_permutation_symmetry() {
                Some(profile.permutation_subgroup.clone())
            } else {
                None
            }
        }
        (WeakReduction::Subgroup(g), true) => {
            for p in generate_group(n, g)? {
                if u.conjugate_by_permutation(&p).max_abs_diff(u) > opts.detection_tolerance {
                    return Err(Error::InvalidInput(format!("target is not invariant under the permutation {p:?}")));
                }
            }
            Some(g.clone())
        }
    };

    let cap = if kind == DictionaryKind::RealDiagonal { opts.caps.real_diagonal } else { opts.caps.diagonal };
    let prepared = match generators {
        Some(g) => {
            let r = reduced_dictionary(kind, n, &g, opts)?;
            let info = ReductionInfo {
                group_order: r.1.group().len(),
                generators: g,
                reduced_columns: r.0.len(),
            };
            Prepared::Reduced(r, info)
        }
        None if kind.is_diagonal() && opts.categories.is_some() => {
            let codes: Vec<DiagonalCliffordCode> = if kind == DictionaryKind::RealDiagonal {
                crate::clifford_dictionaries::enumerate_real_diagonal(n)?.collect()
            } else {
                crate::clifford_dictionaries::enumerate_diagonal(n)?.collect()
            };
            let cats = opts.categories.as_ref().expect("checked");
            let kept: Vec<_> = codes.into_iter().filter(|c| cats.contains(&c.cz_count())).collect();
            if kept.is_empty() {
                return Err(Error::InvalidInput("empty CZ category union".into()));
            }
            Prepared::Plain(Arc::new(Dictionary::from_codes(kind, n, &kept, &format!("{}:n={n}:cats={cats:?}", kind.name()))?))
        }
        None if kind.is_diagonal() && n > cap => {
            if opts.extended && n <= cap + 1 {
                Prepared::Streamed(DiagonalCodeStream::new(n, kind == DictionaryKind::RealDiagonal)?, kind)
            } else {
                return Err(Error::Capability(format!(
                    "{} dictionary at n = {n} exceeds the cap {cap} and the target has no permutation symmetry to reduce by",
                    kind.name()
                )));
            }
        }
        None => Prepared::Plain(plain_dictionary(kind, n, opts)?),
    };
    let t_dict = t0.elapsed();

    let (embed_target, checksum, columns_len) = match &prepared {
        Prepared::Plain(d) => (d.embed(u, opts.detection_tolerance)?, d.checksum_hex(), d.len()),
        Prepared::Reduced(r, _) => (r.0.embed(u, opts.detection_tolerance)?, r.0.checksum_hex(), r.0.len()),
        Prepared::Streamed(s, _) => (u.diagonal(), format!("stream:{}:n={n}", kind.name()), s.len()),
    };
    let cols = prepared.columns();
    let problem = L1Problem::with_natural_field(cols, embed_target)?;
    let t1 = Instant::now();
    let solution = match &prepared {
        Prepared::Streamed(..) => l1_solver::solve_streaming(cols, problem.target().to_vec(), &opts.solver)?,
        _ => l1_solver::solve(&problem, &opts.solver)?,
    };
    let t_solve = t1.elapsed();
    let certificate = match verify_certificate(&problem, &solution) {
        Ok(rep) => {
            let bnorm = problem.target().iter().map(|z| z.norm()).fold(0.0, f64::max);
            if rep.passes(1e-6, bnorm) {
                CertificateStatus::Verified
            } else {
                CertificateStatus::Failed
            }
        }
        Err(_) => CertificateStatus::Unverified,
    };

    let decomposition = if opts.decompose { decompose(&prepared, &solution, n)? } else { Vec::new() };
    let (dictionary, reduction) = match &prepared {
        Prepared::Plain(d) => (d.kind(), None),
        Prepared::Reduced(r, info) => (r.0.kind(), Some(info.clone())),
        Prepared::Streamed(_, k) => (*k, None),
    };
    Ok(ExtentResult {
        n,
        target: target.to_string(),
        target_matrix: u.clone(),
        dictionary,
        dictionary_columns: columns_len,
        dictionary_checksum: checksum,
        reduction,
        profile,
        extent: solution.extent,
        l1: solution.l1,
        residual: solution.residual,
        certificate,
        timings: Timings { dictionary: t_dict, solve: t_solve, total: t0.elapsed() },
        solution,
        decomposition,
        warnings,
    })
}

/// Largest number of original terms expanded from a reduced solution.
const MAX_EXPANDED_TERMS: usize = 1 << 22;

fn decompose(prepared: &Prepared, sol: &L1Solution, n: usize) -> Result<Vec<(TermId, Complex64)>> {
    match prepared {
        Prepared::Plain(d) => Ok(sol
            .coefficients
            .iter()
            .map(|&(j, x)| {
                let id = match d.ids()[j] {
                    ColumnId::Diagonal(c) => TermId::Diagonal(c),
                    ColumnId::Clifford(c) => TermId::Clifford(c),
                    ColumnId::Reduced(_) => unreachable!("plain dictionaries carry original ids"),
                };
                (id, x)
            })
            .collect()),
        Prepared::Streamed(s, _) => Ok(sol.coefficients.iter().map(|&(j, x)| (TermId::Diagonal(s.code(j)), x)).collect()),
        Prepared::Reduced(r, _) => {
            let map = &r.1;
            let bound: usize = sol
                .coefficients
                .iter()
                .map(|&(j, _)| map.representatives(j).len() * map.group().len())
                .sum();
            if bound > MAX_EXPANDED_TERMS {
                return Err(Error::SizeLimit(format!(
                    "expanding the reduced solution on {n} qubits could produce {bound} terms; disable decomposition"
                )));
            }
            Ok(crate::symmetry_reduction::expand_coefficients(sol, map)?
                .into_iter()
                .map(|(c, x)| (TermId::Diagonal(c), x))
                .collect())
        }
    }
}
