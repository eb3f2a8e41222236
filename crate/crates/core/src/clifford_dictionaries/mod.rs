//! Dictionaries of Clifford columns for l1 minimization, and their cache files.

mod cache;
mod codes;

use std::collections::HashSet;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

pub use cache::{cache_dir, cache_path, load_dictionary, load_or_build, save_dictionary, CACHE_ENV};
pub use codes::{
    diag_code_to_vector, diagonal_count, enumerate_diagonal, enumerate_real_diagonal, i_power, pair_count,
    pair_index, real_diagonal_count, DiagonalCliffordCode, DiagonalCodeStream, MAX_CODE_QUBITS,
    MAX_DIAGONAL_STREAM_QUBITS, MAX_REAL_DIAGONAL_STREAM_QUBITS,
};

use crate::binary_symplectic::{enumerate_clifford_classes, CliffordId};
use crate::error::{Error, Result};
use crate::l1_solver::ColumnSource;
use crate::operator::{canonical_phase, exact_key, DenseOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DictionaryKind {
    Full,
    Real,
    Diagonal,
    RealDiagonal,
    TranspositionInvariant,
    PermutationInvariant,
    Custom,
}

impl DictionaryKind {
    pub fn tag(self) -> u8 {
        match self {
            DictionaryKind::Full => 0,
            DictionaryKind::Real => 1,
            DictionaryKind::Diagonal => 2,
            DictionaryKind::RealDiagonal => 3,
            DictionaryKind::TranspositionInvariant => 4,
            DictionaryKind::PermutationInvariant => 5,
            DictionaryKind::Custom => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => DictionaryKind::Full,
            1 => DictionaryKind::Real,
            2 => DictionaryKind::Diagonal,
            3 => DictionaryKind::RealDiagonal,
            4 => DictionaryKind::TranspositionInvariant,
            5 => DictionaryKind::PermutationInvariant,
            6 => DictionaryKind::Custom,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            DictionaryKind::Full => "full",
            DictionaryKind::Real => "real",
            DictionaryKind::Diagonal => "diagonal",
            DictionaryKind::RealDiagonal => "real-diagonal",
            DictionaryKind::TranspositionInvariant => "transposition-invariant",
            DictionaryKind::PermutationInvariant => "permutation-invariant",
            DictionaryKind::Custom => "custom",
        }
    }

    /// Columns hold only the diagonal.
    pub fn is_diagonal(self) -> bool {
        matches!(self, DictionaryKind::Diagonal | DictionaryKind::RealDiagonal)
    }
}

/// How column coordinates relate to operator entries.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// The `2^n` diagonal entries.
    Diagonal,
    /// Row-major vectorization, `4^n` entries.
    Vectorized,
    /// One coordinate per orbit `O` of basis indices: the (constant) diagonal
    /// value on `O` times `sqrt(|O|)`. This keeps inner products equal to
    /// those of the full diagonals.
    OrbitAveraged { orbits: Vec<Vec<usize>> },
}

/// Provenance of a column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ColumnId {
    Diagonal(DiagonalCliffordCode),
    Clifford(CliffordId),
    /// Column of a reduced dictionary; see the accompanying orbit map.
    Reduced(usize),
}

#[derive(Clone, Debug)]
enum Store {
    /// Powers of `i`, column-major.
    Symbols(Vec<u8>),
    Dense(Vec<Complex64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DictionaryMetadata {
    pub generator: String,
    pub checksum: [u8; 32],
}

/// A set of distinct columns plus their provenance.
#[derive(Clone, Debug)]
pub struct Dictionary {
    kind: DictionaryKind,
    n: usize,
    layout: Layout,
    dim: usize,
    store: Store,
    real: bool,
    ids: Vec<ColumnId>,
    metadata: DictionaryMetadata,
}

/// Materialization limits; exceeding them is an error that points to
/// streaming or weak reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DictionaryCaps {
    pub diagonal: usize,
    pub real_diagonal: usize,
    pub full: usize,
}

impl Default for DictionaryCaps {
    fn default() -> Self {
        DictionaryCaps { diagonal: 5, real_diagonal: 6, full: 2 }
    }
}

impl Dictionary {
    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn ids(&self) -> &[ColumnId] {
        &self.ids
    }

    pub fn metadata(&self) -> &DictionaryMetadata {
        &self.metadata
    }

    pub fn checksum_hex(&self) -> String {
        self.metadata.checksum.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Dictionary over diagonal codes, in the given order.
    pub fn from_codes(kind: DictionaryKind, n: usize, codes: &[DiagonalCliffordCode], generator: &str) -> Result<Self> {
        if codes.iter().any(|c| c.n() != n) {
            return Err(Error::InvalidInput("code qubit count mismatch".into()));
        }
        let dim = 1usize << n;
        let mut data = vec![0u8; dim * codes.len()];
        for (c, out) in codes.iter().zip(data.chunks_mut(dim)) {
            c.fill_exponents(out);
        }
        let real = codes.iter().all(|c| c.is_real());
        let mut d = Dictionary {
            kind,
            n,
            layout: Layout::Diagonal,
            dim,
            store: Store::Symbols(data),
            real,
            ids: codes.iter().map(|&c| ColumnId::Diagonal(c)).collect(),
            metadata: DictionaryMetadata { generator: generator.to_string(), checksum: [0; 32] },
        };
        d.metadata.checksum = d.compute_checksum();
        Ok(d)
    }

    /// Dictionary with explicit dense columns (used for reduced dictionaries).
    pub fn from_dense(
        kind: DictionaryKind,
        n: usize,
        layout: Layout,
        columns: Vec<Vec<Complex64>>,
        ids: Vec<ColumnId>,
        generator: &str,
    ) -> Result<Self> {
        if columns.len() != ids.len() || columns.is_empty() {
            return Err(Error::InvalidInput("need one id per column and at least one column".into()));
        }
        let dim = columns[0].len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidInput("columns differ in length".into()));
        }
        let real = columns.iter().flatten().all(|z| z.im == 0.0);
        let mut d = Dictionary {
            kind,
            n,
            layout,
            dim,
            store: Store::Dense(columns.into_iter().flatten().collect()),
            real,
            ids,
            metadata: DictionaryMetadata { generator: generator.to_string(), checksum: [0; 32] },
        };
        d.metadata.checksum = d.compute_checksum();
        Ok(d)
    }

    fn from_cliffords(kind: DictionaryKind, n: usize, items: Vec<(CliffordId, DenseOperator)>) -> Result<Self> {
        let ids = items.iter().map(|(id, _)| ColumnId::Clifford(*id)).collect();
        let cols: Vec<Vec<Complex64>> = items.iter().map(|(_, u)| clean(u.vectorize())).collect();
        Self::from_dense(kind, n, Layout::Vectorized, cols, ids, &format!("{}:n={n}", kind.name()))
    }

    /// Column `j` as complex values.
    pub fn column_values(&self, j: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.column(j, &mut out);
        out
    }

    /// The operator represented by column `j`.
    pub fn column_operator(&self, j: usize) -> DenseOperator {
        let v = self.column_values(j);
        match &self.layout {
            Layout::Diagonal => DenseOperator::from_diagonal(&v).expect("power of two"),
            Layout::Vectorized => DenseOperator::from_entries(v).expect("square"),
            Layout::OrbitAveraged { orbits } => {
                let mut diag = vec![Complex64::new(0.0, 0.0); 1 << self.n];
                for (o, val) in orbits.iter().zip(&v) {
                    let s = val / (o.len() as f64).sqrt();
                    for &x in o {
                        diag[x] = s;
                    }
                }
                DenseOperator::from_diagonal(&diag).expect("power of two")
            }
        }
    }

    /// Coordinates of `u` in this dictionary's layout. Fails when `u` has
    /// weight outside the represented subspace (beyond `tol`).
    pub fn embed(&self, u: &DenseOperator, tol: f64) -> Result<Vec<Complex64>> {
        if u.n() != self.n {
            return Err(Error::InvalidInput(format!("target has {} qubits, dictionary {}", u.n(), self.n)));
        }
        match &self.layout {
            Layout::Vectorized => Ok(u.vectorize()),
            Layout::Diagonal => {
                if !u.is_diagonal(tol) {
                    return Err(Error::Capability("diagonal dictionary needs a diagonal target".into()));
                }
                Ok(u.diagonal())
            }
            Layout::OrbitAveraged { orbits } => {
                if !u.is_diagonal(tol) {
                    return Err(Error::Capability("reduced diagonal dictionary needs a diagonal target".into()));
                }
                let d = u.diagonal();
                let mut out = Vec::with_capacity(orbits.len());
                for o in orbits {
                    let mean: Complex64 = o.iter().map(|&x| d[x]).sum::<Complex64>() / o.len() as f64;
                    if o.iter().any(|&x| (d[x] - mean).norm() > tol) {
                        return Err(Error::Capability("target is not invariant under the reduction group".into()));
                    }
                    out.push(mean * (o.len() as f64).sqrt());
                }
                Ok(out)
            }
        }
    }

    fn compute_checksum(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        match self.kind {
            k if k.is_diagonal() && self.layout == Layout::Diagonal => {
                h.update(cache::encode_body(self).expect("diagonal body"));
            }
            DictionaryKind::Custom => {
                match &self.store {
                    Store::Symbols(s) => h.update(s),
                    Store::Dense(v) => {
                        for z in v {
                            h.update(z.re.to_le_bytes());
                            h.update(z.im.to_le_bytes());
                        }
                    }
                }
            }
            _ => match cache::encode_body(self) {
                Ok(body) => h.update(body),
                Err(_) => {
                    if let Store::Dense(v) = &self.store {
                        for z in v {
                            h.update(z.re.to_le_bytes());
                            h.update(z.im.to_le_bytes());
                        }
                    }
                }
            },
        }
        h.finalize().into()
    }
}

fn clean(v: Vec<Complex64>) -> Vec<Complex64> {
    v.into_iter()
        .map(|z| {
            let r = if z.re.abs() < 1e-14 { 0.0 } else { z.re };
            let i = if z.im.abs() < 1e-14 { 0.0 } else { z.im };
            Complex64::new(r, i)
        })
        .collect()
}

impl ColumnSource for Dictionary {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.ids.len()
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn column(&self, j: usize, out: &mut [Complex64]) {
        let d = self.dim;
        match &self.store {
            Store::Symbols(s) => {
                for (o, &k) in out.iter_mut().zip(&s[j * d..(j + 1) * d]) {
                    *o = i_power(k);
                }
            }
            Store::Dense(v) => out.copy_from_slice(&v[j * d..(j + 1) * d]),
        }
    }
}

/// Phase-canonical real Clifford classes by closure of `{Z_j, H_j, CNOT_jk}`.
pub fn enumerate_real_clifford(n: usize) -> Result<Vec<DenseOperator>> {
    if n == 0 || n > 2 {
        return Err(Error::SizeLimit("real Clifford closure supports 1 <= n <= 2".into()));
    }
    let z = DenseOperator::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])?;
    let h = {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DenseOperator::from_rows(&[
            vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ])?
    };
    let i1 = DenseOperator::identity(1);
    let on_qubit = |g: &DenseOperator, j: usize| -> DenseOperator {
        let mut m = DenseOperator::identity(0);
        for q in 0..n {
            m = m.kron(if q == j { g } else { &i1 });
        }
        m
    };
    let mut gens = Vec::new();
    for j in 0..n {
        gens.push(on_qubit(&z, j));
        gens.push(on_qubit(&h, j));
    }
    for c in 0..n {
        for t in 0..n {
            if c != t {
                let d = 1usize << n;
                let mut m = DenseOperator::zeros(n);
                for x in 0..d {
                    let y = if crate::operator::qubit_bit(x, n, c) == 1 { x ^ (1 << (n - 1 - t)) } else { x };
                    m.set(y, x, Complex64::new(1.0, 0.0));
                }
                gens.push(m);
            }
        }
    }
    let id = DenseOperator::identity(n);
    let mut seen = HashSet::from([exact_key(id.entries())?]);
    let mut out = vec![id.clone()];
    let mut frontier = vec![id];
    while let Some(u) = frontier.pop() {
        for g in &gens {
            let v = canonical_phase(&g.matmul(&u)?)?;
            let v = DenseOperator::from_entries(clean(v.vectorize()))?;
            if seen.insert(exact_key(v.entries())?) {
                out.push(v.clone());
                frontier.push(v);
            }
        }
    }
    Ok(out)
}

/// Predicate for [`filter_invariant`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariancePredicate {
    /// `C = C^T` on the canonical representative.
    Symmetric,
    /// `P C P^dagger = C` for every qubit transposition `P`.
    SwapConjugationInvariant,
}

pub fn filter_invariant(full: &Dictionary, predicate: InvariancePredicate) -> Result<Dictionary> {
    if full.kind != DictionaryKind::Full {
        return Err(Error::InvalidInput("filter_invariant needs a Full dictionary".into()));
    }
    let n = full.n;
    let mut keep = Vec::new();
    for (j, id) in full.ids.iter().enumerate() {
        let c = full.column_operator(j);
        let ok = match predicate {
            InvariancePredicate::Symmetric => c.max_abs_diff(&c.transpose()) < 1e-12,
            InvariancePredicate::SwapConjugationInvariant => (0..n).all(|a| {
                ((a + 1)..n).all(|b| {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.swap(a, b);
                    c.max_abs_diff(&c.conjugate_by_permutation(&perm)) < 1e-12
                })
            }),
        };
        if ok {
            if let ColumnId::Clifford(cid) = id {
                keep.push((*cid, c));
            }
        }
    }
    let kind = match predicate {
        InvariancePredicate::Symmetric => DictionaryKind::TranspositionInvariant,
        InvariancePredicate::SwapConjugationInvariant => DictionaryKind::PermutationInvariant,
    };
    Dictionary::from_cliffords(kind, n, keep)
}

pub fn build_dictionary(kind: DictionaryKind, n: usize) -> Result<Dictionary> {
    build_dictionary_with_caps(kind, n, &DictionaryCaps::default())
}

pub fn build_dictionary_with_caps(kind: DictionaryKind, n: usize, caps: &DictionaryCaps) -> Result<Dictionary> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let over = |cap: usize| {
        Error::SizeLimit(format!(
            "{} dictionary at n = {n} exceeds the materialization cap n <= {cap}; use weak reduction or a streamed solve",
            kind.name()
        ))
    };
    match kind {
        DictionaryKind::Diagonal => {
            if n > caps.diagonal {
                return Err(over(caps.diagonal));
            }
            let codes: Vec<_> = enumerate_diagonal(n)?.collect();
            debug_assert_eq!(codes.len() as u64, diagonal_count(n));
            Dictionary::from_codes(kind, n, &codes, &format!("diagonal:n={n}"))
        }
        DictionaryKind::RealDiagonal => {
            if n > caps.real_diagonal {
                return Err(over(caps.real_diagonal));
            }
            let codes: Vec<_> = enumerate_real_diagonal(n)?.collect();
            Dictionary::from_codes(kind, n, &codes, &format!("real-diagonal:n={n}"))
        }
        DictionaryKind::Full | DictionaryKind::Real => {
            if n > caps.full {
                return Err(over(caps.full));
            }
            let mut items = enumerate_clifford_classes(n)?;
            if kind == DictionaryKind::Real {
                items.retain(|(_, u)| u.max_imag() < 1e-12);
                for (_, u) in items.iter_mut() {
                    *u = DenseOperator::from_entries(u.entries().iter().map(|z| Complex64::new(z.re, 0.0)).collect())?;
                }
            }
            Dictionary::from_cliffords(kind, n, items)
        }
        DictionaryKind::TranspositionInvariant | DictionaryKind::PermutationInvariant => {
            if n > caps.full {
                return Err(over(caps.full));
            }
            let full = build_dictionary_with_caps(DictionaryKind::Full, n, caps)?;
            let pred = if kind == DictionaryKind::TranspositionInvariant {
                InvariancePredicate::Symmetric
            } else {
                InvariancePredicate::SwapConjugationInvariant
            };
            filter_invariant(&full, pred)
        }
        DictionaryKind::Custom => Err(Error::InvalidInput("custom dictionaries are built by reduction".into())),
    }
}
