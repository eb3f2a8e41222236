//! Symmetry detection, strong-reduction projections, and weak reduction of
//! diagonal dictionaries by exact permutation twirls.
//!
//! The twirl of a diagonal code `D` over a permutation group `H` is
//! `|H|^{-1} sum_{p in H} P D P^dagger`. Its entry at `x` only depends on
//! how often each power of `i` occurs on the orbit of `x`, so twirls are
//! compared by those counts and never by floats.

pub mod canon;
pub mod counting;
pub mod permutation;

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clifford_dictionaries::{
    pair_count, ColumnId, DiagonalCliffordCode, Dictionary, DictionaryKind, Layout,
};
use crate::error::{Error, Result};
use crate::l1_solver::L1Solution;
use crate::operator::DenseOperator;

pub use canon::{enumerate_graph_classes, SubsetAction};
pub use counting::{burnside_orbit_count, orbit_counts_by_category};
pub use permutation::{basis_orbits, generate_group, symmetric_generators, symmetric_group, Permutation};

pub const DEFAULT_DETECTION_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryProfile {
    pub n: usize,
    pub is_real: bool,
    pub is_diagonal: bool,
    /// Generators: the qubit transpositions that leave the target invariant.
    pub permutation_subgroup: Vec<Permutation>,
    pub detection_tolerance: f64,
}

impl SymmetryProfile {
    /// Every element of the detected permutation group.
    pub fn group(&self) -> Result<Vec<Permutation>> {
        generate_group(self.n, &self.permutation_subgroup)
    }

    pub fn has_permutation_symmetry(&self) -> bool {
        !self.permutation_subgroup.is_empty()
    }
}

pub fn detect_symmetries(u: &DenseOperator, tol: f64) -> Result<SymmetryProfile> {
    let n = u.n();
    if n > permutation::MAX_GROUP_QUBITS {
        return Err(Error::SizeLimit(format!("symmetry detection supports n <= {}", permutation::MAX_GROUP_QUBITS)));
    }
    let mut gens = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let p = permutation::transposition(n, a, b);
            if u.conjugate_by_permutation(&p).max_abs_diff(u) <= tol {
                gens.push(p);
            }
        }
    }
    Ok(SymmetryProfile {
        n,
        is_real: u.max_imag() <= tol,
        is_diagonal: u.is_diagonal(tol),
        permutation_subgroup: gens,
        detection_tolerance: tol,
    })
}

/// Average over complex conjugation: the entrywise real part.
pub fn project_real(m: &DenseOperator) -> DenseOperator {
    DenseOperator::from_entries(m.entries().iter().map(|z| Complex64::new(z.re, 0.0)).collect()).expect("square")
}

/// Average over conjugation by `Z` strings: the diagonal part.
pub fn project_diagonal(m: &DenseOperator) -> DenseOperator {
    DenseOperator::from_diagonal(&m.diagonal()).expect("square")
}

pub fn project_real_diagonal(m: &DenseOperator) -> DenseOperator {
    project_real(&project_diagonal(m))
}

/// Twirl of a diagonal code as exact integer coefficients of `1, i, -1, -i`
/// per entry, over `denominator = |H|`. Opposite powers are cancelled, so
/// two twirls are equal as operators exactly when they compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwirledColumn {
    pub n: usize,
    pub numerators: Vec<[u32; 4]>,
    pub denominator: u32,
}

impl TwirledColumn {
    pub fn values(&self) -> Vec<Complex64> {
        self.numerators
            .iter()
            .map(|c| {
                let re = c[0] as f64 - c[2] as f64;
                let im = c[1] as f64 - c[3] as f64;
                Complex64::new(re, im) / self.denominator as f64
            })
            .collect()
    }
}

/// Precomputed orbit structure of one permutation group.
pub struct Twirler {
    n: usize,
    group: Vec<Permutation>,
    orbits: Vec<Vec<usize>>,
}

impl Twirler {
    pub fn new(n: usize, generators: &[Permutation]) -> Result<Self> {
        let group = generate_group(n, generators)?;
        let orbits = basis_orbits(n, &group);
        Ok(Twirler { n, group, orbits })
    }

    pub fn group(&self) -> &[Permutation] {
        &self.group
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    /// Per orbit, the real and imaginary parts of the summed entries
    /// (`c_0 - c_2`, `c_1 - c_3`), two bytes per orbit.
    fn key_into(&self, exps: &[u8], key: &mut Vec<u8>) {
        for o in &self.orbits {
            let mut c = [0i16; 4];
            for &x in o {
                c[exps[x] as usize] += 1;
            }
            key.push((c[0] - c[2]) as i8 as u8);
            key.push((c[1] - c[3]) as i8 as u8);
        }
    }

    pub fn twirl(&self, code: &DiagonalCliffordCode) -> TwirledColumn {
        let exps = code.exponents();
        let h = self.group.len() as u32;
        let mut numerators = vec![[0u32; 4]; 1 << self.n];
        for o in &self.orbits {
            let mut c = [0u32; 4];
            for &x in o {
                c[exps[x] as usize] += 1;
            }
            let w = h / o.len() as u32;
            let q = normalize(c).map(|v| v * w);
            for &x in o {
                numerators[x] = q;
            }
        }
        TwirledColumn { n: self.n, numerators, denominator: h }
    }

    /// Orbit-averaged coordinates of a key: the orbit sum over `sqrt|O|`.
    fn key_column(&self, key: &[u8]) -> Vec<Complex64> {
        self.orbits
            .iter()
            .zip(key.chunks(2))
            .map(|(o, c)| Complex64::new(c[0] as i8 as f64, c[1] as i8 as f64) / (o.len() as f64).sqrt())
            .collect()
    }
}

/// Cancels opposite powers so that equal values have equal quadruples.
fn normalize(c: [u32; 4]) -> [u32; 4] {
    let re = c[0] as i64 - c[2] as i64;
    let im = c[1] as i64 - c[3] as i64;
    [re.max(0) as u32, im.max(0) as u32, (-re).max(0) as u32, (-im).max(0) as u32]
}

/// Twirl of `code` over the group generated by `generators`.
pub fn twirl_code(code: &DiagonalCliffordCode, generators: &[Permutation]) -> Result<TwirledColumn> {
    Ok(Twirler::new(code.n(), generators)?.twirl(code))
}

/// Codes to reduce.
#[derive(Clone, Copy, Debug)]
pub enum CodeSource<'a> {
    /// All of `D_n`, streamed.
    Diagonal(usize),
    /// All of `RD_n`, streamed.
    RealDiagonal(usize),
    /// An explicit list (must be closed under the group).
    Codes { n: usize, codes: &'a [DiagonalCliffordCode] },
}

impl CodeSource<'_> {
    pub fn n(&self) -> usize {
        match *self {
            CodeSource::Diagonal(n) | CodeSource::RealDiagonal(n) => n,
            CodeSource::Codes { n, .. } => n,
        }
    }

    fn kind(&self) -> DictionaryKind {
        match self {
            CodeSource::RealDiagonal(_) => DictionaryKind::RealDiagonal,
            CodeSource::Diagonal(_) => DictionaryKind::Diagonal,
            CodeSource::Codes { codes, .. } => {
                if codes.iter().all(|c| c.is_real()) {
                    DictionaryKind::RealDiagonal
                } else {
                    DictionaryKind::Diagonal
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct WeakReduceOptions {
    /// Merge coincident twirls across CZ-count categories.
    pub merge_categories: bool,
    /// Keep only codes whose CZ count is listed.
    pub categories: Option<Vec<u32>>,
}

/// Reduced column index to the original codes it stands for.
#[derive(Clone, Debug)]
pub struct OrbitMap {
    n: usize,
    group: Vec<Permutation>,
    representatives: Vec<Vec<DiagonalCliffordCode>>,
}

impl OrbitMap {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &[Permutation] {
        &self.group
    }

    /// The codes found for column `r` during reduction; each stands for its
    /// whole group orbit.
    pub fn representatives(&self, r: usize) -> &[DiagonalCliffordCode] {
        &self.representatives[r]
    }

    /// All original codes of column `r`, sorted.
    pub fn members(&self, r: usize) -> Vec<DiagonalCliffordCode> {
        let mut out: Vec<_> =
            self.representatives[r].iter().flat_map(|c| self.group.iter().map(move |p| c.permuted(p))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

struct Reduction {
    keys: Vec<Box<[u8]>>,
    representatives: Vec<Vec<DiagonalCliffordCode>>,
}

/// CZ masks that are minimal in their orbit under the group.
fn canonical_b_masks(n: usize, group: &[Permutation], categories: Option<&[u32]>) -> Result<Vec<u32>> {
    let p = pair_count(n);
    if n < 2 {
        return Ok(vec![0]);
    }
    let act = SubsetAction::with_group(n, 2, group)?;
    let counts: Vec<usize> = match categories {
        Some(c) => {
            let mut v: Vec<usize> = c.iter().map(|&i| i as usize).filter(|&i| i <= p).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        None => (0..=p).collect(),
    };
    Ok(counts.into_iter().flat_map(|k| act.classes_with(k)).map(|m| m as u32).collect())
}

fn reduce(source: CodeSource, tw: &Twirler, opts: &WeakReduceOptions) -> Result<Reduction> {
    let n = source.n();
    let cats = opts.categories.as_deref();
    let in_cat = |c: &DiagonalCliffordCode| cats.is_none_or(|v| v.contains(&c.cz_count()));
    // Codes in a fixed global order, grouped in chunks for parallel keying.
    let chunks: Vec<Vec<DiagonalCliffordCode>> = match source {
        CodeSource::Diagonal(_) | CodeSource::RealDiagonal(_) => {
            let real = matches!(source, CodeSource::RealDiagonal(_));
            let bs = canonical_b_masks(n, tw.group(), cats)?;
            let a_count = if real { 1usize << n } else { 1usize << (2 * n) };
            bs.into_iter()
                .map(|b| {
                    (0..a_count)
                        .map(|ai| {
                            let a: Vec<u8> = (0..n)
                                .map(|j| {
                                    let shift = n - 1 - j;
                                    if real {
                                        2 * ((ai >> shift) & 1) as u8
                                    } else {
                                        ((ai >> (2 * shift)) & 3) as u8
                                    }
                                })
                                .collect();
                            DiagonalCliffordCode::new(n, &a, b).expect("valid code")
                        })
                        .collect()
                })
                .collect()
        }
        CodeSource::Codes { codes, .. } => {
            let kept: Vec<_> = codes.iter().copied().filter(|c| in_cat(c)).collect();
            kept.chunks(4096).map(|c| c.to_vec()).collect()
        }
    };
    let keyed: Vec<Vec<Box<[u8]>>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut exps = vec![0u8; 1 << n];
            chunk
                .iter()
                .map(|c| {
                    c.fill_exponents(&mut exps);
                    let mut key = Vec::with_capacity(2 * tw.orbits.len() + 1);
                    if !opts.merge_categories {
                        key.push(c.cz_count() as u8);
                    }
                    tw.key_into(&exps, &mut key);
                    key.into_boxed_slice()
                })
                .collect()
        })
        .collect();
    let mut index: HashMap<Box<[u8]>, usize> = HashMap::new();
    let mut red = Reduction { keys: Vec::new(), representatives: Vec::new() };
    for (chunk, keys) in chunks.into_iter().zip(keyed) {
        for (code, key) in chunk.into_iter().zip(keys) {
            let r = *index.entry(key.clone()).or_insert_with(|| {
                red.keys.push(key);
                red.representatives.push(Vec::new());
                red.representatives.len() - 1
            });
            red.representatives[r].push(code);
        }
    }
    Ok(red)
}

/// Distinct twirls of the source under the group generated by
/// `generators`, as an orbit-averaged dictionary plus the orbit map.
pub fn weak_reduce(
    source: CodeSource,
    generators: &[Permutation],
    opts: &WeakReduceOptions,
) -> Result<(Dictionary, OrbitMap)> {
    let n = source.n();
    let tw = Twirler::new(n, generators)?;
    let red = reduce(source, &tw, opts)?;
    if red.keys.is_empty() {
        return Err(Error::InvalidInput("no codes left to reduce".into()));
    }
    let skip = usize::from(!opts.merge_categories);
    let cols: Vec<Vec<Complex64>> = red.keys.iter().map(|k| tw.key_column(&k[skip..])).collect();
    let ids = (0..cols.len()).map(ColumnId::Reduced).collect();
    let gen_desc = format!(
        "weak:{}:n={n}:|H|={}:cats={:?}:merge={}",
        source.kind().name(),
        tw.group.len(),
        opts.categories,
        opts.merge_categories
    );
    let layout = Layout::OrbitAveraged { orbits: tw.orbits.clone() };
    let dict = Dictionary::from_dense(source.kind(), n, layout, cols, ids, &gen_desc)?;
    let map = OrbitMap { n, group: tw.group, representatives: red.representatives };
    Ok((dict, map))
}

/// Number of distinct twirls per CZ category (no cross-category merging).
pub fn distinct_projection_counts(source: CodeSource, generators: &[Permutation]) -> Result<Vec<usize>> {
    let n = source.n();
    let tw = Twirler::new(n, generators)?;
    let red = reduce(source, &tw, &WeakReduceOptions::default())?;
    let mut counts = vec![0usize; pair_count(n) + 1];
    for k in &red.keys {
        counts[k[0] as usize] += 1;
    }
    Ok(counts)
}

/// Splits each reduced coefficient evenly over the original codes of its
/// column.
pub fn expand_coefficients(
    solution: &L1Solution,
    map: &OrbitMap,
) -> Result<Vec<(DiagonalCliffordCode, Complex64)>> {
    let mut out = Vec::new();
    for &(r, y) in &solution.coefficients {
        if r >= map.len() {
            return Err(Error::InvalidInput(format!("coefficient index {r} outside the orbit map ({})", map.len())));
        }
        let members = map.members(r);
        let share = y / members.len() as f64;
        out.extend(members.into_iter().map(|c| (c, share)));
    }
    out.sort_by_key(|a| a.0);
    Ok(out)
}

/// Codes with exactly `i` CZ gates.
pub fn cz_category_filter<I>(codes: I, i: u32) -> impl Iterator<Item = DiagonalCliffordCode>
where
    I: IntoIterator<Item = DiagonalCliffordCode>,
{
    codes.into_iter().filter(move |c| c.cz_count() == i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford_dictionaries::{enumerate_diagonal, enumerate_real_diagonal};
    use crate::gate_library::{fsim, multi_controlled_z, t_gate};

    #[test]
    fn detection_examples() {
        let ccz = detect_symmetries(&multi_controlled_z(3).unwrap().to_dense(), 1e-10).unwrap();
        assert!(ccz.is_real && ccz.is_diagonal);
        assert_eq!(ccz.group().unwrap().len(), 6);
        let s = crate::gate_library::multi_controlled_s(1).unwrap();
        let ts = detect_symmetries(&t_gate().tensor(&s).to_dense(), 1e-10).unwrap();
        assert!(ts.is_diagonal && !ts.is_real && !ts.has_permutation_symmetry());
        let f = detect_symmetries(&fsim(0.3, 0.7), 1e-10).unwrap();
        assert!(!f.is_diagonal && !f.is_real && f.permutation_subgroup.len() == 1);
    }

    #[test]
    fn projections() {
        let h = 0.5f64.sqrt();
        let c = |r: f64| Complex64::new(r, 0.0);
        let had = DenseOperator::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]).unwrap();
        let want = DenseOperator::from_diagonal(&[c(h), c(-h)]).unwrap();
        assert!(project_diagonal(&had).max_abs_diff(&want) < 1e-15);
        let s = crate::gate_library::multi_controlled_s(1).unwrap().to_dense();
        assert_eq!(project_real(&s), DenseOperator::from_diagonal(&[c(1.0), c(0.0)]).unwrap());
        let f = fsim(0.4, 1.1);
        assert_eq!(project_real(&project_diagonal(&f)), project_diagonal(&project_real(&f)));
    }

    #[test]
    fn twirl_examples() {
        let swap = vec![vec![1, 0]];
        let cz = DiagonalCliffordCode::new(2, &[0, 0], 1).unwrap();
        let t = twirl_code(&cz, &swap).unwrap();
        assert_eq!(t.values(), cz.to_vector());
        let s1 = DiagonalCliffordCode::new(2, &[1, 0], 0).unwrap();
        let t = twirl_code(&s1, &swap).unwrap();
        assert_eq!(t.denominator, 2);
        assert_eq!(t.numerators, vec![[2, 0, 0, 0], [1, 1, 0, 0], [1, 1, 0, 0], [0, 2, 0, 0]]);
        // dense oracle
        let d = s1.to_operator();
        let avg = d.add(&d.conjugate_by_permutation(&[1, 0])).unwrap().scale(Complex64::new(0.5, 0.0));
        let tv = t.values();
        assert!(avg.diagonal().iter().zip(&tv).all(|(a, b)| (a - b).norm() < 1e-15));
        let t = twirl_code(&s1, &[]).unwrap();
        assert_eq!(t.denominator, 1);
        assert_eq!(t.values(), s1.to_vector());
    }

    #[test]
    fn twirl_is_group_invariant() {
        let gens = symmetric_generators(3);
        let g = generate_group(3, &gens).unwrap();
        for c in enumerate_diagonal(3).unwrap().step_by(7) {
            let t = twirl_code(&c, &gens).unwrap();
            for p in &g {
                assert_eq!(twirl_code(&c.permuted(p), &gens).unwrap(), t);
            }
        }
    }

    /// Distinct twirls by a float oracle: dense group sums of every code.
    fn oracle_distinct(n: usize) -> Vec<usize> {
        let g = symmetric_group(n).unwrap();
        let mut sets = vec![std::collections::HashSet::new(); pair_count(n) + 1];
        for c in enumerate_diagonal(n).unwrap() {
            let mut acc = vec![Complex64::new(0.0, 0.0); 1 << n];
            for p in &g {
                for (a, z) in acc.iter_mut().zip(c.permuted(p).to_vector()) {
                    *a += z;
                }
            }
            let key: Vec<(i64, i64)> = acc.iter().map(|z| (z.re.round() as i64, z.im.round() as i64)).collect();
            sets[c.cz_count() as usize].insert(key);
        }
        sets.iter().map(|s| s.len()).collect()
    }

    #[test]
    fn distinct_projections_match_oracle() {
        for n in 2..=4 {
            let got = distinct_projection_counts(CodeSource::Diagonal(n), &symmetric_generators(n)).unwrap();
            assert_eq!(got, oracle_distinct(n), "n = {n}");
            let orbits: u128 = orbit_counts_by_category(n, 4).unwrap().iter().sum();
            assert!(got.iter().sum::<usize>() as u128 <= orbits);
        }
    }

    #[test]
    fn streamed_and_explicit_agree() {
        let gens = symmetric_generators(3);
        let all: Vec<_> = enumerate_diagonal(3).unwrap().collect();
        let a = distinct_projection_counts(CodeSource::Diagonal(3), &gens).unwrap();
        let b = distinct_projection_counts(CodeSource::Codes { n: 3, codes: &all }, &gens).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_map_partitions_codes() {
        let gens = symmetric_generators(3);
        let (d, map) = weak_reduce(CodeSource::RealDiagonal(3), &gens, &WeakReduceOptions::default()).unwrap();
        // one distinct twirl per orbit here
        assert_eq!(crate::l1_solver::ColumnSource::len(&d) as u128, burnside_orbit_count(3, 2).unwrap());
        let mut all: Vec<_> = (0..map.len()).flat_map(|r| map.members(r)).collect();
        all.sort_unstable();
        let n_all = all.len();
        all.dedup();
        assert_eq!(all.len(), n_all);
        let want: Vec<_> = enumerate_real_diagonal(3).unwrap().collect();
        assert_eq!(all, want);
        for r in 0..map.len() {
            let tw = Twirler::new(3, &gens).unwrap();
            let members = map.members(r);
            let t0 = tw.twirl(&members[0]);
            assert!(members.iter().all(|m| tw.twirl(m) == t0));
        }
    }

    #[test]
    fn category_filter() {
        assert_eq!(cz_category_filter(enumerate_real_diagonal(3).unwrap(), 0).count(), 8);
        assert_eq!(cz_category_filter(enumerate_diagonal(4).unwrap(), 3).count(), 5120);
        let total: usize = (0..=3).map(|i| cz_category_filter(enumerate_diagonal(3).unwrap(), i).count()).sum();
        assert_eq!(total, 512);
    }

    #[test]
    fn burnside_matches_explicit_orbits() {
        for n in 1..=4 {
            let g = symmetric_group(n).unwrap();
            for (modulus, codes) in [
                (4, enumerate_diagonal(n).unwrap().collect::<Vec<_>>()),
                (2, enumerate_real_diagonal(n).unwrap().collect::<Vec<_>>()),
            ] {
                let canon: std::collections::HashSet<_> =
                    codes.iter().map(|c| g.iter().map(|p| c.permuted(p)).min().unwrap()).collect();
                assert_eq!(burnside_orbit_count(n, modulus).unwrap(), canon.len() as u128, "n={n} mod={modulus}");
            }
        }
    }
}
