//! Derived analyses: T-count bounds, parameter sweeps, block products,
//! CZ-category restrictions and randomized property checks.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{compute_extent, DictionaryChoice, ExtentOptions, WeakReduction};
use crate::binary_symplectic::enumerate_stabilizer_states;
use crate::clifford_dictionaries::{enumerate_diagonal, DiagonalCliffordCode};
use crate::error::{Error, Result};
use crate::gate_library::{multi_controlled_phase, qft_block, t_extent, Angle};
use crate::l1_solver::{solve, DenseColumns, L1Problem};
use crate::operator::DenseOperator;

/// Reference extent of the 5-qubit QFT block, used when it is not solved.
pub const KNOWN_QFT_U4_EXTENT: f64 = 2.03480;

/// Local grid maxima this close to the largest value are refined.
const PEAK_WINDOW: f64 = 1e-3;
/// Refined peaks closer than this count as equal.
const PEAK_TIE: f64 = 1e-7;

/// Absolute slack applied toward the smaller count.
const BOUND_SLACK: f64 = 2e-9;

/// Smallest `s` with `xi <= xi(T)^s`.
pub fn synthesis_lower_bound(xi: f64) -> Result<u32> {
    if !(xi >= 1.0 - BOUND_SLACK) {
        return Err(Error::InvalidInput(format!("extent {xi} is below 1; no T-count bound")));
    }
    let x = (xi - BOUND_SLACK).max(1.0);
    Ok((x.ln() / t_extent().ln()).ceil().max(0.0) as u32)
}

/// `log2(xi_b) / q`, the per-qubit exponent of a blocked simulation.
pub fn runtime_exponent(block_extent: f64, qubits_per_block: usize) -> f64 {
    block_extent.log2() / qubits_per_block as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TCountExtent {
    pub log2: f64,
    /// `None` when the value overflows an f64.
    pub value: Option<f64>,
}

/// `xi(T)^k`.
pub fn t_count_extent(k: u64) -> TCountExtent {
    let log2 = k as f64 * t_extent().log2();
    let v = log2.exp2();
    TCountExtent { log2, value: v.is_finite().then_some(v) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateFamily {
    /// `C^{n-1}P(theta)`.
    MultiControlledPhase,
}

impl GateFamily {
    pub fn unitary(self, n: usize, theta: f64) -> Result<DenseOperator> {
        match self {
            GateFamily::MultiControlledPhase => Ok(multi_controlled_phase(n, Angle::from_radians(theta))?.to_dense()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub family: GateFamily,
    pub n: usize,
    pub thetas: Vec<f64>,
    /// `None` where the solve failed; see `errors`.
    pub extents: Vec<Option<f64>>,
    pub errors: Vec<(usize, String)>,
    pub theta_max: f64,
    /// Vertex of the fitted parabola.
    pub xi_max_interpolated: f64,
    /// Direct solve at `theta_max`.
    pub xi_max: f64,
}

impl SweepTable {
    /// `points` evenly spaced values covering [0, 2 pi].
    pub fn default_grid(points: usize) -> Vec<f64> {
        if points < 2 {
            return vec![0.0];
        }
        (0..points).map(|i| TAU * i as f64 / (points - 1) as f64).collect()
    }

    /// `theta,extent` rows in grid order; failed points are omitted.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,extent\n");
        for (t, x) in self.thetas.iter().zip(&self.extents) {
            if let Some(x) = x {
                s.push_str(&format!("{},{}\n", sig9(*t), sig9(*x)));
            }
        }
        s
    }
}

/// Decimal rendering with nine significant digits.
pub(crate) fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.8}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..9).contains(&mag) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Extent over a parameter grid, with the maximum located by a quadratic
/// fit through the discrete argmax and its neighbours.
pub fn sweep(family: GateFamily, n: usize, grid: &[f64], opts: &ExtentOptions) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > TAU + 1e-12 {
        return Err(Error::InvalidInput("grid must lie within [0, 2 pi]".into()));
    }
    let mut o = opts.clone();
    o.decompose = false;
    // Build the shared dictionary once before fanning out.
    compute_extent(&family.unitary(n, 1.0)?, "warmup", &o)?;
    let results: Vec<std::result::Result<f64, String>> = grid
        .par_iter()
        .map(|&t| {
            family
                .unitary(n, t)
                .and_then(|u| compute_extent(&u, "sweep", &o))
                .map(|r| r.extent)
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut extents = Vec::with_capacity(grid.len());
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(x) => extents.push(Some(x)),
            Err(e) => {
                extents.push(None);
                errors.push((i, e));
            }
        }
    }
    let top = extents
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::InvalidInput("every grid point failed".into()));
    }
    // Families with several equal peaks are resolved toward the smallest
    // angle, so every near-maximal local peak is refined and compared.
    let mut theta_max = 0.0;
    let mut xi_fit = f64::NEG_INFINITY;
    let mut xi_max = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        let Some(v) = extents[i] else { continue };
        let left = i == 0 || extents[i - 1].is_none_or(|u| u <= v);
        let right = i + 1 == grid.len() || extents[i + 1].is_none_or(|u| u <= v);
        if !(left && right) || v < top - PEAK_WINDOW {
            continue;
        }
        let (t, fit) = quadratic_peak(grid, &extents, i).unwrap_or((grid[i], v));
        let x = compute_extent(&family.unitary(n, t)?, "sweep-max", &o)?.extent;
        if x > xi_max + PEAK_TIE {
            theta_max = t;
            xi_fit = fit;
            xi_max = x;
        }
    }
    Ok(SweepTable {
        family,
        n,
        thetas: grid.to_vec(),
        extents,
        errors,
        theta_max,
        xi_max_interpolated: xi_fit,
        xi_max,
    })
}

fn quadratic_peak(x: &[f64], y: &[Option<f64>], i: usize) -> Option<(f64, f64)> {
    if i == 0 || i + 1 >= x.len() {
        return None;
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1]?, y[i]?, y[i + 1]?);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a >= 0.0 {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let c = y0 - a * x0 * x0 - b * x0;
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    Some((xv, a * xv * xv + b * xv + c))
}

/// A group of gates solved jointly, compared with its gates solved one by
/// one.
#[derive(Clone, Debug)]
pub struct Block {
    pub label: String,
    /// The block unitary; `None` when only `known_extent` is available.
    pub unitary: Option<DenseOperator>,
    /// Used when the block is not solved.
    pub known_extent: Option<f64>,
    pub gates: Vec<DenseOperator>,
}

#[derive(Clone, Debug)]
pub struct BlockRow {
    pub label: String,
    pub extent: f64,
    pub solved: bool,
    pub gate_extents: Vec<f64>,
    pub gate_product: f64,
}

#[derive(Clone, Debug)]
pub struct SubmultiplicativityReport {
    pub rows: Vec<BlockRow>,
    pub blocked_product: f64,
    pub gate_product: f64,
}

impl SubmultiplicativityReport {
    /// Gate-by-gate cost over blocked cost.
    pub fn ratio(&self) -> f64 {
        self.gate_product / self.blocked_product
    }
}

pub fn submultiplicativity_report(blocks: &[Block], opts: &ExtentOptions) -> Result<SubmultiplicativityReport> {
    let mut rows = Vec::with_capacity(blocks.len());
    let mut o = opts.clone();
    o.decompose = false;
    for b in blocks {
        let (extent, solved) = match (&b.unitary, b.known_extent) {
            (_, Some(x)) => (x, false),
            (Some(u), None) => (compute_extent(u, &b.label, &o)?.extent, true),
            (None, None) => {
                return Err(Error::InvalidInput(format!("block '{}' has neither a unitary nor a known extent", b.label)))
            }
        };
        let gate_extents = b
            .gates
            .iter()
            .map(|g| compute_extent(g, "gate", &o).map(|r| r.extent))
            .collect::<Result<Vec<_>>>()?;
        let gate_product = gate_extents.iter().product();
        rows.push(BlockRow { label: b.label.clone(), extent, solved, gate_extents, gate_product });
    }
    let blocked_product = rows.iter().map(|r| r.extent).product();
    let gate_product = rows.iter().map(|r| r.gate_product).product();
    Ok(SubmultiplicativityReport { rows, blocked_product, gate_product })
}

#[derive(Clone, Debug)]
pub struct QftReport {
    pub qubits: usize,
    pub blocks: SubmultiplicativityReport,
    pub t_count: u64,
    pub t_extent: TCountExtent,
    /// `xi(T)^t_count` over the blocked product.
    pub t_ratio: f64,
}

/// Blocks `U_1 .. U_{qubits-1}` of the textbook QFT. `known` supplies
/// extents for blocks that are not solved here; without `extended` the
/// 5-qubit block falls back to [`KNOWN_QFT_U4_EXTENT`].
pub fn qft_report(qubits: usize, known: &BTreeMap<usize, f64>, t_count: u64, opts: &ExtentOptions) -> Result<QftReport> {
    if qubits < 2 {
        return Err(Error::InvalidInput("a QFT needs at least two qubits".into()));
    }
    let mut known = known.clone();
    if !opts.extended {
        known.entry(4).or_insert(KNOWN_QFT_U4_EXTENT);
    }
    let mut blocks = Vec::new();
    for k in 1..qubits {
        let gates = (2..=k + 1)
            .map(|j| Ok(multi_controlled_phase(2, Angle::turns(1, 1 << j))?.to_dense()))
            .collect::<Result<Vec<_>>>()?;
        let known_extent = known.get(&k).copied();
        let unitary = if known_extent.is_none() {
            if k > 4 {
                return Err(Error::Capability(format!("block U_{k} spans {} qubits; supply its extent", k + 1)));
            }
            Some(qft_block(k)?.to_dense())
        } else {
            None
        };
        blocks.push(Block { label: format!("U_{k}"), unitary, known_extent, gates });
    }
    let mut o = opts.clone();
    o.extended = true;
    let blocks = submultiplicativity_report(&blocks, &o)?;
    let t = t_count_extent(t_count);
    let t_ratio = (t.log2 - blocks.blocked_product.log2()).exp2();
    Ok(QftReport { qubits, blocks, t_count, t_extent: t, t_ratio })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryRow {
    pub categories: Vec<u32>,
    pub extent: f64,
}

/// Optimum over real-diagonal Cliffords whose CZ count lies in each
/// requested union.
pub fn cz_category_study(u: &DenseOperator, unions: &[Vec<u32>], opts: &ExtentOptions) -> Result<Vec<CategoryRow>> {
    let mut rows = Vec::with_capacity(unions.len());
    for cats in unions {
        if cats.is_empty() {
            return Err(Error::InvalidInput("empty CZ category union".into()));
        }
        let mut sorted = cats.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let o = ExtentOptions {
            dictionary: DictionaryChoice::RealDiagonal,
            categories: Some(sorted.clone()),
            decompose: false,
            ..opts.clone()
        };
        let r = compute_extent(u, "category", &o)?;
        rows.push(CategoryRow { categories: sorted, extent: r.extent });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest amount by which the checked inequality failed (0 if never).
    pub max_excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub seed: u64,
    pub slack: f64,
    pub checks: Vec<CheckResult>,
}

impl PropertyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tally {
    name: &'static str,
    trials: usize,
    violations: usize,
    max_excess: f64,
    slack: f64,
}

impl Tally {
    fn new(name: &'static str, slack: f64) -> Self {
        Tally { name, trials: 0, violations: 0, max_excess: 0.0, slack }
    }

    /// Records `lhs <= rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        let excess = lhs - rhs;
        if excess > self.slack {
            self.violations += 1;
        }
        self.max_excess = self.max_excess.max(excess.max(0.0));
    }

    fn eq(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        let excess = (lhs - rhs).abs();
        if excess > self.slack {
            self.violations += 1;
        }
        self.max_excess = self.max_excess.max(excess);
    }

    fn done(self) -> CheckResult {
        CheckResult { name: self.name.into(), trials: self.trials, violations: self.violations, max_excess: self.max_excess }
    }
}

fn random_diagonal(rng: &mut ChaCha8Rng, n: usize) -> DenseOperator {
    let d: Vec<Complex64> = (0..1usize << n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
    DenseOperator::from_diagonal(&d).expect("power of two")
}

fn random_diagonal_clifford(rng: &mut ChaCha8Rng, codes: &[DiagonalCliffordCode]) -> DenseOperator {
    codes[rng.gen_range(0..codes.len())].to_operator()
}

fn hadamard() -> DenseOperator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    DenseOperator::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]).expect("2x2")
}

/// State extent over the 60 two-qubit stabilizer states.
fn state_extent_2q(psi: &[Complex64], stab: &DenseColumns) -> Result<f64> {
    let p = L1Problem::with_natural_field(stab, psi.to_vec())?;
    Ok(solve(&p, &Default::default())?.extent)
}

/// Randomized checks of the monotone's algebraic properties at n <= 2.
/// Subadditivity is checked both as stated for `xi` and in the form that
/// holds in general, the triangle inequality for `sqrt(xi)`.
pub fn property_suite(seed: u64, trials: usize) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    const SLACK: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = ExtentOptions { weak_reduce: WeakReduction::Off, decompose: false, ..Default::default() };
    let full = ExtentOptions { dictionary: DictionaryChoice::Full, ..opts.clone() };
    let xi = |u: &DenseOperator| compute_extent(u, "property", &opts).map(|r| r.extent);
    let xi_full = |u: &DenseOperator| compute_extent(u, "property", &full).map(|r| r.extent);
    let d2: Vec<_> = enumerate_diagonal(2)?.collect();
    let states = enumerate_stabilizer_states(2)?;
    let stab = DenseColumns::new(4, states.concat());
    let h = hadamard();
    let plus2 = vec![Complex64::new(0.5, 0.0); 4];
    let proj = {
        let z = |x: f64| Complex64::new(x, 0.0);
        DenseOperator::from_diagonal(&[z(1.0), z(1.0), z(0.0), z(0.0)])?
    };

    let mut clifford = Tally::new("clifford_unit", SLACK);
    let mut invariance = Tally::new("clifford_invariance", SLACK);
    let mut projector = Tally::new("projector_monotone", SLACK);
    let mut product = Tally::new("submultiplicative_product", SLACK);
    let mut tensor = Tally::new("submultiplicative_tensor", SLACK);
    let mut swap = Tally::new("tensor_symmetric", SLACK);
    let mut subadd = Tally::new("subadditive_literal", SLACK);
    let mut triangle = Tally::new("subadditive_sqrt", SLACK);
    let mut homog = Tally::new("homogeneous", SLACK);
    let mut state = Tally::new("state_bound", SLACK);

    for _ in 0..trials {
        let c = random_diagonal_clifford(&mut rng, &d2);
        clifford.eq(xi(&c)?, 1.0);

        let a = random_diagonal(&mut rng, 2);
        let b = random_diagonal(&mut rng, 2);
        let xa = xi(&a)?;
        let xb = xi(&b)?;
        let c1 = random_diagonal_clifford(&mut rng, &d2);
        let c2 = random_diagonal_clifford(&mut rng, &d2);
        invariance.eq(xi(&c1.matmul(&a)?.matmul(&c2)?)?, xa);
        let a1 = random_diagonal(&mut rng, 1);
        let xa1 = xi_full(&a1)?;
        invariance.eq(xi_full(&h.matmul(&a1)?)?, xa1);
        projector.le(xi(&proj.matmul(&a)?)?, xa);

        product.le(xi(&a.matmul(&b)?)?, xa * xb);
        let p = random_diagonal(&mut rng, 1);
        let q = random_diagonal(&mut rng, 1);
        let (xp, xq) = (xi(&p)?, xi(&q)?);
        let pq = xi(&p.kron(&q))?;
        tensor.le(pq, xp * xq);
        swap.eq(pq, xi(&q.kron(&p))?);

        let sum = a.add(&b)?;
        let xs = if sum.entries().iter().all(|z| z.norm() < 1e-12) { 0.0 } else { xi(&sum)? };
        subadd.le(xs, xa + xb);
        triangle.le(xs.sqrt(), xa.sqrt() + xb.sqrt());

        let s = Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..TAU));
        homog.eq(xi(&a.scale(s))?, s.norm_sqr() * xa);

        let psi: Vec<Complex64> = a.diagonal().iter().zip(&plus2).map(|(d, p)| d * p).collect();
        state.le(state_extent_2q(&psi, &stab)?, xa);
    }
    Ok(PropertyReport {
        seed,
        slack: SLACK,
        checks: vec![
            clifford.done(),
            invariance.done(),
            projector.done(),
            product.done(),
            tensor.done(),
            swap.done(),
            subadd.done(),
            triangle.done(),
            homog.done(),
            state.done(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lower_bounds() {
        assert_eq!(synthesis_lower_bound(1.0).unwrap(), 0);
        assert_eq!(synthesis_lower_bound(1.6).unwrap(), 3);
        assert_eq!(synthesis_lower_bound(16.0 / 9.0).unwrap(), 4);
        assert_eq!(synthesis_lower_bound(2.05).unwrap(), 5);
        for k in 1..=20 {
            let x = t_extent().powi(k);
            assert_eq!(synthesis_lower_bound(x - 1e-9).unwrap(), k as u32);
            assert_eq!(synthesis_lower_bound(x + 1e-9).unwrap(), k as u32);
        }
        assert!(synthesis_lower_bound(0.9).is_err());
    }

    #[test]
    fn cost_arithmetic() {
        assert!((runtime_exponent(16.0 / 9.0, 2) - 0.41504).abs() < 1e-5);
        assert!((runtime_exponent((16.0f64 / 9.0).powi(4), 2) - 1.66015).abs() < 1e-5);
        assert_eq!(runtime_exponent(1.0, 3), 0.0);
        assert_eq!(t_count_extent(0).value, Some(1.0));
        let v = t_count_extent(303).value.unwrap();
        assert!((v / 6.9e20 - 1.0).abs() < 0.01);
        assert!(t_count_extent(100_000).value.is_none());
    }

    #[test]
    fn sig_digits() {
        assert_eq!(sig9(1.6), "1.60000000");
        assert_eq!(sig9(0.0), "0.00000000");
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig9(12.5), "12.5000000");
    }

    #[test]
    fn two_qubit_sweep() {
        let grid = SweepTable::default_grid(101);
        let t = sweep(GateFamily::MultiControlledPhase, 2, &grid, &ExtentOptions::default()).unwrap();
        assert!(t.errors.is_empty());
        assert!((t.theta_max - PI / 2.0).abs() < 0.01 * PI || (t.theta_max - 1.5 * PI).abs() < 0.01 * PI);
        assert!((t.xi_max - 1.6).abs() < 1e-4);
        assert!((t.extents[0].unwrap() - 1.0).abs() < 1e-7);
        for i in 0..grid.len() {
            let (a, b) = (t.extents[i].unwrap(), t.extents[grid.len() - 1 - i].unwrap());
            assert!((a - b).abs() < 1e-5);
        }
        assert!(t.to_csv().starts_with("theta,extent\n0.00000000,1.00000000\n"));
    }

    #[test]
    fn ccz_categories() {
        let ccz = crate::gate_library::multi_controlled_z(3).unwrap().to_dense();
        let rows = cz_category_study(&ccz, &[vec![0], vec![1, 2], vec![0, 1, 2, 3]], &ExtentOptions::default()).unwrap();
        let want = [6.25, 2.25, 16.0 / 9.0];
        for (r, w) in rows.iter().zip(want) {
            assert!((r.extent - w).abs() < 1e-5, "{:?}", r);
        }
        assert!(cz_category_study(&ccz, &[vec![]], &ExtentOptions::default()).is_err());
    }

    #[test]
    fn small_qft() {
        let r = qft_report(3, &BTreeMap::new(), 10, &ExtentOptions::default()).unwrap();
        assert!((r.blocks.rows[0].extent - 1.6).abs() < 1e-5);
        assert!((r.blocks.rows[1].extent - 1.83566).abs() < 1e-4);
        assert!(r.blocks.ratio() >= 1.0);
    }
}
