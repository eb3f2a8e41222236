//! Target unitaries: multi-controlled phases, fSim, QFT blocks and
//! (generalized) hypergraph unitaries.
//!
//! Phases are kept in turns (`1 turn = 2 pi`), exactly when the angle is a
//! rational multiple of `pi`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::operator::{qubit_bit, DenseOperator};
use crate::symmetry_reduction::canon::SubsetAction;

/// A phase angle in turns, reduced to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Exact(Ratio<i64>),
    Float(f64),
}

impl Angle {
    pub fn zero() -> Self {
        Angle::Exact(Ratio::zero())
    }

    /// `num / den` turns.
    pub fn turns(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Angle::Exact(Ratio::new(num, den)).reduced()
    }

    /// `num / den * pi` radians.
    pub fn pi_fraction(num: i64, den: i64) -> Self {
        Self::turns(num, 2 * den)
    }

    /// Radians; kept as a float.
    pub fn from_radians(theta: f64) -> Self {
        Angle::Float(theta / TAU).reduced()
    }

    fn reduced(self) -> Self {
        match self {
            Angle::Exact(r) => {
                let f = r - r.floor();
                Angle::Exact(f)
            }
            Angle::Float(t) => {
                let f = t.rem_euclid(1.0);
                Angle::Float(if f >= 1.0 { 0.0 } else { f })
            }
        }
    }

    pub fn as_turns(&self) -> f64 {
        match self {
            Angle::Exact(r) => r.to_f64().expect("finite"),
            Angle::Float(t) => *t,
        }
    }

    pub fn as_radians(&self) -> f64 {
        self.as_turns() * TAU
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Exact(_))
    }

    pub fn add(&self, other: &Angle) -> Angle {
        match (self, other) {
            (Angle::Exact(a), Angle::Exact(b)) => Angle::Exact(a + b).reduced(),
            _ => Angle::Float(self.as_turns() + other.as_turns()).reduced(),
        }
    }

    pub fn neg(&self) -> Angle {
        match self {
            Angle::Exact(a) => Angle::Exact(-a).reduced(),
            Angle::Float(t) => Angle::Float(-t).reduced(),
        }
    }

    /// `exp(2 pi i t)`, exact for multiples of 1/8 turn.
    pub fn phase(&self) -> Complex64 {
        if let Angle::Exact(r) = self {
            let eighths = r * Ratio::from_integer(8);
            if eighths.is_integer() {
                let h = FRAC_1_SQRT_2;
                return match eighths.to_integer() {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(h, h),
                    2 => Complex64::new(0.0, 1.0),
                    3 => Complex64::new(-h, h),
                    4 => Complex64::new(-1.0, 0.0),
                    5 => Complex64::new(-h, -h),
                    6 => Complex64::new(0.0, -1.0),
                    _ => Complex64::new(h, -h),
                };
            }
        }
        Complex64::from_polar(1.0, self.as_radians())
    }

    /// True when the phase is exactly `+1` or `-1`.
    pub fn is_real(&self, tol: f64) -> bool {
        match self {
            Angle::Exact(r) => r.is_zero() || *r == Ratio::new(1, 2),
            Angle::Float(_) => self.phase().im.abs() <= tol,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact(r) => {
                let pi = r * Ratio::from_integer(2);
                if pi.is_zero() {
                    write!(f, "0")
                } else if pi.is_one() {
                    write!(f, "pi")
                } else if *pi.denom() == 1 {
                    write!(f, "{}pi", pi.numer())
                } else {
                    write!(f, "{}pi/{}", pi.numer(), pi.denom())
                }
            }
            Angle::Float(t) => write!(f, "{}", t * TAU),
        }
    }
}

/// Diagonal unitary stored as per-entry phases.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalUnitary {
    n: usize,
    phases: Vec<Angle>,
}

impl DiagonalUnitary {
    pub fn identity(n: usize) -> Self {
        DiagonalUnitary { n, phases: vec![Angle::zero(); 1 << n] }
    }

    pub fn from_phases(n: usize, phases: Vec<Angle>) -> Result<Self> {
        if phases.len() != 1 << n {
            return Err(Error::InvalidInput(format!("{} phases for {n} qubits", phases.len())));
        }
        Ok(DiagonalUnitary { n, phases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> &[Angle] {
        &self.phases
    }

    pub fn entries(&self) -> Vec<Complex64> {
        self.phases.iter().map(Angle::phase).collect()
    }

    pub fn to_dense(&self) -> DenseOperator {
        DenseOperator::from_diagonal(&self.entries()).expect("power-of-two dimension")
    }

    pub fn is_real(&self) -> bool {
        self.phases.iter().all(|a| a.is_real(1e-12))
    }

    pub fn tensor(&self, other: &DiagonalUnitary) -> DiagonalUnitary {
        let mut phases = Vec::with_capacity(self.phases.len() * other.phases.len());
        for a in &self.phases {
            for b in &other.phases {
                phases.push(a.add(b));
            }
        }
        DiagonalUnitary { n: self.n + other.n, phases }
    }

    pub fn compose(&self, other: &DiagonalUnitary) -> Result<DiagonalUnitary> {
        if self.n != other.n {
            return Err(Error::InvalidInput(format!("cannot compose {} and {} qubits", self.n, other.n)));
        }
        Ok(DiagonalUnitary { n: self.n, phases: self.phases.iter().zip(&other.phases).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn adjoint(&self) -> DiagonalUnitary {
        DiagonalUnitary { n: self.n, phases: self.phases.iter().map(Angle::neg).collect() }
    }

    /// Adds `angle` to every entry where all qubits in `qubits` are set.
    pub fn apply_controlled_phase(&mut self, qubits: &[usize], angle: Angle) -> Result<()> {
        if qubits.iter().any(|&q| q >= self.n) {
            return Err(Error::InvalidInput(format!("qubit index out of range for {} qubits", self.n)));
        }
        for (x, p) in self.phases.iter_mut().enumerate() {
            if qubits.iter().all(|&q| qubit_bit(x, self.n, q) == 1) {
                *p = p.add(&angle);
            }
        }
        Ok(())
    }
}

/// `diag(1, ..., 1, e^{i theta})` on `n` qubits.
pub fn multi_controlled_phase(n: usize, theta: Angle) -> Result<DiagonalUnitary> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one qubit".into()));
    }
    let mut u = DiagonalUnitary::identity(n);
    let all: Vec<usize> = (0..n).collect();
    u.apply_controlled_phase(&all, theta)?;
    Ok(u)
}

pub fn t_gate() -> DiagonalUnitary {
    multi_controlled_phase(1, Angle::pi_fraction(1, 4)).expect("n = 1")
}

/// `C^{n-1}Z`.
pub fn multi_controlled_z(n: usize) -> Result<DiagonalUnitary> {
    multi_controlled_phase(n, Angle::pi_fraction(1, 1))
}

/// `C^{n-1}S`.
pub fn multi_controlled_s(n: usize) -> Result<DiagonalUnitary> {
    multi_controlled_phase(n, Angle::pi_fraction(1, 2))
}

/// `U^{(x) k}`.
pub fn tensor_power(u: &DiagonalUnitary, k: usize) -> DiagonalUnitary {
    (0..k).fold(DiagonalUnitary::identity(0), |acc, _| acc.tensor(u))
}

/// The fSim gate: swap amplitude `theta` on `|01>, |10>` and phase
/// `e^{-i phi}` on `|11>`.
pub fn fsim(theta: f64, phi: f64) -> DenseOperator {
    let z = Complex64::new(0.0, 0.0);
    let c = Complex64::new(theta.cos(), 0.0);
    let s = Complex64::new(0.0, -theta.sin());
    DenseOperator::from_rows(&[
        vec![Complex64::new(1.0, 0.0), z, z, z],
        vec![z, c, s, z],
        vec![z, s, c, z],
        vec![z, z, z, Complex64::from_polar(1.0, -phi)],
    ])
    .expect("4x4")
}

/// QFT block `U_k` on `k + 1` qubits: controlled phases of `1/2^j` turns
/// between qubit 0 and qubit `j - 1`, for `j = 2..=k+1`.
pub fn qft_block(k: usize) -> Result<DiagonalUnitary> {
    if k == 0 || k > 12 {
        return Err(Error::InvalidInput("QFT blocks need 1 <= k <= 12".into()));
    }
    let mut u = DiagonalUnitary::identity(k + 1);
    for j in 2..=k + 1 {
        u.apply_controlled_phase(&[0, j - 1], Angle::turns(1, 1 << j))?;
    }
    Ok(u)
}

/// Hypergraph on vertices `0..n` (1-based in the text format).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Edges are sorted and deduplicated; empty or out-of-range edges fail.
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::InvalidInput("empty hyperedge".into()));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!("vertex {} outside 1..={n}", v + 1)));
            }
            set.insert(e);
        }
        Ok(Hypergraph { n, edges: set.into_iter().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Edge orders present.
    pub fn orders(&self) -> BTreeSet<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    pub fn is_uniform(&self, k: usize) -> bool {
        self.edges.iter().all(|e| e.len() == k)
    }

    /// Image under the vertex relabeling `v -> perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Hypergraph {
        let edges = self.edges.iter().map(|e| e.iter().map(|&v| perm[v]).collect()).collect();
        Hypergraph::new(self.n, edges).expect("relabeling preserves validity")
    }

    /// Parses the text format: vertex count on the first line, then one
    /// edge per line as comma-separated 1-based vertices; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("missing vertex count".into()))?
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad vertex count: {e}")))?;
        let mut edges = Vec::new();
        for l in lines {
            let e = l
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::InvalidInput(format!("bad vertex '{}'", t.trim()))),
                })
                .collect::<Result<Vec<_>>>()?;
            edges.push(e);
        }
        Hypergraph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for e in &self.edges {
            let v: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
            s.push_str(&v.join(","));
            s.push('\n');
        }
        s
    }
}

/// One square of the Union Jack lattice: corners 0..4 and center 4.
pub fn union_jack_cell() -> Hypergraph {
    Hypergraph::new(5, vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![3, 0, 4]]).expect("valid")
}

/// `prod_e C^{|e|-1}Z_e`.
pub fn hypergraph_unitary(h: &Hypergraph) -> DiagonalUnitary {
    let mut u = DiagonalUnitary::identity(h.n);
    for e in &h.edges {
        u.apply_controlled_phase(e, Angle::turns(1, 2)).expect("validated edges");
    }
    u
}

/// Angle per edge order.
pub type AngleAssignment = BTreeMap<usize, Angle>;

/// `prod_e C^{|e|-1}P_e(theta_{|e|})`.
pub fn generalized_hypergraph_unitary(h: &Hypergraph, angles: &AngleAssignment) -> Result<DiagonalUnitary> {
    let mut u = DiagonalUnitary::identity(h.n);
    for e in &h.edges {
        let a = angles
            .get(&e.len())
            .ok_or_else(|| Error::InvalidInput(format!("no angle for hyperedges of order {}", e.len())))?;
        u.apply_controlled_phase(e, *a)?;
    }
    Ok(u)
}

/// One representative per relabeling class of nonempty `k`-uniform
/// hypergraphs on `n` vertices, ordered by edge count.
pub fn enumerate_k_uniform_hypergraph_classes(n: usize, k: usize) -> Result<Vec<Hypergraph>> {
    if n > 6 {
        return Err(Error::SizeLimit("hypergraph classes support n <= 6".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("need 1 <= k <= n, got k = {k}")));
    }
    let act = SubsetAction::new(n, k)?;
    let out = (1..=act.width())
        .flat_map(|c| act.classes_with(c))
        .map(|mask| {
            let edges = (0..act.width())
                .filter(|&p| mask >> p & 1 == 1)
                .map(|p| (0..n).filter(|&v| act.subset(p) >> v & 1 == 1).collect())
                .collect();
            Hypergraph::new(n, edges).expect("valid subsets")
        })
        .collect();
    Ok(out)
}

/// `1 / cos^2(pi/8) = 4 / (2 + sqrt 2)`.
pub fn t_extent() -> f64 {
    4.0 / (2.0 + 2f64.sqrt())
}
