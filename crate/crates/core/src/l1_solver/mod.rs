//! Minimum-l1 decompositions `min ||x||_1  s.t.  A x = b` with duality certificates.
//!
//! Real problems are solved as a split-variable LP, complex ones as a
//! second-order cone program; both by interior-point methods. An
//! operator-splitting path is available for very wide problems.

mod admm;
mod columns;
mod lp;
mod socp;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

pub use columns::{ColumnSource, DenseColumns, FnColumns};
use columns::{chunk_ranges, RealColumns};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Interior point (LP or SOCP by field).
    Auto,
    Splitting,
    InteriorPoint,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Residual bound relative to `1 + ||b||_inf`.
    pub tol_residual: f64,
    /// Bound on the certified gap, relative to `max(1, l1)`.
    pub tol_gap: f64,
    /// `None` selects the algorithm default (200 interior-point or 20000
    /// splitting iterations).
    pub max_iterations: Option<usize>,
    pub algorithm: Algorithm,
    /// Columns are cached in compressed real form when they fit.
    pub cache_limit_bytes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_residual: 1e-8,
            tol_gap: 1e-7,
            max_iterations: None,
            algorithm: Algorithm::Auto,
            cache_limit_bytes: 1 << 29,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("infeasible: target lies outside the column span (distance {distance:.3e})")]
    Infeasible { distance: f64 },
    #[error("no certified solution after {iterations} iterations (residual {residual:.3e}, gap {gap:.3e})")]
    NotConverged { iterations: usize, residual: f64, gap: f64, best: Box<L1Solution> },
}

/// `A x = b` with `A` given by a column source.
pub struct L1Problem<'a> {
    columns: &'a dyn ColumnSource,
    target: Vec<Complex64>,
    field: Field,
}

impl<'a> L1Problem<'a> {
    pub fn new(columns: &'a dyn ColumnSource, target: Vec<Complex64>, field: Field) -> Result<Self, SolveError> {
        if columns.dim() == 0 || columns.is_empty() {
            return Err(SolveError::InvalidProblem("empty column set".into()));
        }
        if target.len() != columns.dim() {
            return Err(SolveError::InvalidProblem(format!(
                "target length {} does not match dimension {}",
                target.len(),
                columns.dim()
            )));
        }
        if field == Field::Real && (!columns.is_real() || target.iter().any(|z| z.im != 0.0)) {
            return Err(SolveError::InvalidProblem("real field needs real columns and target".into()));
        }
        Ok(L1Problem { columns, target, field })
    }

    /// Real field when both the columns and the target are real.
    pub fn with_natural_field(columns: &'a dyn ColumnSource, target: Vec<Complex64>) -> Result<Self, SolveError> {
        let field = if columns.is_real() && target.iter().all(|z| z.im == 0.0) { Field::Real } else { Field::Complex };
        Self::new(columns, target, field)
    }

    pub fn columns(&self) -> &dyn ColumnSource {
        self.columns
    }

    pub fn target(&self) -> &[Complex64] {
        &self.target
    }

    pub fn field(&self) -> Field {
        self.field
    }
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    /// Nonzero coefficients `(column index, value)` sorted by index.
    pub coefficients: Vec<(usize, Complex64)>,
    pub l1: f64,
    /// `l1^2`.
    pub extent: f64,
    /// `||A x - b||_inf`.
    pub residual: f64,
    /// `l1` minus the certified dual bound; `None` when no dual is available.
    pub gap: Option<f64>,
    /// Dual vector in the target's coordinates.
    pub dual: Option<Vec<Complex64>>,
    pub iterations: usize,
    pub wall_time: Duration,
    pub algorithm: Algorithm,
    pub field: Field,
}

impl L1Solution {
    pub fn dense_coefficients(&self, len: usize) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); len];
        for &(j, v) in &self.coefficients {
            x[j] = v;
        }
        x
    }
}

pub(crate) struct IpmOutcome {
    pub x_re: Vec<f64>,
    pub x_im: Option<Vec<f64>>,
    pub y: Vec<f64>,
    pub iterations: usize,
    #[allow(dead_code)]
    pub converged: bool,
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn solve(problem: &L1Problem, cfg: &SolverConfig) -> Result<L1Solution, SolveError> {
    solve_inner(problem, cfg, cfg.cache_limit_bytes)
}

/// Same contract as [`solve`], regenerating columns on every pass instead of
/// caching them.
pub fn solve_streaming(
    columns: &dyn ColumnSource,
    target: Vec<Complex64>,
    cfg: &SolverConfig,
) -> Result<L1Solution, SolveError> {
    let problem = L1Problem::with_natural_field(columns, target)?;
    solve_inner(&problem, cfg, 0)
}

fn solve_inner(problem: &L1Problem, cfg: &SolverConfig, cache_limit: usize) -> Result<L1Solution, SolveError> {
    if !(cfg.tol_residual > 0.0 && cfg.tol_gap > 0.0) {
        return Err(SolveError::InvalidProblem("tolerances must be positive".into()));
    }
    let start = Instant::now();
    let b = problem.target();
    let bnorm = inf_norm(b);
    let real = problem.field == Field::Real;
    if bnorm == 0.0 {
        return Ok(L1Solution {
            coefficients: vec![],
            l1: 0.0,
            extent: 0.0,
            residual: 0.0,
            gap: Some(0.0),
            dual: Some(vec![Complex64::new(0.0, 0.0); b.len()]),
            iterations: 0,
            wall_time: start.elapsed(),
            algorithm: cfg.algorithm,
            field: problem.field,
        });
    }
    let cols = RealColumns::new(problem.columns, real, cache_limit);
    let (bc, outside) = cols.compress(b);
    if outside > cfg.tol_residual * (1.0 + bnorm) {
        return Err(SolveError::Infeasible { distance: outside });
    }
    let outcome = match cfg.algorithm {
        Algorithm::Splitting => {
            let iters = cfg.max_iterations.unwrap_or(20_000);
            admm::solve_admm(&cols, &bc, iters, cfg.tol_residual * 1e-2)
        }
        Algorithm::Auto | Algorithm::InteriorPoint => {
            let iters = cfg.max_iterations.unwrap_or(200);
            if real {
                lp::solve_lp(&cols, &bc, iters)
            } else {
                socp::solve_socp(&cols, &bc, iters)
            }
        }
    };
    let mut sol = finish(problem, &cols, &bc, outcome, cfg.algorithm);
    sol.wall_time = start.elapsed();
    let res_ok = sol.residual <= cfg.tol_residual * (1.0 + bnorm);
    let gap = sol.gap.unwrap_or(f64::INFINITY);
    let gap_ok = gap <= cfg.tol_gap * sol.l1.max(1.0);
    if res_ok && gap_ok {
        Ok(sol)
    } else {
        Err(SolveError::NotConverged { iterations: sol.iterations, residual: sol.residual, gap, best: Box::new(sol) })
    }
}

/// Drops negligible coefficients, re-fits the support by least squares and
/// evaluates residual and dual bound in the original coordinates.
fn finish(problem: &L1Problem, cols: &RealColumns, bc: &[f64], out: IpmOutcome, algorithm: Algorithm) -> L1Solution {
    let n = cols.len();
    let x: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(out.x_re[j], out.x_im.as_ref().map_or(0.0, |v| v[j])))
        .collect();
    let l1_raw: f64 = x.iter().map(|z| z.norm()).sum();
    let cut = 1e-9 * l1_raw.max(f64::MIN_POSITIVE);
    let support: Vec<usize> = (0..n).filter(|&j| x[j].norm() > cut).collect();

    // Least-squares correction on the support in compressed coordinates.
    let w = cols.width();
    let r = if cols.real { w } else { w / 2 };
    let mut a_s = DMatrix::<Complex64>::zeros(r, support.len());
    {
        let mut k = 0;
        for range in chunk_ranges(n) {
            cols.for_range(range, |j, a| {
                if k < support.len() && support[k] == j {
                    for t in 0..r {
                        a_s[(t, k)] = Complex64::new(a[t], if cols.real { 0.0 } else { a[r + t] });
                    }
                    k += 1;
                }
            });
        }
    }
    let xs = DVector::from_iterator(support.len(), support.iter().map(|&j| x[j]));
    let bcv = DVector::from_iterator(r, (0..r).map(|t| Complex64::new(bc[t], if cols.real { 0.0 } else { bc[r + t] })));
    let mut xs_new = xs.clone();
    if !support.is_empty() {
        let resid = &bcv - &a_s * &xs;
        let g = &a_s * a_s.adjoint();
        let e = SymmetricEigen::new(g);
        let lmax = e.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut z = DVector::<Complex64>::zeros(r);
        for k in 0..r {
            let l = e.eigenvalues[k];
            if l > 1e-12 * lmax {
                let v = e.eigenvectors.column(k);
                let c = v.dotc(&resid) / Complex64::new(l, 0.0);
                z += v * c;
            }
        }
        let delta = a_s.adjoint() * z;
        let candidate = &xs + delta;
        let res_new = (&bcv - &a_s * &candidate).camax();
        let res_old = resid.camax();
        if res_new <= res_old {
            xs_new = candidate;
        }
    }
    let mut coefficients: Vec<(usize, Complex64)> = support.iter().zip(xs_new.iter()).map(|(&j, &v)| (j, v)).collect();
    if problem.field == Field::Real {
        coefficients.iter_mut().for_each(|c| c.1.im = 0.0);
    }
    let l1: f64 = coefficients.iter().map(|c| c.1.norm()).sum();

    let y = cols.expand(&out.y);
    let residual = primal_residual(problem, &coefficients);
    let gap = dual_bound(problem, &y).map(|(bound, _)| l1 - bound);
    L1Solution {
        coefficients,
        l1,
        extent: l1 * l1,
        residual,
        gap,
        dual: Some(y),
        iterations: out.iterations,
        wall_time: Duration::ZERO,
        algorithm,
        field: problem.field,
    }
}

fn primal_residual(problem: &L1Problem, coefficients: &[(usize, Complex64)]) -> f64 {
    let m = problem.columns.dim();
    let mut acc = problem.target.clone();
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for &(j, v) in coefficients {
        problem.columns.column(j, &mut col);
        for (a, c) in acc.iter_mut().zip(&col) {
            *a -= c * v;
        }
    }
    inf_norm(&acc)
}

/// Returns `(Re<b, y> / max(1, ||A^H y||_inf), ||A^H y||_inf)`.
fn dual_bound(problem: &L1Problem, y: &[Complex64]) -> Option<(f64, f64)> {
    if y.len() != problem.columns.dim() || y.iter().any(|z| !z.is_finite()) {
        return None;
    }
    let src = problem.columns;
    let m = src.dim();
    let dual_norm = chunk_ranges(src.len())
        .into_par_iter()
        .map(|range| {
            let mut col = vec![Complex64::new(0.0, 0.0); m];
            let mut best = 0.0f64;
            for j in range {
                src.column(j, &mut col);
                let v: Complex64 = col.iter().zip(y).map(|(a, c)| a.conj() * c).sum();
                best = best.max(v.norm());
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    let by: f64 = problem.target.iter().zip(y).map(|(a, c)| (a.conj() * c).re).sum();
    Some((by / dual_norm.max(1.0), dual_norm))
}

/// Outcome of an independent check of a solution.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    /// `||A x - b||_inf` recomputed from the coefficients.
    pub primal_residual: f64,
    /// `||A^H y||_inf - 1` (nonpositive for a feasible dual).
    pub dual_slack: f64,
    /// `Re<b, y>`.
    pub dual_objective: f64,
    /// `l1 - Re<b, y>`.
    pub gap: f64,
    pub l1: f64,
}

impl CertificateReport {
    /// True when primal feasibility, dual feasibility and the gap all hold
    /// within `tol` (residual relative to `1 + ||b||_inf`).
    pub fn passes(&self, tol: f64, target_norm: f64) -> bool {
        self.primal_residual <= tol * (1.0 + target_norm) && self.dual_slack <= tol && self.gap <= tol * self.l1.max(1.0)
    }
}

pub fn verify_certificate(problem: &L1Problem, solution: &L1Solution) -> Result<CertificateReport, SolveError> {
    let y = solution
        .dual
        .as_ref()
        .ok_or_else(|| SolveError::InvalidProblem("solution carries no dual vector; gap unverified".into()))?;
    let (_, dual_norm) =
        dual_bound(problem, y).ok_or_else(|| SolveError::InvalidProblem("dual vector has wrong length".into()))?;
    let l1: f64 = solution.coefficients.iter().map(|c| c.1.norm()).sum();
    let by: f64 = problem.target.iter().zip(y).map(|(a, c)| (a.conj() * c).re).sum();
    Ok(CertificateReport {
        primal_residual: primal_residual(problem, &solution.coefficients),
        dual_slack: dual_norm - 1.0,
        dual_objective: by,
        gap: l1 - by,
        l1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Diagonal Cliffords on one qubit: (1, i^k).
    fn d1() -> DenseColumns {
        DenseColumns::from_columns(&(0..4).map(|k| vec![c(1.0, 0.0), Complex64::i().powu(k)]).collect::<Vec<_>>())
    }

    #[test]
    fn t_gate_over_d1() {
        let cols = d1();
        let t = vec![c(1.0, 0.0), Complex64::from_polar(1.0, PI / 4.0)];
        let p = L1Problem::new(&cols, t, Field::Complex).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let expect = 4.0 / (2.0 + 2f64.sqrt());
        assert!((s.extent - expect).abs() < 1e-8, "{}", s.extent);
        let rep = verify_certificate(&p, &s).unwrap();
        assert!(rep.passes(1e-7, 1.0), "{rep:?}");
    }

    #[test]
    fn splitting_agrees_on_t() {
        let cols = d1();
        let t = vec![c(1.0, 0.0), Complex64::from_polar(1.0, PI / 4.0)];
        let p = L1Problem::new(&cols, t, Field::Complex).unwrap();
        let cfg = SolverConfig { algorithm: Algorithm::Splitting, tol_gap: 1e-6, ..Default::default() };
        let s = solve(&p, &cfg).unwrap();
        assert!((s.extent - 4.0 / (2.0 + 2f64.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn zero_target_is_trivial() {
        let cols = d1();
        let p = L1Problem::new(&cols, vec![c(0.0, 0.0); 2], Field::Complex).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.l1, 0.0);
        assert!(s.coefficients.is_empty());
    }

    #[test]
    fn out_of_span_is_infeasible() {
        let cols = DenseColumns::from_columns(&[vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let p = L1Problem::new(&cols, vec![c(0.0, 0.0), c(1.0, 0.0)], Field::Real).unwrap();
        assert!(matches!(solve(&p, &SolverConfig::default()), Err(SolveError::Infeasible { .. })));
    }

    #[test]
    fn real_field_requires_real_data() {
        let cols = d1();
        assert!(L1Problem::new(&cols, vec![c(1.0, 0.0); 2], Field::Real).is_err());
    }

    #[test]
    fn perturbed_solution_fails_certificate() {
        let cols = d1();
        let t = vec![c(1.0, 0.0), Complex64::from_polar(1.0, PI / 4.0)];
        let p = L1Problem::new(&cols, t, Field::Complex).unwrap();
        let mut s = solve(&p, &SolverConfig::default()).unwrap();
        s.coefficients[0].1 *= 1.1;
        let rep = verify_certificate(&p, &s).unwrap();
        assert!(!rep.passes(1e-6, 1.0));
        assert!(rep.primal_residual > 1e-3);
    }
}
