//! Column sources and the real-valued, range-compressed view the solvers use.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

/// A matrix given column by column. Implementations must be deterministic:
/// repeated calls for the same index yield the same column.
pub trait ColumnSource: Sync {
    /// Ambient dimension `m`.
    fn dim(&self) -> usize;
    /// Number of columns `N`.
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// True when every column is real.
    fn is_real(&self) -> bool;
    fn column(&self, j: usize, out: &mut [Complex64]);
}

/// Column-major dense storage.
#[derive(Clone, Debug)]
pub struct DenseColumns {
    dim: usize,
    data: Vec<Complex64>,
    real: bool,
}

impl DenseColumns {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "data length must be a multiple of dim");
        let real = data.iter().all(|z| z.im == 0.0);
        DenseColumns { dim, data, real }
    }

    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let dim = cols.first().map(|c| c.len()).unwrap_or(1);
        assert!(cols.iter().all(|c| c.len() == dim));
        Self::new(dim, cols.iter().flatten().copied().collect())
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }
}

impl ColumnSource for DenseColumns {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.data.len() / self.dim
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn column(&self, j: usize, out: &mut [Complex64]) {
        out.copy_from_slice(self.col(j));
    }
}

/// Adapter turning a closure into a column source.
pub struct FnColumns<F> {
    dim: usize,
    len: usize,
    real: bool,
    f: F,
}

impl<F: Fn(usize, &mut [Complex64]) + Sync> FnColumns<F> {
    pub fn new(dim: usize, len: usize, real: bool, f: F) -> Self {
        FnColumns { dim, len, real, f }
    }
}

impl<F: Fn(usize, &mut [Complex64]) + Sync> ColumnSource for FnColumns<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.len
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn column(&self, j: usize, out: &mut [Complex64]) {
        (self.f)(j, out)
    }
}

pub(crate) const CHUNK: usize = 2048;

pub(crate) fn chunk_ranges(len: usize) -> Vec<Range<usize>> {
    (0..len.div_ceil(CHUNK)).map(|k| k * CHUNK..((k + 1) * CHUNK).min(len)).collect()
}

/// Real view of the columns after projecting onto the column range.
///
/// For real problems a column is `r` reals; for complex problems it is the
/// `2r` reals `(Re a, Im a)`.
pub(crate) struct RealColumns<'a> {
    src: &'a dyn ColumnSource,
    /// Orthonormal basis of the range, `m x r`, when the columns do not span.
    basis: Option<DMatrix<Complex64>>,
    pub real: bool,
    pub rank: usize,
    /// Eigenvalues of `A A^H` in the compressed coordinates (diagonal there).
    pub gram_eigs: Vec<f64>,
    /// Eigenvectors of `A A^H` in original coordinates, `m x r`.
    pub gram_vecs: DMatrix<Complex64>,
    cache: Option<Vec<f64>>,
}

impl<'a> RealColumns<'a> {
    /// One pass to form `A A^H`, then eigendecomposition.
    pub fn new(src: &'a dyn ColumnSource, real: bool, cache_limit_bytes: usize) -> Self {
        let m = src.dim();
        let n = src.len();
        let partials: Vec<Vec<Complex64>> = chunk_ranges(n)
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![Complex64::new(0.0, 0.0); m * m];
                let mut col = vec![Complex64::new(0.0, 0.0); m];
                for j in r {
                    src.column(j, &mut col);
                    for a in 0..m {
                        let ca = col[a];
                        if ca.re == 0.0 && ca.im == 0.0 {
                            continue;
                        }
                        for b in a..m {
                            acc[a * m + b] += ca * col[b].conj();
                        }
                    }
                }
                acc
            })
            .collect();
        let mut g = vec![Complex64::new(0.0, 0.0); m * m];
        for p in partials {
            for (x, y) in g.iter_mut().zip(p) {
                *x += y;
            }
        }
        for a in 0..m {
            for b in 0..a {
                g[a * m + b] = g[b * m + a].conj();
            }
        }
        let (eigs, vecs) = if real {
            let gr = DMatrix::from_fn(m, m, |a, b| g[a * m + b].re);
            let e = SymmetricEigen::new(gr);
            (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|v| Complex64::new(v, 0.0)))
        } else {
            let gc = DMatrix::from_fn(m, m, |a, b| g[a * m + b]);
            let e = SymmetricEigen::new(gc);
            (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
        };
        let lmax = eigs.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..m).filter(|&i| eigs[i] > 1e-10 * lmax.max(1e-300)).collect();
        let rank = keep.len();
        let gram_vecs = DMatrix::from_fn(m, rank, |a, k| vecs[(a, keep[k])]);
        let gram_eigs: Vec<f64> = keep.iter().map(|&i| eigs[i]).collect();
        let basis = if rank < m { Some(gram_vecs.clone()) } else { None };
        let mut rc = RealColumns {
            src,
            basis,
            real,
            rank,
            gram_eigs,
            gram_vecs,
            cache: None,
        };
        let width = rc.width();
        if n.saturating_mul(width).saturating_mul(8) <= cache_limit_bytes {
            let mut data = vec![0.0; n * width];
            data.par_chunks_mut(CHUNK * width).enumerate().for_each(|(k, out)| {
                let mut raw = vec![Complex64::new(0.0, 0.0); m];
                for (i, dst) in out.chunks_mut(width).enumerate() {
                    rc.fetch(k * CHUNK + i, &mut raw, dst);
                }
            });
            rc.cache = Some(data);
        }
        rc
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn dim(&self) -> usize {
        self.src.dim()
    }

    pub fn width(&self) -> usize {
        if self.real {
            self.rank_dim()
        } else {
            2 * self.rank_dim()
        }
    }

    /// Dimension of the coordinates the solver works in.
    pub fn rank_dim(&self) -> usize {
        if self.basis.is_some() {
            self.rank
        } else {
            self.dim()
        }
    }


    fn fetch(&self, j: usize, raw: &mut [Complex64], out: &mut [f64]) {
        self.src.column(j, raw);
        let r = self.rank_dim();
        match &self.basis {
            None => {
                for a in 0..r {
                    out[a] = raw[a].re;
                    if !self.real {
                        out[r + a] = raw[a].im;
                    }
                }
            }
            Some(q) => {
                for k in 0..r {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..raw.len() {
                        acc += q[(a, k)].conj() * raw[a];
                    }
                    out[k] = acc.re;
                    if !self.real {
                        out[r + k] = acc.im;
                    }
                }
            }
        }
    }

    /// Calls `f(j, column)` for each column index in `range`.
    pub fn for_range(&self, range: Range<usize>, mut f: impl FnMut(usize, &[f64])) {
        let w = self.width();
        match &self.cache {
            Some(data) => {
                for j in range {
                    f(j, &data[j * w..(j + 1) * w]);
                }
            }
            None => {
                let mut raw = vec![Complex64::new(0.0, 0.0); self.dim()];
                let mut buf = vec![0.0; w];
                for j in range {
                    self.fetch(j, &mut raw, &mut buf);
                    f(j, &buf);
                }
            }
        }
    }

    /// Deterministic parallel reduction of per-chunk accumulators of length `len`.
    pub fn reduce<F>(&self, len: usize, f: F) -> Vec<f64>
    where
        F: Fn(Range<usize>, &mut [f64]) + Sync,
    {
        let partials: Vec<Vec<f64>> = chunk_ranges(self.len())
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![0.0; len];
                f(r, &mut acc);
                acc
            })
            .collect();
        let mut out = vec![0.0; len];
        for p in partials {
            for (x, y) in out.iter_mut().zip(p) {
                *x += y;
            }
        }
        out
    }

    /// Maps compressed real coordinates back to an original complex vector.
    pub fn expand(&self, v: &[f64]) -> Vec<Complex64> {
        let r = self.rank_dim();
        let c: Vec<Complex64> = (0..r)
            .map(|k| Complex64::new(v[k], if self.real { 0.0 } else { v[r + k] }))
            .collect();
        match &self.basis {
            None => c,
            Some(q) => (0..self.dim()).map(|a| (0..r).map(|k| q[(a, k)] * c[k]).sum()).collect(),
        }
    }

    /// Compresses an original vector; returns it with the norm of the part
    /// outside the column range.
    pub fn compress(&self, b: &[Complex64]) -> (Vec<f64>, f64) {
        let r = self.rank_dim();
        let bc: Vec<Complex64> = match &self.basis {
            None => b.to_vec(),
            Some(q) => (0..r).map(|k| (0..self.dim()).map(|a| q[(a, k)].conj() * b[a]).sum()).collect(),
        };
        let mut out = vec![0.0; self.width()];
        for k in 0..r {
            out[k] = bc[k].re;
            if !self.real {
                out[r + k] = bc[k].im;
            }
        }
        let back = self.expand(&out);
        let mut outside = b.iter().zip(&back).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if self.real {
            outside = outside.max(b.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        }
        (out, outside)
    }

    /// Solves `(A A^H) w = v` in compressed real coordinates.
    pub fn gram_solve(&self, v: &[f64]) -> Vec<f64> {
        let vc = self.expand(v);
        let r = self.rank;
        let m = self.dim();
        let mut w = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..r {
            let proj: Complex64 = (0..m).map(|a| self.gram_vecs[(a, k)].conj() * vc[a]).sum();
            let s = proj / self.gram_eigs[k];
            for a in 0..m {
                w[a] += self.gram_vecs[(a, k)] * s;
            }
        }
        self.compress(&w).0
    }
}

/// Cholesky solve with escalating diagonal regularization, falling back to
/// an eigen-pseudo-inverse.
pub(crate) fn spd_solve(m: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let b = DVector::from_column_slice(rhs);
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for reg in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut a = m.clone();
        if reg > 0.0 {
            for i in 0..n {
                a[(i, i)] += reg * scale;
            }
        }
        if let Some(ch) = a.cholesky() {
            let x = ch.solve(&b);
            if x.iter().all(|v| v.is_finite()) {
                return x.iter().copied().collect();
            }
        }
    }
    let e = SymmetricEigen::new(m.clone());
    let mut x = DVector::zeros(n);
    for k in 0..n {
        let l = e.eigenvalues[k];
        if l > 1e-14 * scale {
            let v = e.eigenvectors.column(k);
            x += v * (v.dot(&b) / l);
        }
    }
    x.iter().copied().collect()
}
