//! Dense complex operators on `n` qubits.
//!
//! Basis index convention: qubit 0 is the most significant bit, so the
//! bitstring `x_0 x_1 ... x_{n-1}` maps to index `sum_j x_j 2^{n-1-j}`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub(crate) const ZERO_CUTOFF: f64 = 1e-9;

/// Row-major `2^n x 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    entries: Vec<Complex64>,
}

/// Bit of qubit `j` in basis index `x`.
#[inline]
pub fn qubit_bit(x: usize, n: usize, j: usize) -> usize {
    (x >> (n - 1 - j)) & 1
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Self {
        let d = 1usize << n;
        DenseOperator { n, entries: vec![Complex64::new(0.0, 0.0); d * d] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        let d = m.dim();
        for i in 0..d {
            m.entries[i * d + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds an operator from row-major entries; the length must be `4^n`.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        let len = entries.len();
        let d = (len as f64).sqrt().round() as usize;
        if d * d != len || !d.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "{len} entries do not form a square matrix of power-of-two dimension"
            )));
        }
        Ok(DenseOperator { n: d.trailing_zeros() as usize, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        Self::from_entries(rows.iter().flatten().copied().collect())
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let d = diag.len();
        if !d.is_power_of_two() {
            return Err(Error::InvalidInput(format!("dimension {d} is not a power of two")));
        }
        let mut m = Self::zeros(d.trailing_zeros() as usize);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * d + i] = v;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let d = self.dim();
        self.entries[r * d + c] = v;
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.n != other.n {
            return Err(Error::InvalidInput("dimension mismatch in product".into()));
        }
        let d = self.dim();
        let mut out = DenseOperator::zeros(self.n);
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &DenseOperator) -> DenseOperator {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut out = DenseOperator::zeros(self.n + other.n);
        for i in 0..da {
            for j in 0..da {
                let a = self.entries[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        out.entries[(i * db + k) * d + j * db + l] = a * other.entries[k * db + l];
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseOperator {
        let d = self.dim();
        let mut out = DenseOperator::zeros(self.n);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseOperator {
        let d = self.dim();
        let mut out = DenseOperator::zeros(self.n);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j];
            }
        }
        out
    }

    pub fn conj(&self) -> DenseOperator {
        DenseOperator { n: self.n, entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> DenseOperator {
        DenseOperator { n: self.n, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.n != other.n {
            return Err(Error::InvalidInput("dimension mismatch in sum".into()));
        }
        Ok(DenseOperator {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.n, other.n);
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        match self.adjoint().matmul(self) {
            Ok(p) => p.max_abs_diff(&DenseOperator::identity(self.n)) <= tol,
            Err(_) => false,
        }
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[i * d + j].norm() <= tol))
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Image of a basis index under the qubit permutation `perm`
    /// (qubit `j` moves to position `perm[j]`).
    pub fn permute_index(x: usize, n: usize, perm: &[usize]) -> usize {
        let mut y = 0;
        for j in 0..n {
            if qubit_bit(x, n, j) == 1 {
                y |= 1 << (n - 1 - perm[j]);
            }
        }
        y
    }

    /// `P U P^dagger` for the qubit permutation `P`.
    pub fn conjugate_by_permutation(&self, perm: &[usize]) -> DenseOperator {
        let d = self.dim();
        let map: Vec<usize> = (0..d).map(|x| Self::permute_index(x, self.n, perm)).collect();
        let mut out = DenseOperator::zeros(self.n);
        for i in 0..d {
            for j in 0..d {
                out.entries[map[i] * d + map[j]] = self.entries[i * d + j];
            }
        }
        out
    }

    /// Row-major vectorization (the column used by full-kind dictionaries).
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.entries.clone()
    }
}

/// Rescales `op` so that its first nonzero entry (row-major) is real and positive.
pub fn canonical_phase(op: &DenseOperator) -> Result<DenseOperator> {
    let first = op
        .entries
        .iter()
        .find(|z| z.norm() > ZERO_CUTOFF)
        .ok_or_else(|| Error::InvalidInput("zero matrix has no phase class".into()))?;
    let phase = first.conj() / first.norm();
    Ok(op.scale(phase))
}

/// Exact key of a Clifford-like matrix (or vector) whose nonzero entries all
/// have modulus `2^{-s/2}` and phases in multiples of pi/4, after phase
/// canonicalization. Entry codes are `0..8` for the eighth-root power and
/// `8` for zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactKey {
    pub s: u8,
    pub entries: Vec<u8>,
}

pub(crate) const KEY_ZERO: u8 = 8;

/// Computes the exact key of a slice of entries. Fails if the entries are
/// not of the Clifford form described on [`ExactKey`].
pub fn exact_key(entries: &[Complex64]) -> Result<ExactKey> {
    let first = entries
        .iter()
        .find(|z| z.norm() > ZERO_CUTOFF)
        .ok_or_else(|| Error::InvalidInput("zero entries have no exact key".into()))?;
    let modulus = first.norm();
    let s_f = -2.0 * modulus.log2();
    let s = s_f.round();
    if (s - s_f).abs() > 1e-7 || !(0.0..=255.0).contains(&s) {
        return Err(Error::InvalidInput(format!("modulus {modulus} is not 2^(-s/2)")));
    }
    let phase = first.conj() / modulus;
    let mut codes = Vec::with_capacity(entries.len());
    for z in entries {
        if z.norm() <= ZERO_CUTOFF {
            codes.push(KEY_ZERO);
            continue;
        }
        let w = z * phase;
        let k = (w.arg() / (PI / 4.0)).round().rem_euclid(8.0) as u8;
        let expect = Complex64::from_polar(modulus, k as f64 * PI / 4.0);
        if (w - expect).norm() > 1e-9 {
            return Err(Error::InvalidInput("entry is not of Clifford form".into()));
        }
        codes.push(k);
    }
    Ok(ExactKey { s: s as u8, entries: codes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> DenseOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DenseOperator::from_rows(&[vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]).unwrap()
    }

    #[test]
    fn canonical_phase_examples() {
        let d = DenseOperator::from_diagonal(&[c(0.0, 1.0), c(0.0, 1.0)]).unwrap();
        let got = canonical_phase(&d).unwrap();
        assert!(got.max_abs_diff(&DenseOperator::identity(1)) < 1e-15);

        let h = hadamard();
        let rotated = h.scale(Complex64::from_polar(1.0, PI / 4.0));
        assert!(canonical_phase(&rotated).unwrap().max_abs_diff(&h) < 1e-15);
        assert!(canonical_phase(&DenseOperator::zeros(1)).is_err());
    }

    #[test]
    fn exact_key_ignores_eighth_root_phase() {
        let h = hadamard();
        let k1 = exact_key(h.entries()).unwrap();
        let k2 = exact_key(h.scale(Complex64::from_polar(1.0, 3.0 * PI / 4.0)).entries()).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(k1.s, 1);
    }

    #[test]
    fn permutation_conjugation_moves_qubits() {
        // Z on qubit 0 conjugated by the swap becomes Z on qubit 1.
        let z = DenseOperator::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let z0 = z.kron(&DenseOperator::identity(1));
        let z1 = DenseOperator::identity(1).kron(&z);
        assert!(z0.conjugate_by_permutation(&[1, 0]).max_abs_diff(&z1) < 1e-15);
    }
}
