//! Exact integer codes for diagonal Clifford unitaries.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{qubit_bit, DenseOperator};

/// Largest qubit count a [`DiagonalCliffordCode`] can hold.
pub const MAX_CODE_QUBITS: usize = 8;

/// Number of unordered qubit pairs.
#[inline]
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of pair `(j, k)`, `j < k`, in upper-triangular row-major order.
#[inline]
pub fn pair_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < n);
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

/// `prod_j S_j^{a_j} prod_{j<k} CZ_{jk}^{b_jk}`: `a` in `Z_4^n`, bit `p` of
/// `b` is the CZ on the `p`-th pair in upper-triangular row-major order.
///
/// Ordering is by `(a, b)` with `a` compared lexicographically and `b` as an
/// integer, which is also the enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagonalCliffordCode {
    n: u8,
    a: [u8; MAX_CODE_QUBITS],
    b: u32,
}

impl DiagonalCliffordCode {
    pub fn new(n: usize, a: &[u8], b: u32) -> Result<Self> {
        if n == 0 || n > MAX_CODE_QUBITS {
            return Err(Error::InvalidInput(format!("diagonal codes need 1 <= n <= {MAX_CODE_QUBITS}")));
        }
        if a.len() != n || a.iter().any(|&v| v > 3) {
            return Err(Error::InvalidInput("a must hold n values in 0..4".into()));
        }
        let p = pair_count(n);
        if p < 32 && b >> p != 0 {
            return Err(Error::InvalidInput("b has bits beyond the pair count".into()));
        }
        let mut arr = [0u8; MAX_CODE_QUBITS];
        arr[..n].copy_from_slice(a);
        Ok(DiagonalCliffordCode { n: n as u8, a: arr, b })
    }

    /// Code from CZ pairs given as 0-based `(j, k)`.
    pub fn from_pairs(n: usize, a: &[u8], pairs: &[(usize, usize)]) -> Result<Self> {
        let mut b = 0u32;
        for &(j, k) in pairs {
            let (j, k) = if j < k { (j, k) } else { (k, j) };
            if j == k || k >= n {
                return Err(Error::InvalidInput(format!("bad CZ pair ({j}, {k})")));
            }
            b ^= 1 << pair_index(n, j, k);
        }
        Self::new(n, a, b)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, &vec![0; n], 0).expect("valid n")
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn a(&self) -> &[u8] {
        &self.a[..self.n()]
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// The CZ bits as a 0/1 list in pair order.
    pub fn b_bits(&self) -> Vec<u8> {
        (0..pair_count(self.n())).map(|p| ((self.b >> p) & 1) as u8).collect()
    }

    pub fn cz_count(&self) -> u32 {
        self.b.count_ones()
    }

    /// True for real-diagonal codes (every `a_j` even).
    pub fn is_real(&self) -> bool {
        self.a().iter().all(|v| v % 2 == 0)
    }

    /// Neighbour masks: for qubit `j`, basis-index bits of partners `k > j`.
    fn upper_masks(&self) -> [usize; MAX_CODE_QUBITS] {
        let n = self.n();
        let mut m = [0usize; MAX_CODE_QUBITS];
        for j in 0..n {
            for k in (j + 1)..n {
                if (self.b >> pair_index(n, j, k)) & 1 == 1 {
                    m[j] |= 1 << (n - 1 - k);
                }
            }
        }
        m
    }

    /// Power of `i` of the diagonal entry at basis index `x`.
    pub fn exponent(&self, x: usize) -> u8 {
        let n = self.n();
        let masks = self.upper_masks();
        let mut e = 0u32;
        let mut parity = 0u32;
        for j in 0..n {
            if qubit_bit(x, n, j) == 1 {
                e += self.a[j] as u32;
                parity ^= (masks[j] & x).count_ones() & 1;
            }
        }
        ((e + 2 * parity) % 4) as u8
    }

    /// Exponents for all `2^n` basis indices.
    pub fn exponents(&self) -> Vec<u8> {
        let mut out = vec![0u8; 1 << self.n()];
        self.fill_exponents(&mut out);
        out
    }

    pub fn fill_exponents(&self, out: &mut [u8]) {
        let n = self.n();
        let masks = self.upper_masks();
        for (x, o) in out.iter_mut().enumerate().take(1 << n) {
            let mut e = 0u32;
            let mut parity = 0u32;
            for j in 0..n {
                if (x >> (n - 1 - j)) & 1 == 1 {
                    e += self.a[j] as u32;
                    parity ^= (masks[j] & x).count_ones() & 1;
                }
            }
            *o = ((e + 2 * parity) & 3) as u8;
        }
    }

    pub fn to_vector(&self) -> Vec<Complex64> {
        self.exponents().into_iter().map(i_power).collect()
    }

    pub fn to_operator(&self) -> DenseOperator {
        DenseOperator::from_diagonal(&self.to_vector()).expect("power-of-two dimension")
    }

    /// Position in [`enumerate_diagonal`] order.
    pub fn index(&self) -> u64 {
        let a_idx = self.a().iter().fold(0u64, |acc, &v| acc * 4 + v as u64);
        (a_idx << pair_count(self.n())) | self.b as u64
    }

    pub fn from_index(n: usize, idx: u64) -> Result<Self> {
        let p = pair_count(n);
        if n == 0 || n > MAX_CODE_QUBITS || idx >> (2 * n + p) != 0 {
            return Err(Error::InvalidInput(format!("diagonal code index {idx} out of range for n = {n}")));
        }
        let b = (idx & ((1u64 << p) - 1)) as u32;
        let mut a_idx = idx >> p;
        let mut a = [0u8; MAX_CODE_QUBITS];
        for j in (0..n).rev() {
            a[j] = (a_idx & 3) as u8;
            a_idx >>= 2;
        }
        Ok(DiagonalCliffordCode { n: n as u8, a, b })
    }

    /// Position in [`enumerate_real_diagonal`] order; `None` if not real.
    pub fn real_index(&self) -> Option<u64> {
        if !self.is_real() {
            return None;
        }
        let a_idx = self.a().iter().fold(0u64, |acc, &v| acc * 2 + (v / 2) as u64);
        Some((a_idx << pair_count(self.n())) | self.b as u64)
    }

    pub fn from_real_index(n: usize, idx: u64) -> Result<Self> {
        let p = pair_count(n);
        if n == 0 || n > MAX_CODE_QUBITS || idx >> (n + p) != 0 {
            return Err(Error::InvalidInput(format!("real-diagonal index {idx} out of range for n = {n}")));
        }
        let b = (idx & ((1u64 << p) - 1)) as u32;
        let mut a_idx = idx >> p;
        let mut a = [0u8; MAX_CODE_QUBITS];
        for j in (0..n).rev() {
            a[j] = 2 * (a_idx & 1) as u8;
            a_idx >>= 1;
        }
        Ok(DiagonalCliffordCode { n: n as u8, a, b })
    }

    /// Relabels qubits: qubit `j` moves to `perm[j]`. Matches
    /// [`DenseOperator::conjugate_by_permutation`].
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let mut a = [0u8; MAX_CODE_QUBITS];
        for j in 0..n {
            a[perm[j]] = self.a[j];
        }
        let mut b = 0u32;
        for j in 0..n {
            for k in (j + 1)..n {
                if (self.b >> pair_index(n, j, k)) & 1 == 1 {
                    let (u, v) = (perm[j].min(perm[k]), perm[j].max(perm[k]));
                    b |= 1 << pair_index(n, u, v);
                }
            }
        }
        DiagonalCliffordCode { n: self.n, a, b }
    }
}

#[inline]
pub fn i_power(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `4^n 2^{n(n-1)/2}`.
pub fn diagonal_count(n: usize) -> u64 {
    1u64 << (2 * n + pair_count(n))
}

/// `2^n 2^{n(n-1)/2}`.
pub fn real_diagonal_count(n: usize) -> u64 {
    1u64 << (n + pair_count(n))
}

/// Largest `n` for the diagonal code streams.
pub const MAX_DIAGONAL_STREAM_QUBITS: usize = 7;
pub const MAX_REAL_DIAGONAL_STREAM_QUBITS: usize = 8;

/// All diagonal Clifford codes in `(a, b)` order, lazily.
pub fn enumerate_diagonal(n: usize) -> Result<impl Iterator<Item = DiagonalCliffordCode>> {
    if n == 0 || n > MAX_DIAGONAL_STREAM_QUBITS {
        return Err(Error::SizeLimit(format!("diagonal enumeration supports 1 <= n <= {MAX_DIAGONAL_STREAM_QUBITS}")));
    }
    Ok((0..diagonal_count(n)).map(move |i| DiagonalCliffordCode::from_index(n, i).expect("in range")))
}

/// All real-diagonal codes (`a_j` in {0, 2}) in `(a, b)` order, lazily.
pub fn enumerate_real_diagonal(n: usize) -> Result<impl Iterator<Item = DiagonalCliffordCode>> {
    if n == 0 || n > MAX_REAL_DIAGONAL_STREAM_QUBITS {
        return Err(Error::SizeLimit(format!(
            "real-diagonal enumeration supports 1 <= n <= {MAX_REAL_DIAGONAL_STREAM_QUBITS}"
        )));
    }
    Ok((0..real_diagonal_count(n)).map(move |i| DiagonalCliffordCode::from_real_index(n, i).expect("in range")))
}

pub fn diag_code_to_vector(code: &DiagonalCliffordCode) -> Vec<Complex64> {
    code.to_vector()
}

/// Column source that generates diagonal codes on demand.
#[derive(Clone, Copy, Debug)]
pub struct DiagonalCodeStream {
    n: usize,
    real: bool,
}

impl DiagonalCodeStream {
    pub fn new(n: usize, real: bool) -> Result<Self> {
        let cap = if real { MAX_REAL_DIAGONAL_STREAM_QUBITS } else { MAX_DIAGONAL_STREAM_QUBITS };
        if n == 0 || n > cap {
            return Err(Error::SizeLimit(format!("diagonal stream supports 1 <= n <= {cap}")));
        }
        Ok(DiagonalCodeStream { n, real })
    }

    pub fn code(&self, j: usize) -> DiagonalCliffordCode {
        if self.real {
            DiagonalCliffordCode::from_real_index(self.n, j as u64).expect("in range")
        } else {
            DiagonalCliffordCode::from_index(self.n, j as u64).expect("in range")
        }
    }
}

impl crate::l1_solver::ColumnSource for DiagonalCodeStream {
    fn dim(&self) -> usize {
        1 << self.n
    }
    fn len(&self) -> usize {
        if self.real {
            real_diagonal_count(self.n) as usize
        } else {
            diagonal_count(self.n) as usize
        }
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn column(&self, j: usize, out: &mut [Complex64]) {
        let mut e = [0u8; 1 << MAX_CODE_QUBITS];
        let code = self.code(j);
        code.fill_exponents(&mut e);
        for (o, &k) in out.iter_mut().zip(&e) {
            *o = i_power(k);
        }
    }
}
