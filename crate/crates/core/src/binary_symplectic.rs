//! GF(2) symplectic algebra, Clifford tableaux and small-n enumeration of
//! Clifford classes and stabilizer states.
//!
//! Phase-space vectors use the interleaved order `(x_0, z_0, x_1, z_1, ...)`
//! packed into a `u64`, bit `2j` holding `x_j` and bit `2j + 1` holding `z_j`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::operator::{canonical_phase, exact_key, DenseOperator};

/// Dense matrix over GF(2), one `u64` per row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols <= 64, "at most 64 columns");
        BitMatrix { rows, cols, bits: vec![0; rows] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.bits[i] = 1 << i;
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Self {
        assert!(cols <= 64);
        let mask = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
        assert!(rows.iter().all(|r| r & !mask == 0), "row exceeds column count");
        BitMatrix { rows: rows.len(), cols, bits: rows }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> u64 {
        self.bits[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.bits[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        if v {
            self.bits[r] |= 1 << c;
        } else {
            self.bits[r] &= !(1 << c);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.bits[c] |= 1 << r;
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let mut acc = 0u64;
            let mut row = self.bits[r];
            while row != 0 {
                let k = row.trailing_zeros() as usize;
                acc ^= other.bits[k];
                row &= row - 1;
            }
            out.bits[r] = acc;
        }
        out
    }
}

/// Symplectic form on interleaved vectors.
#[inline]
pub fn symplectic_inner(v: u64, w: u64) -> u32 {
    const EVEN: u64 = 0x5555_5555_5555_5555;
    let swapped = ((w & EVEN) << 1) | ((w >> 1) & EVEN);
    (v & swapped).count_ones() & 1
}

/// The matrix of the standard (interleaved) symplectic form.
pub fn lambda(n: usize) -> BitMatrix {
    let rows = (0..2 * n).map(|i| 1u64 << (i ^ 1)).collect();
    BitMatrix::from_rows(2 * n, rows)
}

/// `2n x 2n` symplectic matrix whose row `j` is the image of basis vector `e_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    n: usize,
    m: BitMatrix,
}

impl SymplecticMatrix {
    pub fn new(n: usize, m: BitMatrix) -> Result<Self> {
        if m.rows() != 2 * n || m.cols() != 2 * n {
            return Err(Error::InvalidInput("symplectic matrix must be 2n x 2n".into()));
        }
        let s = SymplecticMatrix { n, m };
        if !s.is_symplectic() {
            return Err(Error::InvalidInput("matrix does not preserve the symplectic form".into()));
        }
        Ok(s)
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix { n, m: BitMatrix::identity(2 * n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.m
    }

    pub fn image(&self, basis: usize) -> u64 {
        self.m.row(basis)
    }

    /// Checks `m^T L m = L` over GF(2).
    pub fn is_symplectic(&self) -> bool {
        let l = lambda(self.n);
        self.m.transpose().mul(&l).mul(&self.m) == l
    }
}

/// Order of `Sp(2n, 2)`: `2^{n^2} prod_j (4^j - 1)`.
pub fn symplectic_order(n: usize) -> Result<BigUint> {
    if !(1..=12).contains(&n) {
        return Err(Error::InvalidInput(format!("symplectic_order needs 1 <= n <= 12, got {n}")));
    }
    let mut x = BigUint::one() << (n * n);
    for j in 1..=n {
        x *= (BigUint::one() << (2 * j)) - 1u32;
    }
    Ok(x)
}

/// Number of Clifford unitaries modulo global phase: `2^{n^2+2n} prod_j (4^j - 1)`.
pub fn clifford_class_count(n: usize) -> Result<BigUint> {
    Ok(symplectic_order(n)? << (2 * n))
}

#[inline]
fn transvection(k: u64, v: u64) -> u64 {
    if symplectic_inner(k, v) == 1 {
        v ^ k
    } else {
        v
    }
}

#[inline]
fn pair(v: u64, i: usize) -> (u64, u64) {
    ((v >> (2 * i)) & 1, (v >> (2 * i + 1)) & 1)
}

/// Two transvection vectors `(h1, h2)` with `y = Z_h1 Z_h2 x`.
fn find_transvection(x: u64, y: u64, n: usize) -> (u64, u64) {
    if x == y {
        return (0, 0);
    }
    if symplectic_inner(x, y) == 1 {
        return (x ^ y, 0);
    }
    for i in 0..n {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) != 0 && (y0 | y1) != 0 {
            let mut z0 = x0 ^ y0;
            let mut z1 = x1 ^ y1;
            if z0 == 0 && z1 == 0 {
                z1 = 1;
                if x0 != x1 {
                    z0 = 1;
                }
            }
            let z = (z0 << (2 * i)) | (z1 << (2 * i + 1));
            return (x ^ z, y ^ z);
        }
    }
    let mut z = 0u64;
    for i in 0..n {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) != 0 && (y0 | y1) == 0 {
            if x0 == x1 {
                z |= 1 << (2 * i + 1);
            } else {
                z |= (x0 << (2 * i + 1)) | (x1 << (2 * i));
            }
            break;
        }
    }
    for i in 0..n {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) == 0 && (y0 | y1) != 0 {
            if y0 == y1 {
                z |= 1 << (2 * i + 1);
            } else {
                z |= (y0 << (2 * i + 1)) | (y1 << (2 * i));
            }
            break;
        }
    }
    (x ^ z, y ^ z)
}

fn symplectic_rows(mut i: BigUint, n: usize) -> Vec<u64> {
    let nn = 2 * n;
    let s = (BigUint::one() << nn) - 1u32;
    let (q, r) = i.div_rem(&s);
    let k = r.to_u64().expect("fits") + 1;
    i = q;
    let mut f1 = k;
    let e1 = 1u64;
    let (t0, t1) = find_transvection(e1, f1, n);
    let low = (&i % (BigUint::one() << (nn - 1))).to_u64().expect("fits");
    let mut eprime = e1;
    for j in 2..nn {
        eprime |= ((low >> (j - 1)) & 1) << j;
    }
    let h0 = transvection(t1, transvection(t0, eprime));
    if low & 1 == 1 {
        f1 = 0;
    }
    let mut g: Vec<u64> = vec![0b01, 0b10];
    if n > 1 {
        let inner = symplectic_rows(i >> (nn - 1), n - 1);
        g.extend(inner.into_iter().map(|r| r << 2));
    }
    for row in g.iter_mut() {
        let mut v = transvection(t0, *row);
        v = transvection(t1, v);
        v = transvection(h0, v);
        v = transvection(f1, v);
        *row = v;
    }
    g
}

/// Koenig-Smolin bijection from `0..|Sp(2n,2)|` onto symplectic matrices.
pub fn symplectic_from_index(n: usize, idx: &BigUint) -> Result<SymplecticMatrix> {
    let order = symplectic_order(n)?;
    if idx >= &order {
        return Err(Error::IndexOutOfRange { index: idx.to_string(), order: order.to_string() });
    }
    let rows = symplectic_rows(idx.clone(), n);
    Ok(SymplecticMatrix { n, m: BitMatrix::from_rows(2 * n, rows) })
}

/// Hermitian Pauli `(-1)^sign i^{|x & z|} X^x Z^z` on interleaved bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub n: usize,
    pub bits: u64,
    pub sign: bool,
}

impl SignedPauli {
    fn masks(&self) -> (usize, usize, u32) {
        let (mut xm, mut zm, mut y) = (0usize, 0usize, 0u32);
        for j in 0..self.n {
            let (x, z) = pair(self.bits, j);
            let b = self.n - 1 - j;
            xm |= (x as usize) << b;
            zm |= (z as usize) << b;
            y += (x & z) as u32;
        }
        (xm, zm, y)
    }

    /// Applies the Pauli to a state vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let (xm, zm, y) = self.masks();
        let mut phase = Complex64::i().powu(y);
        if self.sign {
            phase = -phase;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (idx, &a) in v.iter().enumerate() {
            let s = if (zm & idx).count_ones() & 1 == 1 { -phase } else { phase };
            out[idx ^ xm] = s * a;
        }
        out
    }

    pub fn to_dense(&self) -> DenseOperator {
        let d = 1usize << self.n;
        let mut m = DenseOperator::zeros(self.n);
        for c in 0..d {
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            e[c] = Complex64::new(1.0, 0.0);
            for (r, v) in self.apply(&e).into_iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }
}

/// Clifford tableau: images of `X_j` (row `2j`) and `Z_j` (row `2j+1`) with sign bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    symplectic: SymplecticMatrix,
    phase_bits: u64,
}

impl CliffordTableau {
    pub fn new(symplectic: SymplecticMatrix, phase_bits: u64) -> Result<Self> {
        let n = symplectic.n();
        if n < 64 / 2 && phase_bits >> (2 * n) != 0 {
            return Err(Error::InvalidInput("phase bits exceed 2n".into()));
        }
        Ok(CliffordTableau { n, symplectic, phase_bits })
    }

    pub fn identity(n: usize) -> Self {
        CliffordTableau { n, symplectic: SymplecticMatrix::identity(n), phase_bits: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symplectic(&self) -> &SymplecticMatrix {
        &self.symplectic
    }

    pub fn phase_bits(&self) -> u64 {
        self.phase_bits
    }

    /// Signed image of basis Pauli `e_row` (row `2j` is `X_j`, `2j+1` is `Z_j`).
    pub fn image(&self, row: usize) -> SignedPauli {
        SignedPauli { n: self.n, bits: self.symplectic.image(row), sign: (self.phase_bits >> row) & 1 == 1 }
    }
}

/// Maximum qubit count accepted by [`tableau_to_unitary`].
pub const MAX_TABLEAU_QUBITS: usize = 6;

/// Dense unitary realizing the tableau, up to a global phase.
///
/// `U|0>` is the joint +1 eigenvector of the `Z_j` images, obtained by
/// projecting a basis vector; column `x` is then `prod_j P_j^{x_j} U|0>`
/// with `P_j` the image of `X_j`.
pub fn tableau_to_unitary(t: &CliffordTableau) -> Result<DenseOperator> {
    let n = t.n();
    if n > MAX_TABLEAU_QUBITS {
        return Err(Error::SizeLimit(format!("tableau_to_unitary supports n <= {MAX_TABLEAU_QUBITS}")));
    }
    let d = 1usize << n;
    let zs: Vec<SignedPauli> = (0..n).map(|j| t.image(2 * j + 1)).collect();
    let xs: Vec<SignedPauli> = (0..n).map(|j| t.image(2 * j)).collect();
    let project = |mut v: Vec<Complex64>| {
        for q in &zs {
            let qv = q.apply(&v);
            for (a, b) in v.iter_mut().zip(qv) {
                *a = (*a + b) * 0.5;
            }
        }
        v
    };
    // The projector is rank one, so the diagonal of it sums to one and the
    // best basis vector keeps at least 2^-n of its weight.
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for k in 0..d {
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        e[k] = Complex64::new(1.0, 0.0);
        let v = project(e);
        let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if best.as_ref().is_none_or(|(bw, _)| w > *bw + 1e-12) {
            best = Some((w, v));
        }
    }
    let (w, mut psi) = best.expect("dimension >= 1");
    let norm = w.sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);

    let mut u = DenseOperator::zeros(n);
    for x in 0..d {
        let mut col = psi.clone();
        for (j, p) in xs.iter().enumerate() {
            if crate::operator::qubit_bit(x, n, j) == 1 {
                col = p.apply(&col);
            }
        }
        for (r, v) in col.into_iter().enumerate() {
            u.set(r, x, v);
        }
    }
    Ok(u)
}

/// Identifier of a Clifford class: Koenig-Smolin index plus the 2n sign bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliffordId {
    pub symplectic_index: u64,
    pub phase_bits: u32,
}

impl CliffordId {
    pub fn tableau(&self, n: usize) -> Result<CliffordTableau> {
        let s = symplectic_from_index(n, &BigUint::from(self.symplectic_index))?;
        CliffordTableau::new(s, self.phase_bits as u64)
    }

    pub fn unitary(&self, n: usize) -> Result<DenseOperator> {
        canonical_phase(&tableau_to_unitary(&self.tableau(n)?)?)
    }
}

/// Maximum qubit count for materializing all Clifford classes.
pub const MAX_FULL_CLIFFORD_QUBITS: usize = 2;

/// One phase-canonical representative per Clifford class, in
/// (symplectic index, phase bits) order.
pub fn enumerate_clifford_classes(n: usize) -> Result<Vec<(CliffordId, DenseOperator)>> {
    if n == 0 || n > MAX_FULL_CLIFFORD_QUBITS {
        return Err(Error::SizeLimit(format!(
            "full Clifford enumeration is capped at n <= {MAX_FULL_CLIFFORD_QUBITS}"
        )));
    }
    let order = symplectic_order(n)?.to_u64().expect("small n");
    let mut out = Vec::with_capacity((order as usize) << (2 * n));
    for s in 0..order {
        let sm = symplectic_from_index(n, &BigUint::from(s))?;
        for p in 0..(1u32 << (2 * n)) {
            let t = CliffordTableau::new(sm.clone(), p as u64)?;
            let u = canonical_phase(&tableau_to_unitary(&t)?)?;
            out.push((CliffordId { symplectic_index: s, phase_bits: p }, u));
        }
    }
    Ok(out)
}

/// Number of `n`-qubit stabilizer states: `2^n prod_j (2^j + 1)`.
pub fn stabilizer_state_count(n: usize) -> BigUint {
    let mut x = BigUint::one() << n;
    for j in 1..=n {
        x *= (BigUint::one() << j) + 1u32;
    }
    x
}

/// Maximum qubit count for [`enumerate_stabilizer_states`].
pub const MAX_STABILIZER_STATE_QUBITS: usize = 4;

/// All `n`-qubit stabilizer states, one per global-phase class.
///
/// Each state is `2^{-k/2} sum_{u in F_2^k} i^{l(u)} (-1)^{q(u)} |x0 + V u>`
/// over an affine subspace `x0 + span(V)` in reduced row echelon form.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<Vec<Complex64>>> {
    if n == 0 || n > MAX_STABILIZER_STATE_QUBITS {
        return Err(Error::SizeLimit(format!(
            "stabilizer state enumeration supports 1 <= n <= {MAX_STABILIZER_STATE_QUBITS}"
        )));
    }
    let d = 1usize << n;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for pivots in 0u32..(1 << n) {
        let pv: Vec<usize> = (0..n).filter(|&b| (pivots >> b) & 1 == 1).collect();
        let k = pv.len();
        // Free positions of row i: non-pivot bits above its pivot.
        let free: Vec<Vec<usize>> = pv
            .iter()
            .map(|&p| ((p + 1)..n).filter(|&b| (pivots >> b) & 1 == 0).collect())
            .collect();
        let total_free: usize = free.iter().map(|f| f.len()).sum();
        for fill in 0u64..(1 << total_free) {
            let mut basis = Vec::with_capacity(k);
            let mut off = 0;
            for (i, &p) in pv.iter().enumerate() {
                let mut v = 1usize << p;
                for (t, &b) in free[i].iter().enumerate() {
                    if (fill >> (off + t)) & 1 == 1 {
                        v |= 1 << b;
                    }
                }
                off += free[i].len();
                basis.push(v);
            }
            let nonpivot: Vec<usize> = (0..n).filter(|&b| (pivots >> b) & 1 == 0).collect();
            for shift in 0usize..(1 << nonpivot.len()) {
                let mut x0 = 0usize;
                for (t, &b) in nonpivot.iter().enumerate() {
                    if (shift >> t) & 1 == 1 {
                        x0 |= 1 << b;
                    }
                }
                let pairs = k * k.saturating_sub(1) / 2;
                for lin in 0u64..(1 << (2 * k)) {
                    for quad in 0u64..(1 << pairs) {
                        let amp = Complex64::new((1.0 / (1u64 << k) as f64).sqrt(), 0.0);
                        let mut v = vec![Complex64::new(0.0, 0.0); d];
                        for u in 0usize..(1 << k) {
                            let mut x = x0;
                            let mut e = 0u64;
                            let mut p = 0;
                            for i in 0..k {
                                let ui = (u >> i) & 1;
                                if ui == 1 {
                                    x ^= basis[i];
                                    e += (lin >> (2 * i)) & 3;
                                }
                                for j in (i + 1)..k {
                                    if ui == 1 && (u >> j) & 1 == 1 && (quad >> p) & 1 == 1 {
                                        e += 2;
                                    }
                                    p += 1;
                                }
                            }
                            v[x] = amp * Complex64::i().powu((e % 4) as u32);
                        }
                        if seen.insert(exact_key(&v)?) {
                            out.push(v);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
