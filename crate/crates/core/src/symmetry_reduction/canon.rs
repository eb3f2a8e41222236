//! Canonical forms of `k`-subset families under vertex relabeling.
//!
//! A family is a bit mask over the `k`-subsets of `0..n` in lexicographic
//! order; for `k = 2` that is the pair order of diagonal codes, so a graph
//! mask is a CZ bit field. The canonical form is the smallest mask over all
//! relabelings in the group.

use super::permutation::{symmetric_group, Permutation};
use crate::error::{Error, Result};

/// Largest vertex count for canonicalization.
pub const MAX_CANON_VERTICES: usize = 8;

pub struct SubsetAction {
    n: usize,
    k: usize,
    subsets: Vec<u32>,
    /// Per non-identity group element, the image position of each subset.
    images: Vec<Vec<u8>>,
}

fn k_subsets(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.iter().fold(0u32, |m, &v| m | (1 << v)));
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

impl SubsetAction {
    /// Action of the full symmetric group.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n > MAX_CANON_VERTICES {
            return Err(Error::SizeLimit(format!("canonical forms support n <= {MAX_CANON_VERTICES}")));
        }
        Self::with_group(n, k, &symmetric_group(n)?)
    }

    /// Action of an explicit group (all elements, not generators).
    pub fn with_group(n: usize, k: usize, group: &[Permutation]) -> Result<Self> {
        if n > MAX_CANON_VERTICES || k == 0 || k > n {
            return Err(Error::SizeLimit(format!("need 1 <= k <= n <= {MAX_CANON_VERTICES}")));
        }
        let subsets = k_subsets(n, k);
        if subsets.len() > 64 {
            return Err(Error::SizeLimit(format!("{} subsets do not fit a 64-bit mask", subsets.len())));
        }
        let mut pos = vec![u8::MAX; 1 << n];
        for (p, &s) in subsets.iter().enumerate() {
            pos[s as usize] = p as u8;
        }
        let images = group
            .iter()
            .filter(|g| g.iter().enumerate().any(|(j, &v)| j != v))
            .map(|g| {
                subsets
                    .iter()
                    .map(|&s| {
                        let img = (0..n).filter(|&v| s >> v & 1 == 1).fold(0u32, |m, v| m | (1 << g[v]));
                        pos[img as usize]
                    })
                    .collect()
            })
            .collect();
        Ok(SubsetAction { n, k, subsets, images })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of `k`-subsets, i.e. mask width.
    pub fn width(&self) -> usize {
        self.subsets.len()
    }

    /// Vertex set of subset `p` as a bit mask.
    pub fn subset(&self, p: usize) -> u32 {
        self.subsets[p]
    }

    #[inline]
    fn apply(img: &[u8], mut mask: u64) -> u64 {
        let mut out = 0u64;
        while mask != 0 {
            let p = mask.trailing_zeros() as usize;
            out |= 1 << img[p];
            mask &= mask - 1;
        }
        out
    }

    pub fn is_canonical(&self, mask: u64) -> bool {
        self.images.iter().all(|img| Self::apply(img, mask) >= mask)
    }

    pub fn canonical(&self, mask: u64) -> u64 {
        self.images.iter().map(|img| Self::apply(img, mask)).fold(mask, u64::min)
    }

    /// Distinct images of `mask` under the group.
    pub fn orbit(&self, mask: u64) -> Vec<u64> {
        let mut o: Vec<u64> = self.images.iter().map(|img| Self::apply(img, mask)).collect();
        o.push(mask);
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Canonical masks with exactly `count` subsets, increasing.
    pub fn classes_with(&self, count: usize) -> Vec<u64> {
        let w = self.width();
        if count > w {
            return Vec::new();
        }
        let mut out = Vec::new();
        // walk masks of fixed popcount in increasing order
        let mut m: u64 = if count == 0 { 0 } else { (1u64 << count) - 1 };
        let limit_bit = w;
        loop {
            if self.is_canonical(m) {
                out.push(m);
            }
            if count == 0 {
                break;
            }
            let t = m | (m - 1);
            let next = (t.wrapping_add(1)) | (((!t & t.wrapping_add(1)) - 1) >> (m.trailing_zeros() + 1));
            if limit_bit < 64 && next >> limit_bit != 0 || next <= m {
                break;
            }
            m = next;
        }
        out
    }

    /// All canonical masks, ordered by subset count then value.
    pub fn classes(&self) -> Vec<u64> {
        (0..=self.width()).flat_map(|c| self.classes_with(c)).collect()
    }
}

/// Canonical adjacency masks of simple graphs on `n` vertices with `k` edges.
pub fn enumerate_graph_classes(n: usize, k: usize) -> Result<Vec<u64>> {
    if n > 7 {
        return Err(Error::SizeLimit("graph classes support n <= 7".into()));
    }
    if n < 2 {
        return Ok(if k == 0 { vec![0] } else { Vec::new() });
    }
    Ok(SubsetAction::new(n, 2)?.classes_with(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_order_matches_pairs() {
        let n = 5;
        let a = SubsetAction::new(n, 2).unwrap();
        for j in 0..n {
            for k in (j + 1)..n {
                let p = crate::clifford_dictionaries::pair_index(n, j, k);
                assert_eq!(a.subset(p), (1 << j) | (1 << k));
            }
        }
    }

    #[test]
    fn graph_class_counts() {
        assert_eq!(enumerate_graph_classes(4, 3).unwrap().len(), 3);
        assert_eq!(enumerate_graph_classes(4, 0).unwrap(), vec![0]);
        let per_n = |n: usize| -> usize {
            (0..=crate::clifford_dictionaries::pair_count(n)).map(|k| enumerate_graph_classes(n, k).unwrap().len()).sum()
        };
        // unlabeled simple graphs
        assert_eq!([per_n(2), per_n(3), per_n(4), per_n(5)], [2, 4, 11, 34]);
    }

    #[test]
    fn canonical_is_orbit_minimum() {
        let a = SubsetAction::new(4, 2).unwrap();
        for m in 0..(1u64 << 6) {
            let c = a.canonical(m);
            assert_eq!(c, *a.orbit(m).first().unwrap());
            assert_eq!(a.is_canonical(m), c == m);
        }
    }
}
