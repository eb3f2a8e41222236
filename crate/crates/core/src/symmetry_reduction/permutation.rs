//! Qubit permutations and the groups they generate.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Largest qubit count for explicit group expansion (`8! = 40320`).
pub const MAX_GROUP_QUBITS: usize = 8;

/// `perm[j]` is the new position of qubit `j`.
pub type Permutation = Vec<usize>;

pub fn identity_perm(n: usize) -> Permutation {
    (0..n).collect()
}

pub fn transposition(n: usize, a: usize, b: usize) -> Permutation {
    let mut p = identity_perm(n);
    p.swap(a, b);
    p
}

/// Apply `q` first, then `p`.
pub fn compose(p: &[usize], q: &[usize]) -> Permutation {
    q.iter().map(|&j| p[j]).collect()
}

pub fn inverse(p: &[usize]) -> Permutation {
    let mut out = vec![0; p.len()];
    for (j, &k) in p.iter().enumerate() {
        out[k] = j;
    }
    out
}

pub fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&k| k < n && !std::mem::replace(&mut seen[k], true))
}

/// All elements of the group generated by `gens`, sorted, identity first.
pub fn generate_group(n: usize, gens: &[Permutation]) -> Result<Vec<Permutation>> {
    if n > MAX_GROUP_QUBITS {
        return Err(Error::SizeLimit(format!("permutation groups support n <= {MAX_GROUP_QUBITS}")));
    }
    if let Some(g) = gens.iter().find(|g| !is_permutation(g, n)) {
        return Err(Error::InvalidInput(format!("{g:?} is not a permutation of {n} qubits")));
    }
    let mut seen: BTreeSet<Permutation> = BTreeSet::from([identity_perm(n)]);
    let mut frontier = vec![identity_perm(n)];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = compose(g, &p);
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Every permutation of `n` points, in lexicographic order.
pub fn symmetric_group(n: usize) -> Result<Vec<Permutation>> {
    if n > MAX_GROUP_QUBITS {
        return Err(Error::SizeLimit(format!("permutation groups support n <= {MAX_GROUP_QUBITS}")));
    }
    let mut out = Vec::new();
    let mut p = identity_perm(n);
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    Ok(out)
}

/// Adjacent transpositions, which generate the full symmetric group.
pub fn symmetric_generators(n: usize) -> Vec<Permutation> {
    (1..n).map(|j| transposition(n, j - 1, j)).collect()
}

/// Orbits of basis indices `0..2^n` under the group, each sorted, ordered by
/// their smallest element.
pub fn basis_orbits(n: usize, group: &[Permutation]) -> Vec<Vec<usize>> {
    let d = 1usize << n;
    let mut label = vec![usize::MAX; d];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for x in 0..d {
        if label[x] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut o: Vec<usize> = group.iter().map(|p| permute_bits(x, n, p)).collect();
        o.sort_unstable();
        o.dedup();
        for &y in &o {
            label[y] = id;
        }
        orbits.push(o);
    }
    orbits
}

#[inline]
pub(crate) fn permute_bits(x: usize, n: usize, perm: &[usize]) -> usize {
    crate::operator::DenseOperator::permute_index(x, n, perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        for n in 1..=5 {
            let g = generate_group(n, &symmetric_generators(n)).unwrap();
            assert_eq!(g.len(), (1..=n).product::<usize>());
            assert_eq!(g, symmetric_group(n).unwrap());
        }
        let cyc = generate_group(4, &[vec![1, 2, 3, 0]]).unwrap();
        assert_eq!(cyc.len(), 4);
        assert_eq!(generate_group(3, &[]).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn inverse_composes_to_identity() {
        for p in symmetric_group(4).unwrap() {
            assert_eq!(compose(&p, &inverse(&p)), identity_perm(4));
        }
    }

    #[test]
    fn hamming_weight_orbits() {
        let g = symmetric_group(4).unwrap();
        let orbits = basis_orbits(4, &g);
        assert_eq!(orbits.len(), 5);
        assert!(orbits.iter().all(|o| o.iter().all(|x| x.count_ones() == o[0].count_ones())));
    }
}
