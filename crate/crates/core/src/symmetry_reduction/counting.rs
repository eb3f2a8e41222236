//! Orbit counts of diagonal Clifford codes under qubit permutations.

use num_integer::Integer;

use super::canon::SubsetAction;
use super::permutation::symmetric_group;
use crate::clifford_dictionaries::pair_count;

use crate::error::{Error, Result};

/// Integer partitions of `n`, as multiplicities `m[k]` of parts of size `k`.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, m: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(m.clone());
            return;
        }
        for k in (1..=max.min(rest)).rev() {
            m[k] += 1;
            rec(rest - k, k, m, out);
            m[k] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut vec![0; n + 1], &mut out);
    out
}

/// Cycles of a permutation with cycle type `m` acting on unordered pairs.
fn pair_cycles(m: &[usize]) -> u32 {
    let mut f = 0usize;
    for k in 1..m.len() {
        f += m[k] * (k / 2) + k * m[k] * m[k].saturating_sub(1) / 2;
        for l in (k + 1)..m.len() {
            f += m[k] * m[l] * k.gcd(&l);
        }
    }
    f as u32
}

/// Number of orbits of `(a, b)` codes with `a` in `Z_modulus^n` under
/// qubit permutations: `|D_n/S_n|` for modulus 4, `|RD_n/S_n|` for 2.
pub fn burnside_orbit_count(n: usize, phase_modulus: u32) -> Result<u128> {
    if n == 0 || n > 8 {
        return Err(Error::SizeLimit("orbit counts support 1 <= n <= 8".into()));
    }
    if phase_modulus != 2 && phase_modulus != 4 {
        return Err(Error::InvalidInput("phase modulus must be 2 or 4".into()));
    }
    let n_fact: u128 = (1..=n as u128).product();
    let mut total: u128 = 0;
    for m in partitions(n) {
        // number of permutations of this cycle type
        let z: u128 = (1..m.len()).map(|k| (k as u128).pow(m[k] as u32) * (1..=m[k] as u128).product::<u128>()).product();
        let cycles: u32 = m.iter().sum::<usize>() as u32;
        let fixed = (phase_modulus as u128).pow(cycles) << pair_cycles(&m);
        total += n_fact / z * fixed;
    }
    debug_assert_eq!(total % n_fact, 0);
    Ok(total / n_fact)
}

/// Orbits of codes under qubit permutations, split by CZ count: for each
/// graph class, the orbits of phase vectors under its automorphism group.
pub fn orbit_counts_by_category(n: usize, phase_modulus: u32) -> Result<Vec<u128>> {
    if n == 0 || n > 7 {
        return Err(Error::SizeLimit("category orbit counts support 1 <= n <= 7".into()));
    }
    if phase_modulus != 2 && phase_modulus != 4 {
        return Err(Error::InvalidInput("phase modulus must be 2 or 4".into()));
    }
    if n == 1 {
        return Ok(vec![phase_modulus as u128]);
    }
    let group = symmetric_group(n)?;
    let cycles: Vec<u32> = group.iter().map(|p| cycle_count(p)).collect();
    let act = SubsetAction::new(n, 2)?;
    let mut out = vec![0u128; pair_count(n) + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        for b in act.classes_with(k) {
            let mut fixed = 0u128;
            let mut order = 0u128;
            for (p, &c) in group.iter().zip(&cycles) {
                if permute_mask(&act, b, p) == b {
                    order += 1;
                    fixed += (phase_modulus as u128).pow(c);
                }
            }
            *slot += fixed / order;
        }
    }
    Ok(out)
}

fn cycle_count(p: &[usize]) -> u32 {
    let mut seen = vec![false; p.len()];
    let mut c = 0;
    for s in 0..p.len() {
        if !seen[s] {
            c += 1;
            let mut j = s;
            while !seen[j] {
                seen[j] = true;
                j = p[j];
            }
        }
    }
    c
}

fn permute_mask(act: &SubsetAction, mask: u64, p: &[usize]) -> u64 {
    let mut out = 0u64;
    for q in 0..act.width() {
        if mask >> q & 1 == 1 {
            let s = act.subset(q);
            let img = (0..act.n()).filter(|&v| s >> v & 1 == 1).fold(0u32, |m, v| m | (1 << p[v]));
            let r = (0..act.width()).find(|&r| act.subset(r) == img).expect("same size");
            out |= 1 << r;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let p: Vec<usize> = (1..=8).map(|n| partitions(n).len()).collect();
        assert_eq!(p, vec![1, 2, 3, 5, 7, 11, 15, 22]);
    }

    #[test]
    fn category_orbits_sum_to_burnside() {
        for n in 1..=5 {
            for m in [2, 4] {
                let s: u128 = orbit_counts_by_category(n, m).unwrap().iter().sum();
                assert_eq!(s, burnside_orbit_count(n, m).unwrap());
            }
        }
        assert_eq!(orbit_counts_by_category(4, 4).unwrap(), vec![35, 100, 215, 296, 215, 100, 35]);
    }
}
