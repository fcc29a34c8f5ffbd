//! Exhaustive enumeration of self-avoiding walks on Z^d.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, HashSet};

/// c_n for n = 0..=nmax and the endpoint counts c_n(x) at n = nmax.
#[derive(Debug, Clone, PartialEq)]
pub struct SawCounts {
    pub d: usize,
    pub counts: Vec<u64>,
    pub endpoints: BTreeMap<Vec<i64>, u64>,
}

impl SawCounts {
    /// c_n^{1/n} for n ≥ 1.
    pub fn root_estimates(&self) -> Vec<f64> {
        self.counts.iter().enumerate().skip(1).map(|(n, c)| (*c as f64).powf(1.0 / n as f64)).collect()
    }

    /// d^n ≤ c_n ≤ 2d(2d−1)^{n−1} for all computed n ≥ 1.
    pub fn bounds_hold(&self) -> bool {
        let d = self.d as f64;
        self.counts.iter().enumerate().skip(1).all(|(n, &c)| {
            let c = c as f64;
            d.powi(n as i32) <= c && c <= 2.0 * d * (2.0 * d - 1.0).powi(n as i32 - 1)
        })
    }

    /// c_{m+n} ≤ c_m c_n whenever m+n is computed.
    pub fn submultiplicative(&self) -> bool {
        let k = self.counts.len();
        (0..k).all(|m| (0..k - m).all(|n| self.counts[m + n] as u128 <= self.counts[m] as u128 * self.counts[n] as u128))
    }
}

fn max_n(d: usize) -> usize {
    match d {
        1 => 60,
        2 => 16,
        3 => 11,
        _ => 8,
    }
}

/// Backtracking on an occupancy array of side 2nmax+1.
pub fn saw_count(d: usize, nmax: usize) -> Result<SawCounts> {
    if d == 0 || nmax > max_n(d) {
        return Err(Error::InvalidParam(format!("saw enumeration needs d >= 1 and nmax <= {}", max_n(d.max(1)))));
    }
    let side = 2 * nmax + 3;
    let mut stride = vec![1usize; d];
    for i in 1..d {
        stride[i] = stride[i - 1] * side;
    }
    let size = stride[d - 1] * side;
    let origin: usize = stride.iter().map(|s| s * (nmax + 1)).sum();
    let mut occ = vec![false; size];
    let mut counts = vec![0u64; nmax + 1];
    let mut ends = vec![0u64; size];
    struct Ctx<'a> {
        stride: &'a [usize],
        occ: &'a mut [bool],
        counts: &'a mut [u64],
        ends: &'a mut [u64],
        nmax: usize,
    }
    fn rec(c: &mut Ctx, pos: usize, n: usize) {
        c.counts[n] += 1;
        if n == c.nmax {
            c.ends[pos] += 1;
            return;
        }
        for k in 0..c.stride.len() {
            for next in [pos + c.stride[k], pos - c.stride[k]] {
                if !c.occ[next] {
                    c.occ[next] = true;
                    rec(c, next, n + 1);
                    c.occ[next] = false;
                }
            }
        }
    }
    occ[origin] = true;
    let mut ctx = Ctx { stride: &stride, occ: &mut occ, counts: &mut counts, ends: &mut ends, nmax };
    rec(&mut ctx, origin, 0);
    let mut endpoints = BTreeMap::new();
    for (i, &e) in ends.iter().enumerate() {
        if e > 0 {
            let x: Vec<i64> = (0..d).map(|k| ((i / stride[k]) % side) as i64 - (nmax as i64 + 1)).collect();
            endpoints.insert(x, e);
        }
    }
    Ok(SawCounts { d, counts, endpoints })
}

/// Independent enumerator keeping the visited set in a hash set of coordinates.
pub fn saw_count_hashset(d: usize, nmax: usize) -> Vec<u64> {
    fn rec(d: usize, pos: &mut Vec<i64>, seen: &mut HashSet<Vec<i64>>, n: usize, nmax: usize, counts: &mut [u64]) {
        counts[n] += 1;
        if n == nmax {
            return;
        }
        for k in 0..d {
            for s in [1i64, -1] {
                pos[k] += s;
                if seen.insert(pos.clone()) {
                    rec(d, pos, seen, n + 1, nmax, counts);
                    seen.remove(pos.as_slice());
                }
                pos[k] -= s;
            }
        }
    }
    let mut counts = vec![0; nmax + 1];
    let mut pos = vec![0i64; d];
    let mut seen = HashSet::from([pos.clone()]);
    rec(d, &mut pos, &mut seen, 0, nmax, &mut counts);
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_lattice_counts() {
        let s = saw_count(2, 10).unwrap();
        assert_eq!(&s.counts[..5], &[1, 4, 12, 36, 100]);
        assert_eq!(s.counts[10], 44100);
        assert_eq!(saw_count_hashset(2, 10), s.counts);
        assert!(s.bounds_hold());
        assert!(s.submultiplicative());
        assert_eq!(s.endpoints.values().sum::<u64>(), s.counts[10]);
        assert_eq!(saw_count(1, 5).unwrap().counts, vec![1, 2, 2, 2, 2, 2]);
        assert_eq!(saw_count(3, 4).unwrap().counts, vec![1, 6, 30, 150, 726]);
        assert!(saw_count(2, 40).is_err());
    }
}
