//! Exact contraction of bracket networks.
//!
//! A network has `2m` copies of an `n`-leg tensor `A` in (k^2)^{⊗n}. On each
//! factor the copies are paired by brackets `[a b]`, i.e. by the 2×2
//! antisymmetric form with `ε(0,1) = 1`, `ε(1,0) = -1`. Each bracket has only
//! two nonzero patterns, so it is a single binary "orientation" variable:
//! orientation 0 gives copy `a` bit 0 and copy `b` bit 1 with weight +1,
//! orientation 1 the reverse with weight -1. The value is the sum over all
//! orientations of the signed product of the `2m` selected entries of `A`.
//!
//! Two strategies compute it: direct enumeration of all `2^(n·m)`
//! orientation patterns, and pairwise elimination of copies along a greedy
//! order that keeps intermediate tensors small.

use crate::error::{invalid, Result};
use crate::scalar::Ring;

/// Networks with at most this many columns per factor are enumerated directly
/// by [`Strategy::Auto`].
pub const ENUMERATION_MAX_M: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Auto,
    Enumerate,
    Eliminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bracket {
    factor: usize,
    top: usize,
    bottom: usize,
}

/// One pairwise contraction step with its precomputed index tables.
#[derive(Clone, Debug)]
struct Merge {
    left: usize,
    right: usize,
    out_legs: usize,
    left_from_out: Vec<u32>,
    right_from_out: Vec<u32>,
    left_from_shared: Vec<u32>,
    right_from_shared: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct BracketNetwork {
    factors: usize,
    copies: usize,
    brackets: Vec<Bracket>,
    // per copy: (leg bracket ids in increasing order)
    copy_legs: Vec<Vec<usize>>,
    merges: Vec<Merge>,
    peak_legs: usize,
}

impl BracketNetwork {
    /// `pairings[i]` lists the brackets `(a, b)` of factor `i` over 0-based
    /// copies; each factor must pair every copy exactly once. The order inside
    /// a pair matters: `(b, a)` negates the value.
    pub fn new(copies: usize, pairings: &[Vec<(usize, usize)>]) -> Result<Self> {
        let factors = pairings.len();
        if factors == 0 || copies == 0 || copies % 2 != 0 {
            return Err(invalid("a bracket network needs an even number of copies and at least one factor"));
        }
        let mut brackets = Vec::new();
        for (factor, pairs) in pairings.iter().enumerate() {
            let mut used = vec![false; copies];
            if pairs.len() * 2 != copies {
                return Err(invalid(format!("factor {factor} does not pair all {copies} copies")));
            }
            for &(a, b) in pairs {
                if a >= copies || b >= copies || a == b || used[a] || used[b] {
                    return Err(invalid(format!("factor {factor}: bad bracket ({a}, {b})")));
                }
                used[a] = true;
                used[b] = true;
                brackets.push(Bracket { factor, top: a, bottom: b });
            }
        }
        let mut copy_legs = vec![Vec::new(); copies];
        for (id, br) in brackets.iter().enumerate() {
            copy_legs[br.top].push(id);
            copy_legs[br.bottom].push(id);
        }
        let (merges, peak_legs) = plan_merges(&copy_legs, brackets.len());
        Ok(BracketNetwork {
            factors,
            copies,
            brackets,
            copy_legs,
            merges,
            peak_legs,
        })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    /// Columns per factor.
    pub fn m(&self) -> usize {
        self.copies / 2
    }

    /// Largest number of open legs of any intermediate tensor in the elimination plan.
    pub fn peak_legs(&self) -> usize {
        self.peak_legs
    }

    pub fn evaluate<R: Ring>(&self, ring: &R, tensor: &[R::Elem], strategy: Strategy) -> R::Elem {
        assert_eq!(tensor.len(), 1 << self.factors, "tensor size does not match factor count");
        let enumerate = match strategy {
            Strategy::Enumerate => true,
            Strategy::Eliminate => false,
            Strategy::Auto => self.m() <= ENUMERATION_MAX_M,
        };
        if enumerate {
            self.evaluate_enumerate(ring, tensor)
        } else {
            self.evaluate_eliminate(ring, tensor)
        }
    }

    fn copy_index(&self, copy: usize, orientation: impl Fn(usize) -> usize) -> usize {
        let n = self.factors;
        self.copy_legs[copy].iter().fold(0usize, |acc, &id| {
            let br = self.brackets[id];
            let o = orientation(id);
            let bit = if br.top == copy { o } else { 1 - o };
            acc | (bit << (n - 1 - br.factor))
        })
    }

    pub fn evaluate_enumerate<R: Ring>(&self, ring: &R, tensor: &[R::Elem]) -> R::Elem {
        let e = self.brackets.len();
        assert!(e < 63, "too many brackets to enumerate");
        let mut total = ring.zero();
        for pattern in 0u64..(1u64 << e) {
            let mut term = ring.one();
            for copy in 0..self.copies {
                let idx = self.copy_index(copy, |id| ((pattern >> id) & 1) as usize);
                let v = &tensor[idx];
                if ring.is_zero(v) {
                    term = ring.zero();
                    break;
                }
                term = ring.mul(&term, v);
            }
            if ring.is_zero(&term) {
                continue;
            }
            if pattern.count_ones() % 2 == 1 {
                term = ring.neg(&term);
            }
            total = ring.add(&total, &term);
        }
        total
    }

    pub fn evaluate_eliminate<R: Ring>(&self, ring: &R, tensor: &[R::Elem]) -> R::Elem {
        // leaf tensors: legs in increasing bracket id, leg p <-> bit p; the
        // bracket weight (-1)^o sits on its top copy
        let mut slots: Vec<Option<Vec<R::Elem>>> = (0..self.copies)
            .map(|copy| {
                let legs = &self.copy_legs[copy];
                let data = (0..1usize << legs.len())
                    .map(|assign| {
                        let pos = |id: usize| legs.iter().position(|&l| l == id).unwrap();
                        let idx = self.copy_index(copy, |id| (assign >> pos(id)) & 1);
                        let negate = legs
                            .iter()
                            .enumerate()
                            .filter(|&(p, &id)| self.brackets[id].top == copy && (assign >> p) & 1 == 1)
                            .count()
                            % 2
                            == 1;
                        if negate {
                            ring.neg(&tensor[idx])
                        } else {
                            tensor[idx].clone()
                        }
                    })
                    .collect();
                Some(data)
            })
            .collect();
        for mg in &self.merges {
            let x = slots[mg.left].take().expect("live slot");
            let y = slots[mg.right].take().expect("live slot");
            let mut out = vec![ring.zero(); 1 << mg.out_legs];
            for (r, acc) in out.iter_mut().enumerate() {
                let xr = mg.left_from_out[r] as usize;
                let yr = mg.right_from_out[r] as usize;
                for (xs, ys) in mg.left_from_shared.iter().zip(&mg.right_from_shared) {
                    ring.mul_add_assign(acc, &x[xr | *xs as usize], &y[yr | *ys as usize]);
                }
            }
            slots[mg.left] = Some(out);
        }
        slots
            .into_iter()
            .flatten()
            .fold(ring.one(), |acc, s| ring.mul(&acc, &s[0]))
    }
}

/// Greedy pairwise elimination: repeatedly contract the two adjacent tensors
/// whose result has the fewest open legs, then the smallest joint leg count,
/// then the lowest slot indices. The plan depends only on the pairing pattern.
fn plan_merges(copy_legs: &[Vec<usize>], bracket_count: usize) -> (Vec<Merge>, usize) {
    let mut legs: Vec<Option<Vec<usize>>> = copy_legs.iter().cloned().map(Some).collect();
    let mut merges = Vec::new();
    let mut peak = copy_legs.iter().map(Vec::len).max().unwrap_or(0);
    let mut owner: Vec<Vec<usize>> = vec![Vec::new(); bracket_count];
    for (slot, l) in copy_legs.iter().enumerate() {
        for &id in l {
            owner[id].push(slot);
        }
    }
    loop {
        let mut best: Option<((usize, usize, usize, usize), usize, usize)> = None;
        for i in 0..legs.len() {
            let Some(li) = &legs[i] else { continue };
            for j in (i + 1)..legs.len() {
                let Some(lj) = &legs[j] else { continue };
                let shared = li.iter().filter(|l| lj.contains(l)).count();
                if shared == 0 {
                    continue;
                }
                let union = li.len() + lj.len() - shared;
                let out = union - shared;
                let key = (out, union, i, j);
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let li = legs[i].take().unwrap();
        let lj = legs[j].take().unwrap();
        let shared: Vec<usize> = li.iter().copied().filter(|l| lj.contains(l)).collect();
        let mut out: Vec<usize> = li
            .iter()
            .chain(&lj)
            .copied()
            .filter(|l| !shared.contains(l))
            .collect();
        out.sort_unstable();
        peak = peak.max(out.len());
        let table = |own: &[usize], sub: &[usize]| -> Vec<u32> {
            (0..1usize << sub.len())
                .map(|a| {
                    sub.iter().enumerate().fold(0u32, |acc, (p, id)| {
                        match own.iter().position(|l| l == id) {
                            Some(q) => acc | ((((a >> p) & 1) as u32) << q),
                            None => acc,
                        }
                    })
                })
                .collect()
        };
        merges.push(Merge {
            left: i,
            right: j,
            out_legs: out.len(),
            left_from_out: table(&li, &out),
            right_from_out: table(&lj, &out),
            left_from_shared: table(&li, &shared),
            right_from_shared: table(&lj, &shared),
        });
        legs[i] = Some(out);
    }
    (merges, peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Integers, PrimeField};
    use num_bigint::BigInt;

    fn tensor(seed: i64) -> Vec<BigInt> {
        (0..32).map(|i| BigInt::from((i * 7 + seed * 13) % 19 - 9)).collect()
    }

    /// Full definition: sum over every bit assignment of every copy and factor.
    fn brute_force(copies: usize, pairings: &[Vec<(usize, usize)>], a: &[BigInt]) -> BigInt {
        let n = pairings.len();
        let vars = copies * n;
        let mut total = BigInt::from(0);
        for assign in 0u64..(1 << vars) {
            let bit = |copy: usize, f: usize| ((assign >> (copy * n + f)) & 1) as usize;
            let mut w = 1i64;
            for (f, pairs) in pairings.iter().enumerate() {
                for &(x, y) in pairs {
                    w *= match (bit(x, f), bit(y, f)) {
                        (0, 1) => 1,
                        (1, 0) => -1,
                        _ => 0,
                    };
                }
            }
            if w == 0 {
                continue;
            }
            let mut term = BigInt::from(w);
            for c in 0..copies {
                let idx = (0..n).fold(0, |acc, f| acc | (bit(c, f) << (n - 1 - f)));
                term *= &a[idx];
            }
            total += term;
        }
        total
    }

    #[test]
    fn strategies_match_brute_force() {
        let cases: Vec<Vec<Vec<(usize, usize)>>> = vec![
            vec![vec![(0, 1)]; 5],
            vec![
                vec![(0, 1), (2, 3)],
                vec![(0, 2), (1, 3)],
                vec![(0, 3), (1, 2)],
                vec![(1, 0), (2, 3)],
                vec![(0, 2), (3, 1)],
            ],
        ];
        for (k, pairings) in cases.iter().enumerate() {
            let copies = 2 * pairings[0].len();
            let net = BracketNetwork::new(copies, pairings).unwrap();
            let a = tensor(k as i64 + 1);
            let expected = brute_force(copies, pairings, &a);
            assert_eq!(net.evaluate(&Integers, &a, Strategy::Enumerate), expected);
            assert_eq!(net.evaluate(&Integers, &a, Strategy::Eliminate), expected);
            let f = PrimeField::new(1_000_000_007).unwrap();
            let am: Vec<u64> = a.iter().map(|x| f.reduce(x)).collect();
            assert_eq!(net.evaluate(&f, &am, Strategy::Eliminate), f.reduce(&expected));
        }
    }

    #[test]
    fn rejects_bad_pairings() {
        assert!(BracketNetwork::new(2, &[vec![(0, 0)]]).is_err());
        assert!(BracketNetwork::new(4, &[vec![(0, 1)]]).is_err());
        assert!(BracketNetwork::new(4, &[vec![(0, 1), (1, 2)]]).is_err());
        assert!(BracketNetwork::new(3, &[vec![(0, 1)]]).is_err());
    }
}
