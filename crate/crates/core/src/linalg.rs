//! Exact and modular linear algebra: fraction-free rank, rational kernels,
//! and elimination over prime fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{inv_mod, mul_mod, residue, sub_mod};

pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Clear denominators row by row; rank is unchanged.
pub fn integer_rows(m: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter()
                .map(|q| q.numer() * (&l / q.denom()))
                .collect()
        })
        .collect()
}

/// Rank over Q by Bareiss fraction-free elimination.
pub fn exact_rank(m: &[Vec<BigRational>]) -> usize {
    bareiss_rank(integer_rows(m))
}

pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, bottom) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[c].clone();
        for row in bottom.iter_mut() {
            let factor = row[c].clone();
            for j in (c + 1)..cols {
                // exact division: Sylvester's identity
                let v = &pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        // rows above the pivot block keep their old scale; entries left of c are zero
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        let (top, bottom) = a.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in bottom.iter_mut() {
            for j in (c + 1)..n {
                let v = &pivot_row[c] * &row[j] - &row[c] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot_row[c].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Basis of the right kernel `{x : M x = 0}` over Q, in reduced form: each vector
/// has a 1 in its own free column and 0 in the other free columns.
pub fn nullspace_rational(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -a[row][f].clone();
            }
            x
        })
        .collect()
}

/// Reduce an integer matrix modulo `p`.
pub fn reduce_matrix(m: &[Vec<BigInt>], p: u64) -> Vec<Vec<u64>> {
    m.iter()
        .map(|row| row.iter().map(|x| residue(x, p)).collect())
        .collect()
}

/// Row echelon form over F_p: pivot rows are normalized to a leading 1.
#[derive(Clone, Debug)]
pub struct EchelonModP {
    pub p: u64,
    pub cols: usize,
    pub rows: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
}

impl EchelonModP {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Right kernel basis, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let free: Vec<usize> = {
            let mut is_pivot = vec![false; self.cols];
            for &c in &self.pivots {
                is_pivot[c] = true;
            }
            (0..self.cols).filter(|&c| !is_pivot[c]).collect()
        };
        free.iter()
            .map(|&f| {
                let mut x = vec![0u64; self.cols];
                x[f] = 1;
                for (i, &pc) in self.pivots.iter().enumerate().rev() {
                    let row = &self.rows[i];
                    let mut acc = 0u64;
                    for j in (pc + 1)..self.cols {
                        if row[j] != 0 && x[j] != 0 {
                            acc = (acc + mul_mod(row[j], x[j], p)) % p;
                        }
                    }
                    x[pc] = sub_mod(0, acc, p);
                }
                x
            })
            .collect()
    }
}

// Entries may be left unreduced for this many elimination steps when p < 2^28:
// each step adds less than 2^56.
const LAZY_STEPS: usize = 240;
const LAZY_PRIME_LIMIT: u64 = 1 << 28;

/// Gaussian elimination over F_p. Consumes the matrix (entries must be reduced).
pub fn echelon_mod_p(mut a: Vec<Vec<u64>>, cols: usize, p: u64) -> EchelonModP {
    let rows = a.len();
    let lazy = p < LAZY_PRIME_LIMIT;
    let mut pivots = Vec::new();
    let mut rank = 0;
    let mut pending = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let mut found = None;
        for r in rank..rows {
            a[r][c] %= p;
            if a[r][c] != 0 {
                found = Some(r);
                break;
            }
        }
        let Some(piv) = found else {
            continue;
        };
        a.swap(rank, piv);
        {
            let row = &mut a[rank];
            for v in row[c..].iter_mut() {
                *v %= p;
            }
            let inv = inv_mod(row[c], p);
            for v in row[c..].iter_mut() {
                *v = mul_mod(*v, inv, p);
            }
        }
        let (top, bottom) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom.iter_mut() {
            let f = row[c] % p;
            row[c] = 0;
            if f == 0 {
                continue;
            }
            let neg = p - f;
            if lazy {
                for (x, &y) in row[c + 1..].iter_mut().zip(&pivot_row[c + 1..]) {
                    *x += neg * y;
                }
            } else {
                for (x, &y) in row[c + 1..].iter_mut().zip(&pivot_row[c + 1..]) {
                    if y != 0 {
                        *x = ((*x as u128 + neg as u128 * y as u128) % p as u128) as u64;
                    }
                }
            }
        }
        pivots.push(c);
        rank += 1;
        if lazy {
            pending += 1;
            if pending == LAZY_STEPS {
                for row in a[rank..].iter_mut() {
                    for v in row[c + 1..].iter_mut() {
                        *v %= p;
                    }
                }
                pending = 0;
            }
        }
    }
    a.truncate(rank);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v %= p;
        }
    }
    EchelonModP {
        p,
        cols,
        rows: a,
        pivots,
    }
}

pub fn rank_mod_p(m: &[Vec<u64>], p: u64) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let reduced = m.iter().map(|r| r.iter().map(|v| v % p).collect()).collect();
    echelon_mod_p(reduced, cols, p).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    #[test]
    fn small_ranks() {
        assert_eq!(exact_rank(&int_matrix(&[&[0, 0], &[0, 0]])), 0);
        let id: Vec<Vec<BigRational>> = (0..4)
            .map(|i| (0..4).map(|j| q((i == j) as i64)).collect())
            .collect();
        assert_eq!(exact_rank(&id), 4);
        assert_eq!(exact_rank(&int_matrix(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]])), 2);
        assert_eq!(exact_rank(&[]), 0);
    }

    #[test]
    fn vandermonde() {
        // nodes 1/2, -1, 3, 2/3, 5 are distinct so prod (x_j - x_i) != 0
        let nodes = [
            BigRational::new(1.into(), 2.into()),
            q(-1),
            q(3),
            BigRational::new(2.into(), 3.into()),
            q(5),
        ];
        let m: Vec<Vec<BigRational>> = nodes
            .iter()
            .map(|x| (0..5).map(|k| num_traits::pow(x.clone(), k)).collect())
            .collect();
        let mut det_formula = q(1);
        for i in 0..5 {
            for j in (i + 1)..5 {
                det_formula *= &nodes[j] - &nodes[i];
            }
        }
        assert!(!det_formula.is_zero());
        assert_eq!(exact_rank(&m), 5);
    }

    #[test]
    fn bareiss_determinant_matches_cofactor() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(-1), BigInt::from(0)],
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(4)],
            vec![BigInt::from(0), BigInt::from(5), BigInt::from(-2)],
        ];
        // 2*(3*-2 - 4*5) - (-1)*(1*-2 - 0) + 0 = -52 - 2
        assert_eq!(bareiss_determinant(m), BigInt::from(-54));
    }

    #[test]
    fn rational_nullspace() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6]]);
        let ker = nullspace_rational(&m, 3);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for row in &m {
                let dot: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn modular_nullspace_both_paths() {
        for p in [1_000_003u64, (1 << 61) - 1] {
            let m = vec![vec![1, 2, 3, 4], vec![2, 4, 6, 8], vec![0, 1, 1, 0]];
            let e = echelon_mod_p(m.clone(), 4, p);
            assert_eq!(e.rank(), 2);
            for v in e.nullspace() {
                for row in &m {
                    let dot = row
                        .iter()
                        .zip(&v)
                        .fold(0u64, |acc, (&a, &b)| (acc + mul_mod(a, b, p)) % p);
                    assert_eq!(dot, 0);
                }
            }
        }
    }
}
