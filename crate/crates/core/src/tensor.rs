//! Exact tensors in (k^2)^{⊗n}, the SL_2^n and Σ_n actions, flattenings, and
//! seeded sampling of points on secant varieties.
//!
//! Bit order: factor 1 (index 0) is the most significant bit of a
//! [`MultiIndex`], so `"10000"` is entry 16 of a 5-factor tensor.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::perm::FactorPermutation;
use crate::scalar::{format_rational, parse_rational};

/// Sampling height for points on secant varieties.
pub const SECANT_HEIGHT: i64 = 10;
/// Sampling height for generic tensors.
pub const GENERIC_HEIGHT: i64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: u8,
    bits: u32,
}

impl MultiIndex {
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(n >= 1 && n <= 31 && bits < (1 << n));
        MultiIndex { n: n as u8, bits }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Bit of factor `k` (0-based).
    pub fn bit(&self, k: usize) -> u32 {
        (self.bits >> (self.n as usize - 1 - k)) & 1
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 31 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(invalid(format!("bad multi-index {s:?}")));
        }
        Ok(MultiIndex::new(s.len(), u32::from_str_radix(s, 2).unwrap()))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n as usize)
    }
}

/// Bit of factor `k` in a raw index of an `n`-factor tensor.
#[inline]
pub fn bit_of(index: usize, n: usize, k: usize) -> usize {
    (index >> (n - 1 - k)) & 1
}

/// Raw form of [`DenseTensor::apply_perm`] for any entry type.
pub fn permute_entries<T: Clone>(entries: &[T], n: usize, sigma: &FactorPermutation) -> Vec<T> {
    (0..1usize << n)
        .map(|i| {
            let j = (0..n).fold(0usize, |acc, k| acc | (bit_of(i, n, sigma.apply(k)) << (n - 1 - k)));
            entries[j].clone()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTensor {
    n: usize,
    entries: Vec<BigRational>,
}

impl DenseTensor {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=24).contains(&n));
        DenseTensor {
            n,
            entries: vec![BigRational::zero(); 1 << n],
        }
    }

    pub fn from_entries(n: usize, entries: Vec<BigRational>) -> Result<Self> {
        if n == 0 || n > 24 || entries.len() != 1 << n {
            return Err(invalid(format!(
                "tensor with {n} factors needs {} entries, got {}",
                1usize.checked_shl(n as u32).unwrap_or(0),
                entries.len()
            )));
        }
        Ok(DenseTensor { n, entries })
    }

    pub fn from_integers(n: usize, entries: &[i64]) -> Result<Self> {
        Self::from_entries(
            n,
            entries
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> &BigRational {
        &self.entries[index]
    }

    pub fn set(&mut self, index: usize, value: BigRational) {
        self.entries[index] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|q| q.denom().is_one())
    }

    pub fn scale(&self, lambda: &BigRational) -> Self {
        DenseTensor {
            n: self.n,
            entries: self.entries.iter().map(|q| q * lambda).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        DenseTensor {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Integer entries `E` and a positive `D` with `self = E / D`.
    pub fn integer_scaled(&self) -> (Vec<BigInt>, BigInt) {
        let d = self
            .entries
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints = self
            .entries
            .iter()
            .map(|q| q.numer() * (&d / q.denom()))
            .collect();
        (ints, d)
    }

    /// Integer entries, or an error if some entry is not integral.
    pub fn integer_entries(&self) -> Result<Vec<BigInt>> {
        if !self.is_integral() {
            return Err(Error::NonIntegerTensor);
        }
        Ok(self.entries.iter().map(|q| q.numer().clone()).collect())
    }

    /// Outer product of `n` vectors in k^2.
    pub fn rank_one(vectors: &[[BigRational; 2]]) -> Self {
        let n = vectors.len();
        let entries = (0..1usize << n)
            .map(|i| {
                (0..n).fold(BigRational::one(), |acc, k| {
                    acc * &vectors[k][bit_of(i, n, k)]
                })
            })
            .collect();
        DenseTensor { n, entries }
    }

    /// `σ·A`, defined by `(σ·A)[I] = A[I∘σ]` where `(I∘σ)_k = I_{σ(k)}`.
    /// This is a left action: `τ·(σ·A) = (τ∘σ)·A`.
    pub fn apply_perm(&self, sigma: &FactorPermutation) -> Result<Self> {
        if sigma.len() != self.n {
            return Err(Error::FactorMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        Ok(DenseTensor {
            n: self.n,
            entries: permute_entries(&self.entries, self.n, sigma),
        })
    }

    /// `(g_1 ⊗ … ⊗ g_n)·A`, each matrix acting on its own leg.
    pub fn apply_group(&self, g: &Sl2Tuple) -> Result<Self> {
        if g.len() != self.n {
            return Err(Error::FactorMismatch {
                expected: self.n,
                got: g.len(),
            });
        }
        let n = self.n;
        let mut cur = self.entries.clone();
        for (k, m) in g.matrices().iter().enumerate() {
            let shift = n - 1 - k;
            let mut next = vec![BigRational::zero(); cur.len()];
            for (i, out) in next.iter_mut().enumerate() {
                let row = (i >> shift) & 1;
                let i0 = i & !(1 << shift);
                let i1 = i0 | (1 << shift);
                *out = &m[row][0] * &cur[i0] + &m[row][1] * &cur[i1];
            }
            cur = next;
        }
        Ok(DenseTensor { n, entries: cur })
    }

    /// Matrix view with rows indexed by the factors in `left` and columns by
    /// the rest, both in increasing factor order (earlier factor = more significant).
    pub fn flatten(&self, left: &[usize]) -> Result<Vec<Vec<BigRational>>> {
        let n = self.n;
        let mut is_left = vec![false; n];
        for &k in left {
            if k >= n || is_left[k] {
                return Err(invalid(format!("bad factor subset {left:?}")));
            }
            is_left[k] = true;
        }
        if left.is_empty() || left.len() == n {
            return Err(invalid("flattening needs a nonempty proper subset of factors"));
        }
        let lf: Vec<usize> = (0..n).filter(|&k| is_left[k]).collect();
        let rf: Vec<usize> = (0..n).filter(|&k| !is_left[k]).collect();
        let merge = |row: usize, col: usize| -> usize {
            let mut idx = 0;
            for (pos, &k) in lf.iter().enumerate() {
                idx |= bit_of(row, lf.len(), pos) << (n - 1 - k);
            }
            for (pos, &k) in rf.iter().enumerate() {
                idx |= bit_of(col, rf.len(), pos) << (n - 1 - k);
            }
            idx
        };
        Ok((0..1usize << lf.len())
            .map(|r| {
                (0..1usize << rf.len())
                    .map(|c| self.entries[merge(r, c)].clone())
                    .collect()
            })
            .collect())
    }

    /// Ranks of every flattening with `|left| <= n/2`, in subset-mask order.
    pub fn flattening_ranks(&self) -> Vec<(Vec<usize>, usize)> {
        let n = self.n;
        (1u32..(1 << n) - 1)
            .filter(|mask| (mask.count_ones() as usize) * 2 <= n)
            .map(|mask| {
                let left: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                let m = self.flatten(&left).expect("valid subset");
                (left, crate::linalg::exact_rank(&m))
            })
            .collect()
    }
}

fn random_nonzero_vector<R: Rng + ?Sized>(height: i64, rng: &mut R) -> [BigRational; 2] {
    loop {
        let a = rng.gen_range(-height..=height);
        let b = rng.gen_range(-height..=height);
        if a != 0 || b != 0 {
            return [
                BigRational::from_integer(a.into()),
                BigRational::from_integer(b.into()),
            ];
        }
    }
}

/// `u¹ ⊗ … ⊗ uⁿ` with nonzero integer vectors of entries in `[-height, height]`.
pub fn sample_rank1<R: Rng + ?Sized>(n: usize, height: i64, rng: &mut R) -> DenseTensor {
    assert!(height >= 1);
    let vectors: Vec<[BigRational; 2]> =
        (0..n).map(|_| random_nonzero_vector(height, rng)).collect();
    DenseTensor::rank_one(&vectors)
}

/// Sum of `r` independent rank-one samples; never the zero tensor.
pub fn sample_secant<R: Rng + ?Sized>(r: usize, n: usize, height: i64, rng: &mut R) -> DenseTensor {
    assert!(r >= 1);
    loop {
        let mut acc = DenseTensor::zeros(n);
        for _ in 0..r {
            acc = acc.add(&sample_rank1(n, height, rng));
        }
        if !acc.is_zero() {
            return acc;
        }
    }
}

/// Uniform integer entries in `[-height, height]`; never the zero tensor.
pub fn sample_generic<R: Rng + ?Sized>(n: usize, height: i64, rng: &mut R) -> DenseTensor {
    loop {
        let entries: Vec<i64> = (0..1 << n).map(|_| rng.gen_range(-height..=height)).collect();
        if entries.iter().any(|&v| v != 0) {
            return DenseTensor::from_integers(n, &entries).unwrap();
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    n: usize,
    entries: BTreeMap<String, String>,
}

impl Serialize for DenseTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.is_zero())
            .map(|(i, q)| {
                (
                    MultiIndex::new(self.n, i as u32).to_string(),
                    format_rational(q),
                )
            })
            .collect();
        TensorJson { n: self.n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TensorJson::deserialize(d)?;
        if raw.n == 0 || raw.n > 24 {
            return Err(D::Error::custom(format!("unsupported factor count {}", raw.n)));
        }
        let mut t = DenseTensor::zeros(raw.n);
        for (key, value) in raw.entries {
            let idx = MultiIndex::parse(&key).map_err(D::Error::custom)?;
            if idx.n() != raw.n {
                return Err(D::Error::custom(format!(
                    "index {key} has {} bits, tensor has {} factors",
                    idx.n(),
                    raw.n
                )));
            }
            let q = parse_rational(&value).map_err(D::Error::custom)?;
            t.set(idx.bits() as usize, q);
        }
        Ok(t)
    }
}

pub type Mat2 = [[BigRational; 2]; 2];

/// One element of SL_2(Q) per tensor factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Tuple {
    matrices: Vec<Mat2>,
}

impl Sl2Tuple {
    pub fn new(matrices: Vec<Mat2>) -> Result<Self> {
        for (index, m) in matrices.iter().enumerate() {
            let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
            if !det.is_one() {
                return Err(Error::NotSpecialLinear {
                    index,
                    det: format_rational(&det),
                });
            }
        }
        Ok(Sl2Tuple { matrices })
    }

    pub fn identity(n: usize) -> Self {
        let one = BigRational::one;
        let zero = BigRational::zero;
        Sl2Tuple {
            matrices: (0..n).map(|_| [[one(), zero()], [zero(), one()]]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    /// Factor-wise product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
                [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
            })
            .collect();
        Sl2Tuple { matrices }
    }

    /// The tuple seen by `σ·A`: leg `k` of `σ·A` is leg `σ⁻¹(k)` of `A`, so
    /// `σ·(g·A) = g.permuted(σ)·(σ·A)`.
    pub fn permuted(&self, sigma: &FactorPermutation) -> Self {
        let inv = sigma.inverse();
        Sl2Tuple {
            matrices: (0..self.len())
                .map(|k| self.matrices[inv.apply(k)].clone())
                .collect(),
        }
    }

    /// Random integer elements `[[1+ab, a], [b, 1]]` or their transposes,
    /// every entry bounded by `bound` in absolute value.
    pub fn random_integer<R: Rng + ?Sized>(n: usize, bound: i64, rng: &mut R) -> Self {
        let q = |v: i64| BigRational::from_integer(v.into());
        let matrices = (0..n)
            .map(|_| loop {
                let a = rng.gen_range(-bound..=bound);
                let b = rng.gen_range(-bound..=bound);
                let c = 1 + a * b;
                if c.abs() > bound {
                    continue;
                }
                if rng.gen_bool(0.5) {
                    break [[q(c), q(a)], [q(b), q(1)]];
                } else {
                    break [[q(1), q(b)], [q(a), q(c)]];
                }
            })
            .collect();
        Sl2Tuple { matrices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::exact_rank;
    use crate::rng::task_rng;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn basis_tensor() {
        let t = DenseTensor::rank_one(&vec![[q(1), q(0)]; 5]);
        assert_eq!(t.get(0), &q(1));
        assert_eq!(t.entries().iter().filter(|e| !e.is_zero()).count(), 1);
    }

    #[test]
    fn bit_order() {
        let idx = MultiIndex::parse("10000").unwrap();
        assert_eq!(idx.bits(), 16);
        assert_eq!(idx.bit(0), 1);
        assert_eq!(idx.to_string(), "10000");
        assert!(MultiIndex::parse("10a").is_err());
    }

    #[test]
    fn flatten_shapes_and_errors() {
        let mut rng = task_rng(3, 0);
        let a = sample_generic(5, GENERIC_HEIGHT, &mut rng);
        let m = a.flatten(&[2]).unwrap();
        assert_eq!((m.len(), m[0].len()), (2, 16));
        let m = a.flatten(&[0, 3]).unwrap();
        assert_eq!((m.len(), m[0].len()), (4, 8));
        assert_eq!(exact_rank(&m), 4);
        assert!(a.flatten(&[]).is_err());
        assert!(a.flatten(&[0, 1, 2, 3, 4]).is_err());
        assert!(a.flatten(&[0, 0]).is_err());
        // rows (f0, f3) = (1, 0), columns (f1, f2, f4) = (0, 1, 1)
        assert_eq!(&m[0b10][0b011], a.get(0b10101));
    }

    #[test]
    fn rank_one_and_secant_flattenings() {
        let mut rng = task_rng(11, 0);
        let a = sample_rank1(5, SECANT_HEIGHT, &mut rng);
        assert!(a.flattening_ranks().iter().all(|(_, r)| *r == 1));
        let b = sample_secant(3, 5, SECANT_HEIGHT, &mut rng);
        for (left, r) in b.flattening_ranks() {
            if left.len() == 2 {
                assert_eq!(r, 3);
            } else {
                assert_eq!(r, 2);
            }
        }
    }

    #[test]
    fn group_rejects_bad_determinant() {
        let bad = [[q(2), q(0)], [q(0), q(1)]];
        assert!(matches!(
            Sl2Tuple::new(vec![bad]),
            Err(Error::NotSpecialLinear { .. })
        ));
        let a = DenseTensor::zeros(5);
        assert!(a.apply_group(&Sl2Tuple::identity(4)).is_err());
        assert!(a.apply_perm(&FactorPermutation::identity(4)).is_err());
    }

    #[test]
    fn json_round_trip_omits_zeros() {
        let mut t = DenseTensor::zeros(5);
        t.set(0, BigRational::new(3.into(), 2.into()));
        t.set(31, q(-7));
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":5,"entries":{"00000":"3/2","11111":"-7"}}"#);
        let back: DenseTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<DenseTensor>(r#"{"n":5,"entries":{"0000":"1"}}"#).is_err());
    }
}
