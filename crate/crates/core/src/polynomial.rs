//! Sparse homogeneous polynomials in the coordinates `x_I` of (k^2)^{⊗n}.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::invariant::PointFunction;
use crate::perm::FactorPermutation;
use crate::scalar::{mul_mod, residue, PrimeField};
use crate::tensor::{bit_of, DenseTensor, MultiIndex};

/// A monomial as the sorted multiset of its variable indices.
pub type Monomial = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePolynomial {
    n: usize,
    degree: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl SparsePolynomial {
    pub fn zero(n: usize, degree: usize) -> Self {
        assert!((1..=8).contains(&n), "variables are indexed by u8");
        SparsePolynomial {
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &[u8]) -> BigInt {
        let mut key = mono.to_vec();
        key.sort_unstable();
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, mut mono: Monomial, c: BigInt) {
        assert_eq!(mono.len(), self.degree, "polynomial is homogeneous");
        if c.is_zero() {
            return;
        }
        mono.sort_unstable();
        match self.terms.entry(mono) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.n, self.degree), (other.n, other.degree));
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        }
        out
    }

    /// Replace every variable `x_I` by `x_{map(I)}`.
    pub fn substitute(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (m, c) in &self.terms {
            out.add_term(m.iter().map(|&i| map(i as usize) as u8).collect(), c.clone());
        }
        out
    }

    /// The polynomial `A ↦ f(σ·A)`.
    pub fn compose_perm(&self, sigma: &FactorPermutation) -> Self {
        let n = self.n;
        // (σ·A)[I] = A[I∘σ]
        self.substitute(|i| (0..n).fold(0, |acc, k| acc | (bit_of(i, n, sigma.apply(k)) << (n - 1 - k))))
    }

    /// Apply the derivation `Σ_I x_{target(I)} ∂/∂x_I` over the `I` where `target` is defined.
    pub fn derivation(&self, target: impl Fn(usize) -> Option<usize>) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (m, c) in &self.terms {
            let mut k = 0;
            while k < m.len() {
                let var = m[k];
                let mult = m[k..].iter().take_while(|&&v| v == var).count();
                if let Some(t) = target(var as usize) {
                    let mut nm = m.clone();
                    nm[k] = t as u8;
                    out.add_term(nm, c * BigInt::from(mult));
                }
                k += mult;
            }
        }
        out
    }

    /// Raising operator of factor `k`: `Σ_{I_k = 1} x_{I with bit k cleared} ∂/∂x_I`.
    pub fn raise(&self, k: usize) -> Self {
        let shift = self.n - 1 - k;
        self.derivation(|i| (i >> shift & 1 == 1).then(|| i & !(1 << shift)))
    }

    /// Lowering operator of factor `k`, the transpose of [`Self::raise`].
    pub fn lower(&self, k: usize) -> Self {
        let shift = self.n - 1 - k;
        self.derivation(|i| (i >> shift & 1 == 0).then(|| i | (1 << shift)))
    }

    /// Torus weight of a monomial: per factor, #(bit 1) − #(bit 0).
    pub fn monomial_weight(n: usize, mono: &[u8]) -> Vec<i32> {
        (0..n)
            .map(|k| {
                mono.iter()
                    .map(|&i| if bit_of(i as usize, n, k) == 1 { 1 } else { -1 })
                    .sum()
            })
            .collect()
    }

    pub fn is_weight_zero(&self) -> bool {
        self.terms
            .keys()
            .all(|m| Self::monomial_weight(self.n, m).iter().all(|&w| w == 0))
    }

    fn check(&self, a: &DenseTensor) -> Result<()> {
        if a.n() != self.n {
            return Err(Error::FactorMismatch {
                expected: self.n,
                got: a.n(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, a: &DenseTensor) -> Result<BigRational> {
        self.check(a)?;
        let (ints, den) = a.integer_scaled();
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for &i in m {
                term *= &ints[i as usize];
                if term.is_zero() {
                    break;
                }
            }
            total += term;
        }
        Ok(BigRational::new(total, num_traits::pow(den, self.degree)))
    }

    pub fn evaluate_mod(&self, a: &DenseTensor, p: u64) -> Result<u64> {
        self.check(a)?;
        let field = PrimeField::new(p)?;
        let res: Vec<u64> = a.integer_entries()?.iter().map(|x| field.reduce(x)).collect();
        let mut total = 0u64;
        for (m, c) in &self.terms {
            let t = m.iter().fold(residue(c, p), |acc, &i| mul_mod(acc, res[i as usize], p));
            total = (total + t) % p;
        }
        Ok(total)
    }

    pub fn key(n: usize, mono: &[u8]) -> String {
        mono.iter()
            .map(|&i| MultiIndex::new(n, i as u32).to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl PointFunction for SparsePolynomial {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_exact(&self, a: &DenseTensor) -> Result<BigRational> {
        self.evaluate(a)
    }

    fn eval_mod(&self, a: &DenseTensor, p: u64) -> Result<u64> {
        self.evaluate_mod(a, p)
    }
}

#[derive(Serialize, Deserialize)]
struct RawPolynomial {
    degree: usize,
    terms: BTreeMap<String, String>,
}

impl Serialize for SparsePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawPolynomial {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Self::key(self.n, m), c.to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawPolynomial::deserialize(d)?;
        let parse = || -> Result<SparsePolynomial> {
            let mut poly: Option<SparsePolynomial> = None;
            for (key, coeff) in &raw.terms {
                let idx: Vec<MultiIndex> = key.split('.').map(MultiIndex::parse).collect::<Result<_>>()?;
                let n = idx[0].n();
                if idx.len() != raw.degree || idx.iter().any(|i| i.n() != n) {
                    return Err(invalid(format!("monomial {key} does not match degree {}", raw.degree)));
                }
                let c: BigInt = coeff
                    .parse()
                    .map_err(|_| invalid(format!("bad coefficient {coeff:?}")))?;
                let p = poly.get_or_insert_with(|| SparsePolynomial::zero(n, raw.degree));
                if p.n != n {
                    return Err(invalid("mixed index widths"));
                }
                p.add_term(idx.iter().map(|i| i.bits() as u8).collect(), c);
            }
            poly.ok_or_else(|| invalid("empty polynomial has no factor count"))
        };
        parse().map_err(D::Error::custom)
    }
}

impl SparsePolynomial {
    /// Monomial `∏ x_I` with coefficient one.
    pub fn monomial(n: usize, mono: Monomial) -> Self {
        let mut p = Self::zero(n, mono.len());
        p.add_term(mono, BigInt::one());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_removes_terms() {
        let mut p = SparsePolynomial::zero(2, 2);
        p.add_term(vec![1, 0], BigInt::from(3));
        p.add_term(vec![0, 1], BigInt::from(-3));
        assert!(p.is_zero());
    }

    #[test]
    fn sl2_operators_on_a_bracket() {
        // x_00 x_11 - x_01 x_10 is SL_2 × SL_2 invariant
        let mut det = SparsePolynomial::zero(2, 2);
        det.add_term(vec![0, 3], BigInt::from(1));
        det.add_term(vec![1, 2], BigInt::from(-1));
        for k in 0..2 {
            assert!(det.raise(k).is_zero());
            assert!(det.lower(k).is_zero());
        }
        assert!(det.is_weight_zero());
        let mono = SparsePolynomial::monomial(2, vec![3, 3]);
        // E_0 (x_11^2) = 2 x_01 x_11
        assert_eq!(mono.raise(0).coefficient(&[1, 3]), BigInt::from(2));
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let mut p = SparsePolynomial::zero(5, 2);
        p.add_term(vec![31, 0], BigInt::from(-2));
        p.add_term(vec![1, 2], BigInt::from(5));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"degree":2,"terms":{"00000.11111":"-2","00001.00010":"5"}}"#);
        let back: SparsePolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
