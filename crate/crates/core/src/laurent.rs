//! Sparse multivariate Laurent polynomials with integer coefficients, and
//! integer partitions.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPolynomial {
    vars: usize,
    terms: BTreeMap<Vec<i32>, BigInt>,
}

impl LaurentPolynomial {
    pub fn zero(vars: usize) -> Self {
        LaurentPolynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: usize) -> Self {
        Self::monomial(vec![0; vars], BigInt::one())
    }

    pub fn monomial(exponents: Vec<i32>, coeff: BigInt) -> Self {
        let vars = exponents.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exponents, coeff);
        }
        LaurentPolynomial { vars, terms }
    }

    /// `z_var^e` in `vars` variables.
    pub fn variable_power(vars: usize, var: usize, e: i32) -> Self {
        let mut exps = vec![0; vars];
        exps[var] = e;
        Self::monomial(exps, BigInt::one())
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[i32]) -> BigInt {
        self.terms.get(exponents).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficient(&vec![0; self.vars])
    }

    fn add_term(&mut self, exps: Vec<i32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        assert_eq!(self.vars, rhs.vars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        assert_eq!(self.vars, rhs.vars);
        let mut out = LaurentPolynomial::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

/// Weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `z_λ = ∏_k k^{m_k} m_k!`, the centralizer order of cycle type λ.
    pub fn z(&self) -> BigInt {
        let mut z = BigInt::one();
        let mut i = 0;
        while i < self.parts.len() {
            let k = self.parts[i];
            let mult = self.parts[i..].iter().take_while(|&&p| p == k).count();
            for j in 1..=mult {
                z *= BigInt::from(k) * BigInt::from(j);
            }
            i += mult;
        }
        z
    }
}

/// All partitions of `d`, in reverse lexicographic order.
pub fn partitions(d: usize) -> Vec<IntegerPartition> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
        if rem == 0 {
            out.push(IntegerPartition { parts: cur.clone() });
            return;
        }
        for k in (1..=rem.min(max)).rev() {
            cur.push(k);
            rec(rem - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..=16).map(|d| partitions(d).len()).collect();
        assert_eq!(counts[..8], [1, 1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(counts[16], 231);
        // Σ_λ 1/z_λ = 1 (class equation of S_d)
        for d in 1..=8 {
            let fact: BigInt = (1..=d).map(BigInt::from).product();
            let s: BigInt = partitions(d).iter().map(|l| &fact / l.z()).sum();
            assert_eq!(s, fact);
        }
        assert_eq!(IntegerPartition::new(vec![1, 2, 2]).z(), BigInt::from(8));
    }

    #[test]
    fn laurent_arithmetic() {
        let z = LaurentPolynomial::variable_power(2, 0, 1);
        let zi = LaurentPolynomial::variable_power(2, 0, -1);
        let p = &z + &zi;
        let sq = p.pow(2);
        assert_eq!(sq.constant_term(), BigInt::from(2));
        assert_eq!(sq.coefficient(&[2, 0]), BigInt::one());
        assert!((&sq - &sq).is_zero());
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentPolynomial> {
        prop::collection::vec((prop::collection::vec(-3i32..=3, 3), -20i64..=20), 0..12).prop_map(|terms| {
            terms.into_iter().fold(LaurentPolynomial::zero(3), |acc, (e, c)| {
                &acc + &LaurentPolynomial::monomial(e, BigInt::from(c))
            })
        })
    }

    proptest! {
        #[test]
        fn constant_term_is_linear(f in arb_laurent(), g in arb_laurent(), a in -5i64..=5) {
            let scaled = &LaurentPolynomial::monomial(vec![0; 3], BigInt::from(a)) * &f;
            let lhs = (&scaled + &g).constant_term();
            prop_assert_eq!(lhs, BigInt::from(a) * f.constant_term() + g.constant_term());
        }
    }
}
