//! Tableau invariants as functions on tensors.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::contract::{BracketNetwork, Strategy};
use crate::error::{invalid, Error, Result};
use crate::perm::FactorPermutation;
use crate::scalar::{format_rational, parse_rational, rational_to_residue, Integers, PrimeField, Ring};
use crate::tableau::{RawQuintuple, TableauQuintuple, FACTORS};
use crate::tensor::{permute_entries, DenseTensor};

/// A polynomial function on tensors that can be evaluated exactly or modulo a prime.
pub trait PointFunction: Sync {
    fn degree(&self) -> usize;
    fn eval_exact(&self, a: &DenseTensor) -> Result<BigRational>;
    /// Requires integer entries.
    fn eval_mod(&self, a: &DenseTensor, p: u64) -> Result<u64>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarValue {
    Exact(BigRational),
    Residue { value: u64, modulus: u64 },
}

impl ScalarValue {
    pub fn is_zero(&self) -> bool {
        match self {
            ScalarValue::Exact(q) => q.is_zero(),
            ScalarValue::Residue { value, .. } => *value == 0,
        }
    }
}

impl std::fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarValue::Exact(q) => f.write_str(&format_rational(q)),
            ScalarValue::Residue { value, modulus } => write!(f, "{value} mod {modulus}"),
        }
    }
}

fn check_factors(a: &DenseTensor) -> Result<()> {
    if a.n() != FACTORS {
        return Err(Error::FactorMismatch {
            expected: FACTORS,
            got: a.n(),
        });
    }
    Ok(())
}

pub fn network(q: &TableauQuintuple) -> BracketNetwork {
    BracketNetwork::new(q.degree(), &q.pairings()).expect("tableaux give valid pairings")
}

/// Exact value of the bracket contraction of `q` at `a`.
pub fn evaluate_quintuple(q: &TableauQuintuple, a: &DenseTensor) -> Result<BigRational> {
    evaluate_quintuple_with(q, a, Strategy::Auto)
}

pub fn evaluate_quintuple_with(q: &TableauQuintuple, a: &DenseTensor, strategy: Strategy) -> Result<BigRational> {
    check_factors(a)?;
    let (ints, den) = a.integer_scaled();
    let v = network(q).evaluate(&Integers, &ints, strategy);
    Ok(BigRational::new(v, num_traits::pow(den, q.degree())))
}

pub fn evaluate_quintuple_mod(q: &TableauQuintuple, a: &DenseTensor, p: u64) -> Result<u64> {
    check_factors(a)?;
    let field = PrimeField::new(p)?;
    let ints = a.integer_entries()?;
    let res: Vec<u64> = ints.iter().map(|x| field.reduce(x)).collect();
    Ok(network(q).evaluate(&field, &res, Strategy::Auto))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrization {
    None,
    /// `Σ_σ σ·Q` over all permutations of the five factors.
    Sum,
    /// `Σ_σ sgn(σ) σ·Q`.
    Signed,
}

/// Inverses `σ⁻¹` of every permutation of the five factors.
fn inverse_perms() -> &'static [FactorPermutation] {
    static INVERSES: OnceLock<Vec<FactorPermutation>> = OnceLock::new();
    INVERSES.get_or_init(|| {
        FactorPermutation::all(FACTORS)
            .iter()
            .map(FactorPermutation::inverse)
            .collect()
    })
}

/// `Σ_σ w(σ) Q(σ⁻¹·A)` over the raw entries of an integer tensor in any ring.
fn symmetrized_value<R: Ring>(
    ring: &R,
    net: &BracketNetwork,
    entries: &[R::Elem],
    sym: Symmetrization,
    strategy: Strategy,
) -> R::Elem {
    if sym == Symmetrization::None {
        return net.evaluate(ring, entries, strategy);
    }
    let values: Vec<R::Elem> = inverse_perms()
        .par_iter()
        .map(|inv| {
            let permuted = permute_entries(entries, FACTORS, inv);
            let v = net.evaluate(ring, &permuted, strategy);
            // sgn(σ) = sgn(σ⁻¹)
            if sym == Symmetrization::Signed && inv.sign() < 0 {
                ring.neg(&v)
            } else {
                v
            }
        })
        .collect();
    values.iter().fold(ring.zero(), |acc, v| ring.add(&acc, v))
}

/// A formal linear combination of (optionally symmetrized) tableau quintuples.
#[derive(Clone, Debug)]
pub struct InvariantSpec {
    degree: usize,
    terms: Vec<(BigRational, TableauQuintuple)>,
    symmetrization: Symmetrization,
    networks: OnceLock<Vec<BracketNetwork>>,
}

impl PartialEq for InvariantSpec {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.terms == other.terms && self.symmetrization == other.symmetrization
    }
}

impl InvariantSpec {
    pub fn new(terms: Vec<(BigRational, TableauQuintuple)>, symmetrization: Symmetrization) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(invalid("an invariant needs at least one term"));
        };
        let m = first.m();
        if terms.iter().any(|(_, q)| q.m() != m) {
            return Err(invalid("all quintuples of an invariant must share m"));
        }
        Ok(InvariantSpec {
            degree: 2 * m,
            terms,
            symmetrization,
            networks: OnceLock::new(),
        })
    }

    pub fn single(q: TableauQuintuple, symmetrization: Symmetrization) -> Self {
        Self::new(vec![(BigRational::one(), q)], symmetrization).expect("one term")
    }

    pub fn terms(&self) -> &[(BigRational, TableauQuintuple)] {
        &self.terms
    }

    pub fn symmetrization(&self) -> Symmetrization {
        self.symmetrization
    }

    fn networks(&self) -> &[BracketNetwork] {
        self.networks
            .get_or_init(|| self.terms.iter().map(|(_, q)| network(q)).collect())
    }

    pub fn evaluate_with(&self, a: &DenseTensor, strategy: Strategy) -> Result<BigRational> {
        check_factors(a)?;
        let (ints, den) = a.integer_scaled();
        let mut total = BigRational::zero();
        for ((coeff, _), net) in self.terms.iter().zip(self.networks()) {
            let v = symmetrized_value(&Integers, net, &ints, self.symmetrization, strategy);
            total += coeff * BigRational::from_integer(v);
        }
        Ok(total / BigRational::from_integer(num_traits::pow(den, self.degree)))
    }

    pub fn evaluate_mod_with(&self, a: &DenseTensor, p: u64, strategy: Strategy) -> Result<u64> {
        check_factors(a)?;
        let field = PrimeField::new(p)?;
        let ints = a.integer_entries()?;
        let res: Vec<u64> = ints.iter().map(|x| field.reduce(x)).collect();
        let mut total = 0u64;
        for ((coeff, _), net) in self.terms.iter().zip(self.networks()) {
            let c = rational_to_residue(coeff, p)?;
            let v = symmetrized_value(&field, net, &res, self.symmetrization, strategy);
            field.mul_add_assign(&mut total, &c, &v);
        }
        Ok(total)
    }
}

impl PointFunction for InvariantSpec {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_exact(&self, a: &DenseTensor) -> Result<BigRational> {
        self.evaluate_with(a, Strategy::Auto)
    }

    fn eval_mod(&self, a: &DenseTensor, p: u64) -> Result<u64> {
        self.evaluate_mod_with(a, p, Strategy::Auto)
    }
}

/// Evaluate exactly, or modulo `modulus` for integer tensors.
pub fn evaluate_invariant(f: &InvariantSpec, a: &DenseTensor, modulus: Option<u64>) -> Result<ScalarValue> {
    match modulus {
        None => f.eval_exact(a).map(ScalarValue::Exact),
        Some(p) => f.eval_mod(a, p).map(|value| ScalarValue::Residue { value, modulus: p }),
    }
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coeff: String,
    quintuple: RawQuintuple,
}

#[derive(Serialize, Deserialize)]
struct RawInvariant {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    terms: Vec<RawTerm>,
    symmetrization: Symmetrization,
}

impl Serialize for InvariantSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(c, q)| RawTerm {
                coeff: format_rational(c),
                quintuple: RawQuintuple {
                    m: q.m(),
                    tableaux: q
                        .tableaux()
                        .iter()
                        .map(|t| [t.top().to_vec(), t.bottom().to_vec()])
                        .collect(),
                },
            })
            .collect();
        RawInvariant {
            degree: Some(self.degree),
            terms,
            symmetrization: self.symmetrization,
        }
        .serialize(s)
    }
}

/// Column swaps in the input fillings are folded into the term coefficients.
impl<'de> Deserialize<'de> for InvariantSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawInvariant::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let coeff = parse_rational(&t.coeff).map_err(D::Error::custom)?;
            let (q, sign) = t.quintuple.parse().map_err(D::Error::custom)?;
            let coeff = if sign < 0 { -coeff } else { coeff };
            terms.push((coeff, q));
        }
        let spec = InvariantSpec::new(terms, raw.symmetrization).map_err(D::Error::custom)?;
        if let Some(d) = raw.degree {
            if d != spec.degree {
                return Err(D::Error::custom(format!(
                    "declared degree {d} but quintuples have degree {}",
                    spec.degree
                )));
            }
        }
        Ok(spec)
    }
}

/// Parse either an InvariantSpec document or a bare quintuple document (read
/// as a single unsymmetrized term carrying its canonicalization sign).
pub fn parse_invariant_json(text: &str) -> Result<InvariantSpec> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("terms").is_some() {
        Ok(serde_json::from_value(value)?)
    } else {
        let raw: RawQuintuple = serde_json::from_value(value)?;
        let (q, sign) = raw.parse()?;
        InvariantSpec::new(
            vec![(BigRational::from_integer(BigInt::from(sign)), q)],
            Symmetrization::None,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::task_rng;
    use crate::tableau::{random_quintuple, TwoRowTableau};
    use crate::tensor::{sample_generic, sample_rank1, sample_secant, GENERIC_HEIGHT, SECANT_HEIGHT};

    #[test]
    fn m1_matches_symbolic_expansion() {
        // the only m = 1 quintuple pairs copies 1, 2 on every factor:
        // value = Σ_I (-1)^{|I|} A[I] A[complement I]
        let (t, _) = TwoRowTableau::from_rows(&[1], &[2]).unwrap();
        let q = TableauQuintuple::new(std::array::from_fn(|_| t.clone())).unwrap();
        let mut rng = task_rng(21, 0);
        for _ in 0..5 {
            let a = sample_generic(5, GENERIC_HEIGHT, &mut rng);
            let expected: BigRational = (0..32usize)
                .map(|i| {
                    let s = if i.count_ones() % 2 == 0 { 1 } else { -1 };
                    BigRational::from_integer(s.into()) * a.get(i) * a.get(31 - i)
                })
                .sum();
            assert_eq!(evaluate_quintuple(&q, &a).unwrap(), expected);
        }
    }

    #[test]
    fn degree_six_quintuple_vanishes_on_rank_five() {
        let q = TableauQuintuple::degree_six();
        let mut rng = task_rng(22, 0);
        for _ in 0..5 {
            let a = sample_secant(5, 5, SECANT_HEIGHT, &mut rng);
            assert!(evaluate_quintuple(&q, &a).unwrap().is_zero());
            let f = InvariantSpec::single(q.clone(), Symmetrization::Signed);
            assert!(evaluate_invariant(&f, &a, None).unwrap().is_zero());
        }
        let g = sample_generic(5, GENERIC_HEIGHT, &mut rng);
        assert!(!evaluate_quintuple(&q, &g).unwrap().is_zero());
    }

    #[test]
    fn rational_tensors_scale_out() {
        let mut rng = task_rng(23, 0);
        let q = random_quintuple(2, &mut rng);
        let a = sample_generic(5, 20, &mut rng);
        let half = BigRational::new(1.into(), 2.into());
        let lhs = evaluate_quintuple(&q, &a.scale(&half)).unwrap();
        let rhs = evaluate_quintuple(&q, &a).unwrap() / BigRational::from_integer(16.into());
        assert_eq!(lhs, rhs);
        assert!(matches!(
            evaluate_quintuple_mod(&q, &a.scale(&half), 1_000_000_007),
            Err(Error::NonIntegerTensor)
        ));
    }

    #[test]
    fn rank_one_vanishing() {
        let mut rng = task_rng(24, 0);
        for m in 1..=4 {
            let q = random_quintuple(m, &mut rng);
            let a = sample_rank1(5, SECANT_HEIGHT, &mut rng);
            assert!(evaluate_quintuple(&q, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn factor_mismatch() {
        let q = TableauQuintuple::degree_six();
        assert!(matches!(
            evaluate_quintuple(&q, &DenseTensor::zeros(4)),
            Err(Error::FactorMismatch { .. })
        ));
    }

    #[test]
    fn json_sign_folding() {
        let text = r#"{"terms":[{"coeff":"3/2","quintuple":{"m":1,"tableaux":[[[2],[1]],[[1],[2]],[[1],[2]],[[1],[2]],[[1],[2]]]}}],"symmetrization":"sum"}"#;
        let f: InvariantSpec = serde_json::from_str(text).unwrap();
        assert_eq!(f.terms()[0].0, BigRational::new((-3).into(), 2.into()));
        let again: InvariantSpec = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(again, f);
        let bare = parse_invariant_json(r#"{"m":1,"tableaux":[[[2],[1]],[[1],[2]],[[1],[2]],[[1],[2]],[[1],[2]]]}"#).unwrap();
        assert_eq!(bare.terms()[0].0, -BigRational::one());
        assert!(parse_invariant_json(r#"{"terms":[],"symmetrization":"none"}"#).is_err());
    }
}
