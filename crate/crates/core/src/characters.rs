//! Dimensions of the SL_2^5-invariants of Sym^d(V), V = (k^2)^{⊗5}, and of
//! their Σ_5-invariant and sign-isotypic parts.
//!
//! For a factor permutation σ, `tr(σ | U_d)` is a constant term: give each
//! cycle `c` of σ one torus variable `t_c`, let `M` be the monomial operator
//! (torus element, σ) on V, expand the character of Sym^d through power sums
//! `ch_d(M) = Σ_{λ ⊢ d} z_λ⁻¹ ∏_j tr(M^{λ_j})`, and take
//! `CT ∏_c (1 − t_c²) · ch_d(M)`. Since `M` is a tensor product of one
//! operator per cycle, each power trace factors over cycles and so does the
//! constant term; [`twisted_trace`] uses that, [`twisted_trace_direct`]
//! expands the full multivariate product.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::laurent::{partitions, LaurentPolynomial};
use crate::perm::FactorPermutation;
use crate::tableau::FACTORS;
use crate::tensor::bit_of;

/// A permutation-like matrix with one Laurent monomial per column: column `j`
/// is sent to row `target[j]` with weight `t^{exponent[j]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMatrix {
    vars: usize,
    target: Vec<usize>,
    exponent: Vec<Vec<i32>>,
}

impl MonomialMatrix {
    /// The operator `(diag(x_1, x_1⁻¹) ⊗ … ⊗ diag(x_n, x_n⁻¹)) ∘ σ` on (k^2)^{⊗n}, where
    /// `x_k` is the monomial `t^{weights[k]}` and σ acts by `(σ·A)[I] = A[I∘σ]`.
    pub fn torus_and_perm(sigma: &FactorPermutation, weights: &[Vec<i32>]) -> Self {
        let n = sigma.len();
        let vars = weights.first().map_or(0, Vec::len);
        let dim = 1usize << n;
        let inv = sigma.inverse();
        let mut target = vec![0; dim];
        let mut exponent = vec![vec![0; vars]; dim];
        for j in 0..dim {
            // e_J ↦ e_I with I_k = J_{σ⁻¹(k)}
            let i = (0..n).fold(0usize, |acc, k| acc | (bit_of(j, n, inv.apply(k)) << (n - 1 - k)));
            target[j] = i;
            for k in 0..n {
                let s = if bit_of(i, n, k) == 0 { 1 } else { -1 };
                for v in 0..vars {
                    exponent[j][v] += s * weights[k][v];
                }
            }
        }
        MonomialMatrix { vars, target, exponent }
    }

    /// Torus representatives for σ: variable `c` sits on the first factor of
    /// cycle `c`, all other factors get the trivial weight.
    pub fn for_permutation(sigma: &FactorPermutation) -> Self {
        let cycles = sigma.cycles();
        let mut weights = vec![vec![0; cycles.len()]; sigma.len()];
        for (c, cycle) in cycles.iter().enumerate() {
            weights[cycle[0]][c] = 1;
        }
        Self::torus_and_perm(sigma, &weights)
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn compose(&self, other: &Self) -> Self {
        // (self ∘ other) e_j = self(t^{a} e_{other(j)})
        let target = other.target.iter().map(|&i| self.target[i]).collect();
        let exponent = (0..self.dim())
            .map(|j| {
                let mid = other.target[j];
                other.exponent[j]
                    .iter()
                    .zip(&self.exponent[mid])
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect();
        MonomialMatrix {
            vars: self.vars,
            target,
            exponent,
        }
    }

    pub fn trace(&self) -> LaurentPolynomial {
        (0..self.dim())
            .filter(|&j| self.target[j] == j)
            .fold(LaurentPolynomial::zero(self.vars), |acc, j| {
                &acc + &LaurentPolynomial::monomial(self.exponent[j].clone(), BigInt::from(1))
            })
    }

    /// `tr(M^k)` for `k = 1..=max`.
    pub fn power_traces(&self, max: usize) -> Vec<LaurentPolynomial> {
        let mut out = Vec::with_capacity(max);
        let mut power = self.clone();
        for k in 1..=max {
            if k > 1 {
                power = power.compose(self);
            }
            out.push(power.trace());
        }
        out
    }
}

/// `Σ_{λ ⊢ d} z_λ⁻¹ ∏_j f(λ_j)` for an integer-valued `f`, exactly.
fn power_sum_expansion(d: usize, mut f: impl FnMut(&[usize]) -> BigInt) -> BigRational {
    partitions(d)
        .iter()
        .map(|lambda| BigRational::new(f(lambda.parts()), lambda.z()))
        .fold(BigRational::zero(), |a, b| a + b)
}

fn weyl_factor(vars: usize) -> LaurentPolynomial {
    (0..vars).fold(LaurentPolynomial::one(vars), |acc, v| {
        let t2 = LaurentPolynomial::variable_power(vars, v, 2);
        &acc * &(&LaurentPolynomial::one(vars) - &t2)
    })
}

fn to_integer(q: BigRational) -> BigInt {
    assert!(q.is_integer(), "trace {q} is not an integer");
    q.to_integer()
}

/// `tr(σ | U_d)`, factoring the constant term over the cycles of σ.
pub fn twisted_trace(sigma: &FactorPermutation, d: usize) -> BigInt {
    if d == 0 {
        return BigInt::from(1);
    }
    // one single-variable operator per cycle, acting on (k^2)^{⊗ℓ}
    let per_cycle: Vec<Vec<LaurentPolynomial>> = sigma
        .cycles()
        .iter()
        .map(|c| {
            let l = c.len();
            let cyc = FactorPermutation::new((0..l).map(|k| (k + 1) % l).collect()).unwrap();
            MonomialMatrix::for_permutation(&cyc).power_traces(d)
        })
        .collect();
    let weyl = weyl_factor(1);
    let total = power_sum_expansion(d, |parts| {
        per_cycle
            .iter()
            .map(|traces| {
                let prod = parts
                    .iter()
                    .fold(weyl.clone(), |acc, &k| &acc * &traces[k - 1]);
                prod.constant_term()
            })
            .product()
    });
    to_integer(total)
}

/// `tr(σ | U_d)` from the full multivariate expansion over all cycle
/// variables at once. Exponential in `d`; meant as a cross-check.
pub fn twisted_trace_direct(sigma: &FactorPermutation, d: usize) -> BigInt {
    let m = MonomialMatrix::for_permutation(sigma);
    let vars = sigma.cycles().len();
    let traces = m.power_traces(d.max(1));
    let weyl = weyl_factor(vars);
    let total = power_sum_expansion(d, |parts| {
        parts
            .iter()
            .fold(weyl.clone(), |acc, &k| &acc * &traces[k - 1])
            .constant_term()
    });
    to_integer(total)
}

/// Cycle-type representatives of S_5 with class sizes.
pub fn conjugacy_classes() -> Vec<(FactorPermutation, u64)> {
    let reps: [[usize; 5]; 7] = [
        [0, 1, 2, 3, 4],
        [1, 0, 2, 3, 4],
        [1, 0, 3, 2, 4],
        [1, 2, 0, 3, 4],
        [1, 2, 0, 4, 3],
        [1, 2, 3, 0, 4],
        [1, 2, 3, 4, 0],
    ];
    reps.iter()
        .map(|r| {
            let p = FactorPermutation::new(r.to_vec()).unwrap();
            let z = crate::laurent::IntegerPartition::new(p.cycle_type()).z();
            (p, 120 / z.to_u64().unwrap())
        })
        .collect()
}

pub fn dim_u(d: usize) -> u64 {
    twisted_trace(&FactorPermutation::identity(FACTORS), d)
        .to_u64()
        .expect("dimension is a nonnegative integer")
}

fn isotypic(d: usize, signed: bool) -> u64 {
    let sum: BigInt = conjugacy_classes()
        .iter()
        .map(|(p, size)| {
            let w = if signed { p.sign() } else { 1 };
            twisted_trace(p, d) * BigInt::from(*size) * BigInt::from(w)
        })
        .sum();
    let (q, r) = num_integer::Integer::div_rem(&sum, &BigInt::from(120));
    assert!(r.is_zero(), "class sum {sum} not divisible by |S_5|");
    q.to_u64().expect("multiplicity is nonnegative")
}

/// Dimension of the Σ_5-invariant part of U_d.
pub fn dim_u_sym(d: usize) -> u64 {
    isotypic(d, false)
}

/// Dimension of the sign-isotypic part of U_d.
pub fn dim_u_sgn(d: usize) -> u64 {
    isotypic(d, true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub d: usize,
    #[serde(rename = "U")]
    pub u: u64,
    pub sym: u64,
    pub sgn: u64,
}

pub fn dimension_row(d: usize) -> DimensionRow {
    DimensionRow {
        d,
        u: dim_u(d),
        sym: dim_u_sym(d),
        sgn: dim_u_sgn(d),
    }
}

/// Rows for `d = 2, 4, …, max_degree`, plus odd degrees when requested.
pub fn dimension_table(max_degree: usize, include_odd: bool) -> Vec<DimensionRow> {
    (2..=max_degree)
        .filter(|d| include_odd || d % 2 == 0)
        .map(dimension_row)
        .collect()
}
