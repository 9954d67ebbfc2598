//! Exact computations around the fifth secant variety of (P^1)^5: tensors
//! and their symmetries, SL_2^5-invariants built from pairs of two-row Young
//! tableaux, character-theoretic dimension counts, the explicit degree-6
//! equation, and a randomized interpolation search for further equations.

pub mod characters;
pub mod contract;
pub mod error;
pub mod f6;
pub mod invariant;
pub mod laurent;
pub mod linalg;
pub mod perm;
pub mod polynomial;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod tableau;
pub mod tensor;

pub use error::{Error, Result};
pub use perm::FactorPermutation;
pub use tensor::{DenseTensor, MultiIndex, Sl2Tuple};
