//! Two-row Young tableaux of shape (m, m) and quintuples of them.
//!
//! A tableau is read column by column: a column `(a, b)` stands for the
//! bracket `[a b]` pairing tensor copies `a` and `b` on one factor.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::perm::FactorPermutation;

pub const FACTORS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoRowTableau {
    top: Vec<u8>,
    bottom: Vec<u8>,
}

impl TwoRowTableau {
    /// Canonicalize the filling `(top, bottom)`: every column is stored with
    /// its smaller entry on top. Returns the canonical tableau and the sign
    /// `(-1)^(number of swapped columns)` relating the two bracket products.
    pub fn from_rows(top: &[u8], bottom: &[u8]) -> Result<(Self, i32)> {
        let m = top.len();
        if m == 0 || bottom.len() != m || 2 * m > u8::MAX as usize {
            return Err(invalid(format!(
                "rows of lengths {} and {} do not form a tableau of shape (m,m), m >= 1",
                top.len(),
                bottom.len()
            )));
        }
        let mut seen = vec![false; 2 * m + 1];
        for &v in top.iter().chain(bottom) {
            if v == 0 || v as usize > 2 * m || seen[v as usize] {
                return Err(invalid(format!(
                    "filling {top:?}/{bottom:?} is not a permutation of 1..={}",
                    2 * m
                )));
            }
            seen[v as usize] = true;
        }
        let mut sign = 1;
        let (mut t, mut b) = (top.to_vec(), bottom.to_vec());
        for j in 0..m {
            if t[j] > b[j] {
                std::mem::swap(&mut t[j], &mut b[j]);
                sign = -sign;
            }
        }
        Ok((TwoRowTableau { top: t, bottom: b }, sign))
    }

    pub fn m(&self) -> usize {
        self.top.len()
    }

    pub fn top(&self) -> &[u8] {
        &self.top
    }

    pub fn bottom(&self) -> &[u8] {
        &self.bottom
    }

    /// Columns as 1-based `(top, bottom)` pairs.
    pub fn columns(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.top.iter().copied().zip(self.bottom.iter().copied())
    }

    pub fn is_standard(&self) -> bool {
        self.top.windows(2).all(|w| w[0] < w[1])
            && self.bottom.windows(2).all(|w| w[0] < w[1])
            && self.columns().all(|(a, b)| a < b)
    }
}

impl Serialize for TwoRowTableau {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [&self.top, &self.bottom].serialize(s)
    }
}

/// All standard tableaux of shape (m, m), ordered lexicographically by top row.
pub fn enumerate_standard(m: usize) -> Vec<TwoRowTableau> {
    assert!(m >= 1);
    fn rec(k: u8, n: u8, top: &mut Vec<u8>, bottom: &mut Vec<u8>, m: usize, out: &mut Vec<TwoRowTableau>) {
        if k > n {
            out.push(TwoRowTableau {
                top: top.clone(),
                bottom: bottom.clone(),
            });
            return;
        }
        if top.len() < m {
            top.push(k);
            rec(k + 1, n, top, bottom, m, out);
            top.pop();
        }
        if bottom.len() < top.len() {
            bottom.push(k);
            rec(k + 1, n, top, bottom, m, out);
            bottom.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, 2 * m as u8, &mut Vec::new(), &mut Vec::new(), m, &mut out);
    out
}

/// Cached standard tableaux for the shapes used by the search (m <= 12).
pub fn standard_tableaux(m: usize) -> &'static [TwoRowTableau] {
    static CACHE: [OnceLock<Vec<TwoRowTableau>>; 13] = [const { OnceLock::new() }; 13];
    assert!((1..=12).contains(&m), "standard tableaux cached for 1 <= m <= 12");
    CACHE[m].get_or_init(|| enumerate_standard(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableauQuintuple {
    tableaux: [TwoRowTableau; FACTORS],
}

impl TableauQuintuple {
    pub fn new(tableaux: [TwoRowTableau; FACTORS]) -> Result<Self> {
        let m = tableaux[0].m();
        if tableaux.iter().any(|t| t.m() != m) {
            return Err(invalid("all five tableaux must have the same shape (m,m)"));
        }
        Ok(TableauQuintuple { tableaux })
    }

    /// Parse five raw fillings, canonicalizing each; returns the product of the
    /// per-tableau signs.
    pub fn from_fillings(fillings: &[(Vec<u8>, Vec<u8>)]) -> Result<(Self, i32)> {
        if fillings.len() != FACTORS {
            return Err(invalid(format!(
                "a quintuple needs {FACTORS} tableaux, got {}",
                fillings.len()
            )));
        }
        let mut sign = 1;
        let mut tabs = Vec::with_capacity(FACTORS);
        for (top, bottom) in fillings {
            let (t, s) = TwoRowTableau::from_rows(top, bottom)?;
            sign *= s;
            tabs.push(t);
        }
        let tableaux: [TwoRowTableau; FACTORS] = tabs.try_into().expect("length checked");
        Ok((TableauQuintuple::new(tableaux)?, sign))
    }

    pub fn m(&self) -> usize {
        self.tableaux[0].m()
    }

    pub fn degree(&self) -> usize {
        2 * self.m()
    }

    pub fn tableaux(&self) -> &[TwoRowTableau; FACTORS] {
        &self.tableaux
    }

    /// Bracket pairings per factor, 0-based copies.
    pub fn pairings(&self) -> Vec<Vec<(usize, usize)>> {
        self.tableaux
            .iter()
            .map(|t| {
                t.columns()
                    .map(|(a, b)| (a as usize - 1, b as usize - 1))
                    .collect()
            })
            .collect()
    }

    /// `σ·Q`, permuting tableau positions so that `(σ·Q)(A) = Q(σ⁻¹·A)`:
    /// position `j` of `σ·Q` holds tableau `σ⁻¹(j)` of `Q`.
    pub fn permuted(&self, sigma: &FactorPermutation) -> Self {
        let inv = sigma.inverse();
        let tableaux = std::array::from_fn(|j| self.tableaux[inv.apply(j)].clone());
        TableauQuintuple { tableaux }
    }

    pub fn is_standard(&self) -> bool {
        self.tableaux.iter().all(TwoRowTableau::is_standard)
    }

    /// The quintuple realizing the degree-6 equation: fillings 135/246,
    /// 134/256, 125/346, 124/356, 123/456.
    pub fn degree_six() -> Self {
        let rows: [([u8; 3], [u8; 3]); 5] = [
            ([1, 3, 5], [2, 4, 6]),
            ([1, 3, 4], [2, 5, 6]),
            ([1, 2, 5], [3, 4, 6]),
            ([1, 2, 4], [3, 5, 6]),
            ([1, 2, 3], [4, 5, 6]),
        ];
        let fillings: Vec<(Vec<u8>, Vec<u8>)> =
            rows.iter().map(|(t, b)| (t.to_vec(), b.to_vec())).collect();
        Self::from_fillings(&fillings).expect("valid fillings").0
    }
}

/// Five independent uniform draws from the standard tableaux of shape (m, m).
pub fn random_quintuple<R: Rng + ?Sized>(m: usize, rng: &mut R) -> TableauQuintuple {
    let pool = standard_tableaux(m);
    let tableaux = std::array::from_fn(|_| pool[rng.gen_range(0..pool.len())].clone());
    TableauQuintuple { tableaux }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawQuintuple {
    pub m: usize,
    pub tableaux: Vec<[Vec<u8>; 2]>,
}

impl RawQuintuple {
    pub fn parse(self) -> Result<(TableauQuintuple, i32)> {
        let fillings: Vec<(Vec<u8>, Vec<u8>)> = self
            .tableaux
            .into_iter()
            .map(|[t, b]| (t, b))
            .collect();
        let (q, sign) = TableauQuintuple::from_fillings(&fillings)?;
        if q.m() != self.m {
            return Err(invalid(format!("declared m = {} but tableaux have m = {}", self.m, q.m())));
        }
        Ok((q, sign))
    }
}

impl Serialize for TableauQuintuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawQuintuple {
            m: self.m(),
            tableaux: self
                .tableaux
                .iter()
                .map(|t| [t.top.clone(), t.bottom.clone()])
                .collect(),
        }
        .serialize(s)
    }
}

/// Strict: rejects fillings that are not already column-canonical, since the
/// sign they would carry has nowhere to go. Use [`crate::invariant::InvariantSpec`]
/// parsing for arbitrary fillings.
impl<'de> Deserialize<'de> for TableauQuintuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawQuintuple::deserialize(d)?;
        let (q, sign) = raw.parse().map_err(D::Error::custom)?;
        let canonical = q.tableaux.iter().all(|t| t.columns().all(|(a, b)| a < b));
        if sign != 1 || !canonical {
            return Err(D::Error::custom("tableau columns must have the smaller entry on top"));
        }
        Ok(q)
    }
}
