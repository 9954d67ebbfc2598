use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A permutation of the tensor factors `{0, .., n-1}`; `images[k]` is the image of `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FactorPermutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for FactorPermutation {
    type Error = crate::error::Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        FactorPermutation::new(images)
    }
}

impl From<FactorPermutation> for Vec<usize> {
    fn from(p: FactorPermutation) -> Vec<usize> {
        p.images
    }
}

impl FactorPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(invalid(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(FactorPermutation { images })
    }

    pub fn identity(n: usize) -> Self {
        FactorPermutation {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`, i.e. `k ↦ self(other(k))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        FactorPermutation {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (k, &img) in self.images.iter().enumerate() {
            inv[img] = k;
        }
        FactorPermutation { images: inv }
    }

    /// Cycle decomposition, including fixed points, each cycle starting at its least element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cycle.push(k);
                k = self.images[k];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn sign(&self) -> i32 {
        let even = self.cycles().iter().filter(|c| c.len() % 2 == 0).count();
        if even % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All permutations of `n` points in lexicographic order of their image lists.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(FactorPermutation {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s5_basics() {
        let all = FactorPermutation::all(5);
        assert_eq!(all.len(), 120);
        assert_eq!(all.iter().filter(|p| p.sign() == 1).count(), 60);
        let s = FactorPermutation::new(vec![1, 2, 0, 4, 3]).unwrap();
        assert_eq!(s.cycle_type(), vec![3, 2]);
        assert_eq!(s.sign(), -1);
        assert_eq!(s.compose(&s.inverse()), FactorPermutation::identity(5));
        assert!(FactorPermutation::new(vec![0, 0, 1]).is_err());
    }
}
