//! Binary selection vectors over an asset universe.

use crate::error::{Error, Result};

/// A binary selection vector of length N together with its support
/// (the sorted index set of ones).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    bits: Vec<bool>,
    support: Vec<usize>,
}

impl Selection {
    /// Build from a bit vector; the support is derived.
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let support = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Self { bits, support }
    }

    /// Build from a support index set over a universe of size `n`.
    pub fn from_support(n: usize, support: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in support {
            if i >= n {
                return Err(Error::Dimension(format!(
                    "support index {i} out of range for n={n}"
                )));
            }
            if bits[i] {
                return Err(Error::InvalidArgument(format!(
                    "duplicate support index {i}"
                )));
            }
            bits[i] = true;
        }
        Ok(Self::from_bits(bits))
    }

    /// All-zeros vector of length `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
            support: Vec::new(),
        }
    }

    /// All-ones vector of length `n`.
    pub fn ones(n: usize) -> Self {
        Self {
            bits: vec![true; n],
            support: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Hamming weight (= |support|).
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Sorted index set of ones.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Copy with bit `i` flipped.
    pub fn flipped(&self, i: usize) -> Result<Selection> {
        if i >= self.bits.len() {
            return Err(Error::Dimension(format!(
                "index {i} out of range for n={}",
                self.bits.len()
            )));
        }
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        Ok(Self::from_bits(bits))
    }

    /// Lexicographic order on supports, used for deterministic tie-breaking
    /// among equal-energy selections.
    pub fn support_lex_cmp(&self, other: &Selection) -> std::cmp::Ordering {
        self.support.cmp(&other.support)
    }
}
