//! Label transformation: every bit of the binary label is doubled and the
//! suffix `01` appended, so two distinct labels never yield prefix-related
//! bit strings.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("labels must be distinct (both transform to {0})")]
    Duplicate(String),
}

/// Transformed label, bits stored most significant first. Bit indices in the
/// public API are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransformedLabel {
    bits: Vec<bool>,
}

impl TransformedLabel {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The first `n` bits with zero padding, used as memoization key.
    pub fn padded_prefix(&self, n: usize) -> Vec<bool> {
        (1..=n).map(|i| self.bit_at(i as u64)).collect()
    }

    /// `i`-th bit (1-based); bits past the end read as 0.
    pub fn bit_at(&self, i: u64) -> bool {
        assert!(i >= 1, "bit indices are 1-based");
        usize::try_from(i - 1)
            .ok()
            .and_then(|idx| self.bits.get(idx).copied())
            .unwrap_or(false)
    }
}

impl fmt::Display for TransformedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Binary digits of `label`, most significant first; `0` is the single bit 0.
pub fn binary_digits(label: u64) -> Vec<bool> {
    if label == 0 {
        return vec![false];
    }
    let width = 64 - label.leading_zeros();
    (0..width).rev().map(|k| (label >> k) & 1 == 1).collect()
}

pub fn transform(label: u64) -> TransformedLabel {
    let digits = binary_digits(label);
    let mut bits = Vec::with_capacity(2 * digits.len() + 2);
    for b in digits {
        bits.push(b);
        bits.push(b);
    }
    bits.push(false);
    bits.push(true);
    TransformedLabel { bits }
}

pub fn bit_at(t: &TransformedLabel, i: u64) -> bool {
    t.bit_at(i)
}

/// Smallest 1-based index at which the (zero padded) transformed labels differ.
pub fn first_diff_index(a: &TransformedLabel, b: &TransformedLabel) -> Result<u64, LabelError> {
    if a == b {
        return Err(LabelError::Duplicate(a.to_string()));
    }
    let span = a.len().max(b.len()) as u64;
    (1..=span)
        .find(|&j| a.bit_at(j) != b.bit_at(j))
        .ok_or_else(|| LabelError::Duplicate(a.to_string()))
}

/// `l'` for a pair of raw labels.
pub fn first_diff_for_labels(a: u64, b: u64) -> Result<u64, LabelError> {
    first_diff_index(&transform(a), &transform(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    /// Brute-force oracle over explicit strings.
    fn diff_oracle(a: &str, b: &str) -> u64 {
        let n = a.len().max(b.len());
        let pa: Vec<char> = a.chars().chain(std::iter::repeat('0')).take(n).collect();
        let pb: Vec<char> = b.chars().chain(std::iter::repeat('0')).take(n).collect();
        (0..n).find(|&i| pa[i] != pb[i]).unwrap() as u64 + 1
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform(0).bits(), bits("0001"));
        assert_eq!(transform(1).bits(), bits("1101"));
        assert_eq!(transform(2).bits(), bits("110001"));
        assert_eq!(transform(5).to_string(), "11001101");
    }

    #[test]
    fn bit_access_with_padding() {
        let t = transform(1);
        assert!(t.bit_at(1));
        assert!(t.bit_at(4));
        assert!(!t.bit_at(9));
    }

    #[test]
    fn first_diff_examples() {
        assert_eq!(first_diff_index(&transform(0), &transform(1)), Ok(1));
        assert_eq!(first_diff_index(&transform(1), &transform(3)), Ok(3));
        // 110001 against 11001101: the first four bits agree.
        assert_eq!(first_diff_index(&transform(2), &transform(5)), Ok(5));
        assert_eq!(diff_oracle("110001", "11001101"), 5);
        assert_eq!(first_diff_index(&transform(1), &transform(2)), Ok(4));
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            first_diff_index(&transform(7), &transform(7)),
            Err(LabelError::Duplicate(_))
        ));
    }

    #[test]
    fn never_prefixes_and_bounded_diff() {
        for a in 0..=1000u64 {
            let ta = transform(a);
            for b in (a + 1)..=1000u64 {
                let tb = transform(b);
                let (short, long) = if ta.len() <= tb.len() { (&ta, &tb) } else { (&tb, &ta) };
                assert_ne!(&long.bits()[..short.len()], short.bits(), "{a} vs {b}");
                let j = first_diff_index(&ta, &tb).unwrap();
                let l = binary_digits(a).len().min(binary_digits(b).len()) as u64;
                assert!(j <= 2 * l + 2, "{a} vs {b}: j = {j}, l = {l}");
                assert_eq!(j, diff_oracle(&ta.to_string(), &tb.to_string()));
            }
        }
    }

    #[test]
    fn transform_is_injective() {
        let mut seen = HashSet::new();
        for label in 0..=1_000_000u64 {
            assert!(seen.insert(transform(label).bits));
        }
    }
}
