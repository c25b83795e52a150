//! Subword coverage: the largest `k` such that every reduced word of length
//! `k` appears in some cyclic conjugate of some relator or its inverse.
//!
//! Factors of the cyclic word `r` of length `k <= |r|` are exactly the
//! length-`k` windows of the doubled word `r r` truncated to `|r| + k - 1`
//! letters; factors longer than `|r|` do not occur in any conjugate of `r`.
//! Coverage is monotone downward (every length-`k` reduced word extends to a
//! reduced word of length `k+1`), so `m_star` is found by incrementing `k`
//! until the first failure, which happens no later than
//! `(2m-1)^k >` total relator length.

use crate::sampler::Presentation;
use crate::words::{Letter, Word};
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error("factor length must be at least 1, got {0}")]
    LengthZero(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    /// Largest `k` with full coverage; 0 if some single letter is missing.
    pub m_star: u64,
    /// A reduced word of length `m_star + 1` absent from all relators, when
    /// one of that length could occur at all (`m_star <` max relator length).
    pub missing_witness: Option<Word>,
    /// Distinct reduced length-`k` factors appearing, for each `k` checked.
    pub per_length_counts: BTreeMap<u64, u64>,
}

/// Set of length-`k` factors, packed into `u128` where possible (covers
/// every desk-scale configuration), with a vector fallback for very long
/// factors or enormous alphabets.
enum FactorSet {
    Packed(HashSet<u128>),
    General(HashSet<Vec<u32>>),
}

impl FactorSet {
    fn new(m: u32, k: usize) -> FactorSet {
        if k <= 16 && 2 * m <= 256 {
            FactorSet::Packed(HashSet::new())
        } else {
            FactorSet::General(HashSet::new())
        }
    }

    fn insert(&mut self, window: &[Letter]) {
        match self {
            FactorSet::Packed(set) => {
                set.insert(pack(window));
            }
            FactorSet::General(set) => {
                set.insert(window.iter().map(|l| l.alphabet_code()).collect());
            }
        }
    }

    fn contains(&self, window: &[Letter]) -> bool {
        match self {
            FactorSet::Packed(set) => set.contains(&pack(window)),
            FactorSet::General(set) => {
                let key: Vec<u32> = window.iter().map(|l| l.alphabet_code()).collect();
                set.contains(&key)
            }
        }
    }

    fn len(&self) -> u64 {
        match self {
            FactorSet::Packed(set) => set.len() as u64,
            FactorSet::General(set) => set.len() as u64,
        }
    }
}

fn pack(window: &[Letter]) -> u128 {
    let mut key: u128 = 1; // leading 1 keeps lengths distinct
    for letter in window {
        key = (key << 8) | letter.alphabet_code() as u128;
    }
    key
}

/// All distinct length-`k` factors over the cyclic conjugates of every
/// relator and its inverse.
fn distinct_factors(p: &Presentation, k: usize) -> FactorSet {
    let mut set = FactorSet::new(p.generator_count(), k);
    for r in p.relators() {
        if k > r.len() {
            continue;
        }
        for w in [r.clone(), r.inverse()] {
            let letters = w.letters();
            let mut doubled = Vec::with_capacity(letters.len() + k - 1);
            doubled.extend_from_slice(letters);
            doubled.extend_from_slice(&letters[..k - 1]);
            for window in doubled.windows(k) {
                set.insert(window);
            }
        }
    }
    set
}

/// Number of reduced words of length `k`: `2m (2m-1)^{k-1}`.
fn reduced_word_count(m: u32, k: u64) -> BigUint {
    BigUint::from(2 * m) * BigUint::from(2 * m - 1).pow((k - 1) as u32)
}

/// True iff every reduced word of length `k` appears in some cyclic
/// conjugate of some relator or inverse.
pub fn covers_all(p: &Presentation, k: u64) -> Result<bool, CoverageError> {
    if k < 1 {
        return Err(CoverageError::LengthZero(k));
    }
    let set = distinct_factors(p, k as usize);
    Ok(BigUint::from(set.len()) == reduced_word_count(p.generator_count(), k))
}

/// Enumerates reduced words of length `k` in shortlex order and returns the
/// first one missing from the set.
fn first_missing(m: u32, k: usize, set: &FactorSet) -> Option<Word> {
    let alphabet: Vec<Letter> = (0..2 * m).map(Letter::from_alphabet_code).collect();
    let mut stack: Vec<Letter> = Vec::with_capacity(k);
    fn go(
        alphabet: &[Letter],
        k: usize,
        stack: &mut Vec<Letter>,
        set: &FactorSet,
    ) -> Option<Word> {
        if stack.len() == k {
            if set.contains(stack) {
                return None;
            }
            return Some(Word::from_letters(stack.clone()));
        }
        for &c in alphabet {
            if stack.last() == Some(&c.inverse()) {
                continue;
            }
            stack.push(c);
            if let Some(found) = go(alphabet, k, stack, set) {
                return Some(found);
            }
            stack.pop();
        }
        None
    }
    go(&alphabet, k, &mut stack, set)
}

/// Computes the coverage report: `m_star`, a concrete missing witness one
/// length above it, and the distinct-factor counts per length checked.
pub fn m_star(p: &Presentation) -> CoverageReport {
    let m = p.generator_count();
    let max_len = p.max_relator_len().unwrap_or(0);
    let mut per_length_counts = BTreeMap::new();
    let mut k = 1u64;
    loop {
        let set = distinct_factors(p, k as usize);
        per_length_counts.insert(k, set.len());
        if BigUint::from(set.len()) != reduced_word_count(m, k) {
            let m_star = k - 1;
            let missing_witness = if m_star < max_len {
                let found = first_missing(m, k as usize, &set);
                debug_assert!(found.is_some(), "count mismatch implies a missing word");
                found
            } else {
                None
            };
            return CoverageReport {
                m_star,
                missing_witness,
                per_length_counts,
            };
        }
        k += 1;
    }
}

/// Pigeonhole sanity cap used by the test suites:
/// `m_star <= ceil(log_{2m-1}(total relator length)) + 1`.
pub fn m_star_pigeonhole_cap(p: &Presentation) -> u64 {
    let total = p.total_relator_len().max(1) as f64;
    let base = (2.0 * p.generator_count() as f64 - 1.0).ln();
    (total.ln() / base).ceil() as u64 + 1
}
