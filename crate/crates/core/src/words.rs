//! Letters and words of a free group: free reduction, cyclic reduction,
//! rotations and inverses.
//!
//! Words are immutable values; every operation returns a new word, so all of
//! this is safe to use from any number of threads.
//!
//! Two textual forms exist.  The alphabetic form writes generator `i` as the
//! `i`-th lowercase letter and its inverse as the uppercase letter (`a`/`A`,
//! ..., `z`/`Z`), which caps the *textual* form at 26 generators.  The numeric
//! form writes `g3` / `G3` and has no cap.  A string containing a digit is
//! parsed numerically, otherwise alphabetically; rendering picks alphabetic
//! whenever every generator index fits.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::num::NonZeroI32;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("word is not freely reduced")]
    NotReduced,
    #[error("word is empty")]
    Empty,
    #[error("generator index must be at least 1")]
    ZeroGeneratorIndex,
    #[error("generator index {0} exceeds i32 range")]
    GeneratorIndexTooLarge(u64),
    #[error("invalid word syntax at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// A single generator or inverse generator.
///
/// Encoded as a nonzero `i32`: `+i` is generator `i`, `-i` its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(NonZeroI32);

impl Letter {
    pub fn new(generator_index: u32, inverse: bool) -> Result<Letter, WordError> {
        if generator_index == 0 {
            return Err(WordError::ZeroGeneratorIndex);
        }
        let idx = i32::try_from(generator_index)
            .map_err(|_| WordError::GeneratorIndexTooLarge(generator_index as u64))?;
        let code = if inverse { -idx } else { idx };
        Ok(Letter(NonZeroI32::new(code).expect("nonzero by construction")))
    }

    /// 1-based generator index.
    pub fn generator_index(&self) -> u32 {
        self.0.get().unsigned_abs()
    }

    pub fn is_inverse(&self) -> bool {
        self.0.get() < 0
    }

    pub fn inverse(&self) -> Letter {
        Letter(NonZeroI32::new(-self.0.get()).expect("negation of nonzero is nonzero"))
    }

    /// Dense code in `0..2m`: generator `i` maps to `2(i-1)`, its inverse to
    /// `2(i-1)+1`.  This is also the canonical letter order (`a < A < b < B`).
    pub(crate) fn alphabet_code(&self) -> u32 {
        2 * (self.generator_index() - 1) + u32::from(self.is_inverse())
    }

    pub(crate) fn from_alphabet_code(code: u32) -> Letter {
        Letter::new(code / 2 + 1, code % 2 == 1).expect("code yields index >= 1")
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.alphabet_code().cmp(&other.alphabet_code())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = self.generator_index();
        if idx <= 26 {
            let base = if self.is_inverse() { b'A' } else { b'a' };
            write!(f, "{}", (base + (idx - 1) as u8) as char)
        } else {
            write!(f, "{}{}", if self.is_inverse() { 'G' } else { 'g' }, idx)
        }
    }
}

// Debug through Display: words read better in test failures.
impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite word over the generators and their inverses.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Length in letters.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, 0 for the empty word.
    pub fn max_generator_index(&self) -> u32 {
        self.0.iter().map(|l| l.generator_index()).max().unwrap_or(0)
    }

    /// No adjacent mutually-inverse pair.  The empty word is reduced.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    /// Reduced, and additionally the first letter is not the inverse of the
    /// last.  The empty word is cyclically reduced.
    pub fn is_cyclically_reduced(&self) -> bool {
        if !self.is_reduced() {
            return false;
        }
        match (self.0.first(), self.0.last()) {
            (Some(first), Some(last)) => *first != last.inverse(),
            _ => true,
        }
    }

    /// The unique freely reduced form.  Idempotent.
    pub fn reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &letter in &self.0 {
            if stack.last() == Some(&letter.inverse()) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Word(stack)
    }

    /// Strips matching first/last inverse pairs until cyclically reduced.
    /// The result is conjugate to the input in the free group.
    ///
    /// Errors if the input is not freely reduced.
    pub fn cyclic_reduce(&self) -> Result<Word, WordError> {
        if !self.is_reduced() {
            return Err(WordError::NotReduced);
        }
        let mut lo = 0;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo] == self.0[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Ok(Word(self.0[lo..hi].to_vec()))
    }

    /// All `|w|` rotations tagged with their shift.  Rotations of a cyclically
    /// reduced word are reduced.
    ///
    /// Errors if the word is empty or not cyclically reduced.
    pub fn cyclic_conjugates(&self) -> Result<Vec<(usize, Word)>, WordError> {
        if self.is_empty() {
            return Err(WordError::Empty);
        }
        if !self.is_cyclically_reduced() {
            return Err(WordError::NotReduced);
        }
        Ok((0..self.len()).map(|s| (s, self.rotated(s))).collect())
    }

    /// Rotation moving position `shift` to the front (`shift` taken mod `|w|`).
    pub fn rotated(&self, shift: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let s = shift % self.len();
        let mut letters = Vec::with_capacity(self.len());
        letters.extend_from_slice(&self.0[s..]);
        letters.extend_from_slice(&self.0[..s]);
        Word(letters)
    }

    /// Reversed sequence with flipped signs; an involution.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(Letter::inverse).collect())
    }

    /// Plain concatenation, no reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex: shorter words first, ties broken letter by letter in the
/// canonical order `a < A < b < B < ...`.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.max_generator_index() <= 26 {
            for letter in &self.0 {
                write!(f, "{letter}")?;
            }
        } else {
            for letter in &self.0 {
                write!(
                    f,
                    "{}{}",
                    if letter.is_inverse() { 'G' } else { 'g' },
                    letter.generator_index()
                )?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Word, WordError> {
        if s.bytes().any(|b| b.is_ascii_digit()) {
            parse_numeric(s)
        } else {
            parse_alphabetic(s)
        }
    }
}

fn parse_alphabetic(s: &str) -> Result<Word, WordError> {
    let mut letters = Vec::with_capacity(s.len());
    for (pos, b) in s.bytes().enumerate() {
        let letter = match b {
            b'a'..=b'z' => Letter::new((b - b'a') as u32 + 1, false),
            b'A'..=b'Z' => Letter::new((b - b'A') as u32 + 1, true),
            _ => {
                return Err(WordError::Syntax {
                    pos,
                    msg: format!("expected a letter, found {:?}", b as char),
                })
            }
        }?;
        letters.push(letter);
    }
    Ok(Word(letters))
}

fn parse_numeric(s: &str) -> Result<Word, WordError> {
    let bytes = s.as_bytes();
    let mut letters = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let inverse = match bytes[i] {
            b'g' => false,
            b'G' => true,
            other => {
                return Err(WordError::Syntax {
                    pos: i,
                    msg: format!("expected 'g' or 'G', found {:?}", other as char),
                })
            }
        };
        let start = i + 1;
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == start {
            return Err(WordError::Syntax {
                pos: start,
                msg: "expected a generator number".into(),
            });
        }
        let idx: u32 = s[start..end].parse().map_err(|_| WordError::Syntax {
            pos: start,
            msg: "generator number out of range".into(),
        })?;
        if idx == 0 {
            return Err(WordError::Syntax {
                pos: start,
                msg: "generator number must be at least 1".into(),
            });
        }
        letters.push(Letter::new(idx, inverse)?);
        i = end;
    }
    Ok(Word(letters))
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Word, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Shorthand used throughout the tests; panics on syntax errors.
#[cfg(test)]
pub(crate) fn word(s: &str) -> Word {
    s.parse().expect("test word literal")
}
