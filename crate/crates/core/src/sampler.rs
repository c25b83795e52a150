//! Exact-uniform samplers for cyclically reduced words and for presentations
//! in the few-relator and density models.
//!
//! Uniformity is exact, not approximate: letters are drawn sequentially with
//! integer weights equal to the number of valid completions, taken from the
//! endpoint-count tables.  All draws go through the rejection samplers in
//! [`crate::rng`], so a `(config, seed)` pair is reproducible bit for bit.
//!
//! Conventions recorded here because the model definitions leave them open
//! (they are also echoed in experiment metadata):
//! - the density model draws `floor((2m-1)^{dl})` relators, with a minimum
//!   of 1;
//! - sampling is with replacement — duplicate relators are allowed;
//! - the few-relator model draws lengths from 1 to `l` inclusive, weighted
//!   by the exact count of words at each length.

use crate::counting::{CountError, EndpointTable};
use crate::rng::{derive_subseed, stream, uniform_biguint_below, uniform_u64_below};
use crate::words::{Letter, Word, WordError};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest relator count a density configuration may request; beyond this a
/// configuration is not a desk-scale experiment and is rejected.
pub const MAX_DENSITY_RELATORS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "density relator count {count:.0} exceeds the desk-scale cap of {cap} \
         (m={m}, d={d}, l={l})"
    )]
    RelatorCountCap {
        m: u32,
        d: f64,
        l: u64,
        count: f64,
        cap: u64,
    },
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("generator count must be at least 1")]
    NoGenerators,
    #[error("relator {index} is empty")]
    EmptyRelator { index: usize },
    #[error("relator {index} ({word}) is not cyclically reduced")]
    NotCyclicallyReduced { index: usize, word: String },
    #[error("relator {index} ({word}) uses generator {found}, but the presentation has {m}")]
    GeneratorOutOfRange {
        index: usize,
        word: String,
        found: u32,
        m: u32,
    },
}

/// Few-relator model configuration: `n` relators drawn uniformly and
/// independently from all cyclically reduced words of length at most `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewRelatorConfig {
    pub m: u32,
    pub n: u32,
    pub l: u64,
    pub seed: u64,
}

/// Density model configuration: `floor((2m-1)^{dl})` relators drawn uniformly
/// and independently from all cyclically reduced words of length exactly `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub m: u32,
    pub d: f64,
    pub l: u64,
    pub seed: u64,
}

/// A group presentation: `m` generators and a list of nonempty, cyclically
/// reduced relator words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Presentation {
    m: u32,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(m: u32, relators: Vec<Word>) -> Result<Presentation, PresentationError> {
        if m == 0 {
            return Err(PresentationError::NoGenerators);
        }
        for (index, r) in relators.iter().enumerate() {
            if r.is_empty() {
                return Err(PresentationError::EmptyRelator { index });
            }
            if !r.is_cyclically_reduced() {
                return Err(PresentationError::NotCyclicallyReduced {
                    index,
                    word: r.to_string(),
                });
            }
            let max = r.max_generator_index();
            if max > m {
                return Err(PresentationError::GeneratorOutOfRange {
                    index,
                    word: r.to_string(),
                    found: max,
                    m,
                });
            }
        }
        Ok(Presentation { m, relators })
    }

    /// Parses relators from their textual form; convenient for fixed
    /// presentations in tests and docs.
    pub fn from_strs(m: u32, relators: &[&str]) -> Result<Presentation, WordError> {
        let words = relators
            .iter()
            .map(|s| s.parse::<Word>())
            .collect::<Result<Vec<_>, _>>()?;
        Presentation::new(m, words).map_err(|e| WordError::Syntax {
            pos: 0,
            msg: e.to_string(),
        })
    }

    pub fn generator_count(&self) -> u32 {
        self.m
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn max_relator_len(&self) -> Option<u64> {
        self.relators.iter().map(|r| r.len() as u64).max()
    }

    pub fn min_relator_len(&self) -> Option<u64> {
        self.relators.iter().map(|r| r.len() as u64).min()
    }

    pub fn total_relator_len(&self) -> u64 {
        self.relators.iter().map(|r| r.len() as u64).sum()
    }
}

/// Draws one cyclically reduced word of length exactly `l`, uniformly among
/// all `N_l` of them.
///
/// The first letter is uniform over the `2m` letters (each extends to the
/// same number `p_{l-1}` of cyclically reduced words).  Each later letter is
/// drawn with weight equal to the exact number of completions that respect
/// both the no-adjacent-inverse rule and the final-letter constraint.
pub fn sample_cyclically_reduced(
    m: u32,
    l: u64,
    rng: &mut impl RngCore,
) -> Result<Word, SampleError> {
    if m < 2 {
        return Err(SampleError::InvalidConfig(format!(
            "generator count must be at least 2, got {m}"
        )));
    }
    if l < 1 {
        return Err(SampleError::InvalidConfig(format!(
            "relator length must be at least 1, got {l}"
        )));
    }
    let table = EndpointTable::new(m, l.saturating_sub(2))?;
    sample_with_table(&table, l, rng)
}

fn sample_with_table(
    table: &EndpointTable,
    l: u64,
    rng: &mut impl RngCore,
) -> Result<Word, SampleError> {
    let m = table.m;
    let alphabet: Vec<Letter> = (0..2 * m).map(Letter::from_alphabet_code).collect();
    let first = alphabet[uniform_u64_below(rng, 2 * m as u64) as usize];
    let mut letters = vec![first];
    if l == 1 {
        return Ok(Word::from_letters(letters));
    }
    let forbidden_last = first.inverse();
    for i in 2..=l {
        let prev = *letters.last().expect("nonempty");
        let blocked = prev.inverse();
        let k = (l - i) as usize; // letters remaining after this position
        let mut weights: Vec<(Letter, BigUint)> = Vec::with_capacity(2 * m as usize - 1);
        let mut total = BigUint::zero();
        for &c in &alphabet {
            if c == blocked {
                continue;
            }
            let w = if k == 0 {
                if c == forbidden_last {
                    continue;
                }
                BigUint::from(1u32)
            } else {
                // completions of length k with final letter != first^{-1}:
                // (2m-1)^k minus the count of chains from c to first^{-1}
                let excluded = if c == forbidden_last {
                    &table.p[k - 1]
                } else if c == first {
                    &table.q[k - 1]
                } else {
                    &table.r[k - 1]
                };
                &table.pow[k] - excluded
            };
            if w.is_zero() {
                continue;
            }
            total += &w;
            weights.push((c, w));
        }
        debug_assert!(!total.is_zero(), "prefix chosen with positive weight");
        let mut draw = uniform_biguint_below(rng, &total);
        let mut chosen = None;
        for (c, w) in &weights {
            if draw < *w {
                chosen = Some(*c);
                break;
            }
            draw -= w;
        }
        letters.push(chosen.expect("draw below total selects a candidate"));
    }
    let word = Word::from_letters(letters);
    debug_assert!(word.is_cyclically_reduced());
    Ok(word)
}

/// Samples a few-relator presentation.  Relator `j` uses the ChaCha8 stream
/// seeded by `derive_subseed(cfg.seed, &[j])`; for each relator one draw
/// picks its length `k` with probability `N_k / N_{<=l}`, and the letter
/// draws follow on the same stream.
pub fn sample_few_relator(cfg: &FewRelatorConfig) -> Result<Presentation, SampleError> {
    if cfg.m < 2 || cfg.n < 1 || cfg.l < 1 {
        return Err(SampleError::InvalidConfig(format!(
            "need m >= 2, n >= 1, l >= 1, got m={}, n={}, l={}",
            cfg.m, cfg.n, cfg.l
        )));
    }
    let table = EndpointTable::new(cfg.m, cfg.l - 1)?;
    let twom = BigUint::from(2 * cfg.m);
    // cumulative N_k for the length draw
    let counts: Vec<BigUint> = (1..=cfg.l)
        .map(|k| &twom * &table.p[(k - 1) as usize])
        .collect();
    let total: BigUint = counts.iter().sum();
    let mut relators = Vec::with_capacity(cfg.n as usize);
    for j in 0..cfg.n {
        let mut rng = stream(derive_subseed(cfg.seed, &[j as u64]));
        let mut draw = uniform_biguint_below(&mut rng, &total);
        let mut length = cfg.l;
        for (idx, c) in counts.iter().enumerate() {
            if draw < *c {
                length = idx as u64 + 1;
                break;
            }
            draw -= c;
        }
        relators.push(sample_with_table(&table, length, &mut rng)?);
    }
    Ok(Presentation {
        m: cfg.m,
        relators,
    })
}

/// `floor((2m-1)^{dl})`, with a minimum of 1.
///
/// Evaluated in log space.  A value within relative 1e-12 of an integer is
/// treated as that integer before flooring, so exact powers (`3^5 = 243`)
/// are not lost to floating-point rounding.  Counts beyond
/// [`MAX_DENSITY_RELATORS`] signal an infeasible desk-scale configuration.
pub fn density_relator_count(m: u32, d: f64, l: u64) -> Result<u64, SampleError> {
    if m < 2 || !(d > 0.0 && d < 1.0) || l < 1 {
        return Err(SampleError::InvalidConfig(format!(
            "need m >= 2, 0 < d < 1, l >= 1, got m={m}, d={d}, l={l}"
        )));
    }
    let log_count = d * l as f64 * (2.0 * m as f64 - 1.0).ln();
    if log_count > ((MAX_DENSITY_RELATORS + 1) as f64).ln() + 1.0 {
        return Err(SampleError::RelatorCountCap {
            m,
            d,
            l,
            count: f64::INFINITY,
            cap: MAX_DENSITY_RELATORS,
        });
    }
    let x = log_count.exp();
    let rounded = x.round();
    let count = if (x - rounded).abs() <= x * 1e-12 {
        rounded
    } else {
        x.floor()
    };
    let count = count.max(1.0);
    if count > MAX_DENSITY_RELATORS as f64 {
        return Err(SampleError::RelatorCountCap {
            m,
            d,
            l,
            count,
            cap: MAX_DENSITY_RELATORS,
        });
    }
    Ok(count as u64)
}

/// Samples a density-model presentation: `density_relator_count` relators,
/// independent and uniform over cyclically reduced words of length exactly
/// `l`, duplicates permitted.  Relator `j` uses the stream seeded by
/// `derive_subseed(cfg.seed, &[j])`.
pub fn sample_density(cfg: &DensityConfig) -> Result<Presentation, SampleError> {
    let count = density_relator_count(cfg.m, cfg.d, cfg.l)?;
    let table = EndpointTable::new(cfg.m, cfg.l.saturating_sub(2))?;
    let mut relators = Vec::with_capacity(count as usize);
    for j in 0..count {
        let mut rng = stream(derive_subseed(cfg.seed, &[j]));
        relators.push(sample_with_table(&table, cfg.l, &mut rng)?);
    }
    Ok(Presentation {
        m: cfg.m,
        relators,
    })
}
