//! Piece computation, the optimal small-cancellation ratio, C'(lambda)
//! verdicts, and the Dehn-algorithm word problem.
//!
//! A *piece* is a common initial segment of two distinct cyclic conjugates
//! drawn from the relators and their inverses.  Distinctness is by index
//! `(relator, sign, shift)`, not by word value: equal words arising at
//! different indices still form a piece, so a proper power like `aaaa` has
//! the whole relator as a piece and gets `lambda_star = 1`.  The lenient
//! word-based alternative would certify C'(lambda) for presentations where
//! the diagram lemmas downstream of it fail.
//!
//! `lambda_star` is the largest ratio (piece length)/(relator length) over
//! all occurrences, kept as an exact rational so that the strict-inequality
//! C'(lambda) verdicts never hinge on floating point.

use crate::sampler::Presentation;
use crate::suffix::{lcp_array, suffix_array};
use crate::words::Word;
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CancellationError {
    #[error("presentation has no relators")]
    EmptyPresentation,
    #[error("lambda must lie in (0, 1], got {0}")]
    LambdaOutOfRange(Rational64),
    #[error("presentation is not C'(1/6): lambda_star = {lambda_star}")]
    NotCPrimeSixth { lambda_star: Rational64 },
}

/// Identifies one cyclic conjugate: `sign = 1` for the relator itself,
/// `sign = -1` for its inverse, rotated left by `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConjugateIndex {
    pub relator_index: usize,
    pub sign: i8,
    pub shift: usize,
}

/// The pair of distinct conjugates sharing the maximal piece as an initial
/// segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceWitness {
    pub piece: Word,
    pub first: ConjugateIndex,
    pub second: ConjugateIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceReport {
    /// Maximal piece length occurring in each relator, indexed like the
    /// relator list.
    pub max_piece_length_per_relator: Vec<usize>,
    /// max over relators of (max piece in that relator) / |relator|.
    #[serde(with = "crate::ratio_json")]
    pub lambda_star: Rational64,
    /// A pair realizing `lambda_star`; `None` exactly when there are no
    /// pieces at all.
    pub witness: Option<PieceWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallCancellationVerdict {
    #[serde(with = "crate::ratio_json")]
    pub lambda: Rational64,
    pub holds: bool,
}

/// The conjugate word for an index.
fn conjugate_word(p: &Presentation, idx: ConjugateIndex) -> Word {
    let r = &p.relators()[idx.relator_index];
    let base = if idx.sign >= 0 { r.clone() } else { r.inverse() };
    base.rotated(idx.shift)
}

/// Exact maximal piece lengths and `lambda_star`, via a generalized suffix
/// array over the doubled relator words.
///
/// Layout: every relator contributes two strings, `r r` and `r^{-1} r^{-1}`,
/// each closed by a unique separator symbol.  Positions in the first copy of
/// each doubled word are exactly the conjugate starts, and the common prefix
/// of two conjugates is the suffix-suffix match capped by both relator
/// lengths.  Caps are handled exactly by sweeping the suffix array once per
/// distinct relator length: for candidates of length >= L the capped match
/// `min(lce, L)` is maximized at the nearest such candidate in suffix-array
/// order, so a running range-minimum in each direction suffices.
pub fn piece_report(p: &Presentation) -> Result<PieceReport, CancellationError> {
    if p.relators().is_empty() {
        return Err(CancellationError::EmptyPresentation);
    }
    let relators = p.relators();
    let n_strings = 2 * relators.len();

    let mut text: Vec<u32> = Vec::new();
    // conjugate-start metadata, aligned with text positions
    let mut cap_at: Vec<u32> = Vec::new();
    let mut rel_at: Vec<u32> = Vec::new();
    // string start offsets, for recovering (relator, sign, shift) later
    let mut string_offsets: Vec<(usize, usize, i8)> = Vec::new(); // (offset, relator, sign)

    let mut sep = 0u32;
    for (ri, r) in relators.iter().enumerate() {
        for sign in [1i8, -1] {
            let w = if sign == 1 { r.clone() } else { r.inverse() };
            string_offsets.push((text.len(), ri, sign));
            let len = w.len();
            for copy in 0..2 {
                for (j, letter) in w.letters().iter().enumerate() {
                    text.push(letter.alphabet_code() + n_strings as u32);
                    let is_start = copy == 0;
                    cap_at.push(if is_start { len as u32 } else { 0 });
                    rel_at.push(if is_start { ri as u32 } else { u32::MAX });
                    let _ = j;
                }
            }
            text.push(sep);
            cap_at.push(0);
            rel_at.push(u32::MAX);
            sep += 1;
        }
    }

    let sa = suffix_array(&text);
    let lcp = lcp_array(&text, &sa);
    let n = text.len();

    // best capped match and its partner position, per conjugate start
    let mut best: Vec<u32> = vec![0; n];
    let mut partner: Vec<u32> = vec![u32::MAX; n];

    let mut thresholds: Vec<u32> = relators.iter().map(|r| r.len() as u32).collect();
    thresholds.sort_unstable();
    thresholds.dedup();
    thresholds.reverse();

    for &threshold in &thresholds {
        // forward then backward: nearest set member on each side
        sweep(
            &sa,
            &lcp,
            &cap_at,
            threshold,
            &mut best,
            &mut partner,
            false,
        );
        sweep(&sa, &lcp, &cap_at, threshold, &mut best, &mut partner, true);
    }

    let mut max_piece = vec![0usize; relators.len()];
    let mut best_pos: Vec<Option<usize>> = vec![None; relators.len()];
    for pos in 0..n {
        let cap = cap_at[pos];
        if cap == 0 {
            continue;
        }
        let piece = best[pos].min(cap) as usize;
        let ri = rel_at[pos] as usize;
        if piece > max_piece[ri] {
            max_piece[ri] = piece;
            best_pos[ri] = Some(pos);
        }
    }

    let mut lambda_star = Rational64::zero();
    let mut argmax: Option<usize> = None;
    for (ri, r) in relators.iter().enumerate() {
        let ratio = Rational64::new(max_piece[ri] as i64, r.len() as i64);
        if ratio > lambda_star {
            lambda_star = ratio;
            argmax = Some(ri);
        }
    }

    let witness = argmax.map(|ri| {
        let pos = best_pos[ri].expect("relator with positive piece has a witness position");
        let first = index_of_position(&string_offsets, relators, pos);
        let second = index_of_position(&string_offsets, relators, partner[pos] as usize);
        let piece_len = max_piece[ri];
        let full = conjugate_word(p, first);
        let piece = Word::from_letters(full.letters()[..piece_len].to_vec());
        debug_assert!(first != second);
        debug_assert_eq!(
            piece.letters(),
            &conjugate_word(p, second).letters()[..piece_len]
        );
        PieceWitness {
            piece,
            first,
            second,
        }
    });

    Ok(PieceReport {
        max_piece_length_per_relator: max_piece,
        lambda_star,
        witness,
    })
}

/// One direction of the capped-match sweep.  Walks the suffix array keeping
/// the running minimum LCP since the last set member (`cap >= threshold`);
/// every conjugate start receives `min(running, threshold)` as a candidate.
fn sweep(
    sa: &[u32],
    lcp: &[u32],
    cap_at: &[u32],
    threshold: u32,
    best: &mut [u32],
    partner: &mut [u32],
    backward: bool,
) {
    let n = sa.len();
    let mut running: u32 = 0;
    let mut anchor: Option<u32> = None;
    for step in 0..n {
        let w = if backward { n - 1 - step } else { step };
        // lcp[w] joins entry w-1 and w; entering entry w forward crosses
        // lcp[w], entering backward from w+1 crosses lcp[w+1]
        if step > 0 {
            let join = if backward { lcp[w + 1] } else { lcp[w] };
            running = running.min(join);
        }
        let pos = sa[w] as usize;
        if cap_at[pos] > 0 {
            if let Some(a) = anchor {
                let candidate = running.min(threshold);
                if candidate > best[pos] {
                    best[pos] = candidate;
                    partner[pos] = a;
                }
            }
        }
        if cap_at[pos] >= threshold {
            anchor = Some(pos as u32);
            running = u32::MAX;
        }
    }
}

/// Recovers the conjugate index of a text position.
fn index_of_position(
    string_offsets: &[(usize, usize, i8)],
    relators: &[Word],
    pos: usize,
) -> ConjugateIndex {
    let i = match string_offsets.binary_search_by_key(&pos, |&(off, _, _)| off) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    let (off, relator_index, sign) = string_offsets[i];
    let shift = pos - off;
    debug_assert!(shift < relators[relator_index].len());
    ConjugateIndex {
        relator_index,
        sign,
        shift,
    }
}

/// Strict per-relator check: C'(lambda) holds iff every piece in relator `r`
/// has length < lambda |r|, which is exactly `lambda_star < lambda`.
pub fn is_c_prime(
    p: &Presentation,
    lambda: Rational64,
) -> Result<SmallCancellationVerdict, CancellationError> {
    if lambda <= Rational64::zero() || lambda > Rational64::new(1, 1) {
        return Err(CancellationError::LambdaOutOfRange(lambda));
    }
    let report = piece_report(p)?;
    Ok(SmallCancellationVerdict {
        lambda,
        holds: report.lambda_star < lambda,
    })
}

const ONE_SIXTH: (i64, i64) = (1, 6);

/// Dehn-algorithm context for a fixed C'(1/6) presentation: all cyclic
/// conjugates of the relators and their inverses, checked once at
/// construction.
pub struct Dehn {
    /// (conjugate word, relator length), in `(relator, sign, shift)` order.
    conjugates: Vec<(Word, usize)>,
}

impl Dehn {
    pub fn new(p: &Presentation) -> Result<Dehn, CancellationError> {
        let report = piece_report(p)?;
        if report.lambda_star >= Rational64::new(ONE_SIXTH.0, ONE_SIXTH.1) {
            return Err(CancellationError::NotCPrimeSixth {
                lambda_star: report.lambda_star,
            });
        }
        let mut conjugates = Vec::new();
        for r in p.relators() {
            for base in [r.clone(), r.inverse()] {
                for shift in 0..base.len() {
                    conjugates.push((base.rotated(shift), r.len()));
                }
            }
        }
        Ok(Dehn { conjugates })
    }

    /// Repeatedly replaces a subword matching more than half of some
    /// conjugate by the inverse of the complementary part, then freely
    /// reduces.  Replacement policy: leftmost match first, longest match at
    /// that position, ties by lowest `(relator, sign, shift)`.  Each step
    /// strictly shortens the word, so this terminates.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut current = w.reduce();
        'rewrite: loop {
            let letters = current.letters();
            for j in 0..letters.len() {
                let mut hit: Option<(usize, usize)> = None; // (match length, conjugate id)
                for (ci, (conj, rel_len)) in self.conjugates.iter().enumerate() {
                    let t = common_prefix(&letters[j..], conj.letters());
                    if 2 * t > *rel_len && hit.map_or(true, |(bt, _)| t > bt) {
                        hit = Some((t, ci));
                    }
                }
                if let Some((t, ci)) = hit {
                    let (conj, _) = &self.conjugates[ci];
                    let complement = Word::from_letters(conj.letters()[t..].to_vec());
                    let mut next = Word::from_letters(letters[..j].to_vec());
                    next = next.concat(&complement.inverse());
                    next = next.concat(&Word::from_letters(letters[j + t..].to_vec()));
                    let next = next.reduce();
                    debug_assert!(next.len() < current.len());
                    current = next;
                    continue 'rewrite;
                }
            }
            return current;
        }
    }

    /// `w` represents the identity iff its Dehn reduction is empty.
    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).is_empty()
    }
}

fn common_prefix(a: &[crate::words::Letter], b: &[crate::words::Letter]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

/// One-shot Dehn reduction.  Requires C'(1/6).
pub fn dehn_reduce(w: &Word, p: &Presentation) -> Result<Word, CancellationError> {
    Ok(Dehn::new(p)?.reduce(w))
}

/// One-shot triviality test.  Requires C'(1/6).
pub fn is_trivial(w: &Word, p: &Presentation) -> Result<bool, CancellationError> {
    Ok(Dehn::new(p)?.is_trivial(w))
}

/// Quadratic reference implementation: pairwise longest-common-prefix over
/// all conjugate pairs.  Exposed for the test suites; `piece_report` must
/// match it exactly.
pub fn piece_report_oracle(p: &Presentation) -> Result<PieceReport, CancellationError> {
    if p.relators().is_empty() {
        return Err(CancellationError::EmptyPresentation);
    }
    let mut conjugates: Vec<(ConjugateIndex, Word)> = Vec::new();
    for (ri, r) in p.relators().iter().enumerate() {
        for sign in [1i8, -1] {
            let base = if sign == 1 { r.clone() } else { r.inverse() };
            for shift in 0..base.len() {
                let idx = ConjugateIndex {
                    relator_index: ri,
                    sign,
                    shift,
                };
                conjugates.push((idx, base.rotated(shift)));
            }
        }
    }
    let mut max_piece = vec![0usize; p.relators().len()];
    let mut best: Vec<Option<(ConjugateIndex, ConjugateIndex)>> = vec![None; max_piece.len()];
    for i in 0..conjugates.len() {
        for j in (i + 1)..conjugates.len() {
            let t = common_prefix(conjugates[i].1.letters(), conjugates[j].1.letters());
            for &(a, b) in &[(i, j), (j, i)] {
                let ri = conjugates[a].0.relator_index;
                if t > max_piece[ri] {
                    max_piece[ri] = t;
                    best[ri] = Some((conjugates[a].0, conjugates[b].0));
                }
            }
        }
    }
    let mut lambda_star = Rational64::zero();
    let mut argmax = None;
    for (ri, r) in p.relators().iter().enumerate() {
        let ratio = Rational64::new(max_piece[ri] as i64, r.len() as i64);
        if ratio > lambda_star {
            lambda_star = ratio;
            argmax = Some(ri);
        }
    }
    let witness = argmax.map(|ri| {
        let (first, second) = best[ri].expect("positive piece has witness");
        let full = conjugate_word(p, first);
        PieceWitness {
            piece: Word::from_letters(full.letters()[..max_piece[ri]].to_vec()),
            first,
            second,
        }
    });
    Ok(PieceReport {
        max_piece_length_per_relator: max_piece,
        lambda_star,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_few_relator, FewRelatorConfig};
    use crate::words::word;
    use proptest::prelude::*;

    fn genus2() -> Presentation {
        Presentation::from_strs(4, &["abABcdCD"]).unwrap()
    }

    #[test]
    fn commutator_presentation() {
        let p = Presentation::from_strs(2, &["abAB"]).unwrap();
        let report = piece_report(&p).unwrap();
        assert_eq!(report.max_piece_length_per_relator, vec![1]);
        assert_eq!(report.lambda_star, Rational64::new(1, 4));
        let w = report.witness.unwrap();
        assert_eq!(w.piece.len(), 1);
        assert_ne!(w.first, w.second);
    }

    #[test]
    fn genus2_presentation() {
        let report = piece_report(&genus2()).unwrap();
        assert_eq!(report.max_piece_length_per_relator, vec![1]);
        assert_eq!(report.lambda_star, Rational64::new(1, 8));
    }

    #[test]
    fn no_shared_prefix_means_no_pieces() {
        let p = Presentation::from_strs(2, &["ab"]).unwrap();
        let report = piece_report(&p).unwrap();
        assert_eq!(report.max_piece_length_per_relator, vec![0]);
        assert_eq!(report.lambda_star, Rational64::zero());
        assert!(report.witness.is_none());
    }

    #[test]
    fn proper_power_is_penalized() {
        let p = Presentation::from_strs(2, &["aaaa"]).unwrap();
        let report = piece_report(&p).unwrap();
        assert_eq!(report.max_piece_length_per_relator, vec![4]);
        assert_eq!(report.lambda_star, Rational64::new(1, 1));
        let w = report.witness.unwrap();
        assert_eq!(w.piece, word("aaaa"));
        assert_ne!(w.first, w.second);
    }

    #[test]
    fn duplicate_relators_share_everything() {
        let p = Presentation::from_strs(2, &["abab", "abab"]).unwrap();
        let report = piece_report(&p).unwrap();
        assert_eq!(report.lambda_star, Rational64::new(1, 1));
    }

    #[test]
    fn mixed_length_caps() {
        // "aaa" is a proper power (piece 3); the cap keeps the cross match
        // between the two relators at 3 even though the raw text match is 4.
        let p = Presentation::from_strs(2, &["aaa", "aaaab"]).unwrap();
        let fast = piece_report(&p).unwrap();
        let slow = piece_report_oracle(&p).unwrap();
        assert_eq!(fast.max_piece_length_per_relator, slow.max_piece_length_per_relator);
        assert_eq!(fast.lambda_star, slow.lambda_star);
        assert_eq!(fast.lambda_star, Rational64::new(1, 1));
        assert_eq!(fast.max_piece_length_per_relator, vec![3, 3]);
    }

    #[test]
    fn is_c_prime_examples() {
        let g2 = genus2();
        assert!(is_c_prime(&g2, Rational64::new(1, 6)).unwrap().holds);
        assert!(!is_c_prime(&g2, Rational64::new(1, 8)).unwrap().holds);
        let comm = Presentation::from_strs(2, &["abAB"]).unwrap();
        assert!(!is_c_prime(&comm, Rational64::new(1, 6)).unwrap().holds);
        assert!(matches!(
            is_c_prime(&g2, Rational64::new(0, 1)),
            Err(CancellationError::LambdaOutOfRange(_))
        ));
        assert!(matches!(
            is_c_prime(&g2, Rational64::new(2, 1)),
            Err(CancellationError::LambdaOutOfRange(_))
        ));
    }

    #[test]
    fn c_prime_monotone_in_lambda() {
        let g2 = genus2();
        let mut held = false;
        for lambda in [
            Rational64::new(1, 12),
            Rational64::new(1, 8),
            Rational64::new(1, 7),
            Rational64::new(1, 6),
            Rational64::new(1, 2),
        ] {
            let holds = is_c_prime(&g2, lambda).unwrap().holds;
            assert!(!held || holds, "verdicts must be monotone in lambda");
            held = holds;
        }
    }

    #[test]
    fn oracle_equivalence_on_random_presentations() {
        for seed in 0..100u64 {
            let cfg = FewRelatorConfig {
                m: 2,
                n: (seed % 3 + 1) as u32,
                l: 12,
                seed,
            };
            let p = sample_few_relator(&cfg).unwrap();
            let fast = piece_report(&p).unwrap();
            let slow = piece_report_oracle(&p).unwrap();
            assert_eq!(
                fast.max_piece_length_per_relator, slow.max_piece_length_per_relator,
                "seed {seed}"
            );
            assert_eq!(fast.lambda_star, slow.lambda_star, "seed {seed}");
        }
    }

    #[test]
    fn dehn_kills_relator_and_its_conjugates() {
        let g2 = genus2();
        let dehn = Dehn::new(&g2).unwrap();
        assert!(dehn.is_trivial(&word("abABcdCD")));
        assert!(dehn.is_trivial(&Word::empty()));
        assert!(dehn.is_trivial(&word("babABcdCDB")));
        assert!(dehn.is_trivial(&word("abABcdCDabABcdCD")));
        assert!(!dehn.is_trivial(&word("a")));
        assert_eq!(dehn.reduce(&word("a")), word("a"));
        // commutator presentation is not C'(1/6)
        let comm = Presentation::from_strs(2, &["abAB"]).unwrap();
        assert!(matches!(
            Dehn::new(&comm),
            Err(CancellationError::NotCPrimeSixth { .. })
        ));
    }

    #[test]
    fn dehn_result_has_no_long_subword() {
        let g2 = genus2();
        let dehn = Dehn::new(&g2).unwrap();
        let reduced = dehn.reduce(&word("abABcdC"));
        // 7 of 8 letters of the relator: one Dehn step shortens it to 1
        assert_eq!(reduced.len(), 1);
    }

    proptest! {
        /// lambda_star is invariant under rotating or inverting any relator.
        #[test]
        fn report_invariant_under_conjugation(seed in 0u64..40, rot in 0usize..8, invert in any::<bool>()) {
            let cfg = FewRelatorConfig { m: 2, n: 2, l: 8, seed };
            let p = sample_few_relator(&cfg).unwrap();
            let mut relators: Vec<Word> = p.relators().to_vec();
            let k = (seed as usize) % relators.len();
            let mut replaced = relators[k].rotated(rot % relators[k].len().max(1));
            if invert {
                replaced = replaced.inverse();
            }
            relators[k] = replaced;
            let q = Presentation::new(2, relators).unwrap();
            prop_assert_eq!(
                piece_report(&p).unwrap().lambda_star,
                piece_report(&q).unwrap().lambda_star
            );
        }
    }
}
