//! Cayley-graph balls of C'(1/6) presentations, built by breadth-first
//! search with exact word-problem deduplication.
//!
//! Vertices are named by their shortlex-least geodesic representative; the
//! BFS expands parents in shortlex order and letters in alphabet order, so
//! the first word reaching a vertex is that representative.  Candidate
//! identifications are resolved with the Dehn algorithm
//! (`u = v  iff  u v^{-1}` Dehn-reduces to the empty word), prefiltered by
//! bucketing vertices on their abelianization modulo the lattice spanned by
//! the abelianized relators — group-equal words always share a bucket, so
//! the expensive check runs only within buckets.

use crate::cancellation::{CancellationError, Dehn};
use crate::sampler::Presentation;
use crate::words::{Letter, Word};
use std::collections::HashMap;
use thiserror::Error;

/// Feasibility guard: `(2m-1)^radius` may not exceed this.
pub const MAX_BALL_BRANCH: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallError {
    #[error(transparent)]
    Cancellation(#[from] CancellationError),
    #[error("infeasible ball: (2m-1)^radius = {branch} exceeds {max} (m={m}, radius={radius})")]
    Infeasible {
        m: u32,
        radius: u32,
        branch: u128,
        max: u128,
    },
}

/// The ball of a given radius around the identity, with exact word-metric
/// distances.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    m: u32,
    radius: u32,
    words: Vec<Word>,
    dist: Vec<u32>,
    /// successor vertex per letter code, when it lies inside the ball
    nav: Vec<Vec<Option<u32>>>,
    /// sizes of the distance spheres, `levels[d]` = number at distance d
    levels: Vec<u64>,
}

impl CayleyBall {
    pub fn vertex_count(&self) -> usize {
        self.words.len()
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn generator_count(&self) -> u32 {
        self.m
    }

    /// Canonical (shortlex-least geodesic) word of a vertex.
    pub fn word(&self, v: u32) -> &Word {
        &self.words[v as usize]
    }

    pub fn dist(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    pub fn sphere_sizes(&self) -> &[u64] {
        &self.levels
    }

    pub fn step(&self, v: u32, letter: Letter) -> Option<u32> {
        self.nav[v as usize][letter.alphabet_code() as usize]
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.nav[v as usize].iter().filter_map(|n| *n)
    }

    pub fn edge_count(&self) -> u64 {
        let degree_sum: u64 = self
            .nav
            .iter()
            .map(|row| row.iter().flatten().count() as u64)
            .sum();
        degree_sum / 2
    }

    /// Traces a word edge by edge from the identity; `None` once it exits
    /// the ball.
    pub fn vertex_of_word(&self, w: &Word) -> Option<u32> {
        let mut v = 0u32;
        for &letter in w.letters() {
            v = self.step(v, letter)?;
        }
        Some(v)
    }
}

/// Integer row-echelon form of the abelianized relators; reduces vectors to
/// canonical coset representatives modulo the relator lattice.
struct Lattice {
    /// echelon rows with (pivot column, row), pivots strictly increasing
    rows: Vec<(usize, Vec<i128>)>,
}

impl Lattice {
    fn new(p: &Presentation) -> Lattice {
        let m = p.generator_count() as usize;
        let mut work: Vec<Vec<i128>> = p
            .relators()
            .iter()
            .map(|r| {
                let mut v = vec![0i128; m];
                for letter in r.letters() {
                    let idx = (letter.generator_index() - 1) as usize;
                    v[idx] += if letter.is_inverse() { -1 } else { 1 };
                }
                v
            })
            .collect();
        let mut rows = Vec::new();
        for col in 0..m {
            loop {
                let mut nonzero: Vec<usize> = (0..work.len())
                    .filter(|&i| work[i][col] != 0)
                    .collect();
                if nonzero.is_empty() {
                    break;
                }
                if nonzero.len() == 1 {
                    let mut row = work.swap_remove(nonzero[0]);
                    if row[col] < 0 {
                        row.iter_mut().for_each(|x| *x = -*x);
                    }
                    rows.push((col, row));
                    break;
                }
                // Euclid: reduce the larger entry by the smaller
                nonzero.sort_by_key(|&i| work[i][col].abs());
                let (small, large) = (nonzero[0], nonzero[1]);
                let q = work[large][col].div_euclid(work[small][col]);
                for k in 0..m {
                    let delta = q * work[small][k];
                    work[large][k] -= delta;
                }
            }
        }
        Lattice { rows }
    }

    fn reduce(&self, mut v: Vec<i128>) -> Vec<i128> {
        for (col, row) in &self.rows {
            let q = v[*col].div_euclid(row[*col]);
            if q != 0 {
                for k in 0..v.len() {
                    v[k] -= q * row[k];
                }
            }
        }
        v
    }
}

fn abelianization(w: &Word, m: usize) -> Vec<i128> {
    let mut v = vec![0i128; m];
    for letter in w.letters() {
        let idx = (letter.generator_index() - 1) as usize;
        v[idx] += if letter.is_inverse() { -1 } else { 1 };
    }
    v
}

/// BFS ball of the given radius.  Requires C'(1/6) and the feasibility
/// guard `(2m-1)^radius <= 10^6`.
pub fn cayley_ball(p: &Presentation, radius: u32) -> Result<CayleyBall, BallError> {
    let m = p.generator_count();
    let branch = (2u128 * m as u128 - 1).pow(radius);
    if branch > MAX_BALL_BRANCH {
        return Err(BallError::Infeasible {
            m,
            radius,
            branch,
            max: MAX_BALL_BRANCH,
        });
    }
    let dehn = Dehn::new(p)?;
    let lattice = Lattice::new(p);
    let alphabet: Vec<Letter> = (0..2 * m).map(Letter::from_alphabet_code).collect();

    let mut words: Vec<Word> = vec![Word::empty()];
    let mut dist: Vec<u32> = vec![0];
    let mut nav: Vec<Vec<Option<u32>>> = vec![vec![None; 2 * m as usize]];
    let mut word_index: HashMap<Vec<Letter>, u32> = HashMap::from([(Vec::new(), 0)]);
    let mut buckets: HashMap<Vec<i128>, Vec<u32>> =
        HashMap::from([(lattice.reduce(vec![0; m as usize]), vec![0])]);
    let mut frontier: Vec<u32> = vec![0];

    for d in 0..radius {
        let mut next_frontier: Vec<u32> = Vec::new();
        for &u in &frontier {
            for &s in &alphabet {
                if nav[u as usize][s.alphabet_code() as usize].is_some() {
                    continue;
                }
                let mut letters = words[u as usize].letters().to_vec();
                if letters.last() == Some(&s.inverse()) {
                    letters.pop();
                } else {
                    letters.push(s);
                }
                // cheap hit: the candidate is already a canonical word
                let mut target: Option<u32> = word_index.get(&letters).copied();
                if target.is_none() {
                    let candidate = Word::from_letters(letters.clone());
                    let key = lattice.reduce(abelianization(&candidate, m as usize));
                    if let Some(members) = buckets.get(&key) {
                        for &z in members {
                            let test = candidate.concat(&words[z as usize].inverse());
                            if dehn.is_trivial(&test) {
                                target = Some(z);
                                break;
                            }
                        }
                    }
                    if target.is_none() {
                        // genuinely new vertex at distance d + 1
                        let id = words.len() as u32;
                        words.push(candidate);
                        dist.push(d + 1);
                        nav.push(vec![None; 2 * m as usize]);
                        word_index.insert(letters, id);
                        buckets.entry(key).or_default().push(id);
                        next_frontier.push(id);
                        target = Some(id);
                    }
                }
                let z = target.expect("resolved above");
                nav[u as usize][s.alphabet_code() as usize] = Some(z);
                nav[z as usize][s.inverse().alphabet_code() as usize] = Some(u);
            }
        }
        frontier = next_frontier;
    }

    // edges between same-level boundary vertices: one more sweep over the
    // last level, linking only to known vertices
    for &u in &frontier {
        for &s in &alphabet {
            if nav[u as usize][s.alphabet_code() as usize].is_some() {
                continue;
            }
            let mut letters = words[u as usize].letters().to_vec();
            if letters.last() == Some(&s.inverse()) {
                letters.pop();
            } else {
                letters.push(s);
            }
            let mut target: Option<u32> = word_index.get(&letters).copied();
            if target.is_none() {
                let candidate = Word::from_letters(letters);
                let key = lattice.reduce(abelianization(&candidate, m as usize));
                if let Some(members) = buckets.get(&key) {
                    for &z in members {
                        let test = candidate.concat(&words[z as usize].inverse());
                        if dehn.is_trivial(&test) {
                            target = Some(z);
                            break;
                        }
                    }
                }
            }
            if let Some(z) = target {
                nav[u as usize][s.alphabet_code() as usize] = Some(z);
                nav[z as usize][s.inverse().alphabet_code() as usize] = Some(u);
            }
        }
    }

    let mut levels = vec![0u64; radius as usize + 1];
    for &d in &dist {
        levels[d as usize] += 1;
    }

    Ok(CayleyBall {
        m,
        radius,
        words,
        dist,
        nav,
        levels,
    })
}

/// Free-group ball size `1 + 2m ((2m-1)^r - 1) / (2m - 2)`; the reference
/// count below half the girth.
pub fn free_ball_size(m: u32, radius: u32) -> u64 {
    let mut total = 1u64;
    let mut sphere = 2 * m as u64;
    for _ in 0..radius {
        total += sphere;
        sphere *= 2 * m as u64 - 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn genus2() -> Presentation {
        Presentation::from_strs(4, &["abABcdCD"]).unwrap()
    }

    #[test]
    fn radius_zero_is_identity_only() {
        let ball = cayley_ball(&genus2(), 0).unwrap();
        assert_eq!(ball.vertex_count(), 1);
        assert_eq!(ball.dist(0), 0);
    }

    #[test]
    fn genus2_radius2_is_free() {
        let ball = cayley_ball(&genus2(), 2).unwrap();
        assert_eq!(ball.vertex_count() as u64, free_ball_size(4, 2));
        assert_eq!(ball.vertex_count(), 65);
        assert_eq!(ball.sphere_sizes(), &[1, 8, 56]);
    }

    #[test]
    fn genus2_radius4_has_identifications() {
        let ball = cayley_ball(&genus2(), 4).unwrap();
        // relations of length 8 identify antipodal length-4 words
        assert!(
            (ball.vertex_count() as u64) < free_ball_size(4, 4),
            "expected identifications at radius 4"
        );
        // the half-relator pair: abAB and (cdCD)^{-1} = dcDC mark one vertex
        let u = ball.vertex_of_word(&"abAB".parse().unwrap()).unwrap();
        let v = ball.vertex_of_word(&"dcDC".parse().unwrap()).unwrap();
        assert_eq!(u, v);
        assert_eq!(ball.dist(u), 4);
    }

    #[test]
    fn canonical_names_are_shortlex_least() {
        let ball = cayley_ball(&genus2(), 3).unwrap();
        for v in 0..ball.vertex_count() as u32 {
            let w = ball.word(v);
            assert_eq!(w.len() as u32, ball.dist(v));
            assert!(w.is_reduced());
            // tracing the canonical word must come back to the vertex
            assert_eq!(ball.vertex_of_word(w), Some(v));
        }
        // within a level, discovery order is shortlex order
        let mut per_level: HashMap<u32, Vec<Word>> = HashMap::new();
        for v in 0..ball.vertex_count() as u32 {
            per_level.entry(ball.dist(v)).or_default().push(ball.word(v).clone());
        }
        for (_, words) in per_level {
            let mut sorted = words.clone();
            sorted.sort();
            assert_eq!(words, sorted);
        }
    }

    #[test]
    fn non_c_prime_sixth_is_rejected() {
        let p = Presentation::from_strs(2, &["abAB"]).unwrap();
        assert!(matches!(
            cayley_ball(&p, 2),
            Err(BallError::Cancellation(CancellationError::NotCPrimeSixth { .. }))
        ));
    }

    #[test]
    fn feasibility_guard_trips() {
        let err = cayley_ball(&genus2(), 9).unwrap_err();
        assert!(matches!(err, BallError::Infeasible { .. }));
    }

    /// Ball around another vertex matches the identity ball at radius 2:
    /// same vertex count, edge count, degree multiset, and sphere sizes.
    #[test]
    fn vertex_transitivity_spot_check() {
        let ball = cayley_ball(&genus2(), 4).unwrap();
        let reference = cayley_ball(&genus2(), 2).unwrap();
        let ref_degrees = {
            let mut d: Vec<usize> = (0..reference.vertex_count() as u32)
                .map(|v| reference.neighbors(v).count())
                .collect();
            d.sort_unstable();
            d
        };
        for center in [1u32, 17, 40] {
            // BFS within the big ball, radius 2 from `center`
            let mut dist: HashMap<u32, u32> = HashMap::from([(center, 0)]);
            let mut queue = std::collections::VecDeque::from([center]);
            while let Some(v) = queue.pop_front() {
                if dist[&v] == 2 {
                    continue;
                }
                for w in ball.neighbors(v) {
                    if !dist.contains_key(&w) {
                        dist.insert(w, dist[&v] + 1);
                        queue.push_back(w);
                    }
                }
            }
            assert_eq!(dist.len(), reference.vertex_count());
            let mut spheres = [0u64; 3];
            for (_, &d) in &dist {
                spheres[d as usize] += 1;
            }
            assert_eq!(&spheres[..], reference.sphere_sizes());
            let mut degrees: Vec<usize> = dist
                .keys()
                .map(|&v| ball.neighbors(v).filter(|w| dist.contains_key(w)).count())
                .collect();
            degrees.sort_unstable();
            assert_eq!(degrees, ref_degrees);
        }
    }
}
