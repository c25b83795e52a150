//! Declarative van Kampen diagrams and their combinatorial checks.
//!
//! A diagram arrives as a planar map given by darts: every face lists its
//! boundary as a cyclic sequence of signed edge ids (`+e` traverses edge `e`
//! from `from` to `to`, `-e` the reverse), and the exterior boundary is one
//! more such cycle.  Structural validity means every dart is used exactly
//! once across faces plus exterior, every cycle is a closed walk, the map is
//! connected, and (for `verify_diagram`) Euler's formula `V - E + F = 2`
//! holds counting the outer face.
//!
//! Diagrams are verified, never searched for; the only word-to-diagram
//! machinery in this crate is the Dehn algorithm.

use crate::cancellation::piece_report;
use crate::sampler::Presentation;
use crate::words::{Letter, Word};
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u32),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(u32),
    #[error("duplicate face id {0}")]
    DuplicateFace(u32),
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: u32, vertex: u32 },
    #[error("edge {0} has an empty label")]
    EmptyLabel(u32),
    #[error("dart {0} references an unknown edge")]
    UnknownEdge(i64),
    #[error("dart id 0 is not allowed")]
    ZeroDart,
    #[error("{0} has an empty boundary cycle")]
    EmptyCycle(String),
    #[error("{0} boundary is not a closed walk")]
    OpenWalk(String),
    #[error("dart {0} used more than once across faces and exterior")]
    DartUsedTwice(i64),
    #[error("dart {0} unused: faces plus exterior must cover every edge side")]
    DartUnused(i64),
    #[error("base point {0} is not a vertex")]
    BasePointUnknown(u32),
    #[error("base point {0} does not lie on the exterior boundary")]
    BasePointNotOnBoundary(u32),
    #[error("diagram is not connected")]
    Disconnected,
    #[error("Euler formula fails: V={v}, E={e}, F={f} faces + outer gives {chi}, expected 2")]
    NotPlanar { v: usize, e: usize, f: usize, chi: i64 },
    #[error("face {face} boundary reads {word:?}, which is no cyclic conjugate of any relator or inverse")]
    FaceLabelNotRelator { face: u32, word: String },
    #[error("interior face bound needs a polygon with at least 2 sides, got {0}")]
    TooFewSides(u64),
    #[error("lambda = {0} exceeds 1/6, interior faces need at least 7 sides only below that")]
    LambdaTooLarge(Rational64),
    #[error("presentation has no relators to label faces with")]
    NoRelators,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    pub label: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramFace {
    pub id: u32,
    pub boundary: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanKampenDiagram {
    pub vertices: Vec<u32>,
    pub base_point: u32,
    pub edges: Vec<DiagramEdge>,
    pub faces: Vec<DiagramFace>,
    pub exterior_boundary: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramCheckReport {
    pub is_reduced: bool,
    pub euler_identity_holds: bool,
    pub interior_face_count: u64,
    /// Number of boundary sides after degree-2-vertex removal; the boundary
    /// is treated as a polygon with one side per boundary edge.
    pub boundary_sides: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma33_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_int: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_ext: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EulerIdentity {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

/// A dart: edge index plus direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Dart {
    edge: usize,
    forward: bool,
}

impl Dart {
    fn flip(self) -> Dart {
        Dart {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// Mutable map representation used for validation and normalization.
struct PlanarMap {
    /// live edges: (from, to, label); `None` after a merge consumed them
    edges: Vec<Option<(u32, u32, Word)>>,
    /// face cycles, in input face order
    faces: Vec<Vec<Dart>>,
    exterior: Vec<Dart>,
    vertices: HashSet<u32>,
}

impl PlanarMap {
    fn tail(&self, d: Dart) -> u32 {
        let (from, to, _) = self.edges[d.edge].as_ref().expect("live edge");
        if d.forward {
            *from
        } else {
            *to
        }
    }

    fn head(&self, d: Dart) -> u32 {
        self.tail(d.flip())
    }

    fn dart_word(&self, d: Dart) -> Word {
        let (_, _, label) = self.edges[d.edge].as_ref().expect("live edge");
        if d.forward {
            label.clone()
        } else {
            label.inverse()
        }
    }

    fn live_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_some()).count()
    }

    fn degrees(&self) -> HashMap<u32, usize> {
        let mut deg: HashMap<u32, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for edge in self.edges.iter().flatten() {
            *deg.get_mut(&edge.0).expect("endpoint is a vertex") += 1;
            *deg.get_mut(&edge.1).expect("endpoint is a vertex") += 1;
        }
        deg
    }

    /// Degree-2 vertices whose two edge ends belong to distinct edges (a
    /// vertex carrying a single loop stays), in ascending id order.
    fn removable_vertices(&self) -> Vec<u32> {
        let deg = self.degrees();
        let mut out: Vec<u32> = deg
            .iter()
            .filter(|&(&v, &d)| {
                d == 2
                    && self
                        .edges
                        .iter()
                        .flatten()
                        .filter(|(from, to, _)| *from == v || *to == v)
                        .count()
                        == 2
            })
            .map(|(&v, _)| v)
            .collect();
        out.sort_unstable();
        out
    }

    /// Merges the two incident edges across a degree-2 vertex, relabeling
    /// with the concatenated word.  Returns false (and changes nothing) on
    /// folded corners that do not form a clean pass-through.
    fn merge_at(&mut self, v: u32) -> bool {
        // locate the pass-throughs: cyclically adjacent dart pairs (x, y)
        // with head(x) = v = tail(y)
        let mut sites: Vec<(Dart, Dart)> = Vec::new();
        {
            let all: Vec<&Vec<Dart>> = self.faces.iter().chain([&self.exterior]).collect();
            for cycle in all {
                for i in 0..cycle.len() {
                    let x = cycle[i];
                    let y = cycle[(i + 1) % cycle.len()];
                    if self.head(x) == v && self.tail(y) == v {
                        sites.push((x, y));
                    }
                }
            }
        }
        // a clean pass-through: two mirror sites over two distinct edges
        if sites.len() != 2 {
            return false;
        }
        let (x, y) = sites[0];
        if x.edge == y.edge || sites[1] != (y.flip(), x.flip()) {
            return false;
        }

        let new_from = self.tail(x);
        let new_to = self.head(y);
        let new_label = self.dart_word(x).concat(&self.dart_word(y));
        let dead_a = x.edge;
        let dead_b = y.edge;
        self.edges.push(Some((new_from, new_to, new_label)));
        let new_edge = self.edges.len() - 1;

        let rewrite = |cycle: &Vec<Dart>| -> Vec<Dart> {
            let n = cycle.len();
            let mut skip = vec![false; n];
            let mut replace: Vec<Option<Dart>> = vec![None; n];
            for i in 0..n {
                let a = cycle[i];
                let b = cycle[(i + 1) % n];
                if (a, b) == (x, y) || (a, b) == (y.flip(), x.flip()) {
                    replace[i] = Some(Dart {
                        edge: new_edge,
                        forward: a == x,
                    });
                    skip[(i + 1) % n] = true;
                }
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                if skip[i] {
                    continue;
                }
                out.push(replace[i].unwrap_or(cycle[i]));
            }
            out
        };

        self.faces = self.faces.iter().map(rewrite).collect();
        self.exterior = rewrite(&self.exterior);
        self.edges[dead_a] = None;
        self.edges[dead_b] = None;
        self.vertices.remove(&v);
        true
    }

    fn normalize(&mut self) {
        let mut skip: HashSet<u32> = HashSet::new();
        loop {
            let candidate = self
                .removable_vertices()
                .into_iter()
                .find(|v| !skip.contains(v));
            match candidate {
                Some(v) => {
                    if !self.merge_at(v) {
                        skip.insert(v);
                    }
                }
                None => return,
            }
        }
    }

    /// Right-hand side of the combinatorial Gauss-Bonnet identity
    /// `6 = 2 sum_v (3 - d(v)) + sum_B (6 - 2 e(B) - i(B))`.
    fn gauss_bonnet_rhs(&self) -> i64 {
        let exterior_edges: HashSet<usize> = self.exterior.iter().map(|d| d.edge).collect();
        let mut rhs: i64 = 0;
        for (_, d) in self.degrees() {
            rhs += 2 * (3 - d as i64);
        }
        for face in &self.faces {
            let e_b = face.iter().filter(|d| exterior_edges.contains(&d.edge)).count() as i64;
            let i_b = face.len() as i64 - e_b;
            rhs += 6 - 2 * e_b - i_b;
        }
        rhs
    }

    fn interior_face_count(&self) -> u64 {
        let exterior_edges: HashSet<usize> = self.exterior.iter().map(|d| d.edge).collect();
        self.faces
            .iter()
            .filter(|face| face.iter().all(|d| !exterior_edges.contains(&d.edge)))
            .count() as u64
    }
}

/// Structural validation: ids, closed walks, the every-dart-once property,
/// connectivity.  Does not check Euler's formula (see `verify_diagram`).
fn build_map(dg: &VanKampenDiagram) -> Result<PlanarMap, DiagramError> {
    let mut vertices = HashSet::new();
    for &v in &dg.vertices {
        if !vertices.insert(v) {
            return Err(DiagramError::DuplicateVertex(v));
        }
    }
    let mut edge_index: HashMap<u32, usize> = HashMap::new();
    let mut edges = Vec::with_capacity(dg.edges.len());
    for (i, e) in dg.edges.iter().enumerate() {
        if edge_index.insert(e.id, i).is_some() {
            return Err(DiagramError::DuplicateEdge(e.id));
        }
        for v in [e.from, e.to] {
            if !vertices.contains(&v) {
                return Err(DiagramError::UnknownVertex { edge: e.id, vertex: v });
            }
        }
        if e.label.is_empty() {
            return Err(DiagramError::EmptyLabel(e.id));
        }
        edges.push(Some((e.from, e.to, e.label.clone())));
    }

    let to_dart = |signed: i64| -> Result<Dart, DiagramError> {
        if signed == 0 {
            return Err(DiagramError::ZeroDart);
        }
        let id = signed.unsigned_abs();
        let id = u32::try_from(id).map_err(|_| DiagramError::UnknownEdge(signed))?;
        let edge = *edge_index
            .get(&id)
            .ok_or(DiagramError::UnknownEdge(signed))?;
        Ok(Dart {
            edge,
            forward: signed > 0,
        })
    };

    let mut seen_faces = HashSet::new();
    let mut faces = Vec::with_capacity(dg.faces.len());
    for f in &dg.faces {
        if !seen_faces.insert(f.id) {
            return Err(DiagramError::DuplicateFace(f.id));
        }
        let cycle = f
            .boundary
            .iter()
            .map(|&s| to_dart(s))
            .collect::<Result<Vec<_>, _>>()?;
        if cycle.is_empty() {
            return Err(DiagramError::EmptyCycle(format!("face {}", f.id)));
        }
        faces.push(cycle);
    }
    let exterior = dg
        .exterior_boundary
        .iter()
        .map(|&s| to_dart(s))
        .collect::<Result<Vec<_>, _>>()?;
    if exterior.is_empty() {
        return Err(DiagramError::EmptyCycle("exterior boundary".into()));
    }

    let map = PlanarMap {
        edges,
        faces,
        exterior,
        vertices,
    };

    // closed walks
    let check_walk = |cycle: &[Dart], what: String| -> Result<(), DiagramError> {
        for i in 0..cycle.len() {
            if map.head(cycle[i]) != map.tail(cycle[(i + 1) % cycle.len()]) {
                return Err(DiagramError::OpenWalk(what.clone()));
            }
        }
        Ok(())
    };
    for (f, cycle) in dg.faces.iter().zip(&map.faces) {
        check_walk(cycle, format!("face {}", f.id))?;
    }
    check_walk(&map.exterior, "exterior boundary".into())?;

    // every dart exactly once across faces + exterior
    let mut used: HashSet<(usize, bool)> = HashSet::new();
    for d in map.faces.iter().flatten().chain(map.exterior.iter()) {
        if !used.insert((d.edge, d.forward)) {
            let signed = dg.edges[d.edge].id as i64 * if d.forward { 1 } else { -1 };
            return Err(DiagramError::DartUsedTwice(signed));
        }
    }
    for (i, e) in dg.edges.iter().enumerate() {
        for forward in [true, false] {
            if !used.contains(&(i, forward)) {
                return Err(DiagramError::DartUnused(
                    e.id as i64 * if forward { 1 } else { -1 },
                ));
            }
        }
    }

    // connectivity over vertices through edges
    if !map.vertices.is_empty() {
        let mut adjacency: HashMap<u32, Vec<u32>> = HashMap::new();
        for e in map.edges.iter().flatten() {
            adjacency.entry(e.0).or_default().push(e.1);
            adjacency.entry(e.1).or_default().push(e.0);
        }
        let start = *map.vertices.iter().min().expect("nonempty");
        let mut seen = HashSet::from([start]);
        let mut queue = vec![start];
        while let Some(v) = queue.pop() {
            for &w in adjacency.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push(w);
                }
            }
        }
        if seen.len() != map.vertices.len() {
            return Err(DiagramError::Disconnected);
        }
    }

    Ok(map)
}

/// Evaluates the combinatorial Gauss-Bonnet identity on a structurally valid
/// map: degree-2 vertices are removed (edges relabeled with the concatenated
/// words) and the right-hand side `2 sum_v (3 - d(v)) + sum_B (6 - 2e(B) - i(B))`
/// is compared against 6.  Maps that are not discs simply fail the identity.
pub fn euler_identity(dg: &VanKampenDiagram) -> Result<EulerIdentity, DiagramError> {
    let mut map = build_map(dg)?;
    map.normalize();
    let rhs = map.gauss_bonnet_rhs();
    Ok(EulerIdentity {
        lhs: 6,
        rhs,
        holds: rhs == 6,
    })
}

/// Full verification against a presentation: structural validity, Euler's
/// formula with the outer face, base point on the boundary, face labels
/// reading cyclic conjugates of relators, reducedness, and the Gauss-Bonnet
/// identity.
pub fn verify_diagram(
    dg: &VanKampenDiagram,
    p: &Presentation,
) -> Result<DiagramCheckReport, DiagramError> {
    if p.relators().is_empty() {
        return Err(DiagramError::NoRelators);
    }
    let map = build_map(dg)?;

    if !dg.vertices.contains(&dg.base_point) {
        return Err(DiagramError::BasePointUnknown(dg.base_point));
    }
    let on_boundary = map
        .exterior
        .iter()
        .any(|&d| map.tail(d) == dg.base_point || map.head(d) == dg.base_point);
    if !on_boundary {
        return Err(DiagramError::BasePointNotOnBoundary(dg.base_point));
    }

    let v = map.vertices.len();
    let e = map.live_edge_count();
    let f = map.faces.len();
    let chi = v as i64 - e as i64 + f as i64 + 1;
    if chi != 2 {
        return Err(DiagramError::NotPlanar { v, e, f, chi });
    }

    // face labels: cyclic conjugates of relators or inverses
    let mut conjugates: HashSet<Vec<Letter>> = HashSet::new();
    for r in p.relators() {
        for base in [r.clone(), r.inverse()] {
            for shift in 0..base.len() {
                conjugates.insert(base.rotated(shift).letters().to_vec());
            }
        }
    }
    let face_word = |cycle: &[Dart], start: usize| -> Word {
        let mut w = Word::empty();
        for i in 0..cycle.len() {
            w = w.concat(&map.dart_word(cycle[(start + i) % cycle.len()]));
        }
        w
    };
    for (f, cycle) in dg.faces.iter().zip(&map.faces) {
        let w = face_word(cycle, 0);
        if !conjugates.contains(w.letters()) {
            return Err(DiagramError::FaceLabelNotRelator {
                face: f.id,
                word: w.to_string(),
            });
        }
    }

    // reducedness: no two distinct faces that meet along an edge read the
    // same word clockwise/counter-clockwise from it
    let mut dart_owner: HashMap<(usize, bool), usize> = HashMap::new();
    for (fi, cycle) in map.faces.iter().enumerate() {
        for d in cycle {
            dart_owner.insert((d.edge, d.forward), fi);
        }
    }
    let mut is_reduced = true;
    'faces: for (fi, cycle) in map.faces.iter().enumerate() {
        for (pos, d) in cycle.iter().enumerate() {
            let Some(&other) = dart_owner.get(&(d.edge, !d.forward)) else {
                continue; // other side is the exterior
            };
            if other == fi {
                continue;
            }
            let w_here = face_word(cycle, pos);
            // read the other face in the opposite rotational sense,
            // starting from the same dart
            let reversed: Vec<Dart> = map.faces[other].iter().rev().map(|d| d.flip()).collect();
            let start = reversed
                .iter()
                .position(|&x| x == *d)
                .expect("flipped dart sits in the reversed cycle");
            let w_mirror = face_word(&reversed, start);
            if w_here == w_mirror {
                is_reduced = false;
                break 'faces;
            }
        }
    }

    let mut normalized = map;
    normalized.normalize();
    let rhs = normalized.gauss_bonnet_rhs();
    let interior_face_count = normalized.interior_face_count();
    let boundary_sides = normalized.exterior.len() as u64;

    let lambda_star = piece_report(p)
        .map(|r| r.lambda_star)
        .unwrap_or_else(|_| Rational64::zero());
    let lambda = if lambda_star.is_zero() {
        Rational64::new(1, 6)
    } else {
        lambda_star
    };
    let (d_int, d_ext, lemma33_bound) = if lambda <= Rational64::new(1, 6) {
        let di = d_int(lambda);
        let de = d_ext(lambda);
        let bound = if boundary_sides >= 2 {
            Some((3 * boundary_sides - 6) / (di - 6))
        } else {
            None
        };
        (Some(di), Some(de), bound)
    } else {
        (None, None, None)
    };

    Ok(DiagramCheckReport {
        is_reduced,
        euler_identity_holds: rhs == 6,
        interior_face_count,
        boundary_sides,
        lemma33_bound,
        d_int,
        d_ext,
    })
}

/// `d_Int(lambda) = floor(1/lambda + 1)`, exactly.
pub fn d_int(lambda: Rational64) -> u64 {
    let num = *lambda.numer();
    let den = *lambda.denom();
    ((den + num).div_euclid(num)) as u64
}

/// `d_Ext(lambda) = floor(1/(2 lambda) + 1)`, exactly.
pub fn d_ext(lambda: Rational64) -> u64 {
    let num = *lambda.numer();
    let den = *lambda.denom();
    ((den + 2 * num).div_euclid(2 * num)) as u64
}

/// Interior-face cap for a reduced diagram of a geodesic `n`-gon:
/// `floor((3n - 6) / (d_Int(lambda) - 6))`, requiring `lambda <= 1/6`.
pub fn interior_face_bound(n: u64, lambda: Rational64) -> Result<u64, DiagramError> {
    if lambda > Rational64::new(1, 6) || lambda <= Rational64::zero() {
        return Err(DiagramError::LambdaTooLarge(lambda));
    }
    if n < 2 {
        return Err(DiagramError::TooFewSides(n));
    }
    let di = d_int(lambda);
    debug_assert!(di >= 7);
    Ok((3 * n - 6) / (di - 6))
}
