//! Valid 7-tuples `(I₁, I₂, I₃, σ, t)` and the additive faces of a function.
//!
//! A 7-tuple encodes the relation `σ₁π(x¹) + σ₂π(x²) + σ₃π(x³) = 0` over
//! `F = {x ∈ I₁ × I₂ × I₃ : σ₁x¹ + σ₂x² + σ₃x³ = t}`. It is *valid* when each
//! projection `pᵢ(F)` is the whole face `Iᵢ`.
//!
//! `t` is stored in grid units. Faces of `P_q` are unimodular simplices in
//! grid units, so their only lattice points are their vertices. Because `F`
//! is an integral polytope, its vertices are exactly the vertex triples
//! `(v¹, v², v³)` of the three faces with `Σ σᵢvⁱ = t`, and
//! [`SevenTuple::f_vertices`] enumerates them directly.

use crate::lattice::{Face, FaceKind, LatticePoint, Region};
use crate::pwl::PwlFunction;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised by tuple operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TupleError {
    #[error("the 7-tuple {0} is not valid")]
    NotValid(SevenTuple),
    #[error("the 7-tuple {tuple} has class {found:?}, expected {expected}")]
    WrongClass { tuple: SevenTuple, expected: u8, found: Option<u8> },
    #[error("t = {found:?} differs from the unique valid translation {expected:?}")]
    InconsistentT { expected: Option<(i64, i64)>, found: (i64, i64) },
}

/// A point of `R² × R² × R²` in grid units.
pub type Triple = [(i64, i64); 3];

/// A 7-tuple. `t` is in grid units, so the relation reads
/// `Σ σᵢ xⁱ = t / q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SevenTuple {
    pub faces: [Face; 3],
    pub sigma: [i8; 3],
    pub t: (i64, i64),
}

impl fmt::Display for SevenTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.faces;
        write!(f, "({a}, {b}, {c}, {:?}, {:?}/{})", self.sigma, self.t, a.q)
    }
}

fn sub(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 - b.0, a.1 - b.1)
}

fn add(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 + b.0, a.1 + b.1)
}

fn smul(s: i8, a: (i64, i64)) -> (i64, i64) {
    let s = i64::from(s);
    (s * a.0, s * a.1)
}

/// The sign pattern `(1, 1, −1)` of plain additivity `π(x) + π(y) = π(x + y)`.
pub const ADDITIVE: [i8; 3] = [1, 1, -1];

impl SevenTuple {
    /// # Panics
    ///
    /// Panics if the faces have different resolutions or a sign is not ±1.
    pub fn new(faces: [Face; 3], sigma: [i8; 3], t: (i64, i64)) -> Self {
        assert!(faces.iter().all(|f| f.q == faces[0].q), "mixed resolutions");
        assert!(sigma.iter().all(|s| s.abs() == 1), "signs must be ±1");
        Self { faces, sigma, t }
    }

    pub fn q(&self) -> u32 {
        self.faces[0].q
    }

    pub fn t_point(&self) -> LatticePoint {
        LatticePoint::on_grid(self.t.0, self.t.1, self.q())
    }

    pub fn kinds(&self) -> [FaceKind; 3] {
        self.faces.map(|f| f.kind)
    }

    /// `(−σ, −t)`, which describes the same relation.
    pub fn negated(&self) -> Self {
        Self::new(self.faces, self.sigma.map(|s| -s), (-self.t.0, -self.t.1))
    }

    /// Reorders slots: slot `k` of the result is slot `perm[k]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self::new(perm.map(|k| self.faces[k]), perm.map(|k| self.sigma[k]), self.t)
    }

    /// Moves every face into the fundamental domain and adjusts `t`.
    pub fn reduced_mod_lattice(&self) -> Self {
        let q = i64::from(self.q());
        let mut t = self.t;
        let mut faces = self.faces;
        for (face, &s) in faces.iter_mut().zip(&self.sigma) {
            let (c, shift) = face.canonical();
            *face = c;
            t = add(t, smul(s, (q * shift.0, q * shift.1)));
        }
        Self::new(faces, self.sigma, t)
    }

    /// Canonical representative: faces reduced modulo `Z²`, slots sorted by
    /// face, and `σ₁ = +1` (ties between equal faces put `+1` first).
    pub fn canonical(&self) -> Self {
        let r = self.reduced_mod_lattice();
        [r, r.negated()]
            .into_iter()
            .filter_map(|v| {
                let mut slots: Vec<(Face, i8)> =
                    v.faces.iter().copied().zip(v.sigma).collect();
                slots.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
                (slots[0].1 == 1).then(|| {
                    Self::new(
                        [slots[0].0, slots[1].0, slots[2].0],
                        [slots[0].1, slots[1].1, slots[2].1],
                        v.t,
                    )
                })
            })
            .min()
            .expect("one sign variant starts with +1")
    }

    /// `pᵢ(F)` as a face, or `None` for the empty face.
    pub fn project(&self, i: usize) -> Option<Face> {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            2 => (0, 1),
            _ => panic!("slot index out of range"),
        };
        let s = self.sigma;
        let rj = self.faces[j].region().signed(s[i] * s[j]);
        let rk = self.faces[k].region().signed(s[i] * s[k]);
        let shadow = rj.minkowski(&rk).neg().translate(smul(s[i], self.t));
        let r = self.faces[i].region().intersect(&shadow)?;
        let face = r.as_face(self.q());
        debug_assert!(face.is_some(), "projection of a 7-tuple is a face");
        face
    }

    /// All three projections equal the faces.
    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.project(i) == Some(self.faces[i]))
    }

    /// Vertices of `F`, in grid units.
    pub fn f_vertices(&self) -> Vec<Triple> {
        let s = self.sigma;
        let target = self.faces[2].region();
        let mut out = Vec::new();
        for v1 in self.faces[0].grid_vertices() {
            for v2 in self.faces[1].grid_vertices() {
                let rest = sub(sub(self.t, smul(s[0], v1)), smul(s[1], v2));
                let v3 = smul(s[2], rest);
                if target.contains_point(v3) {
                    out.push([v1, v2, v3]);
                }
            }
        }
        out
    }

    /// Class 1–7 of the kind pattern, or `None` for a pattern no valid
    /// tuple can have.
    pub fn kind_class(&self) -> Option<u8> {
        classify_pattern(self.kinds().map(Shape::of))
    }

    /// Slots holding triangles, edges and points, in slot order.
    pub fn slots_by_dimension(&self, dim: usize) -> Vec<usize> {
        (0..3).filter(|&i| self.faces[i].kind.dimension() == dim).collect()
    }
}

/// Face kinds with both triangle orientations merged, as used by the
/// classification of valid tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Shape {
    Point,
    EdgeV,
    EdgeH,
    EdgeD,
    Triangle,
}

impl Shape {
    pub const ALL: [Shape; 5] = [Shape::Point, Shape::EdgeV, Shape::EdgeH, Shape::EdgeD, Shape::Triangle];

    pub fn of(kind: FaceKind) -> Self {
        match kind {
            FaceKind::Point => Shape::Point,
            FaceKind::EdgeV => Shape::EdgeV,
            FaceKind::EdgeH => Shape::EdgeH,
            FaceKind::EdgeD => Shape::EdgeD,
            FaceKind::TriLower | FaceKind::TriUpper => Shape::Triangle,
        }
    }

    fn is_edge(self) -> bool {
        matches!(self, Shape::EdgeV | Shape::EdgeH | Shape::EdgeD)
    }
}

/// The class of a valid tuple, determined by its kinds up to permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TupleType {
    pub class: u8,
}

/// Class of an ordered kind pattern:
///
/// 1. three points;
/// 2. a point and two edges of one type;
/// 3. one edge of each type;
/// 4. a point and two triangles;
/// 5. an edge and two triangles;
/// 6. two edges of different types and a triangle;
/// 7. three edges of one type, or three triangles.
pub fn classify_pattern(p: [Shape; 3]) -> Option<u8> {
    let count = |s: Shape| p.iter().filter(|&&x| x == s).count();
    let points = count(Shape::Point);
    let tris = count(Shape::Triangle);
    let edges: Vec<Shape> = p.iter().copied().filter(|s| s.is_edge()).collect();
    let distinct_edges = edges.iter().collect::<BTreeSet<_>>().len();
    match (points, edges.len(), tris) {
        (3, 0, 0) => Some(1),
        (1, 2, 0) if distinct_edges == 1 => Some(2),
        (0, 3, 0) if distinct_edges == 3 => Some(3),
        (1, 0, 2) => Some(4),
        (0, 1, 2) => Some(5),
        (0, 2, 1) if distinct_edges == 2 => Some(6),
        (0, 3, 0) if distinct_edges == 1 => Some(7),
        (0, 0, 3) => Some(7),
        _ => None,
    }
}

/// For a rejected pattern, which of the three impossibility arguments
/// applies: 1 for two points with a non-point, 2 for two edges of one type
/// with a different non-point, 3 for a point with two different non-points.
pub fn rejection_case(p: [Shape; 3]) -> Option<u8> {
    if classify_pattern(p).is_some() {
        return None;
    }
    let points = p.iter().filter(|&&s| s == Shape::Point).count();
    if points == 2 {
        return Some(1);
    }
    if points == 1 {
        return Some(3);
    }
    Some(2)
}

/// Every ordered pattern over the five shapes that a valid tuple can have,
/// with its class.
pub fn admissible_kind_patterns() -> Vec<([Shape; 3], u8)> {
    let mut out = Vec::new();
    for a in Shape::ALL {
        for b in Shape::ALL {
            for c in Shape::ALL {
                if let Some(k) = classify_pattern([a, b, c]) {
                    out.push(([a, b, c], k));
                }
            }
        }
    }
    out
}

/// Classifies a valid tuple.
pub fn classify(tau: &SevenTuple) -> Result<TupleType, TupleError> {
    if !tau.is_valid() {
        return Err(TupleError::NotValid(*tau));
    }
    let class = tau.kind_class().expect("valid tuples have an admissible pattern");
    Ok(TupleType { class })
}

/// The translations `t` that make `(faces, σ, t)` valid.
pub fn valid_translations(faces: [Face; 3], sigma: [i8; 3]) -> Vec<(i64, i64)> {
    let mut cands = BTreeSet::new();
    for v1 in faces[0].grid_vertices() {
        for v2 in faces[1].grid_vertices() {
            for v3 in faces[2].grid_vertices() {
                let t = add(add(smul(sigma[0], v1), smul(sigma[1], v2)), smul(sigma[2], v3));
                cands.insert(t);
            }
        }
    }
    cands
        .into_iter()
        .filter(|&t| SevenTuple::new(faces, sigma, t).is_valid())
        .collect()
}

/// `F(τ)` as a base point plus direction vectors over a parameter domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametrizedF {
    pub base: Triple,
    /// Directions scaled to grid units: `F ∋ base + Σ λⱼ dⱼ`.
    pub directions: Vec<Triple>,
    /// `true` when the parameter domain is the standard simplex `Δ_k`;
    /// otherwise it is the convex hull of the parameter points of
    /// [`ParametrizedF::vertices`].
    pub simplex: bool,
    pub vertices: Vec<Triple>,
}

impl ParametrizedF {
    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Vertices as rational points.
    pub fn vertex_points(&self, q: u32) -> Vec<[LatticePoint; 3]> {
        self.vertices
            .iter()
            .map(|tr| tr.map(|(a, b)| LatticePoint::on_grid(a, b, q)))
            .collect()
    }
}

fn affine_rank(points: &[Triple]) -> Vec<usize> {
    // Greedy choice of affinely independent points, by exact elimination.
    let flat = |p: &Triple| -> Vec<i64> { p.iter().flat_map(|&(a, b)| [a, b]).collect() };
    let base = flat(&points[0]);
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<crate::rational::Rational>> = Vec::new();
    for (k, p) in points.iter().enumerate().skip(1) {
        let d: Vec<_> = flat(p)
            .iter()
            .zip(&base)
            .map(|(a, b)| crate::rational::int(a - b))
            .collect();
        let mut trial = rows.clone();
        trial.push(d.clone());
        if crate::linalg::rank(&trial, 6) == trial.len() {
            rows = trial;
            chosen.push(k);
        }
    }
    chosen
}

/// Parametrizes `F(τ)` for a valid tuple.
///
/// For classes 1–6 the translation `t` is recomputed from the faces and
/// signs and must equal `τ.t`; `F` is then a simplex spanned by its vertices.
/// For class 7 `F` may have more vertices than a simplex.
pub fn parametrize_f(tau: &SevenTuple) -> Result<ParametrizedF, TupleError> {
    let class = classify(tau)?.class;
    if class != 7 {
        let ts = valid_translations(tau.faces, tau.sigma);
        if ts != [tau.t] {
            return Err(TupleError::InconsistentT { expected: ts.first().copied(), found: tau.t });
        }
    }
    let vertices = tau.f_vertices();
    let base = vertices[0];
    let spanning = affine_rank(&vertices);
    let directions: Vec<Triple> = spanning
        .iter()
        .map(|&k| {
            let v = vertices[k];
            [sub(v[0], base[0]), sub(v[1], base[1]), sub(v[2], base[2])]
        })
        .collect();
    let simplex = vertices.len() == directions.len() + 1;
    Ok(ParametrizedF { base, directions, simplex, vertices })
}

/// Whether `π` is additive over the valid tuple `τ`, tested at the vertices
/// of `F(τ)`.
pub fn is_additive(pi: &PwlFunction, tau: &SevenTuple) -> bool {
    let q = i64::from(pi.q());
    let qt = i64::from(tau.q());
    assert_eq!(q, qt, "function and tuple must share q");
    tau.f_vertices().iter().all(|tr| {
        tr.iter()
            .zip(tau.sigma)
            .map(|(&(a, b), s)| pi.vertex_value(a, b) * crate::rational::int(i64::from(s)))
            .sum::<crate::rational::Rational>()
            .is_zero()
    })
}

/// The additive faces `E(π)`: valid tuples `(I₁, I₂, I₃, (1,1,−1), 0)` with
/// `I₁ ≤ I₂` in the fundamental domain and `I₃ ⊆ I₁ + I₂`. Each `I₃` is
/// stored reduced modulo `Z²`, with the shift carried by `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveFaceSet {
    pub q: u32,
    pub tuples: BTreeSet<SevenTuple>,
}

impl AdditiveFaceSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Number of members per class, indexed by `class − 1`.
    pub fn class_counts(&self) -> [usize; 7] {
        let mut out = [0; 7];
        for t in &self.tuples {
            if let Some(c) = t.kind_class() {
                out[usize::from(c) - 1] += 1;
            }
        }
        out
    }
}

/// Enumerates `E(π)` in parallel over face pairs.
pub fn enumerate_additive(pi: &PwlFunction) -> AdditiveFaceSet {
    let q = pi.q();
    let faces: Vec<Face> = crate::lattice::enumerate_fundamental_faces(q)
        .expect("q > 0")
        .iter()
        .copied()
        .collect();
    let qi = i64::from(q);
    let tuples: BTreeSet<SevenTuple> = (0..faces.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let faces = &faces;
            (a..faces.len()).flat_map(move |b| {
                let (i1, i2) = (faces[a], faces[b]);
                let sum: Region = i1.region().minkowski(&i2.region());
                sum.faces_inside(q)
                    .into_iter()
                    .filter_map(move |i3| {
                        let tau = SevenTuple::new([i1, i2, i3], ADDITIVE, (0, 0));
                        if !tau.is_valid() || !is_additive(pi, &tau) {
                            return None;
                        }
                        let (c, shift) = i3.canonical();
                        Some(SevenTuple::new([i1, i2, c], ADDITIVE, (-qi * shift.0, -qi * shift.1)))
                    })
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    AdditiveFaceSet { q, tuples }
}

/// Replaces the edge at `edge_slot` of a class-6 tuple's *other* edge by one
/// of its vertices `u`, and the triangle by its edge of the same type as the
/// face at `edge_slot`, keeping `σ` and `t`. The result is a valid class-2
/// tuple.
pub fn separate_edge_at(tau: &SevenTuple, edge_slot: usize) -> Result<SevenTuple, TupleError> {
    let class = tau.kind_class();
    if class != Some(6) || !tau.faces[edge_slot].kind.is_edge() {
        return Err(TupleError::WrongClass { tuple: *tau, expected: 6, found: class });
    }
    let k = tau.slots_by_dimension(2)[0];
    let j = (0..3).find(|&s| s != k && s != edge_slot).expect("third slot");
    let k1 = tau.faces[k]
        .edge_of_kind(tau.faces[edge_slot].kind)
        .expect("triangles have edges of every type");
    for (a, b) in tau.faces[j].grid_vertices() {
        let mut faces = tau.faces;
        faces[j] = Face::point(a, b, tau.q());
        faces[k] = k1;
        let cand = SevenTuple::new(faces, tau.sigma, tau.t);
        if cand.is_valid() {
            return Ok(cand);
        }
    }
    Err(TupleError::NotValid(*tau))
}

/// [`separate_edge_at`] applied to the first edge slot.
pub fn separate_edge(tau: &SevenTuple) -> Result<SevenTuple, TupleError> {
    let first = tau.slots_by_dimension(1).first().copied().unwrap_or(0);
    separate_edge_at(tau, first)
}
