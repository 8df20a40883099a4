//! Rewriting the perturbation space of `π` until only edge relations remain.
//!
//! The state is a triple `(E, Z, P)`: a set of valid 7-tuples, a set of faces
//! on which perturbations vanish, and the faces still in the domain. Its
//! perturbation space holds the continuous periodic `θ` on `⋃P` that vanish on
//! `⋃Z` and are additive over every tuple of `E`. Every step below either
//! keeps this space (an *equal* update) or shrinks the domain together with a
//! recorded reconstruction rule that maps the new space bijectively onto the
//! old one (an *equivalent* update).
//!
//! All faces in the state are reduced modulo `Z²` and all tuples are in
//! [`SevenTuple::canonical`] form. Perturbations are returned as values on
//! `(1/(mq))Z²`, which is where the finite test lives.

use crate::finite_group::{extremality_kernel, finite_minimality, FiniteProblem, Violation};
use crate::functional::{lift_pwl, solve_finite, tuples_to_system, FiniteSolution, SlotDictionary, SystemSpec};
use crate::lattice::{enumerate_fundamental_faces, Face, FaceKind, Region};
use crate::linalg::{sparse_kernel, SparseRow};
use crate::pwl::{GridFunction, PwlFunction};
use crate::rational::{int, rat, Rational};
use crate::tuples::{enumerate_additive, SevenTuple, ADDITIVE};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Errors raised by the reduction engine.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("the function carries no f")]
    MissingF,
    #[error("the function is not minimal ({0})")]
    NotMinimal(Violation),
    #[error("m must be at least 3, got {0}")]
    SmallM(u32),
    #[error("{step}: derived 7-tuple {tuple} is not valid")]
    InvalidRewrite { step: &'static str, tuple: SevenTuple },
    #[error("{step}: no admissible rewrite of {tuple}")]
    NoRewrite { step: &'static str, tuple: SevenTuple },
    #[error("pipeline incomplete: {0} survived the triangle steps")]
    Incomplete(SevenTuple),
}

/// Whether an update keeps the perturbation space or only its nontriviality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UpdateKind {
    Equal,
    Equivalent,
}

/// How to recover `θ` on the interior of a face removed from `P`. Points are
/// in grid units of `P_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Reconstruction {
    /// `θ(x) = s·θ(s·x + offset)` for `x` in the interior of `face`.
    Reflect { face: Face, scale: i8, offset: (i64, i64) },
    /// `θ(v + a·d₁ + b·d₂) = θ(v + a·d₁) + θ(v + b·d₂)` on the interior of
    /// `face`.
    Separable { face: Face, vertex: (i64, i64), d1: (i64, i64), d2: (i64, i64) },
}

/// One logged update.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpdateRecord {
    pub step: &'static str,
    pub kind: UpdateKind,
    pub removed_tuples: Vec<SevenTuple>,
    pub added_tuples: Vec<SevenTuple>,
    pub zeros_added: Vec<Face>,
    pub zeros_removed: Vec<Face>,
    pub domain_removed: Vec<Face>,
    pub reconstruction: Option<Reconstruction>,
}

impl UpdateRecord {
    fn new(step: &'static str, kind: UpdateKind) -> Self {
        Self {
            step,
            kind,
            removed_tuples: Vec::new(),
            added_tuples: Vec::new(),
            zeros_added: Vec::new(),
            zeros_removed: Vec::new(),
            domain_removed: Vec::new(),
            reconstruction: None,
        }
    }
}

/// The triple `(E, Z, P)` with its update log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PerturbationSpaceState {
    pub q: u32,
    pub tuples: BTreeSet<SevenTuple>,
    pub zeros: BTreeSet<Face>,
    pub domain: BTreeSet<Face>,
    pub lifts: Vec<UpdateRecord>,
}

fn add(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 - b.0, a.1 - b.1)
}

fn smul(s: i64, a: (i64, i64)) -> (i64, i64) {
    (s * a.0, s * a.1)
}

fn canon(f: &Face) -> Face {
    f.canonical().0
}

fn common_vertex(a: &Face, b: &Face) -> Option<(i64, i64)> {
    let bv = b.grid_vertices();
    a.grid_vertices().into_iter().find(|v| bv.contains(v))
}

impl PerturbationSpaceState {
    /// Adds `f` and all of its subfaces to `Z`; returns the new members.
    fn zero_closed(&mut self, f: &Face) -> Vec<Face> {
        f.subfaces()
            .iter()
            .map(canon)
            .filter(|g| self.zeros.insert(*g))
            .collect()
    }

    fn is_zero(&self, f: &Face) -> bool {
        self.zeros.contains(&canon(f))
    }

    /// Tuples mentioning the canonical face `f`.
    pub fn tuples_with(&self, f: &Face) -> Vec<SevenTuple> {
        self.tuples.iter().filter(|t| t.faces.contains(f)).copied().collect()
    }

    /// Members of `E` per class, indexed by `class − 1`.
    pub fn class_counts(&self) -> [usize; 7] {
        let mut out = [0; 7];
        for t in &self.tuples {
            if let Some(c) = t.kind_class() {
                out[usize::from(c) - 1] += 1;
            }
        }
        out
    }

    /// Checks the structural invariants: `Z ⊆ P`, every face of `E` in `P`,
    /// all vertices in `Z`, and every tuple canonical and valid.
    pub fn check_invariants(&self) -> bool {
        let in_domain = |f: &Face| self.domain.contains(&canon(f));
        self.zeros.iter().all(in_domain)
            && self.tuples.iter().all(|t| {
                t.faces.iter().all(in_domain) && t.canonical() == *t && t.is_valid()
            })
            && self
                .domain
                .iter()
                .filter(|f| f.kind.is_point())
                .all(|f| self.zeros.contains(f))
    }

    fn insert_tuple(&mut self, tau: SevenTuple, step: &'static str) -> Result<SevenTuple, ReductionError> {
        if !tau.is_valid() {
            return Err(ReductionError::InvalidRewrite { step, tuple: tau });
        }
        let c = tau.canonical();
        self.tuples.insert(c);
        Ok(c)
    }
}

/// `E ← E(π)`, `Z ← (1/q)Z²`, `P ← P_q`.
pub fn init_state(pi: &PwlFunction) -> Result<PerturbationSpaceState, ReductionError> {
    if pi.f_grid().is_none() {
        return Err(ReductionError::MissingF);
    }
    let report = finite_minimality(&FiniteProblem::from_pwl(pi, 1));
    if let Some(v) = report.violation {
        return Err(ReductionError::NotMinimal(v));
    }
    let q = pi.q();
    let domain: BTreeSet<Face> = enumerate_fundamental_faces(q)
        .expect("q > 0")
        .iter()
        .copied()
        .collect();
    let zeros = domain.iter().filter(|f| f.kind.is_point()).copied().collect();
    let tuples = enumerate_additive(pi).tuples.iter().map(SevenTuple::canonical).collect();
    Ok(PerturbationSpaceState { q, tuples, zeros, domain, lifts: Vec::new() })
}

/// Drops tuples with two slots in `Z` after zeroing their third face.
/// Returns whether anything changed.
pub fn propagate_zeros(s: &mut PerturbationSpaceState) -> bool {
    let mut changed = false;
    loop {
        let hit = s.tuples.iter().copied().find(|t| {
            t.faces.iter().filter(|f| s.is_zero(f)).count() >= 2
        });
        let Some(tau) = hit else {
            return changed;
        };
        let mut rec = UpdateRecord::new("zero-propagation", UpdateKind::Equal);
        s.tuples.remove(&tau);
        rec.removed_tuples.push(tau);
        for f in &tau.faces {
            rec.zeros_added.extend(s.zero_closed(f));
        }
        s.lifts.push(rec);
        changed = true;
    }
}

/// Removes every tuple whose three faces are points.
pub fn step1_drop_point_triples(s: &mut PerturbationSpaceState) -> bool {
    let drop: Vec<SevenTuple> = s.tuples.iter().filter(|t| t.kind_class() == Some(1)).copied().collect();
    if drop.is_empty() {
        return false;
    }
    for t in &drop {
        s.tuples.remove(t);
    }
    let mut rec = UpdateRecord::new("step1", UpdateKind::Equal);
    rec.removed_tuples = drop;
    s.lifts.push(rec);
    true
}

/// Replaces every tuple of three triangles or three parallel edges by zeros
/// on its faces.
pub fn step2_fulldim_to_zeros(s: &mut PerturbationSpaceState) -> bool {
    let full: Vec<SevenTuple> = s.tuples.iter().filter(|t| t.kind_class() == Some(7)).copied().collect();
    if full.is_empty() {
        return false;
    }
    let mut rec = UpdateRecord::new("step2", UpdateKind::Equal);
    for t in &full {
        s.tuples.remove(t);
        for f in &t.faces {
            rec.zeros_added.extend(s.zero_closed(f));
        }
    }
    rec.removed_tuples = full;
    s.lifts.push(rec);
    propagate_zeros(s);
    true
}

/// `(I_*, I_b, I, (1,1,−1), v)`: `θ` is constant along the `*` direction on
/// `I` once `I_*` is zero.
fn sweep_tuple(tri: &Face, star: FaceKind, b: FaceKind) -> (SevenTuple, (i64, i64)) {
    let e_star = tri.edge_of_kind(star).expect("triangle edge");
    let e_b = tri.edge_of_kind(b).expect("triangle edge");
    let v = common_vertex(&e_star, &e_b).expect("edges of one triangle meet");
    (SevenTuple::new([e_star, e_b, *tri], ADDITIVE, v), v)
}

/// Projects a vertex of `tri` along the `*` direction onto `e_b`.
fn project_vertex(w: (i64, i64), e_b: &Face, v: (i64, i64)) -> (i64, i64) {
    if e_b.grid_vertices().contains(&w) {
        w
    } else {
        v
    }
}

fn split_edge_tri_tri(tau: &SevenTuple) -> Result<(Vec<SevenTuple>, Vec<Face>), ReductionError> {
    const STEP: &str = "step3";
    let tris = tau.slots_by_dimension(2);
    let (si, sk) = (tris[0], tris[1]);
    let sj = tau.slots_by_dimension(1)[0];
    let (i, j, k) = (tau.faces[si], tau.faces[sj], tau.faces[sk]);
    let star = j.kind;
    let zeros = vec![j, i.edge_of_kind(star).expect("edge"), k.edge_of_kind(star).expect("edge")];
    let u0 = j.grid_vertices()[0];
    let verts = tau.f_vertices();
    for b in FaceKind::EDGES.into_iter().filter(|&b| b != star) {
        let (t1, vi) = sweep_tuple(&i, star, b);
        let (t2, vk) = sweep_tuple(&k, star, b);
        let (ib, kb) = (i.edge_of_kind(b).expect("edge"), k.edge_of_kind(b).expect("edge"));
        let image = |tr: &[(i64, i64); 3]| {
            let x = project_vertex(tr[si], &ib, vi);
            let z = project_vertex(tr[sk], &kb, vk);
            let mut pts = [(0, 0); 3];
            pts[si] = x;
            pts[sj] = u0;
            pts[sk] = z;
            pts.iter()
                .zip(tau.sigma)
                .fold((0, 0), |acc, (&p, sg)| add(acc, smul(i64::from(sg), p)))
        };
        let t3 = image(&verts[0]);
        if verts.iter().any(|tr| image(tr) != t3) {
            continue;
        }
        let mut faces = tau.faces;
        faces[si] = ib;
        faces[sj] = Face::point(u0.0, u0.1, tau.q());
        faces[sk] = kb;
        let tau3 = SevenTuple::new(faces, tau.sigma, t3);
        if !tau3.is_valid() {
            continue;
        }
        for t in [t1, t2] {
            if !t.is_valid() {
                return Err(ReductionError::InvalidRewrite { step: STEP, tuple: t });
            }
        }
        return Ok((vec![t1, t2, tau3], zeros));
    }
    Err(ReductionError::NoRewrite { step: STEP, tuple: *tau })
}

/// Splits every edge–triangle–triangle tuple into tuples with at most one
/// triangle, zeroing the edges parallel to the shared direction.
pub fn step3_split_edge_tri_tri(s: &mut PerturbationSpaceState) -> Result<bool, ReductionError> {
    let mut changed = false;
    while let Some(tau) = s.tuples.iter().find(|t| t.kind_class() == Some(5)).copied() {
        let (added, zeros) = split_edge_tri_tri(&tau)?;
        let mut rec = UpdateRecord::new("step3", UpdateKind::Equal);
        s.tuples.remove(&tau);
        rec.removed_tuples.push(tau);
        for z in &zeros {
            rec.zeros_added.extend(s.zero_closed(z));
        }
        for t in added {
            rec.added_tuples.push(s.insert_tuple(t, "step3")?);
        }
        s.lifts.push(rec);
        propagate_zeros(s);
        changed = true;
    }
    Ok(changed)
}

/// Replaces `I` by `K` in `τ'` using `τ = (I, {u}, K, σ, t)` given in that
/// slot order.
fn transfer(tau: &SevenTuple, other: &SevenTuple) -> SevenTuple {
    let [s1, s2, s3] = tau.sigma.map(i64::from);
    let (i, k) = (tau.faces[0], tau.faces[2]);
    let u = tau.faces[1].anchor;
    let mut out = *other;
    for slot in 0..3 {
        if out.faces[slot] != i {
            continue;
        }
        let mu = i64::from(out.sigma[slot]);
        out.faces[slot] = k;
        out.sigma[slot] = (-s1 * s3 * mu) as i8;
        out.t = add(sub(out.t, smul(mu * s1, tau.t)), smul(mu * s1 * s2, u));
    }
    out
}

fn is_trivial_self_map(tau: &SevenTuple, a: usize, b: usize) -> bool {
    tau.sigma[a] == -tau.sigma[b] && tau.f_vertices().iter().all(|tr| tr[a] == tr[b])
}

/// Removes one triangle of a triangle–point–triangle tuple from the domain.
fn remove_tri_point_tri(s: &mut PerturbationSpaceState, tau: SevenTuple) -> Result<(), ReductionError> {
    const STEP: &str = "step4";
    let tris = tau.slots_by_dimension(2);
    let (sa, sb) = (tris[0], tris[1]);
    let su = tau.slots_by_dimension(0)[0];
    if tau.faces[sa] == tau.faces[sb] {
        if !is_trivial_self_map(&tau, sa, sb) {
            return Err(ReductionError::NoRewrite { step: STEP, tuple: tau });
        }
        s.tuples.remove(&tau);
        let mut rec = UpdateRecord::new(STEP, UpdateKind::Equal);
        rec.removed_tuples.push(tau);
        s.lifts.push(rec);
        return Ok(());
    }
    let (si, sk) = if tau.faces[sa] > tau.faces[sb] { (sa, sb) } else { (sb, sa) };
    let ordered = tau.permuted([si, su, sk]);
    let (i, k) = (ordered.faces[0], ordered.faces[2]);
    let [s1, s2, s3] = ordered.sigma.map(i64::from);
    let u = ordered.faces[1].anchor;

    let mut rec = UpdateRecord::new(STEP, UpdateKind::Equivalent);
    s.tuples.remove(&tau);
    rec.removed_tuples.push(tau);
    for other in s.tuples_with(&i) {
        s.tuples.remove(&other);
        rec.removed_tuples.push(other);
        let moved = transfer(&ordered, &other);
        rec.added_tuples.push(s.insert_tuple(moved, STEP)?);
    }
    if s.zeros.remove(&i) {
        rec.zeros_removed.push(i);
        rec.zeros_added.extend(s.zero_closed(&k));
    }
    for kind in FaceKind::EDGES {
        let shadow = SevenTuple::new(
            [i.edge_of_kind(kind).expect("edge"), ordered.faces[1], k.edge_of_kind(kind).expect("edge")],
            ordered.sigma,
            ordered.t,
        );
        rec.added_tuples.push(s.insert_tuple(shadow, STEP)?);
    }
    s.domain.remove(&i);
    rec.domain_removed.push(i);
    let offset = smul(s3, sub(ordered.t, smul(s2, u)));
    rec.reconstruction = Some(Reconstruction::Reflect { face: i, scale: (-s1 * s3) as i8, offset });
    s.lifts.push(rec);
    Ok(())
}

/// Removes every triangle–point–triangle tuple by projecting triangles out
/// of the domain.
pub fn step4_project_tri_point_tri(s: &mut PerturbationSpaceState) -> Result<bool, ReductionError> {
    let mut changed = false;
    while let Some(tau) = s.tuples.iter().find(|t| t.kind_class() == Some(4)).copied() {
        remove_tri_point_tri(s, tau)?;
        propagate_zeros(s);
        changed = true;
    }
    Ok(changed)
}

/// A tuple `(K₁, K₂, K, (1,1,−1), v)` up to slot order, sign and `Z²`
/// shifts of the edges, where `K₁, K₂` are edges of `K` meeting at `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanonicalTriangleTuple {
    pub triangle: Face,
    pub edges: [Face; 2],
    pub vertex: (i64, i64),
}

/// Recognizes [`CanonicalTriangleTuple`]s.
pub fn as_canonical_triangle(tau: &SevenTuple) -> Option<CanonicalTriangleTuple> {
    if tau.kind_class() != Some(6) {
        return None;
    }
    let tau = if tau.sigma[tau.slots_by_dimension(2)[0]] == 1 { tau.negated() } else { *tau };
    let k = tau.slots_by_dimension(2)[0];
    let es = tau.slots_by_dimension(1);
    if es.iter().any(|&e| tau.sigma[e] != 1) {
        return None;
    }
    let q = i64::from(tau.q());
    let tri = tau.faces[k];
    let mut t = tau.t;
    let mut edges = [tri; 2];
    for (slot, e) in es.iter().zip(edges.iter_mut()) {
        let face = tau.faces[*slot];
        let lit = tri.edge_of_kind(face.kind)?;
        let (cf, sf) = face.canonical();
        let (cl, sl) = lit.canonical();
        if cf != cl {
            return None;
        }
        // face = lit + q·(sl − sf)
        t = sub(t, smul(q, sub(sl, sf)));
        *e = lit;
    }
    let v = common_vertex(&edges[0], &edges[1])?;
    (t == v).then_some(CanonicalTriangleTuple { triangle: tri, edges, vertex: v })
}

fn canonicalize_edge_edge_tri(tau: &SevenTuple) -> Result<Vec<SevenTuple>, ReductionError> {
    const STEP: &str = "step5a";
    let es = tau.slots_by_dimension(1);
    let (si, sj) = (es[0], es[1]);
    let sk = tau.slots_by_dimension(2)[0];
    let err = |_| ReductionError::NoRewrite { step: STEP, tuple: *tau };
    let t2 = crate::tuples::separate_edge_at(tau, si).map_err(err)?;
    let t3 = crate::tuples::separate_edge_at(tau, sj).map_err(err)?;
    let u_prime = t2.faces[sj].anchor;
    let u = t3.faces[si].anchor;
    let [sgi, sgj, sgk] = [si, sj, sk].map(|x| i64::from(tau.sigma[x]));
    let w = smul(sgk, sub(sub(tau.t, smul(sgj, u_prime)), smul(sgi, u)));
    let tri = tau.faces[sk];
    let t1 = SevenTuple::new([t2.faces[sk], t3.faces[sk], tri], ADDITIVE, w);
    if !t1.is_valid() {
        return Err(ReductionError::InvalidRewrite { step: STEP, tuple: t1 });
    }
    Ok(vec![t1, t2, t3])
}

/// Step 5: rewrites edge–edge–triangle tuples onto the triangle's own edges,
/// zeroes edges shared by two such tuples, and projects triangles with a
/// single tuple out of the domain.
pub fn step5_canonicalize(s: &mut PerturbationSpaceState) -> Result<bool, ReductionError> {
    let mut changed = false;
    while let Some(tau) = s
        .tuples
        .iter()
        .find(|t| t.kind_class() == Some(6) && as_canonical_triangle(t).is_none())
        .copied()
    {
        let added = canonicalize_edge_edge_tri(&tau)?;
        let mut rec = UpdateRecord::new("step5a", UpdateKind::Equal);
        s.tuples.remove(&tau);
        rec.removed_tuples.push(tau);
        for t in added {
            rec.added_tuples.push(s.insert_tuple(t, "step5a")?);
        }
        s.lifts.push(rec);
        propagate_zeros(s);
        changed = true;
    }
    Ok(changed)
}

fn canonical_groups(s: &PerturbationSpaceState) -> BTreeMap<Face, Vec<(SevenTuple, CanonicalTriangleTuple)>> {
    let mut groups: BTreeMap<Face, Vec<_>> = BTreeMap::new();
    for t in &s.tuples {
        if let Some(c) = as_canonical_triangle(t) {
            groups.entry(c.triangle).or_default().push((*t, c));
        }
    }
    groups
}

/// Step 5b: two canonical tuples on one triangle sharing an edge zero that
/// edge; a lone canonical tuple lets the triangle leave the domain.
pub fn step5_dedupe_and_project(s: &mut PerturbationSpaceState) -> Result<bool, ReductionError> {
    let mut changed = false;
    'outer: loop {
        for group in canonical_groups(s).values() {
            for (a, (_, ca)) in group.iter().enumerate() {
                for (tb, cb) in &group[a + 1..] {
                    let Some(shared) = ca.edges.iter().find(|e| cb.edges.contains(e)) else {
                        continue;
                    };
                    let mut rec = UpdateRecord::new("step5b-i", UpdateKind::Equal);
                    s.tuples.remove(tb);
                    rec.removed_tuples.push(*tb);
                    rec.zeros_added.extend(s.zero_closed(shared));
                    s.lifts.push(rec);
                    propagate_zeros(s);
                    changed = true;
                    continue 'outer;
                }
            }
        }
        break;
    }
    for (tri, group) in canonical_groups(s) {
        let [(tau, c)] = group.as_slice() else {
            continue;
        };
        if s.tuples_with(&tri).len() != 1 || s.zeros.contains(&tri) {
            continue;
        }
        let third = tri
            .facets()
            .into_iter()
            .find(|e| !c.edges.contains(e))
            .expect("a triangle has three edges");
        let mut rec = UpdateRecord::new("step5b-ii", UpdateKind::Equivalent);
        s.tuples.remove(tau);
        rec.removed_tuples.push(*tau);
        let replaced = SevenTuple::new([c.edges[0], c.edges[1], third], ADDITIVE, c.vertex);
        rec.added_tuples.push(s.insert_tuple(replaced, "step5b-ii")?);
        s.domain.remove(&tri);
        rec.domain_removed.push(tri);
        let far = |e: &Face| {
            let other = e.grid_vertices().into_iter().find(|w| *w != c.vertex).expect("edge");
            sub(other, c.vertex)
        };
        rec.reconstruction = Some(Reconstruction::Separable {
            face: tri,
            vertex: c.vertex,
            d1: far(&c.edges[0]),
            d2: far(&c.edges[1]),
        });
        s.lifts.push(rec);
        propagate_zeros(s);
        changed = true;
    }
    Ok(changed)
}

/// Runs Steps 1–5 to a fixpoint.
pub fn reduce(s: &mut PerturbationSpaceState) -> Result<(), ReductionError> {
    propagate_zeros(s);
    loop {
        let mut changed = step1_drop_point_triples(s);
        changed |= step2_fulldim_to_zeros(s);
        changed |= step3_split_edge_tri_tri(s)?;
        changed |= step4_project_tri_point_tri(s)?;
        changed |= step5_canonicalize(s)?;
        changed |= step5_dedupe_and_project(s)?;
        changed |= propagate_zeros(s);
        if !changed {
            return Ok(());
        }
    }
}

/// Outcome of Step 6.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// No perturbation survives.
    Extreme,
    /// A triangle of the domain is touched by no relation.
    FreeTriangle(Face),
    /// The edge system has a nonzero solution.
    EdgeSystem { system: SystemSpec, slots: SlotDictionary, solution: FiniteSolution },
}

/// Step 6: decides nontriviality once only edge relations remain.
pub fn step6_decide(s: &PerturbationSpaceState, m: u32) -> Result<Decision, ReductionError> {
    if m < 3 {
        return Err(ReductionError::SmallM(m));
    }
    if let Some(t) = s.tuples.iter().find(|t| !matches!(t.kind_class(), Some(2) | Some(3))) {
        return Err(ReductionError::Incomplete(*t));
    }
    if let Some(tri) = s.domain.iter().find(|f| f.kind.is_triangle() && !s.zeros.contains(f)) {
        return Ok(Decision::FreeTriangle(*tri));
    }
    let free: Vec<Face> = s
        .domain
        .iter()
        .filter(|f| f.kind.is_edge() && !s.zeros.contains(f))
        .copied()
        .collect();
    let tuples: Vec<SevenTuple> = s.tuples.iter().copied().collect();
    let (system, slots) = tuples_to_system(&tuples, &s.zeros, &free).map_err(|_| {
        ReductionError::Incomplete(tuples[0])
    })?;
    if system.ell == 0 {
        return Ok(Decision::Extreme);
    }
    let kernel = solve_finite(&system, m).map_err(|_| ReductionError::SmallM(m))?;
    match kernel.into_iter().next() {
        None => Ok(Decision::Extreme),
        Some(solution) => Ok(Decision::EdgeSystem { system, slots, solution }),
    }
}

/// Closed region of a face scaled to `(1/(mq))Z²`.
fn fine_region(f: &Face, m: u32) -> Region {
    Region { b: f.region().b.map(|v| v * i64::from(m)) }
}

/// Points of `(1/(mq))Z²` in the closed face, in fine grid units.
pub fn fine_points(f: &Face, m: u32) -> Vec<(i64, i64)> {
    let r = fine_region(f, m);
    let mi = i64::from(m);
    let vs = f.grid_vertices();
    let (x0, x1) = (vs.iter().map(|v| v.0).min().unwrap() * mi, vs.iter().map(|v| v.0).max().unwrap() * mi);
    let (y0, y1) = (vs.iter().map(|v| v.1).min().unwrap() * mi, vs.iter().map(|v| v.1).max().unwrap() * mi);
    let mut out = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            if r.contains_point((x, y)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Fine grid points in the relative interior of a triangle.
fn fine_interior(f: &Face, m: u32) -> Vec<(i64, i64)> {
    let r = fine_region(f, m);
    fine_points(f, m)
        .into_iter()
        .filter(|&(x, y)| {
            crate::lattice::A_MATRIX
                .iter()
                .zip(r.b)
                .all(|(a, b)| a[0] * x + a[1] * y < b)
        })
        .collect()
}

/// The smallest face of `P_q`, reduced modulo `Z²`, containing the fine point.
pub fn minimal_face(p: (i64, i64), q: u32, m: u32) -> Face {
    let mi = i64::from(m);
    let (a, fx) = (p.0.div_euclid(mi), p.0.rem_euclid(mi));
    let (b, fy) = (p.1.div_euclid(mi), p.1.rem_euclid(mi));
    let kind = match (fx, fy) {
        (0, 0) => FaceKind::Point,
        (_, 0) => FaceKind::EdgeH,
        (0, _) => FaceKind::EdgeV,
        _ => match (fx + fy).cmp(&mi) {
            std::cmp::Ordering::Equal => FaceKind::EdgeD,
            std::cmp::Ordering::Less => FaceKind::TriLower,
            std::cmp::Ordering::Greater => FaceKind::TriUpper,
        },
    };
    canon(&Face::new(kind, (a, b), q))
}

/// The perturbation on `(1/(mq))Z²` described by a decision, before lifting.
fn state_perturbation(s: &PerturbationSpaceState, d: &Decision, m: u32) -> GridFunction {
    let mi = i64::from(m);
    let mut g = GridFunction::zeros(s.q * m, 2);
    match d {
        Decision::Extreme => {}
        Decision::FreeTriangle(tri) => {
            let (a, b) = tri.anchor;
            let p = if tri.kind == FaceKind::TriLower {
                (a * mi + 1, b * mi + 1)
            } else {
                (a * mi + mi - 1, b * mi + mi - 1)
            };
            g.set(p.0, p.1, Rational::one());
        }
        Decision::EdgeSystem { slots, solution, .. } => {
            let profiles = lift_pwl(solution);
            for (e, prof) in slots.edges.iter().zip(&profiles) {
                let (start, dir) = e.edge_param().expect("slots are edges");
                for k in 0..=mi {
                    let p = add(smul(mi, start), smul(k, dir));
                    g.set(p.0, p.1, prof.eval(&rat(k, mi)));
                }
            }
        }
    }
    g
}

/// Replays the recorded reconstructions backwards, filling the interiors of
/// every face removed from the domain.
pub fn replay_lifts(s: &PerturbationSpaceState, mut g: GridFunction, m: u32) -> GridFunction {
    let mi = i64::from(m);
    for rec in s.lifts.iter().rev() {
        match &rec.reconstruction {
            None => {}
            Some(Reconstruction::Reflect { face, scale, offset }) => {
                let sc = i64::from(*scale);
                for x in fine_interior(face, m) {
                    let y = add(smul(sc, x), smul(mi, *offset));
                    let v = g.get(y.0, y.1) * int(sc);
                    g.set(x.0, x.1, v);
                }
            }
            Some(Reconstruction::Separable { face, vertex, d1, d2 }) => {
                let v = smul(mi, *vertex);
                let det = d1.0 * d2.1 - d1.1 * d2.0;
                for z in fine_interior(face, m) {
                    let r = sub(z, v);
                    let a = (r.0 * d2.1 - r.1 * d2.0) / det;
                    let b = (d1.0 * r.1 - d1.1 * r.0) / det;
                    let x = add(v, smul(a, *d1));
                    let y = add(v, smul(b, *d2));
                    let val = g.get(x.0, x.1) + g.get(y.0, y.1);
                    g.set(z.0, z.1, val);
                }
            }
        }
    }
    g
}

/// Final verdict of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Extreme,
    NotExtreme,
}

/// Where a certificate came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateSource {
    /// Interpolation of a perturbation that is nonzero on `(1/q)Z²`.
    Vertex,
    FreeTriangle(Face),
    EdgeSystem { components: usize, equations: usize },
}

/// A nonzero perturbation on `(1/(mq))Z²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub m: u32,
    pub source: CertificateSource,
    pub perturbation: GridFunction,
}

/// Result of [`run_pipeline`].
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub state: PerturbationSpaceState,
}

/// Steps 1–6 followed by lifting the perturbation back to the full domain.
pub fn run_pipeline(pi: &PwlFunction, m: u32) -> Result<PipelineOutcome, ReductionError> {
    if m < 3 {
        return Err(ReductionError::SmallM(m));
    }
    let mut state = init_state(pi)?;
    if let Some(g) = vertex_perturbation(pi) {
        let perturbation = crate::pwl::interpolate(&g).restrict(m);
        return Ok(PipelineOutcome {
            verdict: Verdict::NotExtreme,
            certificate: Some(Certificate { m, source: CertificateSource::Vertex, perturbation }),
            state,
        });
    }
    reduce(&mut state)?;
    let decision = step6_decide(&state, m)?;
    let source = match &decision {
        Decision::Extreme => {
            return Ok(PipelineOutcome { verdict: Verdict::Extreme, certificate: None, state });
        }
        Decision::FreeTriangle(f) => CertificateSource::FreeTriangle(*f),
        Decision::EdgeSystem { system, .. } => {
            CertificateSource::EdgeSystem { components: system.ell, equations: system.equations.len() }
        }
    };
    let perturbation = replay_lifts(&state, state_perturbation(&state, &decision, m), m);
    Ok(PipelineOutcome {
        verdict: Verdict::NotExtreme,
        certificate: Some(Certificate { m, source, perturbation }),
        state,
    })
}

/// A perturbation of the finite problem on `(1/q)Z²`, if one exists.
/// Zeros on the vertices may only be imposed once this returns `None`.
fn vertex_perturbation(pi: &PwlFunction) -> Option<GridFunction> {
    let kernel = extremality_kernel(&FiniteProblem::from_pwl(pi, 1)).ok()?;
    kernel.basis.into_iter().next()
}

/// Errors raised by [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("the perturbation is zero")]
    Trivial,
    #[error("the perturbation lives on (1/{found})Z², expected (1/{expected})Z²")]
    WrongGrid { expected: u32, found: u32 },
    #[error("the function carries no f")]
    MissingF,
    #[error("no ε in {{1, 1/2, …, 2^-20}} keeps both π ± επ̄ minimal")]
    NoEpsilon,
}

/// Largest `ε = 2⁻ᵏ`, `k ≤ 20`, such that `π ± ε·π̄` are both minimal on
/// `(1/(mq))Z²`.
pub fn verify_certificate(pi: &PwlFunction, pibar: &GridFunction, m: u32) -> Result<Rational, CertificateError> {
    if pibar.is_zero() {
        return Err(CertificateError::Trivial);
    }
    let n = pi.q() * m;
    if pibar.n != n || pibar.dims != 2 {
        return Err(CertificateError::WrongGrid { expected: n, found: pibar.n });
    }
    let f = pi.f_grid().ok_or(CertificateError::MissingF)?;
    let mi = i64::from(m);
    let base = pi.restrict(m);
    let minimal = |c: &Rational| {
        let g = base.add_scaled(c, pibar);
        let p = FiniteProblem::two_row(g, (f.0 * mi, f.1 * mi)).expect("f off the origin");
        finite_minimality(&p).minimal
    };
    let mut eps = Rational::one();
    for _ in 0..=20 {
        if minimal(&eps) && minimal(&-eps.clone()) {
            return Ok(eps);
        }
        eps /= int(2);
    }
    Err(CertificateError::NoEpsilon)
}

/// The linear constraints of a state on `(1/(mq))Z²`: unknowns are grid
/// points of `⋃P`; rows are zeros on `Z` and additivity at every grid point
/// of each `F(τ)`.
#[derive(Clone, Debug)]
pub struct GridSystem {
    pub n: u32,
    /// Grid flat index of each unknown.
    pub unknowns: Vec<usize>,
    pub rows: Vec<SparseRow>,
}

impl GridSystem {
    /// Exact kernel dimension.
    pub fn kernel_dimension(&self) -> usize {
        sparse_kernel(self.unknowns.len(), &self.rows).len()
    }

    /// Whether a grid function satisfies every row.
    pub fn satisfied_by(&self, g: &GridFunction) -> bool {
        self.rows.iter().all(|r| {
            r.iter()
                .map(|&(c, a)| &g.values[self.unknowns[c]] * int(a))
                .sum::<Rational>()
                .is_zero()
        })
    }
}

/// Builds the [`GridSystem`] of a state.
pub fn grid_system(s: &PerturbationSpaceState, m: u32) -> GridSystem {
    let q = s.q;
    let n = q * m;
    let ni = i64::from(n);
    let mi = i64::from(m);
    let grid = GridFunction::zeros(n, 2);
    let mut column = vec![None; grid.len()];
    let mut unknowns = Vec::new();
    let mut rows: Vec<SparseRow> = Vec::new();
    for i in 0..ni {
        for j in 0..ni {
            let face = minimal_face((i, j), q, m);
            if !s.domain.contains(&face) {
                continue;
            }
            let k = grid.index(i, j);
            column[k] = Some(unknowns.len());
            if s.zeros.contains(&face) {
                rows.push(vec![(unknowns.len(), 1)]);
            }
            unknowns.push(k);
        }
    }
    let col = |p: (i64, i64)| column[grid.index(p.0, p.1)].expect("tuple point outside the domain");
    for tau in &s.tuples {
        let [s1, s2, s3] = tau.sigma.map(i64::from);
        let r3 = fine_region(&tau.faces[2], m);
        let p2 = fine_points(&tau.faces[1], m);
        for x1 in fine_points(&tau.faces[0], m) {
            for &x2 in &p2 {
                let rest = sub(sub(smul(mi, tau.t), smul(s1, x1)), smul(s2, x2));
                let x3 = smul(s3, rest);
                if !r3.contains_point(x3) {
                    continue;
                }
                let mut row: SparseRow = Vec::with_capacity(3);
                for (p, sg) in [(x1, s1), (x2, s2), (x3, s3)] {
                    let c = col(p);
                    match row.iter_mut().find(|e| e.0 == c) {
                        Some(e) => e.1 += sg,
                        None => row.push((c, sg)),
                    }
                }
                row.retain(|e| e.1 != 0);
                if !row.is_empty() {
                    row.sort_unstable();
                    rows.push(row);
                }
            }
        }
    }
    rows.sort();
    rows.dedup();
    GridSystem { n, unknowns, rows }
}
