//! Points, faces and Minkowski arithmetic of the standard triangulation `P_q`.
//!
//! `P_q` cuts the plane along the lines `x = b`, `y = b` and `x + y = b` for
//! `b ∈ (1/q)Z`. Its faces are vertices, edges in three directions and two
//! kinds of triangles. A face is stored combinatorially as a [`FaceKind`] plus
//! an integer anchor `(a, b)`: the face is the canonical face of that kind
//! translated by `(a/q, b/q)`.
//!
//! Internally all geometry runs in *grid units* (coordinates multiplied by
//! `q`), where every face vertex is an integer point. Sets cut out by the six
//! inequalities of [`A_MATRIX`] are handled by [`Region`], which is closed
//! under Minkowski sums, negation, translation and intersection.

use crate::rational::{floor_i64, int, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised by lattice constructors.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("the lattice resolution q must be positive")]
    ZeroResolution,
    #[error("faces with different resolutions ({0} and {1}) cannot be combined")]
    MixedResolution(u32, u32),
}

/// A point of `Q²`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub x: Rational,
    pub y: Rational,
}

impl LatticePoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(int(0), int(0))
    }

    /// The point `(i/q, j/q)`.
    pub fn on_grid(i: i64, j: i64, q: u32) -> Self {
        let q = i64::from(q);
        Self::new(crate::rational::rat(i, q), crate::rational::rat(j, q))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.x, -&self.y)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(&self.x * c, &self.y * c)
    }

    /// Representative in `[0,1)²`.
    pub fn reduce_mod_lattice(&self) -> Self {
        Self::new(&self.x - self.x.floor(), &self.y - self.y.floor())
    }

    /// Integer grid coordinates if the point lies in `(1/q)Z²`.
    pub fn grid_coords(&self, q: u32) -> Option<(i64, i64)> {
        let q = int(i64::from(q));
        let x = &self.x * &q;
        let y = &self.y * &q;
        (x.is_integer() && y.is_integer()).then(|| (floor_i64(&x), floor_i64(&y)))
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rational::Frac;
        write!(f, "({}, {})", Frac(&self.x), Frac(&self.y))
    }
}

/// The six kinds of faces of `P_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FaceKind {
    Point,
    EdgeV,
    EdgeH,
    EdgeD,
    TriLower,
    TriUpper,
}

impl FaceKind {
    pub const ALL: [FaceKind; 6] = [
        FaceKind::Point,
        FaceKind::EdgeV,
        FaceKind::EdgeH,
        FaceKind::EdgeD,
        FaceKind::TriLower,
        FaceKind::TriUpper,
    ];

    pub const EDGES: [FaceKind; 3] = [FaceKind::EdgeV, FaceKind::EdgeH, FaceKind::EdgeD];

    pub fn dimension(self) -> usize {
        match self {
            FaceKind::Point => 0,
            FaceKind::EdgeV | FaceKind::EdgeH | FaceKind::EdgeD => 1,
            FaceKind::TriLower | FaceKind::TriUpper => 2,
        }
    }

    pub fn is_point(self) -> bool {
        self == FaceKind::Point
    }

    pub fn is_edge(self) -> bool {
        self.dimension() == 1
    }

    pub fn is_triangle(self) -> bool {
        self.dimension() == 2
    }

    /// Direction of an edge kind in grid units, oriented from its start vertex.
    pub fn edge_direction(self) -> Option<(i64, i64)> {
        match self {
            FaceKind::EdgeH => Some((1, 0)),
            FaceKind::EdgeV => Some((0, 1)),
            FaceKind::EdgeD => Some((-1, 1)),
            _ => None,
        }
    }
}

/// Rows of the matrix `A` whose half-planes `A x ≤ b` describe every face.
pub const A_MATRIX: [[i64; 2]; 6] = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]];

/// A face of `P_q`: `kind` translated by `anchor / q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face {
    pub kind: FaceKind,
    pub anchor: (i64, i64),
    pub q: u32,
}

impl Face {
    /// # Panics
    ///
    /// Panics if `q == 0`.
    pub fn new(kind: FaceKind, anchor: (i64, i64), q: u32) -> Self {
        assert!(q > 0, "q must be positive");
        Self { kind, anchor, q }
    }

    pub fn point(a: i64, b: i64, q: u32) -> Self {
        Self::new(FaceKind::Point, (a, b), q)
    }

    /// Vertices in grid units.
    pub fn grid_vertices(&self) -> Vec<(i64, i64)> {
        let (a, b) = self.anchor;
        match self.kind {
            FaceKind::Point => vec![(a, b)],
            FaceKind::EdgeH => vec![(a, b), (a + 1, b)],
            FaceKind::EdgeV => vec![(a, b), (a, b + 1)],
            FaceKind::EdgeD => vec![(a + 1, b), (a, b + 1)],
            FaceKind::TriLower => vec![(a, b), (a + 1, b), (a, b + 1)],
            FaceKind::TriUpper => vec![(a + 1, b), (a, b + 1), (a + 1, b + 1)],
        }
    }

    /// Vertices as points of `(1/q)Z²`.
    pub fn vertices(&self) -> Vec<LatticePoint> {
        self.grid_vertices()
            .into_iter()
            .map(|(i, j)| LatticePoint::on_grid(i, j, self.q))
            .collect()
    }

    /// Translation by an integer vector in grid units.
    pub fn translate(&self, d: (i64, i64)) -> Self {
        Self::new(self.kind, (self.anchor.0 + d.0, self.anchor.1 + d.1), self.q)
    }

    /// Representative with anchor in `{0,…,q−1}²` together with the `Z²`
    /// shift `s` such that `canonical.anchor = anchor + q·s`.
    pub fn canonical(&self) -> (Self, (i64, i64)) {
        let q = i64::from(self.q);
        let (a, b) = self.anchor;
        let (sa, sb) = (-a.div_euclid(q), -b.div_euclid(q));
        (self.translate((q * sa, q * sb)), (sa, sb))
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical().1 == (0, 0)
    }

    /// The reflected face `−I`.
    pub fn negate(&self) -> Self {
        Region::from_face(self)
            .neg()
            .as_face(self.q)
            .expect("the negative of a face is a face")
    }

    /// Start vertex and direction of an edge in grid units.
    pub fn edge_param(&self) -> Option<((i64, i64), (i64, i64))> {
        let d = self.kind.edge_direction()?;
        Some((self.grid_vertices()[0], d))
    }

    /// The three edges of a triangle, or the two endpoints of an edge.
    pub fn facets(&self) -> Vec<Face> {
        let (a, b) = self.anchor;
        let q = self.q;
        match self.kind {
            FaceKind::Point => vec![],
            FaceKind::TriLower => vec![
                Face::new(FaceKind::EdgeV, (a, b), q),
                Face::new(FaceKind::EdgeH, (a, b), q),
                Face::new(FaceKind::EdgeD, (a, b), q),
            ],
            FaceKind::TriUpper => vec![
                Face::new(FaceKind::EdgeV, (a + 1, b), q),
                Face::new(FaceKind::EdgeH, (a, b + 1), q),
                Face::new(FaceKind::EdgeD, (a, b), q),
            ],
            _ => self
                .grid_vertices()
                .into_iter()
                .map(|(i, j)| Face::point(i, j, q))
                .collect(),
        }
    }

    /// The edge of a triangle with the given edge kind.
    pub fn edge_of_kind(&self, kind: FaceKind) -> Option<Face> {
        if !self.kind.is_triangle() {
            return None;
        }
        self.facets().into_iter().find(|e| e.kind == kind)
    }

    /// All faces of this face, itself included.
    pub fn subfaces(&self) -> Vec<Face> {
        let mut out = vec![*self];
        for f in self.facets() {
            for g in f.subfaces() {
                if !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        out
    }

    /// Right-hand side `b ∈ (1/q)Z⁶` with `face = {x : A x ≤ b}`.
    pub fn inequality_rhs(&self) -> [Rational; 6] {
        let r = Region::from_face(self);
        let q = i64::from(self.q);
        r.b.map(|v| crate::rational::rat(v, q))
    }

    /// Whether the rational point `p` lies in the closed face.
    pub fn contains(&self, p: &LatticePoint) -> bool {
        let q = int(i64::from(self.q));
        Region::from_face(self).contains_rational(&(&p.x * &q), &(&p.y * &q))
    }

    pub(crate) fn region(&self) -> Region {
        Region::from_face(self)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({}, {})/{}", self.kind, self.anchor.0, self.anchor.1, self.q)
    }
}

/// Recovers a face from its vertex set in grid units.
pub fn face_from_grid_vertices(vs: &[(i64, i64)], q: u32) -> Option<Face> {
    let mut vs = vs.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let cand = match vs.len() {
        1 => Face::point(vs[0].0, vs[0].1, q),
        2 => {
            let (p, r) = (vs[0], vs[1]);
            match (r.0 - p.0, r.1 - p.1) {
                (1, 0) => Face::new(FaceKind::EdgeH, p, q),
                (0, 1) => Face::new(FaceKind::EdgeV, p, q),
                (1, -1) => Face::new(FaceKind::EdgeD, (p.0, r.1), q),
                _ => return None,
            }
        }
        3 => {
            let xmin = vs.iter().map(|v| v.0).min()?;
            let ymin = vs.iter().map(|v| v.1).min()?;
            let lower = Face::new(FaceKind::TriLower, (xmin, ymin), q);
            let upper = Face::new(FaceKind::TriUpper, (xmin, ymin), q);
            if vs.contains(&(xmin, ymin)) {
                lower
            } else {
                upper
            }
        }
        _ => return None,
    };
    let mut cv = cand.grid_vertices();
    cv.sort_unstable();
    (cv == vs).then_some(cand)
}

/// A polygon `{x : A x ≤ b}` in grid units with tight right-hand side.
///
/// Tight means every inequality is attained, so Minkowski sums are computed
/// by adding right-hand sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub b: [i64; 6],
}

impl Region {
    pub fn from_face(f: &Face) -> Self {
        Self::hull(&f.grid_vertices())
    }

    /// Smallest region containing the given integer points.
    pub fn hull(points: &[(i64, i64)]) -> Self {
        let mut b = [i64::MIN; 6];
        for &(x, y) in points {
            for (k, row) in A_MATRIX.iter().enumerate() {
                b[k] = b[k].max(row[0] * x + row[1] * y);
            }
        }
        Self { b }
    }

    pub fn minkowski(&self, other: &Self) -> Self {
        let mut b = self.b;
        for (v, w) in b.iter_mut().zip(other.b) {
            *v += w;
        }
        Self { b }
    }

    pub fn neg(&self) -> Self {
        let b = self.b;
        Self { b: [b[1], b[0], b[3], b[2], b[5], b[4]] }
    }

    /// `s · R` for `s = ±1`.
    pub fn signed(&self, s: i8) -> Self {
        if s < 0 {
            self.neg()
        } else {
            *self
        }
    }

    pub fn translate(&self, d: (i64, i64)) -> Self {
        let mut b = self.b;
        for (k, row) in A_MATRIX.iter().enumerate() {
            b[k] += row[0] * d.0 + row[1] * d.1;
        }
        Self { b }
    }

    /// Intersection, or `None` when empty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let mut b = self.b;
        for (v, w) in b.iter_mut().zip(other.b) {
            *v = (*v).min(w);
        }
        Self { b }.tighten()
    }

    /// Bound propagation to the tight form; `None` when infeasible.
    pub fn tighten(&self) -> Option<Self> {
        let [mut xmax, xm, mut ymax, ym, mut smax, sm] = self.b;
        let (mut xmin, mut ymin, mut smin) = (-xm, -ym, -sm);
        loop {
            let before = (xmax, xmin, ymax, ymin, smax, smin);
            xmax = xmax.min(smax - ymin);
            xmin = xmin.max(smin - ymax);
            ymax = ymax.min(smax - xmin);
            ymin = ymin.max(smin - xmax);
            smax = smax.min(xmax + ymax);
            smin = smin.max(xmin + ymin);
            if xmin > xmax || ymin > ymax || smin > smax {
                return None;
            }
            if before == (xmax, xmin, ymax, ymin, smax, smin) {
                return Some(Self { b: [xmax, -xmin, ymax, -ymin, smax, -smin] });
            }
        }
    }

    pub fn contains_point(&self, p: (i64, i64)) -> bool {
        A_MATRIX
            .iter()
            .zip(self.b)
            .all(|(row, bk)| row[0] * p.0 + row[1] * p.1 <= bk)
    }

    pub fn contains_rational(&self, x: &Rational, y: &Rational) -> bool {
        A_MATRIX.iter().zip(self.b).all(|(row, bk)| {
            int(row[0]) * x + int(row[1]) * y <= int(bk)
        })
    }

    /// Vertices of the polygon (tight form assumed).
    pub fn vertices(&self) -> Vec<(i64, i64)> {
        let [xmax, xm, ymax, ym, smax, sm] = self.b;
        let (xs, ys, ss) = ([-xm, xmax], [-ym, ymax], [-sm, smax]);
        let mut out = Vec::new();
        for &x in &xs {
            for &y in &ys {
                out.push((x, y));
            }
            for &s in &ss {
                out.push((x, s - x));
            }
        }
        for &y in &ys {
            for &s in &ss {
                out.push((s - y, y));
            }
        }
        out.retain(|p| self.contains_point(*p));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The face of `P_q` equal to this region, if it is a single face.
    pub fn as_face(&self, q: u32) -> Option<Face> {
        face_from_grid_vertices(&self.vertices(), q)
    }

    /// All faces of `P_q` contained in the region; this set is closed under
    /// taking subfaces and its union is the region.
    pub fn faces_inside(&self, q: u32) -> BTreeSet<Face> {
        let [xmax, xm, ymax, ym, ..] = self.b;
        let mut out = BTreeSet::new();
        for a in (-xm - 1)..=xmax {
            for b in (-ym - 1)..=ymax {
                for kind in FaceKind::ALL {
                    let f = Face::new(kind, (a, b), q);
                    if f.grid_vertices().iter().all(|v| self.contains_point(*v)) {
                        out.insert(f);
                    }
                }
            }
        }
        out
    }
}

/// A finite set of faces sharing one resolution `q`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaceSet {
    pub q: u32,
    members: BTreeSet<Face>,
    subface_closed: bool,
}

impl FaceSet {
    pub fn new(q: u32) -> Self {
        Self { q, members: BTreeSet::new(), subface_closed: true }
    }

    /// Builds a set and records whether it is closed under subfaces.
    pub fn from_faces(q: u32, faces: impl IntoIterator<Item = Face>) -> Self {
        let members: BTreeSet<Face> = faces.into_iter().collect();
        debug_assert!(members.iter().all(|f| f.q == q));
        let mut s = Self { q, members, subface_closed: false };
        s.subface_closed = s.verify_closed();
        s
    }

    pub fn insert(&mut self, f: Face) -> bool {
        let added = self.members.insert(f);
        if added && f.kind != FaceKind::Point {
            self.subface_closed = self.verify_closed();
        }
        added
    }

    /// Inserts `f` together with all of its subfaces.
    pub fn insert_closed(&mut self, f: Face) {
        for g in f.subfaces() {
            self.members.insert(g);
        }
    }

    pub fn remove(&mut self, f: &Face) -> bool {
        let removed = self.members.remove(f);
        if removed {
            self.subface_closed = self.verify_closed();
        }
        removed
    }

    pub fn contains(&self, f: &Face) -> bool {
        self.members.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Face> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subface_closed(&self) -> bool {
        self.subface_closed
    }

    /// Checks closure under subfaces directly.
    pub fn verify_closed(&self) -> bool {
        self.members
            .iter()
            .all(|f| f.facets().iter().all(|g| self.members.contains(g)))
    }

    /// Members not contained in any other member.
    pub fn maximal(&self) -> Vec<Face> {
        self.members
            .iter()
            .filter(|f| {
                !self
                    .members
                    .iter()
                    .any(|g| g != *f && g.subfaces().contains(f))
            })
            .copied()
            .collect()
    }

    pub fn count_kind(&self, pred: impl Fn(FaceKind) -> bool) -> usize {
        self.members.iter().filter(|f| pred(f.kind)).count()
    }
}

/// All faces of `P_q` with anchor in `{0,…,q−1}²`: `q²` points, `3q²` edges
/// and `2q²` triangles. The empty face is not a member.
pub fn enumerate_fundamental_faces(q: u32) -> Result<FaceSet, LatticeError> {
    if q == 0 {
        return Err(LatticeError::ZeroResolution);
    }
    let qi = i64::from(q);
    let mut faces = BTreeSet::new();
    for a in 0..qi {
        for b in 0..qi {
            for kind in FaceKind::ALL {
                faces.insert(Face::new(kind, (a, b), q));
            }
        }
    }
    Ok(FaceSet { q, members: faces, subface_closed: false })
}

/// `−I` as a subface-closed union of faces.
pub fn negate_face(f: &Face) -> FaceSet {
    FaceSet::from_faces(f.q, f.region().neg().faces_inside(f.q))
}

/// `I + J` as a subface-closed union of faces.
pub fn minkowski_sum(f: &Face, g: &Face) -> Result<FaceSet, LatticeError> {
    if f.q != g.q {
        return Err(LatticeError::MixedResolution(f.q, g.q));
    }
    let r = f.region().minkowski(&g.region());
    Ok(FaceSet::from_faces(f.q, r.faces_inside(f.q)))
}

/// The unique minimal face of `P_q` containing `p`.
pub fn face_containing(p: &LatticePoint, q: u32) -> Face {
    let qr = int(i64::from(q));
    let (x, y) = (&p.x * &qr, &p.y * &qr);
    let (a, b) = (floor_i64(&x), floor_i64(&y));
    let fx = x - int(a);
    let fy = y - int(b);
    let zero = int(0);
    let kind = match (fx == zero, fy == zero) {
        (true, true) => FaceKind::Point,
        (false, true) => FaceKind::EdgeH,
        (true, false) => FaceKind::EdgeV,
        (false, false) => {
            let s = &fx + &fy;
            match s.cmp(&int(1)) {
                std::cmp::Ordering::Equal => FaceKind::EdgeD,
                std::cmp::Ordering::Less => FaceKind::TriLower,
                std::cmp::Ordering::Greater => FaceKind::TriUpper,
            }
        }
    };
    Face::new(kind, (a, b), q)
}

/// [`Face::canonical`] as a free function.
pub fn canonical_mod_lattice(f: &Face) -> (Face, (i64, i64)) {
    f.canonical()
}
