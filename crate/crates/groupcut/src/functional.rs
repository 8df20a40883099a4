//! Functional equations on the symmetric domain `[0,1]`.
//!
//! A system has `ℓ` unknown functions `f(·, i)` on `[0,1]` and equations
//!
//! ```text
//! Δ_k f(x) = Σ_{i ∈ I_k} a_i f(x, i) + Σ_{j ∈ J_k} b_j f(1 − x, j) = 0   for all x,
//! ```
//!
//! with `f(0, i) = f(1, i) = 0`. Component indices are 0-based. The system
//! has a nonzero solution iff its restriction to `{1/m, (m−1)/m}` does, for
//! any `m ≥ 3`, and a finite solution lifts to a continuous one by linear
//! interpolation over `{0, 1/m, (m−1)/m, 1}`.

use crate::lattice::Face;
use crate::linalg::nullspace;
use crate::rational::{int, rat, Rational};
use crate::tuples::SevenTuple;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Errors raised by functional systems.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("component {index} out of range for {ell} functions")]
    IndexOutOfRange { index: usize, ell: usize },
    #[error("a system needs at least one equation")]
    NoEquations,
    #[error("equation {0} does not exist")]
    NoSuchEquation(usize),
    #[error("f is undefined at ({x}, {i})")]
    Undefined { x: Rational, i: usize },
    #[error("m must be at least 3, got {0}")]
    SmallM(u32),
    #[error("7-tuple {0} is not an edge relation")]
    NotEdgeTuple(SevenTuple),
}

/// One equation: `a` maps components evaluated at `x`, `b` components
/// evaluated at `1 − x`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Equation {
    pub a: BTreeMap<usize, Rational>,
    pub b: BTreeMap<usize, Rational>,
}

impl Equation {
    pub fn new(
        a: impl IntoIterator<Item = (usize, Rational)>,
        b: impl IntoIterator<Item = (usize, Rational)>,
    ) -> Self {
        let mut e = Self::default();
        for (i, c) in a {
            e.add_a(i, c);
        }
        for (j, c) in b {
            e.add_b(j, c);
        }
        e
    }

    fn bump(map: &mut BTreeMap<usize, Rational>, i: usize, c: Rational) {
        let v = map.entry(i).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            map.remove(&i);
        }
    }

    pub fn add_a(&mut self, i: usize, c: Rational) {
        Self::bump(&mut self.a, i, c);
    }

    pub fn add_b(&mut self, j: usize, c: Rational) {
        Self::bump(&mut self.b, j, c);
    }

    pub fn is_trivial(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }
}

/// A system `F(D)` with `ℓ` components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub ell: usize,
    pub equations: Vec<Equation>,
}

impl SystemSpec {
    pub fn new(ell: usize, equations: Vec<Equation>) -> Result<Self, SystemError> {
        if equations.is_empty() {
            return Err(SystemError::NoEquations);
        }
        for e in &equations {
            for &i in e.a.keys().chain(e.b.keys()) {
                if i >= ell {
                    return Err(SystemError::IndexOutOfRange { index: i, ell });
                }
            }
        }
        Ok(Self { ell, equations })
    }

    /// `Δ_k f(x)` for a partial function `f`.
    pub fn delta_k<F>(&self, k: usize, x: &Rational, f: F) -> Result<Rational, SystemError>
    where
        F: Fn(&Rational, usize) -> Option<Rational>,
    {
        let eq = self.equations.get(k).ok_or(SystemError::NoSuchEquation(k))?;
        let y = int(1) - x;
        let get = |p: &Rational, i: usize| {
            f(p, i).ok_or_else(|| SystemError::Undefined { x: p.clone(), i })
        };
        let mut total = Rational::zero();
        for (&i, c) in &eq.a {
            total += c * get(x, i)?;
        }
        for (&j, c) in &eq.b {
            total += c * get(&y, j)?;
        }
        Ok(total)
    }
}

/// `O(x) = {(x, i), (1 − x, i) : i < ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPoint {
    pub x: Rational,
    pub pairs: BTreeSet<(Rational, usize)>,
}

pub fn orbit(x: &Rational, ell: usize) -> OrbitPoint {
    let y = int(1) - x;
    let pairs = (0..ell)
        .flat_map(|i| [(x.clone(), i), (y.clone(), i)])
        .collect();
    OrbitPoint { x: x.clone(), pairs }
}

/// A solution of the system restricted to `{1/m, (m−1)/m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSolution {
    pub m: u32,
    /// `f(1/m, i)`.
    pub left: Vec<Rational>,
    /// `f((m−1)/m, i)`.
    pub right: Vec<Rational>,
}

impl FiniteSolution {
    pub fn is_zero(&self) -> bool {
        self.left.iter().chain(&self.right).all(Zero::is_zero)
    }

    /// The partial function defined on the two domain points.
    pub fn value(&self, x: &Rational, i: usize) -> Option<Rational> {
        let m = i64::from(self.m);
        if *x == rat(1, m) {
            self.left.get(i).cloned()
        } else if *x == rat(m - 1, m) {
            self.right.get(i).cloned()
        } else {
            None
        }
    }
}

/// Kernel basis of the finite system on `{1/m, (m−1)/m}` with `2ℓ`
/// unknowns.
pub fn solve_finite(s: &SystemSpec, m: u32) -> Result<Vec<FiniteSolution>, SystemError> {
    if m < 3 {
        return Err(SystemError::SmallM(m));
    }
    let ell = s.ell;
    let mut rows = Vec::with_capacity(2 * s.equations.len());
    for eq in &s.equations {
        for at_left in [true, false] {
            let mut row = vec![Rational::zero(); 2 * ell];
            let (same, other) = if at_left { (0, ell) } else { (ell, 0) };
            for (&i, c) in &eq.a {
                row[same + i] += c;
            }
            for (&j, c) in &eq.b {
                row[other + j] += c;
            }
            rows.push(row);
        }
    }
    Ok(nullspace(&rows, 2 * ell)
        .into_iter()
        .map(|v| FiniteSolution { m, left: v[..ell].to_vec(), right: v[ell..].to_vec() })
        .collect())
}

/// A continuous function on `[0,1]` vanishing at both ends, linear on
/// `[0,1/m]`, `[1/m,(m−1)/m]` and `[(m−1)/m,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeProfile {
    pub m: u32,
    pub left: Rational,
    pub right: Rational,
}

impl EdgeProfile {
    pub fn eval(&self, x: &Rational) -> Rational {
        let m = int(i64::from(self.m));
        let lo = int(1) / &m;
        let hi = int(1) - &lo;
        if *x <= lo {
            x * &m * &self.left
        } else if *x >= hi {
            (int(1) - x) * &m * &self.right
        } else {
            let t = (x - &lo) / (&hi - &lo);
            &self.left + t * (&self.right - &self.left)
        }
    }
}

/// Lifts a finite solution to `ℓ` continuous PWL functions on `[0,1]`.
pub fn lift_pwl(sol: &FiniteSolution) -> Vec<EdgeProfile> {
    sol.left
        .iter()
        .zip(&sol.right)
        .map(|(l, r)| EdgeProfile { m: sol.m, left: l.clone(), right: r.clone() })
        .collect()
}

/// Evaluates `Δ_k` of a lifted solution.
pub fn lifted_residual(s: &SystemSpec, lift: &[EdgeProfile], k: usize, x: &Rational) -> Rational {
    s.delta_k(k, x, |p, i| lift.get(i).map(|e| e.eval(p)))
        .expect("lifted profiles are total")
}

/// Which edge each component stands for. The component `f(λ, i)` is the
/// perturbation at `start + λ·direction` of `edges[i]` (in the orientation of
/// [`Face::edge_param`]).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotDictionary {
    pub edges: Vec<Face>,
    index: BTreeMap<Face, usize>,
}

impl SlotDictionary {
    pub fn slot(&mut self, e: Face) -> usize {
        let next = self.edges.len();
        *self.index.entry(e).or_insert_with(|| {
            self.edges.push(e);
            next
        })
    }

    pub fn get(&self, e: &Face) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Turns edge relations into a system over edge components.
///
/// Every tuple must be of class 2 or 3. Edges are identified modulo `Z²`;
/// edges in `zero` and all points contribute nothing. `extra` edges receive
/// components even when no tuple mentions them. Equations that vanish
/// identically are dropped, so the returned system may have none.
pub fn tuples_to_system(
    tuples: &[SevenTuple],
    zero: &BTreeSet<Face>,
    extra: &[Face],
) -> Result<(SystemSpec, SlotDictionary), SystemError> {
    let mut slots = SlotDictionary::default();
    for e in extra {
        slots.slot(e.canonical().0);
    }
    let mut equations = Vec::new();
    for tau in tuples {
        if !matches!(tau.kind_class(), Some(2) | Some(3)) {
            return Err(SystemError::NotEdgeTuple(*tau));
        }
        let verts = tau.f_vertices();
        if verts.len() != 2 {
            return Err(SystemError::NotEdgeTuple(*tau));
        }
        let q = i64::from(tau.q());
        let mut eq = Equation::default();
        for (slot, face) in tau.faces.iter().enumerate() {
            if !face.kind.is_edge() {
                continue;
            }
            let (canon, shift) = face.canonical();
            if zero.contains(&canon) {
                continue;
            }
            let (start, _) = canon.edge_param().expect("edge");
            let p0 = verts[0][slot];
            let moved = (p0.0 + q * shift.0, p0.1 + q * shift.1);
            let i = slots.slot(canon);
            let c = int(i64::from(tau.sigma[slot]));
            if moved == start {
                eq.add_a(i, c);
            } else {
                eq.add_b(i, c);
            }
        }
        if !eq.is_trivial() {
            equations.push(eq);
        }
    }
    Ok((SystemSpec { ell: slots.len(), equations }, slots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FaceKind;
    use crate::tuples::ADDITIVE;

    fn r(v: i64) -> Rational {
        int(v)
    }

    #[test]
    fn delta_evaluations() {
        let s = SystemSpec::new(1, vec![Equation::new([(0, r(1))], [(0, r(-1))])]).unwrap();
        let zero = |_: &Rational, _: usize| Some(r(0));
        assert_eq!(s.delta_k(0, &rat(1, 3), zero).unwrap(), r(0));
        let c = |_: &Rational, _: usize| Some(rat(5, 7));
        assert_eq!(s.delta_k(0, &rat(1, 3), c).unwrap(), r(0));
        let t = SystemSpec::new(2, vec![Equation::new([(0, rat(2, 3))], [(1, rat(-5, 4))])]).unwrap();
        let indicator = |x: &Rational, i: usize| Some(if *x == rat(3, 4) && i == 1 { r(1) } else { r(0) });
        assert_eq!(t.delta_k(0, &rat(1, 4), indicator).unwrap(), rat(-5, 4));
        let undefined = |_: &Rational, _: usize| None;
        assert!(t.delta_k(0, &rat(1, 4), undefined).is_err());
    }

    #[test]
    fn orbits() {
        let o = orbit(&rat(1, 2), 3);
        assert_eq!(o.pairs.len(), 3);
        assert!(orbit(&rat(1, 3), 2).pairs.is_disjoint(&orbit(&rat(1, 4), 2).pairs));
        assert_eq!(orbit(&rat(2, 7), 2).pairs, orbit(&rat(5, 7), 2).pairs);
    }

    #[test]
    fn finite_kernels() {
        let zeroed = SystemSpec::new(1, vec![Equation::new([(0, r(1))], [])]).unwrap();
        assert!(solve_finite(&zeroed, 3).unwrap().is_empty());
        let sym = SystemSpec::new(1, vec![Equation::new([(0, r(1))], [(0, r(-1))])]).unwrap();
        let k = solve_finite(&sym, 3).unwrap();
        assert_eq!(k.len(), 1);
        let coupled = SystemSpec::new(
            2,
            vec![Equation::new([(0, r(1)), (1, r(1))], [(0, r(1)), (1, r(1))])],
        )
        .unwrap();
        assert_eq!(solve_finite(&coupled, 3).unwrap().len(), 3);
        assert!(solve_finite(&sym, 2).is_err());
    }

    #[test]
    fn symmetric_tent() {
        let sym = SystemSpec::new(1, vec![Equation::new([(0, r(1))], [(0, r(-1))])]).unwrap();
        let sol = &solve_finite(&sym, 3).unwrap()[0];
        let lift = lift_pwl(sol);
        let e = &lift[0];
        assert_eq!(e.eval(&r(0)), r(0));
        assert_eq!(e.eval(&r(1)), r(0));
        for k in 0..=100 {
            let x = rat(k, 100);
            assert_eq!(e.eval(&x), e.eval(&(r(1) - &x)));
            assert_eq!(lifted_residual(&sym, &lift, 0, &x), r(0));
        }
    }

    #[test]
    fn edge_tuples_become_equations() {
        let q = 4;
        let e = Face::new(FaceKind::EdgeH, (0, 1), q);
        let tau = SevenTuple::new([e, Face::point(1, 2, q), e.translate((1, 2))], ADDITIVE, (0, 0));
        assert!(tau.is_valid());
        let (s, slots) = tuples_to_system(&[tau], &BTreeSet::new(), &[]).unwrap();
        assert_eq!(s.ell, 2);
        let eq = &s.equations[0];
        assert_eq!(eq.a.get(&slots.get(&e).unwrap()), Some(&r(1)));
        assert_eq!(eq.a.get(&slots.get(&e.translate((1, 2))).unwrap()), Some(&r(-1)));
        let z: BTreeSet<Face> = [e].into_iter().collect();
        let (s, _) = tuples_to_system(&[tau], &z, &[]).unwrap();
        assert_eq!(s.equations[0].a.len(), 1);
    }

    #[test]
    fn reflected_edge_uses_opposite_argument() {
        let q = 3;
        let e = Face::new(FaceKind::EdgeV, (1, 0), q);
        // x + y = p with both in e reverses the edge.
        let tau = SevenTuple::new([e, e, Face::point(2, 1, q)], ADDITIVE, (0, 0));
        assert!(tau.is_valid(), "{tau}");
        let (s, _) = tuples_to_system(&[tau], &BTreeSet::new(), &[]).unwrap();
        assert_eq!(s.equations[0].a.get(&0), Some(&r(1)));
        assert_eq!(s.equations[0].b.get(&0), Some(&r(1)));
    }

    #[test]
    fn vhd_tuple_has_three_terms() {
        let q = 2;
        let faces = [
            Face::new(FaceKind::EdgeV, (0, 0), q),
            Face::new(FaceKind::EdgeH, (0, 0), q),
            Face::new(FaceKind::EdgeD, (0, 0), q),
        ];
        let t = crate::tuples::valid_translations(faces, ADDITIVE)[0];
        let tau = SevenTuple::new(faces, ADDITIVE, t);
        let (s, _) = tuples_to_system(&[tau], &BTreeSet::new(), &[]).unwrap();
        let eq = &s.equations[0];
        assert_eq!(eq.a.len() + eq.b.len(), 3);
        assert!(!eq.b.is_empty());
    }
}
