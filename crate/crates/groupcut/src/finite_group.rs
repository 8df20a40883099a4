//! Minimality and extremality for finite group problems on `(1/n)Z^d`,
//! `d ∈ {1, 2}`.
//!
//! A function on a finite group is minimal iff it is nonnegative, vanishes at
//! the origin, is subadditive and satisfies `π(x) + π(f − x) = 1`. It is
//! extreme iff the only `π̄` with `π̄(0) = π̄(f) = 0` that is additive on every
//! tight pair is zero.

use crate::linalg::{sparse_kernel, SparseRow};
use crate::pwl::{GridFunction, PwlFunction};
use crate::rational::{common_denominator, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::fmt;

/// Errors raised by the finite group routines.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FiniteError {
    #[error("f must not be the origin of the group")]
    FAtOrigin,
    #[error("the function is not minimal ({0})")]
    NotMinimal(Violation),
}

/// The first minimality condition found to fail. Grid points are given in
/// grid units; for one-row problems the second coordinate is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Origin,
    Nonnegativity { at: (i64, i64) },
    Symmetry { at: (i64, i64) },
    Subadditivity { u: (i64, i64), v: (i64, i64) },
}

impl Violation {
    /// Short name of the violated condition.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::Origin => "origin",
            Violation::Nonnegativity { .. } => "nonnegativity",
            Violation::Symmetry { .. } => "symmetry",
            Violation::Subadditivity { .. } => "subadditivity",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Origin => write!(f, "origin: π(0) ≠ 0"),
            Violation::Nonnegativity { at } => write!(f, "nonnegativity at {at:?}"),
            Violation::Symmetry { at } => write!(f, "symmetry at {at:?}"),
            Violation::Subadditivity { u, v } => write!(f, "subadditivity at {u:?} + {v:?}"),
        }
    }
}

/// Outcome of [`finite_minimality`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    pub minimal: bool,
    pub violation: Option<Violation>,
}

/// A function on `(1/n)Z^d / Z^d` together with its `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProblem {
    pub dims: u8,
    pub n: u32,
    /// Flat index of `f` in `values`.
    pub f_index: usize,
    pub values: GridFunction,
}

impl FiniteProblem {
    /// Two-row problem with `f = (f.0/n, f.1/n)`.
    pub fn two_row(values: GridFunction, f: (i64, i64)) -> Result<Self, FiniteError> {
        assert_eq!(values.dims, 2);
        let f_index = values.index(f.0, f.1);
        if f_index == 0 {
            return Err(FiniteError::FAtOrigin);
        }
        Ok(Self { dims: 2, n: values.n, f_index, values })
    }

    /// One-row problem with `f = f/n`.
    pub fn one_row(values: GridFunction, f: i64) -> Result<Self, FiniteError> {
        assert_eq!(values.dims, 1);
        let f_index = values.index(f, 0);
        if f_index == 0 {
            return Err(FiniteError::FAtOrigin);
        }
        Ok(Self { dims: 1, n: values.n, f_index, values })
    }

    /// The restriction of `π` to `(1/(mq))Z²`.
    ///
    /// # Panics
    ///
    /// Panics if `π` carries no `f`.
    pub fn from_pwl(pi: &PwlFunction, m: u32) -> Self {
        let f = pi.f_grid().expect("function without f");
        let mi = i64::from(m);
        Self::two_row(pi.restrict(m), (f.0 * mi, f.1 * mi)).expect("f is off the lattice")
    }

    /// Number of group elements.
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Grid coordinates of a flat index.
    pub fn coords(&self, k: usize) -> (i64, i64) {
        let n = self.n as usize;
        if self.dims == 1 {
            (k as i64, 0)
        } else {
            ((k / n) as i64, (k % n) as i64)
        }
    }

    /// Flat index of `u + v`.
    pub fn add(&self, u: usize, v: usize) -> usize {
        let n = self.n as usize;
        if self.dims == 1 {
            (u + v) % n
        } else {
            let (ui, uj) = (u / n, u % n);
            let (vi, vj) = (v / n, v % n);
            ((ui + vi) % n) * n + (uj + vj) % n
        }
    }

    /// Flat index of `−u`.
    pub fn neg(&self, u: usize) -> usize {
        let n = self.n as usize;
        if self.dims == 1 {
            (n - u) % n
        } else {
            let (ui, uj) = (u / n, u % n);
            ((n - ui) % n) * n + (n - uj) % n
        }
    }

    /// Values scaled to integers by a common denominator `D`; the scaled
    /// value of `f` is `D`.
    fn scaled(&self) -> (Vec<BigInt>, BigInt) {
        let d = common_denominator(&self.values.values);
        let v = self.values.values.iter().map(|x| (x * &d).to_integer()).collect();
        (v, d)
    }
}

/// Checks `π ≥ 0`, `π(0) = 0`, symmetry and subadditivity, in that order.
pub fn finite_minimality(p: &FiniteProblem) -> MinimalityReport {
    let fail = |v| MinimalityReport { minimal: false, violation: Some(v) };
    let (vals, d) = p.scaled();
    if !vals[0].is_zero() {
        return fail(Violation::Origin);
    }
    if let Some(k) = vals.iter().position(|v| v.is_negative()) {
        return fail(Violation::Nonnegativity { at: p.coords(k) });
    }
    for x in 0..p.order() {
        let fx = p.add(p.f_index, p.neg(x));
        if &vals[x] + &vals[fx] != d {
            return fail(Violation::Symmetry { at: p.coords(x) });
        }
    }
    let bad = (0..p.order()).into_par_iter().find_map_first(|u| {
        (u..p.order())
            .find(|&v| &vals[u] + &vals[v] < vals[p.add(u, v)])
            .map(|v| (u, v))
    });
    if let Some((u, v)) = bad {
        return fail(Violation::Subadditivity { u: p.coords(u), v: p.coords(v) });
    }
    MinimalityReport { minimal: true, violation: None }
}

/// All pairs `u ≤ v` (by flat index) with `π(u) + π(v) = π(u + v)`.
pub fn tight_pairs(p: &FiniteProblem) -> Vec<(usize, usize)> {
    let (vals, _) = p.scaled();
    (0..p.order())
        .into_par_iter()
        .flat_map_iter(|u| {
            let vals = &vals;
            (u..p.order())
                .filter(move |&v| &vals[u] + &vals[v] == vals[p.add(u, v)])
                .map(move |v| (u, v))
        })
        .collect()
}

/// Basis of the space of perturbations of a finite problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationKernel {
    pub dimension: usize,
    pub basis: Vec<GridFunction>,
}

impl PerturbationKernel {
    pub fn is_trivial(&self) -> bool {
        self.dimension == 0
    }
}

/// The additivity equations of a finite problem as sparse rows, one per
/// distinct tight pair plus `π̄(0) = 0` and `π̄(f) = 0`.
pub fn perturbation_equations(p: &FiniteProblem) -> Vec<SparseRow> {
    let mut rows: Vec<SparseRow> = vec![vec![(0, 1)], vec![(p.f_index, 1)]];
    for (u, v) in tight_pairs(p) {
        let w = p.add(u, v);
        let mut row: Vec<(usize, i64)> = Vec::with_capacity(3);
        for (c, a) in [(u, 1), (v, 1), (w, -1)] {
            match row.iter_mut().find(|e| e.0 == c) {
                Some(e) => e.1 += a,
                None => row.push((c, a)),
            }
        }
        row.retain(|e| e.1 != 0);
        if !row.is_empty() {
            row.sort_unstable();
            rows.push(row);
        }
    }
    rows.sort();
    rows.dedup();
    rows
}

/// Exact kernel of the perturbation system; dimension 0 iff `π` is extreme.
pub fn extremality_kernel(p: &FiniteProblem) -> Result<PerturbationKernel, FiniteError> {
    let report = finite_minimality(p);
    if let Some(v) = report.violation {
        return Err(FiniteError::NotMinimal(v));
    }
    let rows = perturbation_equations(p);
    let basis: Vec<GridFunction> = sparse_kernel(p.order(), &rows)
        .into_iter()
        .map(|v| GridFunction { n: p.n, dims: p.dims, values: normalize(v) })
        .collect();
    Ok(PerturbationKernel { dimension: basis.len(), basis })
}

/// Scales a kernel vector so that its entries are coprime integers.
fn normalize(v: Vec<Rational>) -> Vec<Rational> {
    let d = common_denominator(&v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &d).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x));
    if g.is_zero() {
        return v;
    }
    ints.into_iter().map(|x| Rational::new(x, g.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, rat};

    #[test]
    fn figure_is_minimal() {
        let p = FiniteProblem::from_pwl(&catalog::p5_figure(), 1);
        assert_eq!(finite_minimality(&p), MinimalityReport { minimal: true, violation: None });
    }

    #[test]
    fn zero_function_fails_symmetry() {
        let p = FiniteProblem::two_row(GridFunction::zeros(3, 2), (1, 1)).unwrap();
        assert_eq!(finite_minimality(&p).violation.unwrap().name(), "symmetry");
    }

    #[test]
    fn negative_value_fails_nonnegativity() {
        let mut g = GridFunction::zeros(2, 1);
        g.values[1] = int(-1);
        let p = FiniteProblem::one_row(g, 1).unwrap();
        assert_eq!(finite_minimality(&p).violation.unwrap().name(), "nonnegativity");
    }

    #[test]
    fn gmic_is_extreme() {
        let p = catalog::gmic_half_problem(3);
        assert_eq!(
            p.values.values,
            [0, 1, 2, 3, 2, 1].iter().map(|&k| rat(k, 3)).collect::<Vec<_>>()
        );
        assert!(finite_minimality(&p).minimal);
        let pairs = tight_pairs(&p);
        assert!(pairs.contains(&(0, 5)));
        assert!(pairs.contains(&(1, 2)));
        assert!(extremality_kernel(&p).unwrap().is_trivial());
    }

    #[test]
    fn tight_pair_count_matches_scan() {
        let p = catalog::gmic_half_problem(3);
        let v = &p.values.values;
        let mut count = 0;
        for u in 0..6 {
            for w in u..6 {
                if &v[u] + &v[w] == v[(u + w) % 6] {
                    count += 1;
                }
            }
        }
        assert_eq!(tight_pairs(&p).len(), count);
    }

    #[test]
    fn symmetric_pairs_are_tight() {
        let p = FiniteProblem::from_pwl(&catalog::p5_figure(), 1);
        let pairs = tight_pairs(&p);
        for x in 0..p.order() {
            let y = p.add(p.f_index, p.neg(x));
            assert!(pairs.contains(&(x.min(y), x.max(y))));
        }
    }

    #[test]
    fn loose_values_give_kernel() {
        // Values 1/2 off {0, f} leave only the symmetric pairs tight.
        let half = rat(1, 2);
        let vals = vec![int(0), half.clone(), half.clone(), int(1), half.clone(), half];
        let p = FiniteProblem::one_row(GridFunction::new(6, 1, vals).unwrap(), 3).unwrap();
        assert!(finite_minimality(&p).minimal);
        let k = extremality_kernel(&p).unwrap();
        assert_eq!(k.dimension, 2);
        let rows = perturbation_equations(&p);
        for b in &k.basis {
            for r in &rows {
                assert!(crate::linalg::sparse_dot(r, &b.values).is_zero());
            }
        }
    }

    #[test]
    fn rejects_non_minimal() {
        let p = FiniteProblem::two_row(GridFunction::zeros(2, 2), (1, 0)).unwrap();
        assert!(matches!(extremality_kernel(&p), Err(FiniteError::NotMinimal(_))));
    }
}
