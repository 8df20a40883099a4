//! Continuous piecewise linear functions over `P_q`, periodic modulo `Z²`.
//!
//! A [`PwlFunction`] is fixed by its values on the vertex grid
//! `(1/q)Z² ∩ [0,1)²` and extended by barycentric interpolation on each face.
//! A [`GridFunction`] is a bare table of values on `(1/n)Z^d ∩ [0,1)^d`,
//! used for restrictions, finite group problems and perturbations.

use crate::lattice::{face_containing, FaceKind, LatticePoint};
use crate::rational::{floor_i64, int, Rational};
use num_traits::Zero;

/// Errors raised when building functions.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PwlError {
    #[error("resolution must be positive")]
    ZeroResolution,
    #[error("expected a {expected}x{expected} value table")]
    Shape { expected: usize },
    #[error("expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("the value at the origin must be 0")]
    NonzeroOrigin,
    #[error("f must be a grid point outside the integer lattice")]
    BadF,
    #[error("dims must be 1 or 2")]
    BadDims,
}

/// A continuous PWL function over `P_q`.
///
/// `values[i * q + j] = π(i/q, j/q)`. The group element `f` is stored in grid
/// units; it is `None` for perturbations, which have no `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwlFunction {
    q: u32,
    f: Option<(i64, i64)>,
    values: Vec<Rational>,
}

impl PwlFunction {
    /// Builds a minimal-candidate function from `table[i][j] = π(i/q, j/q)`
    /// and `f = (f.0/q, f.1/q)`.
    pub fn new(q: u32, f: (i64, i64), table: Vec<Vec<Rational>>) -> Result<Self, PwlError> {
        let mut s = Self::perturbation(q, table)?;
        let qi = i64::from(q);
        if f.0.rem_euclid(qi) == 0 && f.1.rem_euclid(qi) == 0 {
            return Err(PwlError::BadF);
        }
        s.f = Some((f.0.rem_euclid(qi), f.1.rem_euclid(qi)));
        if !s.values[0].is_zero() {
            return Err(PwlError::NonzeroOrigin);
        }
        Ok(s)
    }

    /// Builds a function without an `f`, as used for perturbations.
    pub fn perturbation(q: u32, table: Vec<Vec<Rational>>) -> Result<Self, PwlError> {
        if q == 0 {
            return Err(PwlError::ZeroResolution);
        }
        let qs = q as usize;
        if table.len() != qs || table.iter().any(|r| r.len() != qs) {
            return Err(PwlError::Shape { expected: qs });
        }
        Ok(Self { q, f: None, values: table.into_iter().flatten().collect() })
    }

    /// Builds a function from the layout used in printed figures, where
    /// `rows[r][c] = π(c/q, r/q)`. Extra closing rows and columns repeating
    /// the periodic boundary are accepted and ignored.
    pub fn from_figure_rows(q: u32, f: (i64, i64), rows: &[Vec<Rational>]) -> Result<Self, PwlError> {
        let qs = q as usize;
        if rows.len() < qs || rows.iter().take(qs).any(|r| r.len() < qs) {
            return Err(PwlError::Shape { expected: qs });
        }
        let table = (0..qs)
            .map(|i| (0..qs).map(|j| rows[j][i].clone()).collect())
            .collect();
        Self::new(q, f, table)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `f` in grid units, reduced to `{0,…,q−1}²`.
    pub fn f_grid(&self) -> Option<(i64, i64)> {
        self.f
    }

    pub fn f_point(&self) -> Option<LatticePoint> {
        self.f.map(|(a, b)| LatticePoint::on_grid(a, b, self.q))
    }

    /// `π(i/q, j/q)` with periodic index arithmetic.
    pub fn vertex_value(&self, i: i64, j: i64) -> &Rational {
        let q = i64::from(self.q);
        let (i, j) = (i.rem_euclid(q), j.rem_euclid(q));
        &self.values[(i * q + j) as usize]
    }

    /// The value table `table[i][j] = π(i/q, j/q)`.
    pub fn table(&self) -> Vec<Vec<Rational>> {
        self.values.chunks(self.q as usize).map(|c| c.to_vec()).collect()
    }

    /// Barycentric interpolation on the face containing `p`.
    pub fn evaluate(&self, p: &LatticePoint) -> Rational {
        let q = int(i64::from(self.q));
        let x = &p.x * &q;
        let y = &p.y * &q;
        let (a, b) = (floor_i64(&x), floor_i64(&y));
        let fx = x - int(a);
        let fy = y - int(b);
        if &fx + &fy <= int(1) {
            let v00 = self.vertex_value(a, b);
            let v10 = self.vertex_value(a + 1, b);
            let v01 = self.vertex_value(a, b + 1);
            v00 + fx * (v10 - v00) + fy * (v01 - v00)
        } else {
            let v11 = self.vertex_value(a + 1, b + 1);
            let v10 = self.vertex_value(a + 1, b);
            let v01 = self.vertex_value(a, b + 1);
            let gx = int(1) - fx;
            let gy = int(1) - fy;
            v11 + gx * (v01 - v11) + gy * (v10 - v11)
        }
    }

    /// Value at the grid point `(i/n, j/n)` where `q` divides `n`.
    pub(crate) fn value_on_fine_grid(&self, i: i64, j: i64, n: u32) -> Rational {
        self.evaluate(&LatticePoint::on_grid(i, j, n))
    }

    /// The restriction to `(1/(mq))Z²`.
    pub fn restrict(&self, m: u32) -> GridFunction {
        assert!(m > 0, "m must be positive");
        let n = self.q * m;
        let ni = i64::from(n);
        let mut values = Vec::with_capacity((n * n) as usize);
        for i in 0..ni {
            for j in 0..ni {
                values.push(self.value_on_fine_grid(i, j, n));
            }
        }
        GridFunction { n, dims: 2, values }
    }
}

/// `σ₁π(x¹) + σ₂π(x²) + σ₃π(x³)`.
pub fn delta_sigma(
    pi: &PwlFunction,
    sigma: [i8; 3],
    x1: &LatticePoint,
    x2: &LatticePoint,
    x3: &LatticePoint,
) -> Rational {
    [x1, x2, x3]
        .iter()
        .zip(sigma)
        .map(|(x, s)| pi.evaluate(x) * int(i64::from(s)))
        .sum()
}

/// Values on `(1/n)Z^d ∩ [0,1)^d`.
///
/// For `dims = 2` the value at `(i/n, j/n)` sits at index `i * n + j`; for
/// `dims = 1` the value at `i/n` sits at index `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFunction {
    pub n: u32,
    pub dims: u8,
    pub values: Vec<Rational>,
}

impl GridFunction {
    pub fn new(n: u32, dims: u8, values: Vec<Rational>) -> Result<Self, PwlError> {
        if n == 0 {
            return Err(PwlError::ZeroResolution);
        }
        let expected = match dims {
            1 => n as usize,
            2 => (n * n) as usize,
            _ => return Err(PwlError::BadDims),
        };
        if values.len() != expected {
            return Err(PwlError::Length { expected, found: values.len() });
        }
        Ok(Self { n, dims, values })
    }

    pub fn zeros(n: u32, dims: u8) -> Self {
        let len = if dims == 1 { n as usize } else { (n * n) as usize };
        Self { n, dims, values: vec![Rational::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of the grid point with periodic coordinates.
    pub fn index(&self, i: i64, j: i64) -> usize {
        let n = i64::from(self.n);
        if self.dims == 1 {
            i.rem_euclid(n) as usize
        } else {
            (i.rem_euclid(n) * n + j.rem_euclid(n)) as usize
        }
    }

    pub fn get(&self, i: i64, j: i64) -> &Rational {
        &self.values[self.index(i, j)]
    }

    pub fn set(&mut self, i: i64, j: i64, v: Rational) {
        let k = self.index(i, j);
        self.values[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: &Rational, other: &GridFunction) -> GridFunction {
        assert_eq!((self.n, self.dims), (other.n, other.dims));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        GridFunction { n: self.n, dims: self.dims, values }
    }

    /// Refines a one-dimensional breakpoint table to `(1/(mn))Z` by linear
    /// interpolation between consecutive breakpoints.
    pub fn refine_1d(&self, m: u32) -> GridFunction {
        assert_eq!(self.dims, 1, "refine_1d needs a 1-row grid function");
        let n = i64::from(self.n);
        let mi = i64::from(m);
        let mut values = Vec::with_capacity((self.n * m) as usize);
        for i in 0..n {
            let a = self.get(i, 0);
            let b = self.get(i + 1, 0);
            for k in 0..mi {
                let t = crate::rational::rat(k, mi);
                values.push(a + t * (b - a));
            }
        }
        GridFunction { n: self.n * m, dims: 1, values }
    }
}

/// The continuous PWL function over `P_n` agreeing with `g` on its grid.
pub fn interpolate(g: &GridFunction) -> PwlFunction {
    assert_eq!(g.dims, 2, "interpolate needs a 2-row grid function");
    PwlFunction { q: g.n, f: None, values: g.values.clone() }
}

/// Splits a function into its `P_n` interpolant and a residual vanishing on
/// the grid `(1/n)Z²`.
pub struct Decomposition<F> {
    pub interpolant: PwlFunction,
    original: F,
}

impl<F: Fn(&LatticePoint) -> Rational> Decomposition<F> {
    /// `π̄(p) − π̄_T(p)`.
    pub fn residual(&self, p: &LatticePoint) -> Rational {
        (self.original)(p) - self.interpolant.evaluate(p)
    }
}

/// Decomposes `pibar = π̄_T + π̄₀` where `π̄_T` interpolates `pibar` on
/// `(1/n)Z²` and `π̄₀` vanishes there.
pub fn decompose<F: Fn(&LatticePoint) -> Rational>(pibar: F, n: u32) -> Decomposition<F> {
    let ni = i64::from(n);
    let mut values = Vec::with_capacity((n * n) as usize);
    for i in 0..ni {
        for j in 0..ni {
            values.push(pibar(&LatticePoint::on_grid(i, j, n)));
        }
    }
    let interpolant = interpolate(&GridFunction { n, dims: 2, values });
    Decomposition { interpolant, original: pibar }
}

/// Whether `p` lies on the interior of a triangle of `P_q`.
pub fn in_open_triangle(p: &LatticePoint, q: u32) -> bool {
    matches!(face_containing(p, q).kind, FaceKind::TriLower | FaceKind::TriUpper)
}
