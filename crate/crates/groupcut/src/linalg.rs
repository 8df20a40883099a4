//! Exact kernels of rational matrices.
//!
//! [`nullspace`] runs fraction-free Gauss–Jordan elimination on integer rows
//! (each row is scaled to integers first, and row contents are divided out
//! after every update). [`sparse_kernel`] handles the large, very sparse
//! systems produced by additivity equations: a modular pass picks a maximal
//! independent subset of rows, the exact kernel of that subset is computed
//! with [`nullspace`], and every basis vector is then checked against all
//! rows. Any violated row is added to the subset and the exact step repeats,
//! so the result never depends on the modulus.

use crate::rational::{common_denominator, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(PRIME)) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(v: i64) -> u64 {
    v.rem_euclid(PRIME as i64) as u64
}

fn divide_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// Reduced row echelon form over `Z`: pivot columns are zero in every other
/// row. Returns the nonzero rows and their pivot columns.
fn integer_rref(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].abs())
        else {
            continue;
        };
        rows.swap(r, p);
        divide_content(&mut rows[r]);
        let (head, tail) = rows.split_at_mut(r);
        let (pivot_row, tail) = tail.split_first_mut().expect("pivot row exists");
        let pv = pivot_row[c].clone();
        for row in head.iter_mut().chain(tail.iter_mut()) {
            if row[c].is_zero() {
                continue;
            }
            let g = pv.gcd(&row[c]);
            let a = &pv / &g;
            let b = &row[c] / &g;
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                *x = &a * &*x - &b * y;
            }
            divide_content(row);
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

fn kernel_from_rref(rows: &[Vec<BigInt>], pivots: &[usize], ncols: usize) -> Vec<Vec<Rational>> {
    let mut is_pivot = vec![false; ncols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..ncols)
        .filter(|&j| !is_pivot[j])
        .map(|j| {
            let mut v = vec![Rational::zero(); ncols];
            v[j] = Rational::one();
            for (row, &c) in rows.iter().zip(pivots) {
                if !row[j].is_zero() {
                    v[c] = -Rational::new(row[j].clone(), row[c].clone());
                }
            }
            v
        })
        .collect()
}

/// Exact basis of `{x : M x = 0}` for a rational matrix given by rows.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let int_rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            assert_eq!(row.len(), ncols, "ragged matrix");
            let d = common_denominator(row);
            row.iter().map(|v| (v * &d).to_integer()).collect()
        })
        .collect();
    let (r, p) = integer_rref(int_rows, ncols);
    kernel_from_rref(&r, &p, ncols)
}

/// Rank of a rational matrix.
pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    ncols - nullspace(rows, ncols).len()
}

/// A sparse row with small integer coefficients.
pub type SparseRow = Vec<(usize, i64)>;

/// Incremental row reduction modulo a large prime.
struct ModularEchelon {
    ncols: usize,
    rows: Vec<Vec<u64>>,
    pivot_of_col: Vec<Option<usize>>,
}

impl ModularEchelon {
    fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new(), pivot_of_col: vec![None; ncols] }
    }

    /// Inserts the row and reports whether it raised the rank.
    fn insert(&mut self, sparse: &SparseRow) -> bool {
        let mut row = vec![0u64; self.ncols];
        for &(c, v) in sparse {
            row[c] = (row[c] + to_mod(v)) % PRIME;
        }
        for &(c, _) in sparse {
            let coef = row[c];
            if coef == 0 {
                continue;
            }
            if let Some(k) = self.pivot_of_col[c] {
                let basis = &self.rows[k];
                for (x, b) in row.iter_mut().zip(basis) {
                    if *b != 0 {
                        *x = (*x + PRIME - mulmod(coef, *b)) % PRIME;
                    }
                }
            }
        }
        let Some(pc) = row.iter().position(|&v| v != 0) else {
            return false;
        };
        let inv = powmod(row[pc], PRIME - 2);
        for x in row.iter_mut() {
            *x = mulmod(*x, inv);
        }
        for other in self.rows.iter_mut() {
            let coef = other[pc];
            if coef == 0 {
                continue;
            }
            for (x, b) in other.iter_mut().zip(&row) {
                if *b != 0 {
                    *x = (*x + PRIME - mulmod(coef, *b)) % PRIME;
                }
            }
        }
        self.pivot_of_col[pc] = Some(self.rows.len());
        self.rows.push(row);
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn satisfies(row: &SparseRow, v: &[BigInt]) -> bool {
    row.iter()
        .map(|&(c, a)| BigInt::from(a) * &v[c])
        .sum::<BigInt>()
        .is_zero()
}

/// Exact kernel basis of a sparse integer system.
pub fn sparse_kernel(ncols: usize, rows: &[SparseRow]) -> Vec<Vec<Rational>> {
    let mut ech = ModularEchelon::new(ncols);
    let mut chosen: Vec<usize> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if ech.rank() == ncols {
            break;
        }
        if ech.insert(r) {
            chosen.push(i);
        }
    }
    if ech.rank() == ncols {
        return Vec::new();
    }
    loop {
        let dense: Vec<Vec<BigInt>> = chosen
            .iter()
            .map(|&i| {
                let mut d = vec![BigInt::zero(); ncols];
                for &(c, v) in &rows[i] {
                    d[c] += v;
                }
                d
            })
            .collect();
        let (r, p) = integer_rref(dense, ncols);
        let basis = kernel_from_rref(&r, &p, ncols);
        let scaled: Vec<Vec<BigInt>> = basis
            .iter()
            .map(|v| {
                let d = common_denominator(v);
                v.iter().map(|x| (x * &d).to_integer()).collect()
            })
            .collect();
        let mut in_chosen = vec![false; rows.len()];
        for &i in &chosen {
            in_chosen[i] = true;
        }
        let violated: Vec<usize> = (0..rows.len())
            .filter(|&i| !in_chosen[i])
            .filter(|&i| scaled.iter().any(|v| !satisfies(&rows[i], v)))
            .collect();
        if violated.is_empty() {
            return basis;
        }
        chosen.extend(violated);
    }
}

/// Multiplies a sparse row by a rational vector.
pub fn sparse_dot(row: &SparseRow, v: &[Rational]) -> Rational {
    row.iter().map(|&(c, a)| Rational::from_integer(BigInt::from(a)) * &v[c]).sum()
}
