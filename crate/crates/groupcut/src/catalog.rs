//! Ready-made functions used in documentation and tests.

use crate::finite_group::FiniteProblem;
use crate::pwl::{GridFunction, PwlFunction};
use crate::rational::{rat, Rational};

/// Printed vertex labels of the five-by-five example; the function value is
/// the label divided by 4. Row `r`, column `c` holds `π(c/5, r/5)`, with the
/// closing row and column repeating the periodic boundary.
pub const P5_LABELS: [[i64; 6]; 6] = [
    [0, 2, 2, 2, 2, 0],
    [2, 2, 2, 3, 1, 2],
    [2, 2, 4, 2, 2, 2],
    [2, 2, 2, 1, 2, 2],
    [2, 2, 2, 2, 3, 2],
    [0, 2, 2, 2, 2, 0],
];

/// The minimal function over `P_5` with `f = (2/5, 2/5)` and the labels of
/// [`P5_LABELS`].
pub fn p5_figure() -> PwlFunction {
    let rows: Vec<Vec<Rational>> = P5_LABELS
        .iter()
        .map(|r| r.iter().map(|&v| rat(v, 4)).collect())
        .collect();
    PwlFunction::from_figure_rows(5, (2, 2), &rows).expect("well-formed figure")
}

/// The 1-row Gomory mixed-integer function with `f = 1/2` as breakpoint
/// values on `(1/2)Z`.
pub fn gmic_half() -> GridFunction {
    GridFunction::new(2, 1, vec![rat(0, 1), rat(1, 1)]).expect("two breakpoints")
}

/// The finite problem of [`gmic_half`] refined to `(1/(2m))Z`.
pub fn gmic_half_problem(m: u32) -> FiniteProblem {
    FiniteProblem::one_row(gmic_half().refine_1d(m), i64::from(m)).expect("valid f")
}
