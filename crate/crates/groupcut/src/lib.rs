//! Exact extremality tests for continuous piecewise linear functions of the
//! one- and two-row Gomory–Johnson infinite group problem.
//!
//! A continuous function `π` that is piecewise linear over the standard
//! triangulation `P_q` is extreme iff its restriction to the finer grid
//! `(1/(mq))Z²` is extreme for the finite group problem there, for any
//! `m ≥ 3`. The crate decides this in two independent ways:
//!
//! * [`finite_group`] assembles the finite perturbation system and computes
//!   its exact kernel;
//! * [`reduction`] rewrites the additive faces of `π` step by step until only
//!   edge relations remain and then solves a small functional system.
//!
//! Every quantity is an exact [`Rational`](rational::Rational).
//!
//! ```
//! use groupcut::catalog::p5_figure;
//! use groupcut::finite_group::{extremality_kernel, finite_minimality, FiniteProblem};
//!
//! let pi = p5_figure();
//! let problem = FiniteProblem::from_pwl(&pi, 3);
//! assert!(finite_minimality(&problem).minimal);
//! let kernel = extremality_kernel(&problem).unwrap();
//! println!("perturbation space has dimension {}", kernel.dimension);
//! ```

pub mod catalog;
pub mod finite_group;
pub mod functional;
pub mod lattice;
pub mod linalg;
pub mod pwl;
pub mod rational;
pub mod reduction;
pub mod tuples;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/faces.md")]
    mod faces {}
    #[doc = include_str!("../../../book/src/tuples.md")]
    mod tuples {}
    #[doc = include_str!("../../../book/src/finite.md")]
    mod finite {}
    #[doc = include_str!("../../../book/src/systems.md")]
    mod systems {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
