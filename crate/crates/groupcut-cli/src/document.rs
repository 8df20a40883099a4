//! JSON documents read and written by the command-line tool.

use std::fmt;

use groupcut::finite_group::FiniteProblem;
use groupcut::pwl::{GridFunction, PwlFunction};
use groupcut::rational::{format_rational, parse_rational, Rational};
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// An exact fraction, written as `"p/q"` in JSON. Integers are accepted as
/// shorthand on input; decimals are rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fraction(pub Rational);

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;

        impl Visitor<'_> for V {
            type Value = Fraction;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a fraction string \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Fraction, E> {
                parse_rational(v).map(Fraction).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Fraction, E> {
                Ok(Fraction(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Fraction, E> {
                Ok(Fraction(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Fraction, E> {
                Err(E::custom(format!("{v} is a decimal; write it as a fraction \"p/q\"")))
            }
        }

        d.deserialize_any(V)
    }
}

impl From<Rational> for Fraction {
    fn from(r: Rational) -> Self {
        Fraction(r)
    }
}

/// A function file.
///
/// `pwl2` holds vertex values of a continuous piecewise linear function over
/// the standard triangulation with `values[i][j] = π(i/q, j/q)`; `grid2`
/// holds a function on `(1/n)Z²` in the same layout. The one-dimensional
/// kinds hold `values[i] = π(i/q)` (or `i/n`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum FunctionDocument {
    #[serde(rename = "pwl2")]
    Pwl2 {
        q: u32,
        f: [Fraction; 2],
        values: Vec<Vec<Fraction>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    #[serde(rename = "pwl1")]
    Pwl1 {
        q: u32,
        f: Fraction,
        values: Vec<Fraction>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    #[serde(rename = "grid2")]
    Grid2 {
        n: u32,
        f: [Fraction; 2],
        values: Vec<Vec<Fraction>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    #[serde(rename = "grid1")]
    Grid1 {
        n: u32,
        f: Fraction,
        values: Vec<Fraction>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

/// A parsed function.
#[derive(Clone, Debug)]
pub enum Function {
    Pwl2(PwlFunction),
    /// A 1-row function with breakpoints in `(1/q)Z`, kept as its
    /// breakpoint values.
    Pwl1 { values: GridFunction, f: i64 },
    Grid2(FiniteProblem),
    Grid1(FiniteProblem),
}

fn grid_coordinate(x: &Rational, n: u32, what: &str) -> Result<i64, CliError> {
    let scaled = x * Rational::from_integer(n.into());
    if !scaled.is_integer() {
        return Err(CliError::Input(format!("{what} = {} is not on the grid (1/{n})Z", format_rational(x))));
    }
    let v = scaled
        .to_integer()
        .to_i64()
        .ok_or_else(|| CliError::Input(format!("{what} is out of range")))?;
    Ok(v.rem_euclid(i64::from(n)))
}

fn matrix(values: &[Vec<Fraction>], n: u32) -> Result<Vec<Vec<Rational>>, CliError> {
    let ns = n as usize;
    if values.len() != ns || values.iter().any(|r| r.len() != ns) {
        return Err(CliError::Input(format!("values must be a {ns}×{ns} matrix")));
    }
    Ok(values.iter().map(|r| r.iter().map(|v| v.0.clone()).collect()).collect())
}

fn vector(values: &[Fraction], n: u32) -> Result<Vec<Rational>, CliError> {
    if values.len() != n as usize {
        return Err(CliError::Input(format!("values must have {n} entries")));
    }
    Ok(values.iter().map(|v| v.0.clone()).collect())
}

fn positive(n: u32, what: &str) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Input(format!("{what} must be positive")));
    }
    Ok(())
}

impl FunctionDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid function document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            FunctionDocument::Pwl2 { name, .. }
            | FunctionDocument::Pwl1 { name, .. }
            | FunctionDocument::Grid2 { name, .. }
            | FunctionDocument::Grid1 { name, .. } => name.as_deref(),
        }
    }

    pub fn function(&self) -> Result<Function, CliError> {
        let input = |e: &dyn fmt::Display| CliError::Input(e.to_string());
        match self {
            FunctionDocument::Pwl2 { q, f, values, .. } => {
                positive(*q, "q")?;
                let fg = (grid_coordinate(&f[0].0, *q, "f.x")?, grid_coordinate(&f[1].0, *q, "f.y")?);
                let table = matrix(values, *q)?;
                PwlFunction::new(*q, fg, table).map(Function::Pwl2).map_err(|e| input(&e))
            }
            FunctionDocument::Pwl1 { q, f, values, .. } => {
                positive(*q, "q")?;
                let fg = grid_coordinate(&f.0, *q, "f")?;
                let values = GridFunction::new(*q, 1, vector(values, *q)?).map_err(|e| input(&e))?;
                if fg == 0 {
                    return Err(CliError::Input("f must not be an integer".into()));
                }
                Ok(Function::Pwl1 { values, f: fg })
            }
            FunctionDocument::Grid2 { n, f, values, .. } => {
                positive(*n, "n")?;
                let fg = (grid_coordinate(&f[0].0, *n, "f.x")?, grid_coordinate(&f[1].0, *n, "f.y")?);
                let flat = matrix(values, *n)?.into_iter().flatten().collect();
                let g = GridFunction::new(*n, 2, flat).map_err(|e| input(&e))?;
                FiniteProblem::two_row(g, fg).map(Function::Grid2).map_err(|e| input(&e))
            }
            FunctionDocument::Grid1 { n, f, values, .. } => {
                positive(*n, "n")?;
                let fg = grid_coordinate(&f.0, *n, "f")?;
                let g = GridFunction::new(*n, 1, vector(values, *n)?).map_err(|e| input(&e))?;
                FiniteProblem::one_row(g, fg).map(Function::Grid1).map_err(|e| input(&e))
            }
        }
    }
}

/// Grid values in the document layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum GridValues {
    Two(Vec<Vec<Fraction>>),
    One(Vec<Fraction>),
}

impl GridValues {
    pub fn of(g: &GridFunction) -> Self {
        let n = g.n as usize;
        if g.dims == 1 {
            GridValues::One(g.values.iter().cloned().map(Fraction).collect())
        } else {
            GridValues::Two(g.values.chunks(n).map(|r| r.iter().cloned().map(Fraction).collect()).collect())
        }
    }
}

/// Verdict labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictLabel {
    #[serde(rename = "MINIMAL")]
    Minimal,
    #[serde(rename = "NOT-MINIMAL")]
    NotMinimal,
    #[serde(rename = "EXTREME")]
    Extreme,
    #[serde(rename = "NOT-EXTREME")]
    NotExtreme,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violated {
    pub condition: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateDocument {
    /// Grid resolution `n` of the perturbation on `(1/n)Z^d`.
    pub n: u32,
    pub epsilon: Fraction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub values: GridValues,
}

/// Output of the `minimality` and `extremality` commands. A certificate is
/// present exactly when the verdict is `NOT-EXTREME`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictDocument {
    pub verdict: VerdictLabel,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated: Option<Violated>,
    /// Method whose verdict was cross-checked against this one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees_with: Option<&'static str>,
    pub elapsed_ms: f64,
}

pub const FINITE: &str = "finite-restriction";
pub const PIPELINE: &str = "reduction-pipeline";

impl VerdictDocument {
    pub fn new(verdict: VerdictLabel, method: &'static str) -> Self {
        Self {
            verdict,
            method,
            name: None,
            m: None,
            kernel_dimension: None,
            certificate: None,
            violated: None,
            agrees_with: None,
            elapsed_ms: 0.0,
        }
    }
}
