//! The subcommands, as functions from documents to documents.

use std::time::Instant;

use clap::ValueEnum;
use groupcut::finite_group::{extremality_kernel, finite_minimality, FiniteProblem, MinimalityReport};
use groupcut::pwl::GridFunction;
use groupcut::rational::{rat, Rational};
use groupcut::reduction::{run_pipeline, verify_certificate, CertificateSource, Verdict};
use groupcut::tuples::{enumerate_additive, SevenTuple};
use num_traits::One;
use serde::Serialize;

use crate::document::{
    CertificateDocument, Fraction, Function, FunctionDocument, GridValues, VerdictDocument, VerdictLabel, Violated,
    FINITE, PIPELINE,
};
use crate::error::CliError;

/// Which extremality test to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Run both and fail if they disagree.
    Both,
    Finite,
    Pipeline,
}

/// The finite problem of a function at refinement `m`. Grid documents are
/// already finite and ignore `m`.
fn finite_problem(function: &Function, m: u32) -> FiniteProblem {
    match function {
        Function::Pwl2(pi) => FiniteProblem::from_pwl(pi, m),
        Function::Pwl1 { values, f } => {
            FiniteProblem::one_row(values.refine_1d(m), f * i64::from(m)).expect("f is off the lattice")
        }
        Function::Grid2(p) | Function::Grid1(p) => p.clone(),
    }
}

fn violated(report: &MinimalityReport) -> Option<Violated> {
    report.violation.as_ref().map(|v| Violated { condition: v.name(), detail: v.to_string() })
}

fn not_minimal(report: &MinimalityReport, method: &'static str) -> VerdictDocument {
    let mut doc = VerdictDocument::new(VerdictLabel::NotMinimal, method);
    doc.violated = violated(report);
    doc
}

fn level(function: &Function, m: u32) -> Option<u32> {
    matches!(function, Function::Pwl2(_) | Function::Pwl1 { .. }).then_some(m)
}

/// `minimality FILE`.
pub fn minimality(doc: &FunctionDocument) -> Result<VerdictDocument, CliError> {
    let start = Instant::now();
    let function = doc.function()?;
    let report = finite_minimality(&finite_problem(&function, 1));
    let mut out = if report.minimal {
        VerdictDocument::new(VerdictLabel::Minimal, FINITE)
    } else {
        not_minimal(&report, FINITE)
    };
    out.name = doc.name().map(str::to_string);
    out.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(out)
}

/// Largest `ε = 2⁻ᵏ`, `k ≤ 20`, keeping both `π ± ε·π̄` minimal.
fn epsilon(p: &FiniteProblem, pibar: &GridFunction) -> Option<Rational> {
    let mut eps = Rational::one();
    for _ in 0..=20 {
        let ok = [eps.clone(), -eps.clone()].iter().all(|c| {
            let mut q = p.clone();
            q.values = p.values.add_scaled(c, pibar);
            finite_minimality(&q).minimal
        });
        if ok {
            return Some(eps);
        }
        eps /= rat(2, 1);
    }
    None
}

fn finite_verdict(function: &Function, m: u32) -> Result<VerdictDocument, CliError> {
    let p = finite_problem(function, m);
    let report = finite_minimality(&p);
    if !report.minimal {
        return Ok(not_minimal(&report, FINITE));
    }
    let kernel = extremality_kernel(&p).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = if kernel.is_trivial() {
        VerdictDocument::new(VerdictLabel::Extreme, FINITE)
    } else {
        let pibar = &kernel.basis[0];
        let eps = epsilon(&p, pibar)
            .ok_or_else(|| CliError::Internal("no ε validates the kernel perturbation".into()))?;
        let mut doc = VerdictDocument::new(VerdictLabel::NotExtreme, FINITE);
        doc.certificate = Some(CertificateDocument {
            n: p.n,
            epsilon: Fraction(eps),
            source: None,
            values: GridValues::of(pibar),
        });
        doc
    };
    out.kernel_dimension = Some(kernel.dimension);
    out.m = level(function, m);
    Ok(out)
}

fn pipeline_verdict(function: &Function, m: u32) -> Result<VerdictDocument, CliError> {
    let Function::Pwl2(pi) = function else {
        return Err(CliError::Input("the reduction pipeline needs a pwl2 document".into()));
    };
    let report = finite_minimality(&FiniteProblem::from_pwl(pi, 1));
    if !report.minimal {
        return Ok(not_minimal(&report, PIPELINE));
    }
    let outcome = run_pipeline(pi, m).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = match (outcome.verdict, outcome.certificate) {
        (Verdict::Extreme, _) => VerdictDocument::new(VerdictLabel::Extreme, PIPELINE),
        (Verdict::NotExtreme, Some(c)) => {
            let eps = verify_certificate(pi, &c.perturbation, m)
                .map_err(|e| CliError::Internal(format!("certificate rejected: {e}")))?;
            let source = match c.source {
                CertificateSource::Vertex => "vertex".to_string(),
                CertificateSource::FreeTriangle(f) => format!("free triangle {f}"),
                CertificateSource::EdgeSystem { components, equations } => {
                    format!("edge system with {components} components and {equations} equations")
                }
            };
            let mut doc = VerdictDocument::new(VerdictLabel::NotExtreme, PIPELINE);
            doc.certificate = Some(CertificateDocument {
                n: c.perturbation.n,
                epsilon: Fraction(eps),
                source: Some(source),
                values: GridValues::of(&c.perturbation),
            });
            doc
        }
        (Verdict::NotExtreme, None) => {
            return Err(CliError::Internal("NOT-EXTREME verdict without certificate".into()));
        }
    };
    out.m = Some(m);
    Ok(out)
}

/// `extremality FILE --m M --method METHOD`. With [`Method::Both`] the
/// pipeline verdict is reported after cross-checking it against the finite
/// method; documents the pipeline does not handle get the finite verdict.
pub fn extremality(doc: &FunctionDocument, m: u32, method: Method) -> Result<VerdictDocument, CliError> {
    if m < 3 {
        return Err(CliError::Input(format!("--m must be at least 3, got {m}")));
    }
    let start = Instant::now();
    let function = doc.function()?;
    let mut out = match method {
        Method::Finite => finite_verdict(&function, m)?,
        Method::Pipeline => pipeline_verdict(&function, m)?,
        Method::Both if !matches!(function, Function::Pwl2(_)) => finite_verdict(&function, m)?,
        Method::Both => {
            let finite = finite_verdict(&function, m)?;
            let mut pipeline = pipeline_verdict(&function, m)?;
            if finite.verdict != pipeline.verdict {
                return Err(CliError::Internal(format!(
                    "methods disagree: finite restriction says {:?}, reduction pipeline says {:?}",
                    finite.verdict, pipeline.verdict
                )));
            }
            pipeline.kernel_dimension = finite.kernel_dimension;
            pipeline.agrees_with = Some(FINITE);
            pipeline
        }
    };
    out.name = doc.name().map(str::to_string);
    out.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceDocument {
    pub kind: String,
    /// Anchor in units of `1/q`.
    pub anchor: [i64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleDocument {
    pub faces: [FaceDocument; 3],
    pub sigma: [i8; 3],
    /// Translation in units of `1/q`.
    pub t: [i64; 2],
    pub class: Option<u8>,
}

impl From<&SevenTuple> for TupleDocument {
    fn from(tau: &SevenTuple) -> Self {
        Self {
            faces: tau.faces.map(|f| FaceDocument { kind: format!("{:?}", f.kind), anchor: [f.anchor.0, f.anchor.1] }),
            sigma: tau.sigma,
            t: [tau.t.0, tau.t.1],
            class: tau.kind_class(),
        }
    }
}

/// Output of `faces`.
#[derive(Clone, Debug, Serialize)]
pub struct FacesDocument {
    pub q: u32,
    pub count: usize,
    /// Members per class 1–7.
    pub class_counts: [usize; 7],
    pub tuples: Vec<TupleDocument>,
}

/// `faces FILE`: the additive faces of a `pwl2` function.
pub fn faces(doc: &FunctionDocument) -> Result<FacesDocument, CliError> {
    let Function::Pwl2(pi) = doc.function()? else {
        return Err(CliError::Input("additive faces need a pwl2 document".into()));
    };
    let set = enumerate_additive(&pi);
    Ok(FacesDocument {
        q: set.q,
        count: set.len(),
        class_counts: set.class_counts(),
        tuples: set.tuples.iter().map(TupleDocument::from).collect(),
    })
}
