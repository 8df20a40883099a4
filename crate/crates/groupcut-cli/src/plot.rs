//! CSV dumps and SVG heatmaps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use groupcut::finite_group::{tight_pairs, FiniteProblem};
use groupcut::pwl::GridFunction;
use groupcut::rational::{format_rational, int, Rational};
use num_traits::ToPrimitive;

use crate::document::{Function, FunctionDocument};
use crate::error::CliError;

const CELL: usize = 24;

/// Row `r`, column `c` holds the value at `(c/n, r/n)`. With `closure` the
/// periodic boundary is repeated as an extra row and column.
fn layout(g: &GridFunction, closure: bool) -> Vec<Vec<Rational>> {
    let n = i64::from(g.n);
    let len = if closure { n + 1 } else { n };
    if g.dims == 1 {
        return vec![(0..len).map(|i| g.get(i.rem_euclid(n), 0).clone()).collect()];
    }
    (0..len)
        .map(|r| (0..len).map(|c| g.get(c.rem_euclid(n), r.rem_euclid(n)).clone()).collect())
        .collect()
}

fn csv(rows: &[Vec<Rational>]) -> String {
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().map(format_rational).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn svg(rows: &[Vec<Rational>], title: &str) -> String {
    let all: Vec<f64> = rows.iter().flatten().map(|v| v.to_f64().unwrap_or(0.0)).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w * CELL,
        h * CELL + CELL,
        w * CELL,
        h * CELL + CELL
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r#"<text x="2" y="{}" font-size="12" font-family="monospace">{}</text>"#, CELL - 6, escape(title));
    // The first row is drawn at the bottom so that y grows upwards.
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let t = (v.to_f64().unwrap_or(0.0) - lo) / span;
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({shade},{shade},255)"><title>{}</title></rect>"#,
                c * CELL,
                (h - r) * CELL,
                format_rational(v)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Number of tight pairs `(u, v)` each point belongs to.
fn tight_density(p: &FiniteProblem) -> GridFunction {
    let mut counts = vec![0i64; p.order()];
    for (u, v) in tight_pairs(p) {
        counts[u] += 1;
        if v != u {
            counts[v] += 1;
        }
    }
    GridFunction { n: p.n, dims: p.dims, values: counts.into_iter().map(int).collect() }
}

/// `plot FILE --out DIR`: writes `values.csv`, `values.svg`, `tight.csv`
/// and `tight.svg`, returning the written paths. Piecewise linear functions
/// are sampled on `(1/(mq))Z^d` and include the closing periodic row and
/// column; grid functions are written as stored.
pub fn plot(doc: &FunctionDocument, m: u32, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if m == 0 {
        return Err(CliError::Input("--m must be positive".into()));
    }
    let function = doc.function()?;
    let (values, problem, closure) = match &function {
        Function::Pwl2(pi) => (pi.restrict(m), FiniteProblem::from_pwl(pi, m), true),
        Function::Pwl1 { values, f } => {
            let g = values.refine_1d(m);
            let p = FiniteProblem::one_row(g.clone(), f * i64::from(m)).expect("f is off the lattice");
            (g, p, true)
        }
        Function::Grid2(p) | Function::Grid1(p) => (p.values.clone(), p.clone(), false),
    };
    fs::create_dir_all(out).map_err(|e| CliError::Input(format!("cannot create {}: {e}", out.display())))?;
    let name = doc.name().unwrap_or("function");
    let value_rows = layout(&values, closure);
    let density_rows = layout(&tight_density(&problem), closure);
    let files = [
        ("values.csv", csv(&value_rows)),
        ("values.svg", svg(&value_rows, &format!("{name}: values on (1/{})Z", values.n))),
        ("tight.csv", csv(&density_rows)),
        ("tight.svg", svg(&density_rows, &format!("{name}: tight pairs per point"))),
    ];
    let mut written = Vec::new();
    for (file, body) in files {
        let path = out.join(file);
        fs::write(&path, body).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
