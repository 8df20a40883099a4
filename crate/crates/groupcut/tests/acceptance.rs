//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use groupcut::catalog::{gmic_half_problem, p5_figure};
use groupcut::finite_group::{extremality_kernel, finite_minimality, FiniteProblem};
use groupcut::functional::{lift_pwl, lifted_residual, orbit, solve_finite, Equation, SystemSpec};
use groupcut::lattice::{Face, FaceKind};
use groupcut::pwl::PwlFunction;
use groupcut::rational::{int, rat, Rational};
use groupcut::reduction::{run_pipeline, verify_certificate, Verdict};
use groupcut::tuples::{admissible_kind_patterns, rejection_case, Shape, SevenTuple};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const P5_LIMIT: Duration = Duration::from_secs(1);
const INTEGRALITY_LIMIT: Duration = Duration::from_secs(30);
const M_INDEPENDENCE_LIMIT: Duration = Duration::from_secs(300);
const PERFORMANCE_LIMIT: Duration = Duration::from_secs(10);

const CORPUS_SEED: u64 = 20;
const CORPUS_SIZE: usize = 24;
const TUPLES_PER_Q: usize = 1000;
const SYSTEM_SPECS: usize = 100;
const SAMPLE_POINTS: i64 = 101;
const ORBIT_SAMPLES: i64 = 200;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn is_extreme(pi: &PwlFunction, m: u32) -> bool {
    extremality_kernel(&FiniteProblem::from_pwl(pi, m))
        .expect("corpus functions are minimal")
        .is_trivial()
}

fn p5_minimal() -> Outcome {
    let pi = p5_figure();
    let (report, took) = timed(|| finite_minimality(&FiniteProblem::from_pwl(&pi, 1)));
    check(
        report.minimal && took < P5_LIMIT,
        format!("minimal={} in {took:?} (limit {P5_LIMIT:?})", report.minimal),
    )
}

/// Patterns realised by at least one valid tuple of `P_2`, against the
/// classification table.
fn pattern_census() -> Outcome {
    let table = admissible_kind_patterns();
    let mut counts = [0usize; 7];
    for (_, class) in &table {
        counts[usize::from(*class) - 1] += 1;
    }
    let mut rejected = BTreeMap::new();
    for a in Shape::ALL {
        for b in Shape::ALL {
            for c in Shape::ALL {
                if let Some(case) = rejection_case([a, b, c]) {
                    *rejected.entry(case).or_insert(0usize) += 1;
                }
            }
        }
    }
    let q = 2;
    let mut realised = BTreeSet::new();
    for k1 in FaceKind::ALL {
        for k2 in FaceKind::ALL {
            for k3 in FaceKind::ALL {
                let faces = [Face::new(k1, (0, 0), q), Face::new(k2, (0, 0), q), Face::new(k3, (0, 0), q)];
                for s in 0..8u8 {
                    let sigma = [0, 1, 2].map(|b| if s >> b & 1 == 1 { -1 } else { 1 });
                    'search: for tx in -6..=6 {
                        for ty in -6..=6 {
                            if SevenTuple::new(faces, sigma, (tx, ty)).is_valid() {
                                realised.insert([k1, k2, k3].map(Shape::of));
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    let listed: BTreeSet<[Shape; 3]> = table.iter().map(|(p, _)| *p).collect();
    let rej: Vec<usize> = (1..=3).map(|c| rejected.get(&c).copied().unwrap_or(0)).collect();
    check(
        table.len() == 50 && counts == [1, 9, 6, 3, 9, 18, 4] && rej == [12, 27, 36] && realised == listed,
        format!(
            "{} patterns, classes {counts:?}, rejected {rej:?}, realised by valid tuples: {}",
            table.len(),
            realised == listed
        ),
    )
}

fn random_valid_tuple(rng: &mut ChaCha8Rng, q: u32) -> SevenTuple {
    let qi = i64::from(q);
    loop {
        let faces = [0; 3].map(|_| {
            let k = FaceKind::ALL[rng.gen_range(0..6)];
            Face::new(k, (rng.gen_range(-qi..2 * qi), rng.gen_range(-qi..2 * qi)), q)
        });
        let sigma = [0; 3].map(|_| if rng.gen_bool(0.5) { 1 } else { -1 });
        let ts = groupcut::tuples::valid_translations(faces, sigma);
        if !ts.is_empty() {
            return SevenTuple::new(faces, sigma, ts[rng.gen_range(0..ts.len())]);
        }
    }
}

/// Vertices of `F(τ) ⊂ R⁴` (the third point is determined by the first two)
/// by brute-force enumeration of basic solutions of the 18 face
/// inequalities, in exact fractions `num / den` over grid units.
fn f_vertices_oracle(tau: &SevenTuple) -> Option<BTreeSet<[(i64, i64); 3]>> {
    const A: [[i64; 2]; 6] = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]];
    let q = int(i64::from(tau.q()));
    let rhs = |f: &Face| f.inequality_rhs().map(|b| (b * &q).to_integer().try_into().expect("small"));
    let [b1, b2, b3]: [[i64; 6]; 3] = [rhs(&tau.faces[0]), rhs(&tau.faces[1]), rhs(&tau.faces[2])];
    let [s1, s2, s3] = tau.sigma.map(i64::from);
    let (tx, ty) = tau.t;
    // z = s3 (t − s1 x − s2 y); rows are (coefficients on x1 x2 y1 y2, bound).
    let mut rows: Vec<([i64; 4], i64)> = Vec::new();
    for k in 0..6 {
        let [a0, a1] = A[k];
        rows.push(([a0, a1, 0, 0], b1[k]));
        rows.push(([0, 0, a0, a1], b2[k]));
        let c = s3 * (a0 * tx + a1 * ty);
        rows.push(([-s3 * s1 * a0, -s3 * s1 * a1, -s3 * s2 * a0, -s3 * s2 * a1], b3[k] - c));
    }
    let n = rows.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let pick = [rows[i], rows[j], rows[k], rows[l]];
                    let m: [[i64; 4]; 4] = pick.map(|(a, _)| a);
                    let d = det4(&m);
                    if d == 0 {
                        continue;
                    }
                    let mut nums = [0i64; 4];
                    for col in 0..4 {
                        let mut mc = m;
                        for r in 0..4 {
                            mc[r][col] = pick[r].1;
                        }
                        nums[col] = det4(&mc);
                    }
                    let feasible = rows.iter().all(|(a, b)| {
                        let lhs: i64 = (0..4).map(|c| a[c] * nums[c]).sum();
                        if d > 0 {
                            lhs <= *b * d
                        } else {
                            lhs >= *b * d
                        }
                    });
                    if !feasible {
                        continue;
                    }
                    if nums.iter().any(|v| v % d != 0) {
                        return None;
                    }
                    let v = nums.map(|v| v / d);
                    let z = (s3 * (tx - s1 * v[0] - s2 * v[2]), s3 * (ty - s1 * v[1] - s2 * v[3]));
                    out.insert([(v[0], v[1]), (v[2], v[3]), z]);
                }
            }
        }
    }
    Some(out)
}

fn det4(m: &[[i64; 4]; 4]) -> i64 {
    let minor = |skip: usize| {
        let r: [[i64; 3]; 3] = [1, 2, 3].map(|row| {
            let mut v = [0; 3];
            let mut c = 0;
            for (col, &x) in m[row].iter().enumerate() {
                if col != skip {
                    v[c] = x;
                    c += 1;
                }
            }
            v
        });
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    };
    (0..4).map(|c| if c % 2 == 0 { m[0][c] * minor(c) } else { -m[0][c] * minor(c) }).sum()
}

fn vertex_integrality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (bad, took) = timed(|| {
        let tuples: Vec<SevenTuple> = (1..=5)
            .flat_map(|q| (0..TUPLES_PER_Q).map(move |_| q))
            .map(|q| random_valid_tuple(&mut rng, q))
            .collect();
        tuples
            .par_iter()
            .filter(|tau| {
                let listed: BTreeSet<_> = tau.f_vertices().into_iter().collect();
                f_vertices_oracle(tau).as_ref() != Some(&listed)
            })
            .count()
    });
    check(
        bad == 0 && took < INTEGRALITY_LIMIT,
        format!("{} tuples, {bad} non-integral or mismatched, {took:?} (limit {INTEGRALITY_LIMIT:?})", 5 * TUPLES_PER_Q),
    )
}

fn m_independence(corpus: &[PwlFunction]) -> Outcome {
    let (differing, took) = timed(|| {
        corpus
            .iter()
            .filter(|pi| {
                let v: Vec<bool> = (3..=5).map(|m| is_extreme(pi, m)).collect();
                v.iter().any(|&x| x != v[0])
            })
            .count()
    });
    check(
        corpus.len() >= 20 && differing == 0 && took < M_INDEPENDENCE_LIMIT,
        format!("{} functions, {differing} verdicts depend on m, {took:?} (limit {M_INDEPENDENCE_LIMIT:?})", corpus.len()),
    )
}

fn pipeline_vs_oracle(functions: &[PwlFunction]) -> Outcome {
    let mut disagree = 0;
    let mut extreme = 0;
    for pi in functions {
        let verdict = run_pipeline(pi, 3).map(|o| o.verdict);
        let oracle = is_extreme(pi, 3);
        if oracle {
            extreme += 1;
        }
        if verdict != Ok(if oracle { Verdict::Extreme } else { Verdict::NotExtreme }) {
            disagree += 1;
        }
    }
    check(
        disagree == 0,
        format!("{} functions ({extreme} extreme), {disagree} disagreements", functions.len()),
    )
}

fn certificates(functions: &[PwlFunction]) -> Outcome {
    let mut issued = 0;
    let mut failed = 0;
    for pi in functions {
        let Ok(out) = run_pipeline(pi, 3) else {
            failed += 1;
            continue;
        };
        if out.verdict == Verdict::NotExtreme {
            issued += 1;
            let ok = out
                .certificate
                .map(|c| !c.perturbation.is_zero() && verify_certificate(pi, &c.perturbation, 3).is_ok())
                .unwrap_or(false);
            if !ok {
                failed += 1;
            }
        }
    }
    check(failed == 0, format!("{issued} certificates, {failed} rejected"))
}

fn random_spec(rng: &mut ChaCha8Rng) -> SystemSpec {
    let ell = rng.gen_range(1..=4);
    let k = rng.gen_range(1..=6);
    let eqs = (0..k)
        .map(|_| {
            let mut e = Equation::default();
            for _ in 0..rng.gen_range(1..=3) {
                let c = int(rng.gen_range(-2..=2));
                if rng.gen_bool(0.5) {
                    e.add_a(rng.gen_range(0..ell), c);
                } else {
                    e.add_b(rng.gen_range(0..ell), c);
                }
            }
            e
        })
        .collect();
    SystemSpec::new(ell, eqs).expect("indices in range")
}

/// Rank of a small rational matrix by Gaussian elimination.
fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = &rows[i][c] / &rows[r][c];
                let pivot = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &factor * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Whether the system forces `f(x, ·) = f(1 − x, ·) = 0` at a point
/// `x ≠ 1/2`.
fn forces_zero_at(s: &SystemSpec, x: &Rational) -> bool {
    let ell = s.ell;
    let y = int(1) - x;
    let mut rows = Vec::new();
    for eq in &s.equations {
        for (here, there) in [(x, &y), (&y, x)] {
            let mut row = vec![Rational::zero(); 2 * ell];
            let slot = |p: &Rational, i: usize| if p == x { i } else { ell + i };
            for (&i, c) in &eq.a {
                row[slot(here, i)] += c;
            }
            for (&j, c) in &eq.b {
                row[slot(there, j)] += c;
            }
            rows.push(row);
        }
    }
    rank(rows) == 2 * ell
}

fn discretization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<Rational> = (0..SAMPLE_POINTS).map(|k| rat(k, SAMPLE_POINTS - 1)).collect();
    let mut nontrivial = 0;
    let mut bad = 0;
    for _ in 0..SYSTEM_SPECS {
        let s = random_spec(&mut rng);
        let basis = solve_finite(&s, 3).expect("m = 3");
        let lifted_ok = basis.first().is_some_and(|sol| {
            let lift = lift_pwl(sol);
            let solves = samples
                .iter()
                .all(|x| (0..s.equations.len()).all(|k| lifted_residual(&s, &lift, k, x).is_zero()));
            let nonzero = samples.iter().any(|x| lift.iter().any(|e| !e.eval(x).is_zero()));
            solves && nonzero
        });
        let zero_forced = samples
            .iter()
            .filter(|x| **x != rat(1, 2) && !x.is_zero() && !x.is_one())
            .all(|x| forces_zero_at(&s, x));
        if !basis.is_empty() {
            nontrivial += 1;
        }
        if !basis.is_empty() != lifted_ok || basis.is_empty() != zero_forced {
            bad += 1;
        }
    }
    check(bad == 0, format!("{SYSTEM_SPECS} systems, {nontrivial} nontrivial, {bad} inconsistent"))
}

fn orbit_lemma() -> Outcome {
    let ell = 3;
    let xs: Vec<Rational> = (0..ORBIT_SAMPLES).map(|k| rat(k, ORBIT_SAMPLES - 1)).collect();
    let reps: BTreeSet<Rational> = xs
        .iter()
        .map(|x| {
            let y = int(1) - x;
            if *x <= y {
                x.clone()
            } else {
                y
            }
        })
        .collect();
    let orbits: Vec<_> = reps.iter().map(|x| orbit(x, ell)).collect();
    let mut disjoint = true;
    for (i, a) in orbits.iter().enumerate() {
        for b in &orbits[i + 1..] {
            disjoint &= a.pairs.is_disjoint(&b.pairs);
        }
    }
    let covered = xs.iter().all(|x| {
        (0..ell).all(|i| orbits.iter().filter(|o| o.pairs.contains(&(x.clone(), i))).count() == 1)
    });
    let reflected = xs.iter().all(|x| orbit(x, ell).pairs == orbit(&(int(1) - x), ell).pairs);
    check(
        disjoint && covered && reflected,
        format!("{} points: disjoint={disjoint} covered={covered} reflection={reflected}", xs.len()),
    )
}

fn gmic() -> Outcome {
    let k = extremality_kernel(&gmic_half_problem(3)).expect("minimal");
    check(k.is_trivial(), format!("kernel dimension {}", k.dimension))
}

fn performance() -> Outcome {
    let pi = p5_figure();
    let (k, took) = timed(|| extremality_kernel(&FiniteProblem::from_pwl(&pi, 3)).expect("minimal"));
    check(
        took < PERFORMANCE_LIMIT,
        format!("q=5 m=3 kernel dimension {} in {took:?} (limit {PERFORMANCE_LIMIT:?})", k.dimension),
    )
}

#[test]
fn acceptance() {
    let corpus = common::minimal_corpus(CORPUS_SEED, CORPUS_SIZE);
    let mut with_p5 = corpus.clone();
    with_p5.push(p5_figure());
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 P5 figure is minimal", p5_minimal()),
        ("2 pattern census", pattern_census()),
        ("3 vertex integrality", vertex_integrality()),
        ("4 m-independence", m_independence(&corpus)),
        ("5 pipeline matches oracle", pipeline_vs_oracle(&with_p5)),
        ("6 certificates verify", certificates(&with_p5)),
        ("7 discretization of systems", discretization()),
        ("8 orbit partition", orbit_lemma()),
        ("9 GMIC f=1/2 extreme", gmic()),
        ("10 performance q=5 m=3", performance()),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in &criteria {
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                println!("FAIL criterion {name}: {d}");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
