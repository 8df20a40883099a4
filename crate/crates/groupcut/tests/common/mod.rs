#![allow(dead_code)]

use groupcut::finite_group::{finite_minimality, FiniteProblem};
use groupcut::pwl::PwlFunction;
use groupcut::rational::{rat, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random symmetric vertex assignment over `P_q` with values in
/// `{0, 1/d, …, 1}`, or `None` if it is not minimal.
pub fn random_candidate(rng: &mut ChaCha8Rng, q: u32, d: i64) -> Option<PwlFunction> {
    let qi = i64::from(q);
    let f = (rng.gen_range(0..qi), rng.gen_range(0..qi));
    if f == (0, 0) {
        return None;
    }
    let mut table = vec![vec![None::<Rational>; q as usize]; q as usize];
    table[0][0] = Some(rat(0, 1));
    table[f.0 as usize][f.1 as usize] = Some(rat(1, 1));
    for i in 0..qi {
        for j in 0..qi {
            if table[i as usize][j as usize].is_some() {
                continue;
            }
            let (a, b) = ((f.0 - i).rem_euclid(qi), (f.1 - j).rem_euclid(qi));
            let v = if (a, b) == (i, j) { rat(1, 2) } else { rat(rng.gen_range(0..=d), d) };
            table[a as usize][b as usize] = Some(rat(1, 1) - &v);
            table[i as usize][j as usize] = Some(v);
        }
    }
    let table: Vec<Vec<Rational>> = table
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.expect("filled")).collect())
        .collect();
    let pi = PwlFunction::new(q, f, table).ok()?;
    finite_minimality(&FiniteProblem::from_pwl(&pi, 1)).minimal.then_some(pi)
}

/// At least `count` distinct minimal functions over `P_q` for `q ∈ {2, 3}`.
pub fn minimal_corpus(seed: u64, count: usize) -> Vec<PwlFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<PwlFunction> = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 1_000_000, "corpus generation stalled");
        let q = if rng.gen_bool(0.5) { 2 } else { 3 };
        let d = [2, 3, 4, 6][rng.gen_range(0..4)];
        if let Some(pi) = random_candidate(&mut rng, q, d) {
            if !out.contains(&pi) {
                out.push(pi);
            }
        }
    }
    out
}

/// `π(x, y) = φ(x + s·y)` for a random symmetric 1-row table `φ`.
pub fn cylinder(rng: &mut ChaCha8Rng, q: i64) -> Option<PwlFunction> {
    let f1 = rng.gen_range(1..q);
    let d = [2i64, 3, 4][rng.gen_range(0..3)];
    let mut phi = vec![None::<Rational>; q as usize];
    phi[0] = Some(rat(0, 1));
    phi[f1 as usize] = Some(rat(1, 1));
    for i in 0..q {
        if phi[i as usize].is_some() {
            continue;
        }
        let a = (f1 - i).rem_euclid(q);
        let v = if a == i { rat(1, 2) } else { rat(rng.gen_range(0..=d), d) };
        phi[a as usize] = Some(rat(1, 1) - &v);
        phi[i as usize] = Some(v);
    }
    let s = rng.gen_range(0..3);
    let table = (0..q)
        .map(|i| (0..q).map(|j| phi[((i + s * j) % q) as usize].clone().expect("filled")).collect())
        .collect();
    let pi = PwlFunction::new(q as u32, (f1, 0), table).ok()?;
    finite_minimality(&FiniteProblem::from_pwl(&pi, 1)).minimal.then_some(pi)
}
