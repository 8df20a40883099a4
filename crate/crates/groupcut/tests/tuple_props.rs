mod common;

use groupcut::lattice::{Face, FaceKind, LatticePoint};
use groupcut::pwl::{delta_sigma, PwlFunction};
use groupcut::rational::{rat, Rational};
use groupcut::tuples::{enumerate_additive, is_additive, valid_translations, SevenTuple};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn minimal_function(seed: u64) -> PwlFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let q = rng.gen_range(2..=3);
        let d = [2, 3, 4][rng.gen_range(0..3)];
        if let Some(pi) = common::random_candidate(&mut rng, q, d) {
            return pi;
        }
    }
}

fn valid_tuple(rng: &mut ChaCha8Rng, q: u32) -> SevenTuple {
    let qi = i64::from(q);
    loop {
        let faces = [0; 3].map(|_| {
            let k = FaceKind::ALL[rng.gen_range(0..6)];
            Face::new(k, (rng.gen_range(-qi..2 * qi), rng.gen_range(-qi..2 * qi)), q)
        });
        let sigma = [0; 3].map(|_| if rng.gen_bool(0.5) { 1 } else { -1 });
        let ts = valid_translations(faces, sigma);
        if !ts.is_empty() {
            return SevenTuple::new(faces, sigma, ts[rng.gen_range(0..ts.len())]);
        }
    }
}

/// `Δ_σ π` vanishes on all convex combinations of up to three vertices of
/// `F(τ)` with weights in `(1/6)Z`.
fn additive_on_sample(pi: &PwlFunction, tau: &SevenTuple) -> bool {
    let q = tau.q();
    let vs: Vec<[LatticePoint; 3]> = tau
        .f_vertices()
        .into_iter()
        .map(|tr| tr.map(|(a, b)| LatticePoint::on_grid(a, b, q)))
        .collect();
    let n = vs.len();
    let weights: Vec<[i64; 3]> = (0..=6)
        .flat_map(|a| (0..=6 - a).map(move |b| [a, b, 6 - a - b]))
        .collect();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                for w in &weights {
                    let mut pt = [LatticePoint::origin(), LatticePoint::origin(), LatticePoint::origin()];
                    for (idx, wt) in [i, j, k].into_iter().zip(w) {
                        let l: Rational = rat(*wt, 6);
                        for s in 0..3 {
                            pt[s] = pt[s].add(&vs[idx][s].scale(&l));
                        }
                    }
                    if !delta_sigma(pi, tau.sigma, &pt[0], &pt[1], &pt[2]).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rewritten_tuples_stay_valid(seed in any::<u64>(), q in 1u32..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = valid_tuple(&mut rng, q);
        for i in 0..3 {
            prop_assert_eq!(tau.project(i), Some(tau.faces[i]));
        }
        for perm in [[1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0]] {
            prop_assert!(tau.permuted(perm).is_valid());
        }
        prop_assert!(tau.negated().is_valid());
        prop_assert!(tau.canonical().is_valid());
    }

    #[test]
    fn additivity_matches_sampling(seed in any::<u64>()) {
        let pi = minimal_function(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let additive: Vec<SevenTuple> = enumerate_additive(&pi).tuples.into_iter().collect();
        let mut sample: Vec<SevenTuple> = (0..6).map(|_| valid_tuple(&mut rng, pi.q())).collect();
        for _ in 0..6 {
            sample.push(additive[rng.gen_range(0..additive.len())]);
        }
        for tau in &sample {
            let verdict = is_additive(&pi, tau);
            prop_assert_eq!(verdict, additive_on_sample(&pi, tau), "{}", tau);
            for perm in [[1, 0, 2], [0, 2, 1], [2, 0, 1]] {
                prop_assert_eq!(is_additive(&pi, &tau.permuted(perm)), verdict);
            }
            prop_assert_eq!(is_additive(&pi, &tau.negated()), verdict);
            prop_assert_eq!(is_additive(&pi, &tau.canonical()), verdict);
        }
    }
}
