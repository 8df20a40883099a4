mod common;

use groupcut::finite_group::{extremality_kernel, FiniteProblem};
use groupcut::reduction::{run_pipeline, verify_certificate, CertificateSource, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pipeline_matches_finite_oracle() {
    let corpus = common::minimal_corpus(1, 40);
    let mut extreme = 0;
    for pi in &corpus {
        let oracle = extremality_kernel(&FiniteProblem::from_pwl(pi, 3)).unwrap();
        let out = run_pipeline(pi, 3).unwrap_or_else(|e| panic!("{e} on {:?}", pi.table()));
        if out.verdict == Verdict::Extreme {
            extreme += 1;
        }
        assert_eq!(out.verdict == Verdict::Extreme, oracle.is_trivial(), "{:?} f={:?}", pi.table(), pi.f_grid());
        if let Some(c) = &out.certificate {
            verify_certificate(pi, &c.perturbation, 3).unwrap();
        }
    }
    eprintln!("{extreme} extreme of {}", corpus.len());
}

#[test]
fn cylinder_functions_reach_edge_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut edge_systems = 0;
    for _ in 0..60 {
        let Some(pi) = common::cylinder(&mut rng, 5) else { continue };
        let oracle = extremality_kernel(&FiniteProblem::from_pwl(&pi, 3)).unwrap();
        let out = run_pipeline(&pi, 3).unwrap();
        assert_eq!(out.verdict == Verdict::Extreme, oracle.is_trivial(), "{:?}", pi.table());
        if let Some(c) = &out.certificate {
            if matches!(c.source, CertificateSource::EdgeSystem { .. }) {
                edge_systems += 1;
            }
            verify_certificate(&pi, &c.perturbation, 3).unwrap();
        }
    }
    assert!(edge_systems > 0);
}

#[test]
fn update_trace_serializes_in_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pi = loop {
        if let Some(pi) = common::cylinder(&mut rng, 4) {
            break pi;
        }
    };
    let mut state = groupcut::reduction::init_state(&pi).unwrap();
    groupcut::reduction::reduce(&mut state).unwrap();
    let trace = serde_json::to_value(&state.lifts).unwrap();
    let records = trace.as_array().unwrap();
    assert_eq!(records.len(), state.lifts.len());
    for (r, json) in state.lifts.iter().zip(records) {
        assert_eq!(json["step"], r.step);
        assert!(json["kind"] == "Equal" || json["kind"] == "Equivalent");
    }
}
