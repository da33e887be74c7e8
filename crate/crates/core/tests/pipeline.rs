use cairo_air::corpus;
use cairo_air::extract::{soundness_check, SoundnessOutcome};
use cairo_air::field::FieldConfig;
use cairo_air::interaction::Sha256Oracle;
use cairo_air::prove::{prove_program, verify_proof};

#[test]
fn corpus_roundtrip() {
    let f = FieldConfig::goldilocks();
    for (name, p) in corpus::all(f).unwrap() {
        let (trace, proof) = prove_program(&p, None, &Sha256Oracle).unwrap();
        let verdict = verify_proof(&proof.statement, &proof.columns, &Sha256Oracle).unwrap();
        assert!(verdict.accepted(), "{name}: {:?}", verdict.report.violations.iter().take(5).collect::<Vec<_>>());
        match soundness_check(&proof.statement, &proof.columns).unwrap() {
            SoundnessOutcome::Witness(w) => {
                assert_eq!(w.exec, trace, "{name}");
                for (a, v) in p.memory.iter() {
                    if w.memory.support().contains_key(&a) {
                        assert_eq!(w.memory.at(a), v);
                    }
                }
            }
            other => panic!("{name}: {other:?}"),
        }
    }
}
