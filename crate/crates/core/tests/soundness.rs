use std::path::PathBuf;

use cohwork::model::models_up_to;
use cohwork::prover::replay;
use cohwork::{check_model, parse_sequent, parse_theory, prove_sequent, Budget, ProofResult, Theory};

fn fixture(name: &str) -> Theory {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const EQ_GOALS: [&str; 8] = [
    "A(x, y) |- A(y, x)",
    "A(x, y), A(y, z), A(z, w) |- A(w, x)",
    "|- A(x, y)",
    "A(x, y) |- x = y",
    "|- exists y:s . A(x, y)",
    "A(x, y) |- exists z:s . A(x, z) & A(z, y)",
    "A(x, y) & A(x, z) |- A(y, z)",
    "A(x, y) | A(y, x) |- A(x, y)",
];

const TWO_GOALS: [&str; 6] = [
    "|- x = a | x = b",
    "x = a, y = a |- x = y",
    "|- x = y",
    "|- exists x:s . x = b",
    "x = a, x = b |- bot",
    "|- x = a | y = a | x = y",
];

fn check_all(t: &Theory, goals: &[&str]) {
    let models = models_up_to(t, 3, 500);
    assert!(!models.is_empty());
    for g in goals {
        let s = parse_sequent(&t.signature, g).unwrap();
        match prove_sequent(t, &s, Budget::default()).unwrap() {
            ProofResult::Proved(tr) => {
                replay(t, &s, &tr).unwrap();
                for m in &models {
                    assert!(m.satisfies(&s).unwrap(), "{g} proved but fails in a model");
                }
            }
            ProofResult::Refuted { model, assignment } => {
                assert!(check_model(&model, t).unwrap().ok, "{g}: countermodel is not a model");
                assert!(!model.holds_at(&s, &assignment).unwrap(), "{g}: countermodel satisfies the sequent");
            }
            ProofResult::Unknown { .. } => {}
        }
    }
}

#[test]
fn proved_sequents_hold_in_small_models() {
    check_all(&fixture("eq.th"), &EQ_GOALS);
    check_all(&fixture("two.th"), &TWO_GOALS);
}

#[test]
fn known_verdicts() {
    let t = fixture("eq.th");
    let verdict = |g: &str| match prove_sequent(&t, &parse_sequent(&t.signature, g).unwrap(), Budget::default()).unwrap() {
        ProofResult::Proved(_) => "proved",
        ProofResult::Refuted { .. } => "refuted",
        ProofResult::Unknown { .. } => "unknown",
    };
    assert_eq!(verdict(EQ_GOALS[0]), "proved");
    assert_eq!(verdict(EQ_GOALS[1]), "proved");
    assert_eq!(verdict(EQ_GOALS[2]), "refuted");
    assert_eq!(verdict(EQ_GOALS[3]), "refuted");
}

#[test]
fn larger_budgets_keep_proofs() {
    let t = fixture("two.th");
    for g in TWO_GOALS {
        let s = parse_sequent(&t.signature, g).unwrap();
        let small = Budget::new(6, 3, 3);
        if let ProofResult::Proved(_) = prove_sequent(&t, &s, small).unwrap() {
            for k in [2, 3] {
                let r = prove_sequent(&t, &s, small.scaled(k)).unwrap();
                assert!(matches!(r, ProofResult::Proved(_)), "{g} lost at scale {k}");
            }
        }
    }
}

#[test]
fn proofs_are_reproducible() {
    let t = fixture("eq.th");
    let s = parse_sequent(&t.signature, EQ_GOALS[1]).unwrap();
    let a = prove_sequent(&t, &s, Budget::default()).unwrap();
    let b = prove_sequent(&t, &s, Budget::default()).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
