use std::path::PathBuf;

use cohwork::model::check_model;
use cohwork::prover::Budget;
use cohwork::report::Verdict;
use cohwork::translation::{compose_translations, verify_translation};
use cohwork::workspace::{Workspace, WorkspaceError};

fn corpus() -> Workspace {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .collect();
    let mut files = files;
    files.sort();
    Workspace::open(&files).unwrap()
}

#[test]
fn every_fixture_elaborates() {
    let mut ws = corpus();
    for n in ws.theory_names() {
        ws.theory(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    for n in ws.translation_names() {
        ws.translation(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    for n in ws.tmap_names() {
        ws.tmap(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    for n in ws.extension_names() {
        ws.extension(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    for n in ws.lattice_names() {
        ws.lattice(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
    for n in ws.category_names() {
        ws.category(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
    }
}

#[test]
fn fixture_models_are_models_except_the_bad_one() {
    let mut ws = corpus();
    for n in ws.model_names() {
        let (t, m) = ws.model(&n).unwrap();
        let ok = check_model(&m, &t).unwrap().ok;
        assert_eq!(ok, n != "BAD_TWO", "{n}");
    }
}

#[test]
fn fixture_translation_verdicts() {
    let mut ws = corpus();
    for n in ws.translation_names() {
        let f = ws.translation(&n).unwrap();
        let v = verify_translation(&f, Budget::default()).is_translation;
        let expected = if n == "EMPTY" { Verdict::Failed } else { Verdict::Proved };
        assert_eq!(v, expected, "{n}");
    }
}

#[test]
fn composite_swap_is_a_translation() {
    let mut ws = corpus();
    let swap = ws.translation("SWAP").unwrap();
    let twice = compose_translations(&swap, &swap).unwrap();
    assert_eq!(verify_translation(&twice, Budget::default()).is_translation, Verdict::Proved);
    let path = ws.translation_path("SWAP.SWAP", None).unwrap();
    assert_eq!(verify_translation(&path, Budget::default()).is_translation, Verdict::Proved);
}

#[test]
fn unknown_names_are_reported() {
    let mut ws = corpus();
    assert!(matches!(ws.theory("NOPE"), Err(WorkspaceError::Unknown { .. })));
    assert!(matches!(ws.translation("NOPE"), Err(WorkspaceError::Unknown { .. })));
}

#[test]
fn duplicate_definitions_are_rejected() {
    let mut ws = Workspace::new();
    ws.load_text("a", "theory D { sort s }").unwrap();
    let r = ws.load_text("b", "theory D { sort t }");
    assert!(matches!(r, Err(WorkspaceError::Duplicate { .. })));
}
