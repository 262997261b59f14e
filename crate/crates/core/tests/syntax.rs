use cohwork::{alpha_equal, parse_formula, parse_theory, print, Formula, Term, Var};
use proptest::prelude::*;

const SIG: &str = "theory S { sort s sort t rel P : s rel R : s t fun f : s -> s fun c : -> t }";

fn var_s() -> impl Strategy<Value = Term> {
    prop_oneof![Just("x"), Just("y"), Just("u")].prop_map(|n| Var::new(n, "s").term())
}

fn term_s() -> impl Strategy<Value = Term> {
    var_s().prop_recursive(2, 4, 1, |inner| inner.prop_map(|a| Term::App { fun: "f".into(), args: vec![a], sort: "s".into() }))
}

fn term_t() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Var::new("z", "t").term()), Just(Term::App { fun: "c".into(), args: vec![], sort: "t".into() })]
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bot),
        term_s().prop_map(|a| Formula::rel("P", vec![a])),
        (term_s(), term_t()).prop_map(|(a, b)| Formula::rel("R", vec![a, b])),
        (term_s(), term_s()).prop_map(|(a, b)| Formula::eq(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (prop_oneof![Just("x"), Just("u")], inner).prop_map(|(v, b)| Formula::exists(Var::new(v, "s"), b)),
        ]
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(f in formula()) {
        let t = parse_theory(SIG).unwrap();
        let ctx = f.free_context();
        let text = print::formula(&f);
        let back = parse_formula(&t.signature, &text, &ctx).unwrap();
        prop_assert!(alpha_equal(&f, &back), "{} reparsed as {}", text, print::formula(&back));
    }

    #[test]
    fn renaming_bound_variables_is_alpha_equal(f in formula()) {
        let g = Formula::exists(Var::new("x", "s"), f.clone());
        let h = Formula::exists(Var::new("fresh0", "s"), cohwork::syntax::rename(&f, &[Var::new("x", "s")], &[Var::new("fresh0", "s")]).unwrap());
        prop_assert!(alpha_equal(&g, &h));
    }
}

#[test]
fn theory_printing_round_trips() {
    let t = parse_theory(SIG).unwrap();
    let again = parse_theory(&print::theory(&t)).unwrap();
    assert_eq!(print::theory(&t), print::theory(&again));
}
