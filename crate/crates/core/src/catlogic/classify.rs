//! Propositionality and parapropositionality of a theory, decided on a
//! bounded slice of its syntactic category.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slice::{bi_entails, ctx_vars, entails, fingerprint, lindenbaum, syntactic_slice, LindenbaumLattice};
use super::CatError;
use crate::model::{find_countermodel, Assignment, FiniteModel};
use crate::print;
use crate::prover::Budget;
use crate::report::{discharge, Evidence, Obligation, Verdict, VerificationReport};
use crate::syntax::{Formula, Sequent, Theory, Var};

const MAX_PIECES: usize = 4;
const SEARCH_SIZE: usize = 3;

/// A sort written as a disjoint union of subterminal pieces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub sort: String,
    /// Pieces over the single variable `x1`.
    pub pieces: Vec<Formula>,
    /// `exists x1 . piece`, the sentence each piece is isomorphic to.
    pub sentences: Vec<Formula>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropClassification {
    pub theory: String,
    pub depth: usize,
    pub budget: Budget,
    pub report: VerificationReport,
    pub propositional: Verdict,
    pub parapropositional: Verdict,
    pub countermodels: Vec<(String, FiniteModel, Assignment)>,
    pub decompositions: Vec<Decomposition>,
}

impl PropClassification {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "classification of {} at depth {} with budget {}",
            self.theory, self.depth, self.budget
        );
        let _ = writeln!(out, "propositional: {}", self.propositional);
        let _ = writeln!(out, "parapropositional: {}", self.parapropositional);
        for d in &self.decompositions {
            let pieces: Vec<String> = d.pieces.iter().map(|p| format!("[{}]", print::formula(p))).collect();
            let _ = writeln!(out, "  [top on {}] = {}", d.sort, pieces.join(" + "));
        }
        out.push_str(&self.report.to_text());
        out
    }
}

/// Conditions (4) to (7) of the propositionality theorem on the slice at
/// `depth`, with (1) to (3) reported as derived from (5); then a bounded
/// search writing each sort as a coproduct of subterminal pieces.
pub fn classify_propositionality(t: &Theory, depth: usize, b: Budget) -> Result<PropClassification, CatError> {
    let mut report = VerificationReport::new(format!("propositionality of {}", t.name));
    let mut countermodels = Vec::new();
    let sorts = t.signature.sorts.clone();

    let cond5: Vec<Obligation> = sorts
        .par_iter()
        .map(|s| {
            let (x, y) = (Var::new("x", s.clone()), Var::new("y", s.clone()));
            discharge(t, &format!("cond5:{s}"), &Sequent::fact(Formula::eq(x.term(), y.term())), b)
        })
        .collect();
    for (s, mut o) in sorts.iter().zip(cond5) {
        let (x, y) = (Var::new("x", s.clone()), Var::new("y", s.clone()));
        let seq = Sequent::fact(Formula::eq(x.term(), y.term()));
        let searched = find_countermodel(t, &seq, SEARCH_SIZE);
        if o.verdict == Verdict::Unknown {
            if let Some((m, env)) = &searched {
                o.verdict = Verdict::Failed;
                o.evidence = Evidence::Note(format!("countermodel found by search: {}", m.show_assignment(env)));
            }
        }
        let failed = o.verdict == Verdict::Failed;
        report.push(o);
        if failed {
            let found = searched.is_some();
            report.push(Obligation::check(
                format!("cond5:{s}:cross-check"),
                format!("a model of {} with two distinct elements of {s}", t.name),
                found,
                if found { String::new() } else { format!("no countermodel up to size {SEARCH_SIZE}") },
            ));
            if let Some((m, env)) = searched {
                countermodels.push((s.clone(), m, env));
            } else {
                report.entries.last_mut().expect("pushed").verdict = Verdict::Unknown;
            }
        }
    }
    let cond5_verdict = if sorts.is_empty() {
        report.push(Obligation::check("cond5", "every sort has at most one element", true, "no sorts"));
        Verdict::Proved
    } else {
        report.verdict_of("cond5:")
    };

    let slice = syntactic_slice(t, depth, b);
    let open: Vec<usize> = (0..slice.objects.len()).filter(|&o| !slice.objects[o].class.context.is_empty()).collect();
    let checks: Vec<(Obligation, Obligation)> = open
        .par_iter()
        .map(|&o| {
            let class = &slice.objects[o].class;
            let name = &slice.objects[o].name;
            let ys = ctx_vars("y", &class.sorts());
            let phi_y = class.apply_vars(&ys).expect("sorts agree");
            let mono = discharge(
                t,
                &format!("cond4:{name}"),
                &Sequent::new(vec![class.formula.clone(), phi_y], Formula::vars_equal(&class.context, &ys)),
                b,
            );
            let closed = Formula::exists_many(&class.context, class.formula.clone());
            let sentence = discharge(t, &format!("cond6:{name}"), &Sequent::new(vec![closed], class.formula.clone()), b);
            (mono, sentence)
        })
        .collect();
    let mut cond6 = Vec::new();
    for (mono, sentence) in checks {
        report.push(mono);
        cond6.push(sentence.verdict);
        report.push(sentence);
    }
    let cond6_verdict = Verdict::all(cond6);
    report.push(Obligation::with_verdict(
        "cond7",
        "every formula of the slice is equivalent to a sentence",
        cond6_verdict,
        "derived from (6): the witness sentence is the existential closure",
    ));
    let thin = slice.non_thin_pair();
    report.push(Obligation::check(
        "cond2:thin",
        "at most one morphism between any two slice objects",
        thin.is_none(),
        thin.map(|(a, c)| {
            format!(
                "{} morphisms from {} to {}",
                slice.hom(a, c).len(),
                print::class(&slice.objects[a].class.context, &slice.objects[a].class.formula),
                print::class(&slice.objects[c].class.context, &slice.objects[c].class.formula)
            )
        })
        .unwrap_or_default(),
    ));
    for (name, stmt) in [
        ("cond1", "weakly intertranslatable with a propositional theory"),
        ("cond3", "the syntactic category is its own subterminal lattice"),
    ] {
        report.push(Obligation::with_verdict(name, stmt, cond5_verdict, "derived from (5) by the propositionality theorem"));
    }
    if !slice.complete {
        report.note(format!("slice at depth {depth} has undecided merges or morphisms"));
    }

    let lattice = lindenbaum(t, depth, b)?;
    let mut decompositions = Vec::new();
    if sorts.is_empty() {
        report.push(Obligation::check("para", "every object is a coproduct of subterminals", true, "no sorts"));
    }
    for s in &sorts {
        let (entries, found) = decompose(t, &slice, &lattice, s, b);
        for e in entries {
            report.push(e);
        }
        if let Some(d) = found {
            decompositions.push(d);
        }
    }
    let parapropositional = if sorts.is_empty() { Verdict::Proved } else { report.verdict_of("para:") };
    let propositional = Verdict::all([cond5_verdict, report.verdict_of("cond2:")]);
    report.note(format!("depth {depth}, budget {b}, {} slice objects", slice.objects.len()));
    Ok(PropClassification {
        theory: t.name.clone(),
        depth,
        budget: b,
        report,
        propositional,
        parapropositional,
        countermodels,
        decompositions,
    })
}

/// Search for at most `MAX_PIECES` pairwise disjoint subterminal slice
/// objects over `sort` covering it.
fn decompose(
    t: &Theory,
    slice: &super::SyntacticSlice,
    lattice: &LindenbaumLattice,
    sort: &str,
    b: Budget,
) -> (Vec<Obligation>, Option<Decomposition>) {
    let x1 = Var::new("x1", sort);
    let x2 = Var::new("x2", sort);
    let models = &slice.models;
    let cands: Vec<Formula> = slice
        .objects
        .iter()
        .filter(|o| o.class.sorts() == [sort.to_string()] && o.class.formula != Formula::Bot)
        .map(|o| o.class.formula.clone())
        .collect();
    let subterminal: Vec<(Formula, Obligation)> = cands
        .par_iter()
        .filter_map(|f| {
            let small = models
                .iter()
                .all(|m| m.extension(std::slice::from_ref(&x1), f).map(|e| e.len() <= 1).unwrap_or(false));
            if !small {
                return None;
            }
            let f2 = crate::syntax::rename(f, std::slice::from_ref(&x1), std::slice::from_ref(&x2)).expect("sorts");
            let seq = Sequent::new(vec![f.clone(), f2], Formula::eq(x1.term(), x2.term()));
            let o = discharge(t, "", &seq, b);
            (o.verdict == Verdict::Proved).then(|| (f.clone(), o))
        })
        .collect();
    let exts: Vec<Vec<Vec<Vec<usize>>>> = subterminal
        .iter()
        .map(|(f, _)| fingerprint(models, std::slice::from_ref(&x1), f))
        .collect();
    let mut disjoint: BTreeMap<(usize, usize), Verdict> = BTreeMap::new();
    let mut is_disjoint = |i: usize, j: usize| -> Verdict {
        *disjoint.entry((i, j)).or_insert_with(|| {
            let apart = exts[i].iter().zip(&exts[j]).all(|(a, c)| a.iter().all(|t| !c.contains(t)));
            if !apart {
                return Verdict::Failed;
            }
            entails(t, &Formula::and(subterminal[i].0.clone(), subterminal[j].0.clone()), &Formula::Bot, b)
        })
    };
    let n = subterminal.len();
    let mut chosen: Option<Vec<usize>> = None;
    'search: for k in 1..=MAX_PIECES.min(n) {
        for combo in combinations(n, k) {
            let covers = models.iter().enumerate().all(|(mi, m)| {
                let total = m.size(sort);
                let mut seen: Vec<usize> = combo.iter().flat_map(|&i| exts[i][mi].iter().map(|t| t[0])).collect();
                seen.sort_unstable();
                seen.dedup();
                seen.len() == total
            });
            if !covers {
                continue;
            }
            let pairwise = combo
                .iter()
                .enumerate()
                .all(|(a, &i)| combo[a + 1..].iter().all(|&j| is_disjoint(i, j) == Verdict::Proved));
            if !pairwise {
                continue;
            }
            let union = Formula::disj(combo.iter().map(|&i| subterminal[i].0.clone()));
            if entails(t, &Formula::Top, &union, b) == Verdict::Proved {
                chosen = Some(combo);
                break 'search;
            }
        }
    }
    let Some(combo) = chosen else {
        let o = Obligation::with_verdict(
            format!("para:{sort}"),
            format!("[top on {sort}] is a coproduct of at most {MAX_PIECES} subterminal pieces"),
            Verdict::Unknown,
            format!("no decomposition among {} subterminal slice objects at depth {}", n, slice.depth),
        );
        return (vec![o], None);
    };
    let mut entries = Vec::new();
    let pieces: Vec<Formula> = combo.iter().map(|&i| subterminal[i].0.clone()).collect();
    let sentences: Vec<Formula> = pieces.iter().map(|p| Formula::exists(x1.clone(), p.clone())).collect();
    for (k, &i) in combo.iter().enumerate() {
        let mut o = subterminal[i].1.clone();
        o.name = format!("para:{sort}:piece{}:subterminal", k + 1);
        entries.push(o);
    }
    for a in 0..combo.len() {
        for c in a + 1..combo.len() {
            let seq = Sequent::new(vec![Formula::and(pieces[a].clone(), pieces[c].clone())], Formula::Bot);
            entries.push(discharge(t, &format!("para:{sort}:disjoint:{}.{}", a + 1, c + 1), &seq, b));
        }
    }
    let union = Formula::disj(pieces.iter().cloned());
    entries.push(discharge(t, &format!("para:{sort}:cover"), &Sequent::fact(union), b));
    for (k, s) in sentences.iter().enumerate() {
        let hit = lattice
            .representatives
            .iter()
            .position(|r| bi_entails(t, r, s, b) == Verdict::Proved);
        entries.push(Obligation::with_verdict(
            format!("para:{sort}:piece{}:sentence", k + 1),
            format!("{} is a class of the Lindenbaum lattice", print::formula(s)),
            if hit.is_some() { Verdict::Proved } else { Verdict::Unknown },
            hit.map(|i| format!("equivalent to {}", print::formula(&lattice.representatives[i]))).unwrap_or_default(),
        ));
    }
    (
        entries,
        Some(Decomposition {
            sort: sort.to_string(),
            pieces,
            sentences,
        }),
    )
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_theory;

    fn fixture(name: &str) -> Theory {
        let text = std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        parse_theory(&text).unwrap()
    }

    #[test]
    fn p2_is_propositional() {
        let c = classify_propositionality(&fixture("p2.th"), 2, Budget::default()).unwrap();
        assert_eq!(c.propositional, Verdict::Proved);
        assert_eq!(c.parapropositional, Verdict::Proved);
        assert_eq!(c.report.verdict(), Verdict::Proved, "{}", c.render());
    }

    #[test]
    fn eq_fails_condition_five_with_discrete_model() {
        let c = classify_propositionality(&fixture("eq.th"), 2, Budget::default()).unwrap();
        assert_eq!(c.propositional, Verdict::Failed);
        assert_eq!(c.report.get("cond5:s").unwrap().verdict, Verdict::Failed);
        let (_, m, _) = &c.countermodels[0];
        assert_eq!(m.size("s"), 2);
        let a: Vec<Vec<usize>> = m.relations["A"].iter().cloned().collect();
        assert_eq!(a, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn two_is_parapropositional() {
        let c = classify_propositionality(&fixture("two.th"), 2, Budget::default()).unwrap();
        assert_eq!(c.propositional, Verdict::Failed);
        assert_eq!(c.parapropositional, Verdict::Proved, "{}", c.render());
        let d = &c.decompositions[0];
        let pieces: Vec<String> = d.pieces.iter().map(print::formula).collect();
        assert_eq!(pieces, ["x1 = a", "x1 = b"]);
    }
}
