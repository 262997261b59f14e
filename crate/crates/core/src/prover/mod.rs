//! Bounded proof search for coherent sequents.
//!
//! [`prove_sequent`] answers with a replayable derivation, a verified finite
//! countermodel, or `Unknown` when the budget runs out. Sort-free problems
//! are additionally decided by valuation enumeration, and small signatures
//! fall back to exhaustive countermodel search.

mod chase;
mod egraph;
pub mod normal;
pub mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{check_model, find_countermodel, search_space, Assignment, FiniteModel};
use crate::print;
use crate::syntax::{Sequent, SyntaxError, Theory};

use chase::{Branch, Chase, Limits, Outcome};
use normal::Symbols;
pub use trace::{replay, GAtom, GTerm, ReplayError, Step, Trace};

/// Bounds on one proof search: saturation rounds per branch, fresh
/// witnesses per branch and case splits per branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub rounds: usize,
    pub witnesses: usize,
    pub splits: usize,
}

impl Budget {
    pub const fn new(rounds: usize, witnesses: usize, splits: usize) -> Self {
        Budget {
            rounds,
            witnesses,
            splits,
        }
    }

    pub const fn uniform(n: usize) -> Self {
        Budget::new(n, n, n)
    }

    pub fn scaled(&self, k: usize) -> Self {
        Budget::new(self.rounds * k, self.witnesses * k, self.splits * k)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(10, 4, 4)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.rounds, self.witnesses, self.splits)
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|_| format!("bad budget component {p:?}")))
            .collect::<Result<_, _>>()?;
        let b = match nums.as_slice() {
            [n] => Budget::uniform(*n),
            [r, w, d] => Budget::new(*r, *w, *d),
            _ => return Err("budget is N or R,W,D".into()),
        };
        if b.rounds == 0 || b.splits == 0 {
            return Err("rounds and splits must be positive".into());
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("negation and universal quantification are outside coherent proof search")]
    Classical,
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("not propositional: {0}")]
    NotPropositional(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofResult {
    Proved(Trace),
    Refuted { model: FiniteModel, assignment: Assignment },
    Unknown { reason: String, budget: Budget },
}

impl ProofResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofResult::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, ProofResult::Refuted { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ProofResult::Unknown { .. })
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            ProofResult::Proved(t) => Some(t),
            _ => None,
        }
    }

    pub fn countermodel(&self) -> Option<(&FiniteModel, &Assignment)> {
        match self {
            ProofResult::Refuted { model, assignment } => Some((model, assignment)),
            _ => None,
        }
    }
}

const CLASS_CAP: usize = 2000;
const TERM_DEPTH: u32 = 2;
const SEARCH_LIMIT: u128 = 200_000;

fn check_input(t: &Theory, s: &Sequent) -> Result<(), ProverError> {
    let classical = t
        .axioms
        .iter()
        .map(|a| &a.sequent)
        .chain(std::iter::once(s))
        .any(|q| q.antecedent.iter().chain(std::iter::once(&q.succedent)).any(|f| f.is_classical()));
    t.signature.check_sequent(s, true)?;
    if classical {
        return Err(ProverError::Classical);
    }
    Ok(())
}

fn branch_model(b: &Branch, syms: &Symbols, t: &Theory, s: &Sequent) -> Option<(FiniteModel, Assignment)> {
    let sig = &t.signature;
    let mut model = FiniteModel::empty(sig);
    let mut index = std::collections::BTreeMap::new();
    for (si, sort) in syms.sorts.iter().enumerate() {
        let classes: Vec<_> = b.eg.classes_of_sort(si).collect();
        for (i, c) in classes.iter().enumerate() {
            index.insert(*c, i);
        }
        model.carriers[sort.as_str()] = (0..classes.len()).map(|i| i.to_string()).collect();
    }
    for (ri, r) in syms.rels.iter().enumerate() {
        let table = &mut model.relations[r.as_str()];
        for tuple in b.eg.rel_tuples(ri) {
            table.insert(tuple.iter().map(|c| index[c]).collect());
        }
    }
    for (fi, f) in syms.funs.iter().enumerate() {
        let table = &mut model.functions[f.as_str()];
        for (args, v) in b.eg.fun_entries(fi) {
            table.insert(args.iter().map(|c| index[c]).collect(), index[&v]);
        }
    }
    let assignment: Assignment = s
        .context()
        .into_iter()
        .zip(&b.context)
        .map(|(v, c)| (v, index[&b.eg.find(*c)]))
        .collect();
    certify(model, assignment, t, s)
}

fn certify(model: FiniteModel, assignment: Assignment, t: &Theory, s: &Sequent) -> Option<(FiniteModel, Assignment)> {
    let ok = check_model(&model, t).map(|c| c.ok).unwrap_or(false);
    let falsified = matches!(model.holds_at(s, &assignment), Ok(false));
    (ok && falsified).then_some((model, assignment))
}

/// Search for a derivation of `s` from the axioms of `t` within `b`.
///
/// Witness budgets below `b.witnesses` are also tried, so a larger budget
/// never loses a proof found at a smaller one.
pub fn prove_sequent(t: &Theory, s: &Sequent, b: Budget) -> Result<ProofResult, ProverError> {
    check_input(t, s)?;
    let syms = Symbols::new(&t.signature);
    let axioms: Vec<(String, Sequent)> = t.axioms.iter().map(|a| (a.name.clone(), a.sequent.clone())).collect();
    let rules = normal::theory_rules(&axioms, &syms)?;
    let problem = normal::problem(s, &syms)?;
    let context: Vec<(String, usize)> = problem.context.iter().map(|v| (v.name.clone(), syms.sort(&v.sort))).collect();
    let mut reason = String::new();
    let mut w = Some(b.witnesses);
    while let Some(wit) = w {
        let limits = Limits {
            rounds: b.rounds,
            witnesses: wit,
            splits: b.splits,
            class_cap: CLASS_CAP,
            term_depth: TERM_DEPTH,
        };
        let mut chase = Chase::new(&syms, &problem.hyps, &rules, &problem.goal, limits);
        let start = chase.start(&context);
        match chase.run(start) {
            Outcome::Proved(steps) => {
                return Ok(ProofResult::Proved(Trace {
                    sequent: print::sequent(s),
                    steps,
                }))
            }
            Outcome::Saturated(branch) => {
                if let Some((model, assignment)) = branch_model(&branch, &syms, t, s) {
                    return Ok(ProofResult::Refuted { model, assignment });
                }
                reason = "saturated branch failed model verification".into();
            }
            Outcome::Unknown(r) => {
                if reason.is_empty() {
                    reason = r;
                }
            }
        }
        let used = chase.stats.max_witnesses;
        w = used.checked_sub(1).filter(|n| *n < wit);
    }
    if t.signature.is_propositional() {
        if let Some(model) = propositional_countermodel(t, s) {
            return Ok(ProofResult::Refuted {
                model,
                assignment: Vec::new(),
            });
        }
        reason = format!("{reason}; valid in every valuation but no derivation within budget");
    } else if let Some(found) = bounded_countermodel(t, s) {
        return Ok(ProofResult::Refuted {
            model: found.0,
            assignment: found.1,
        });
    }
    Ok(ProofResult::Unknown { reason, budget: b })
}

fn bounded_countermodel(t: &Theory, s: &Sequent) -> Option<(FiniteModel, Assignment)> {
    let max = (1..=3).rev().find(|n| search_space(&t.signature, *n) <= SEARCH_LIMIT)?;
    let (model, assignment) = find_countermodel(t, s, max)?;
    certify(model, assignment, t, s)
}

fn propositional_check(t: &Theory, s: &Sequent) -> Result<(), ProverError> {
    check_input(t, s)?;
    if let Some(sort) = t.signature.sorts.first() {
        return Err(ProverError::NotPropositional(format!("sort {sort} is declared")));
    }
    Ok(())
}

/// A valuation satisfying every axiom of `t` and falsifying `s`, if any.
/// Valuations are enumerated as binary counters with the first proposition
/// most significant.
pub fn propositional_countermodel(t: &Theory, s: &Sequent) -> Option<FiniteModel> {
    let props: Vec<String> = t.signature.relations.keys().cloned().collect();
    let n = props.len();
    for bits in 0u64..(1u64 << n) {
        let mut m = FiniteModel::empty(&t.signature);
        for (i, p) in props.iter().enumerate() {
            if bits >> (n - 1 - i) & 1 == 1 {
                m.relations[p.as_str()].insert(Vec::new());
            }
        }
        if let Some(found) = certify(m, Vec::new(), t, s) {
            return Some(found.0);
        }
    }
    None
}

/// Complete decision for sort-free theories: does every two-valued
/// valuation satisfying the axioms satisfy `s`?
pub fn decide_propositional(t: &Theory, s: &Sequent) -> Result<bool, ProverError> {
    propositional_check(t, s)?;
    if t.signature.relations.len() > 24 {
        return Err(ProverError::NotPropositional("more than 24 propositions".into()));
    }
    Ok(propositional_countermodel(t, s).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_sequent, parse_theory};

    const EQ: &str = "theory EQ { sort s rel A : s s
        ax refl : |- A(x,x)
        ax symm : A(x,y) |- A(y,x)
        ax trans : A(x,y), A(y,z) |- A(x,z) }";
    const P2: &str = "theory P2 { rel P : rel Q : ax pq : P |- Q }";

    fn prove(th: &str, seq: &str, b: Budget) -> (Theory, Sequent, ProofResult) {
        let t = parse_theory(th).unwrap();
        let s = parse_sequent(&t.signature, seq).unwrap();
        let r = prove_sequent(&t, &s, b).unwrap();
        (t, s, r)
    }

    #[test]
    fn axiom_instance() {
        let (t, s, r) = prove(P2, "P |- Q", Budget::default());
        replay(&t, &s, r.trace().expect("proved")).unwrap();
    }

    #[test]
    fn chained_transitivity() {
        let (t, s, r) = prove(EQ, "A(x,y), A(y,z), A(z,w) |- A(x,w)", Budget::default());
        let tr = r.trace().expect("proved");
        replay(&t, &s, tr).unwrap();
        assert!(tr.to_text().contains("apply trans"));
    }

    #[test]
    fn converse_refuted() {
        let (_, _, r) = prove(P2, "Q |- P", Budget::default());
        let (m, _) = r.countermodel().expect("refuted");
        assert!(m.relations["P"].is_empty());
        assert_eq!(m.relations["Q"].len(), 1);
    }

    #[test]
    fn existential_and_functions() {
        let th = "theory F { sort s fun f : s -> s rel R : s
            ax a : R(x) |- R(f(x))
            ax b : |- exists y . R(y) }";
        let (t, s, r) = prove(th, "|- exists z . R(f(f(z)))", Budget::default());
        replay(&t, &s, r.trace().expect("proved")).unwrap();
    }

    #[test]
    fn case_split() {
        let th = "theory S { rel P : rel Q : rel R :
            ax a : |- P | Q
            ax b : P |- R
            ax c : Q |- R }";
        let (t, s, r) = prove(th, "|- R", Budget::default());
        let tr = r.trace().expect("proved");
        replay(&t, &s, tr).unwrap();
        assert!(tr.to_text().contains(" split a "));
    }

    #[test]
    fn equality_congruence() {
        let th = "theory C { sort s fun f : s -> s fun a : -> s fun b : -> s
            ax e : |- a = b }";
        let (t, s, r) = prove(th, "|- f(a) = f(b)", Budget::default());
        replay(&t, &s, r.trace().expect("proved")).unwrap();
    }

    #[test]
    fn saturated_countermodel() {
        let (t, s, r) = prove(EQ, "|- A(x,y)", Budget::default());
        let (m, env) = r.countermodel().expect("refuted");
        assert!(check_model(m, &t).unwrap().ok);
        assert!(!m.holds_at(&s, env).unwrap());
    }

    #[test]
    fn budget_syntax() {
        assert_eq!("3".parse::<Budget>().unwrap(), Budget::uniform(3));
        assert_eq!("10,4,2".parse::<Budget>().unwrap(), Budget::new(10, 4, 2));
        assert!("1,2".parse::<Budget>().is_err());
    }

    #[test]
    fn propositional_decision() {
        let t = parse_theory(P2).unwrap();
        let yes = parse_sequent(&t.signature, "|- top").unwrap();
        let no = parse_sequent(&t.signature, "Q |- P").unwrap();
        assert!(decide_propositional(&t, &yes).unwrap());
        assert!(!decide_propositional(&t, &no).unwrap());
        let eq = parse_theory(EQ).unwrap();
        let s = parse_sequent(&eq.signature, "|- A(x,x)").unwrap();
        assert!(decide_propositional(&eq, &s).is_err());
    }
}
