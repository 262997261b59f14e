//! Flattened disjunctive normal forms of coherent formulae and the geometric
//! rules derived from axioms.
//!
//! A formula becomes a disjunction of existentially quantified conjunctions
//! of flat atoms. Flat atoms mention only variables (slots): nested terms are
//! unfolded into function-graph atoms `f(x1..xn) = y` with a new existential
//! slot for every application.

use std::collections::BTreeMap;

use crate::syntax::{Formula, Sequent, Signature, Term, Var};

use super::ProverError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Rel(usize, Vec<usize>),
    Fun(usize, Vec<usize>, usize),
    Eq(usize, usize),
}

impl Atom {
    pub fn slots(&self) -> Vec<usize> {
        match self {
            Atom::Rel(_, a) => a.clone(),
            Atom::Fun(_, a, r) => a.iter().copied().chain(std::iter::once(*r)).collect(),
            Atom::Eq(a, b) => vec![*a, *b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conj {
    pub exists: Vec<usize>,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub sort: usize,
}

/// Symbol interning against a signature.
#[derive(Debug, Clone)]
pub struct Symbols {
    pub sorts: Vec<String>,
    pub rels: Vec<String>,
    pub rel_domains: Vec<Vec<usize>>,
    pub funs: Vec<String>,
    pub fun_domains: Vec<Vec<usize>>,
    pub fun_codomains: Vec<usize>,
}

impl Symbols {
    pub fn new(sig: &Signature) -> Self {
        let sort_ix = |s: &String| sig.sorts.iter().position(|x| x == s).expect("declared sort");
        Symbols {
            sorts: sig.sorts.clone(),
            rels: sig.relations.keys().cloned().collect(),
            rel_domains: sig.relations.values().map(|d| d.iter().map(sort_ix).collect()).collect(),
            funs: sig.functions.keys().cloned().collect(),
            fun_domains: sig.functions.values().map(|f| f.domain.iter().map(sort_ix).collect()).collect(),
            fun_codomains: sig.functions.values().map(|f| sort_ix(&f.codomain)).collect(),
        }
    }

    pub fn sort(&self, s: &str) -> usize {
        self.sorts.iter().position(|x| x == s).expect("declared sort")
    }

    pub fn rel(&self, r: &str) -> usize {
        self.rels.iter().position(|x| x == r).expect("declared relation")
    }

    pub fn fun(&self, f: &str) -> usize {
        self.funs.iter().position(|x| x == f).expect("declared function")
    }
}

/// A slot table under construction.
#[derive(Debug, Clone, Default)]
pub struct Slots {
    pub slots: Vec<Slot>,
}

impl Slots {
    pub fn add(&mut self, name: &str, sort: usize) -> usize {
        let base = name.to_string();
        let mut candidate = base.clone();
        let mut k = 1;
        while self.slots.iter().any(|s| s.name == candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        self.slots.push(Slot { name: candidate, sort });
        self.slots.len() - 1
    }
}

fn flatten_term(
    t: &Term,
    syms: &Symbols,
    env: &[(Var, usize)],
    slots: &mut Slots,
    exists: &mut Vec<usize>,
    atoms: &mut Vec<Atom>,
) -> usize {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(w, _)| w == v)
            .map(|(_, s)| *s)
            .expect("free variables are bound in the environment"),
        Term::App { fun, args, sort } => {
            let arg_slots: Vec<usize> = args
                .iter()
                .map(|a| flatten_term(a, syms, env, slots, exists, atoms))
                .collect();
            let y = slots.add(&format!("{fun}_"), syms.sort(sort));
            exists.push(y);
            atoms.push(Atom::Fun(syms.fun(fun), arg_slots, y));
            y
        }
    }
}

/// Disjunctive normal form. `env` maps free variables to slots.
pub fn dnf(
    f: &Formula,
    syms: &Symbols,
    env: &mut Vec<(Var, usize)>,
    slots: &mut Slots,
) -> Result<Vec<Conj>, ProverError> {
    Ok(match f {
        Formula::Top => vec![Conj {
            exists: vec![],
            atoms: vec![],
        }],
        Formula::Bot => vec![],
        Formula::Rel(r, args) => {
            let mut exists = Vec::new();
            let mut atoms = Vec::new();
            let a: Vec<usize> = args
                .iter()
                .map(|t| flatten_term(t, syms, env, slots, &mut exists, &mut atoms))
                .collect();
            atoms.push(Atom::Rel(syms.rel(r), a));
            vec![Conj { exists, atoms }]
        }
        Formula::Eq(a, b) => {
            let mut exists = Vec::new();
            let mut atoms = Vec::new();
            let sa = flatten_term(a, syms, env, slots, &mut exists, &mut atoms);
            let sb = flatten_term(b, syms, env, slots, &mut exists, &mut atoms);
            if sa != sb {
                atoms.push(Atom::Eq(sa, sb));
            }
            vec![Conj { exists, atoms }]
        }
        Formula::And(a, b) => {
            let da = dnf(a, syms, env, slots)?;
            let db = dnf(b, syms, env, slots)?;
            let mut out = Vec::new();
            for ca in &da {
                for cb in &db {
                    out.push(Conj {
                        exists: ca.exists.iter().chain(&cb.exists).copied().collect(),
                        atoms: ca.atoms.iter().chain(&cb.atoms).cloned().collect(),
                    });
                }
            }
            out
        }
        Formula::Or(a, b) => {
            let mut out = dnf(a, syms, env, slots)?;
            out.extend(dnf(b, syms, env, slots)?);
            out
        }
        Formula::Exists(v, body) => {
            let s = slots.add(&v.name, syms.sort(&v.sort));
            env.push((v.clone(), s));
            let inner = dnf(body, syms, env, slots);
            env.pop();
            inner?
                .into_iter()
                .map(|mut c| {
                    c.exists.insert(0, s);
                    c
                })
                .collect()
        }
        Formula::Not(_) | Formula::Forall(..) => return Err(ProverError::Classical),
    })
}

/// A geometric rule `body ⊢ head` over one slot table. `context` lists the
/// slots of the sequent's free variables; for hypotheses and the goal these
/// are pinned to the constants standing for the sequent's context.
#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub slots: Vec<Slot>,
    pub context: Vec<usize>,
    pub body: Conj,
    pub head: Vec<Conj>,
    /// Hypotheses and the goal: instantiated only at the sequent's context.
    pub pinned: bool,
}

impl Rule {
    /// Slots bound by matching the body (context plus body existentials).
    pub fn universal(&self) -> Vec<usize> {
        self.context.iter().chain(&self.body.exists).copied().collect()
    }
}

/// Rules of one axiom: one rule per disjunct of the antecedent's normal form.
pub fn axiom_rules(name: &str, seq: &Sequent, syms: &Symbols) -> Result<Vec<Rule>, ProverError> {
    let ctx = seq.context();
    let mut slots = Slots::default();
    let mut env: Vec<(Var, usize)> = Vec::new();
    for v in &ctx {
        let s = slots.add(&v.name, syms.sort(&v.sort));
        env.push((v.clone(), s));
    }
    let context: Vec<usize> = env.iter().map(|(_, s)| *s).collect();
    let body = dnf(&seq.antecedent_formula(), syms, &mut env, &mut slots)?;
    let head = dnf(&seq.succedent, syms, &mut env, &mut slots)?;
    let n = body.len();
    Ok(body
        .into_iter()
        .enumerate()
        .map(|(i, b)| Rule {
            name: if n == 1 { name.to_string() } else { format!("{name}#{i}") },
            slots: slots.slots.clone(),
            context: context.clone(),
            body: b,
            head: head.clone(),
            pinned: false,
        })
        .collect())
}

/// The hypotheses and goal of a sequent, over a shared context. Hypothesis
/// `i` is a rule with empty body whose head is the normal form of the `i`-th
/// antecedent formula.
#[derive(Debug, Clone)]
pub struct Problem {
    pub context: Vec<Var>,
    pub hyps: Vec<Rule>,
    pub goal: Rule,
}

pub fn problem(seq: &Sequent, syms: &Symbols) -> Result<Problem, ProverError> {
    let ctx = seq.context();
    let mut slots = Slots::default();
    let mut env: Vec<(Var, usize)> = Vec::new();
    for v in &ctx {
        let s = slots.add(&v.name, syms.sort(&v.sort));
        env.push((v.clone(), s));
    }
    let context: Vec<usize> = env.iter().map(|(_, s)| *s).collect();
    let empty = Conj {
        exists: vec![],
        atoms: vec![],
    };
    let mut hyps = Vec::new();
    for (i, a) in seq.antecedent.iter().enumerate() {
        let head = dnf(a, syms, &mut env, &mut slots)?;
        hyps.push((i, head));
    }
    let goal_head = dnf(&seq.succedent, syms, &mut env, &mut slots)?;
    let mk = |name: String, head: Vec<Conj>, slots: &Slots| Rule {
        name,
        slots: slots.slots.clone(),
        context: context.clone(),
        body: empty.clone(),
        head,
        pinned: true,
    };
    Ok(Problem {
        context: ctx,
        hyps: hyps
            .into_iter()
            .map(|(i, h)| mk(format!("hyp{i}"), h, &slots))
            .collect(),
        goal: mk("goal".into(), goal_head, &slots),
    })
}

/// Normalize every axiom of a theory, in declaration order.
pub fn theory_rules(
    axioms: &[(String, Sequent)],
    syms: &Symbols,
) -> Result<Vec<Rule>, ProverError> {
    let mut out = Vec::new();
    for (n, s) in axioms {
        out.extend(axiom_rules(n, s, syms)?);
    }
    Ok(out)
}

/// Map from rule name to rule, for the trace checker.
pub fn rule_index(rules: &[Rule]) -> BTreeMap<String, &Rule> {
    rules.iter().map(|r| (r.name.clone(), r)).collect()
}
