//! Derivation traces and their replay checker.
//!
//! A trace is a tree of rule applications over ground terms. The checker
//! re-validates every step in its own congruence closure: each instance's
//! antecedent must hold in the current facts, existential conclusions must
//! introduce fresh constants, splits must cover every disjunct of the rule's
//! conclusion, and every branch must end in a contradiction or in an
//! instance of the goal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Sequent, Theory};

use super::normal::{self, Atom, Conj, Rule, Symbols};
use super::ProverError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GTerm {
    Const(String),
    App(String, Vec<GTerm>),
}

impl fmt::Display for GTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GTerm::Const(c) => write!(f, "{c}"),
            GTerm::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GAtom {
    Rel(String, Vec<GTerm>),
    Eq(GTerm, GTerm),
}

impl fmt::Display for GAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GAtom::Rel(r, args) => {
                write!(f, "{r}")?;
                if !args.is_empty() {
                    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    write!(f, "({})", parts.join(", "))?;
                }
                Ok(())
            }
            GAtom::Eq(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

pub type Subst = Vec<(String, GTerm)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub label: String,
    pub witnesses: Vec<(String, String)>,
    pub conclusion: Vec<GAtom>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Constant {
        label: String,
        name: String,
        sort: String,
    },
    Apply {
        label: String,
        rule: String,
        premises: Vec<String>,
        subst: Subst,
        witnesses: Vec<(String, String)>,
        conclusion: Vec<GAtom>,
    },
    Contradiction {
        label: String,
        rule: String,
        premises: Vec<String>,
        subst: Subst,
    },
    Split {
        label: String,
        rule: String,
        premises: Vec<String>,
        subst: Subst,
        cases: Vec<Case>,
    },
    Close {
        label: String,
        disjunct: usize,
        premises: Vec<String>,
        subst: Subst,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub sequent: String,
    pub steps: Vec<Step>,
}

fn show_subst(s: &Subst) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k}:={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn show_atoms(atoms: &[GAtom]) -> String {
    if atoms.is_empty() {
        return "top".into();
    }
    let parts: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
    parts.join(" & ")
}

fn show_witnesses(w: &[(String, String)]) -> String {
    if w.is_empty() {
        return String::new();
    }
    let parts: Vec<&str> = w.iter().map(|(_, c)| c.as_str()).collect();
    format!(" new {}", parts.join(" "))
}

fn write_steps(steps: &[Step], out: &mut String) {
    for s in steps {
        match s {
            Step::Constant { label, name, sort } => {
                out.push_str(&format!("{label} constant {name} : {sort}\n"));
            }
            Step::Apply {
                label,
                rule,
                premises,
                subst,
                witnesses,
                conclusion,
            } => out.push_str(&format!(
                "{label} apply {rule} [{}] {}{} => {}\n",
                premises.join(","),
                show_subst(subst),
                show_witnesses(witnesses),
                show_atoms(conclusion)
            )),
            Step::Contradiction {
                label,
                rule,
                premises,
                subst,
            } => out.push_str(&format!(
                "{label} contradiction {rule} [{}] {}\n",
                premises.join(","),
                show_subst(subst)
            )),
            Step::Split {
                label,
                rule,
                premises,
                subst,
                cases,
            } => {
                out.push_str(&format!(
                    "{label} split {rule} [{}] {} into {}\n",
                    premises.join(","),
                    show_subst(subst),
                    cases.len()
                ));
                for (i, c) in cases.iter().enumerate() {
                    out.push_str(&format!(
                        "{} case {}{} => {}\n",
                        c.label,
                        i,
                        show_witnesses(&c.witnesses),
                        show_atoms(&c.conclusion)
                    ));
                    write_steps(&c.steps, out);
                }
            }
            Step::Close {
                label,
                disjunct,
                premises,
                subst,
            } => out.push_str(&format!(
                "{label} close goal#{disjunct} [{}] {}\n",
                premises.join(","),
                show_subst(subst)
            )),
        }
    }
}

impl Trace {
    /// Line-oriented rendering: one inference per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("sequent {}\n", self.sequent);
        write_steps(&self.steps, &mut out);
        out
    }

    pub fn len(&self) -> usize {
        fn count(steps: &[Step]) -> usize {
            steps
                .iter()
                .map(|s| match s {
                    Step::Split { cases, .. } => 1 + cases.iter().map(|c| 1 + count(&c.steps)).sum::<usize>(),
                    _ => 1,
                })
                .sum()
        }
        count(&self.steps)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {0}: unknown rule {1}")]
    UnknownRule(String, String),
    #[error("step {0}: {1}")]
    Invalid(String, String),
    #[error("branch ending at step {0} is not closed")]
    Open(String),
    #[error(transparent)]
    Prover(#[from] ProverError),
}

#[derive(Clone)]
struct Kernel {
    nodes: Vec<(String, Vec<usize>)>,
    parent: Vec<usize>,
    table: BTreeMap<(String, Vec<usize>), usize>,
    facts: Vec<(String, Vec<usize>)>,
    consts: BTreeMap<String, (usize, usize)>,
    sort_of: Vec<usize>,
}

impl Kernel {
    fn new() -> Self {
        Kernel {
            nodes: Vec::new(),
            parent: Vec::new(),
            table: BTreeMap::new(),
            facts: Vec::new(),
            consts: BTreeMap::new(),
            sort_of: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn node(&mut self, head: String, args: Vec<usize>, sort: usize) -> usize {
        let key = (head.clone(), args.iter().map(|a| self.find(*a)).collect::<Vec<_>>());
        if let Some(n) = self.table.get(&key) {
            return *n;
        }
        let id = self.nodes.len();
        self.nodes.push((head, args));
        self.parent.push(id);
        self.sort_of.push(sort);
        self.table.insert(key, id);
        id
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        loop {
            let mut table: BTreeMap<(String, Vec<usize>), usize> = BTreeMap::new();
            let mut merges = Vec::new();
            for (id, (head, args)) in self.nodes.iter().enumerate() {
                let key = (head.clone(), args.iter().map(|a| self.find(*a)).collect::<Vec<_>>());
                match table.get(&key) {
                    Some(other) if self.find(*other) != self.find(id) => merges.push((*other, id)),
                    Some(_) => {}
                    None => {
                        table.insert(key, id);
                    }
                }
            }
            if merges.is_empty() {
                self.table = table;
                return;
            }
            for (a, b) in merges {
                let (ra, rb) = (self.find(a), self.find(b));
                if ra != rb {
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    self.parent[hi] = lo;
                }
            }
        }
    }
}

struct Checker<'a> {
    syms: Symbols,
    rules: BTreeMap<String, &'a Rule>,
    goal: &'a Rule,
    context_consts: Vec<String>,
}

impl Checker<'_> {
    fn term(&self, k: &mut Kernel, t: &GTerm, label: &str) -> Result<usize, ReplayError> {
        match t {
            GTerm::Const(c) => k
                .consts
                .get(c)
                .map(|(n, _)| *n)
                .ok_or_else(|| ReplayError::Invalid(label.into(), format!("undeclared constant {c}"))),
            GTerm::App(f, args) => {
                let fi = self
                    .syms
                    .funs
                    .iter()
                    .position(|x| x == f)
                    .ok_or_else(|| ReplayError::Invalid(label.into(), format!("unknown function {f}")))?;
                if args.len() != self.syms.fun_domains[fi].len() {
                    return Err(ReplayError::Invalid(label.into(), format!("arity of {f}")));
                }
                let mut ns = Vec::new();
                for (a, s) in args.iter().zip(&self.syms.fun_domains[fi]) {
                    let n = self.term(k, a, label)?;
                    if k.sort_of[n] != *s {
                        return Err(ReplayError::Invalid(label.into(), format!("ill-sorted argument of {f}")));
                    }
                    ns.push(n);
                }
                Ok(k.node(f.clone(), ns, self.syms.fun_codomains[fi]))
            }
        }
    }

    fn declare(&self, k: &mut Kernel, name: &str, sort: usize, label: &str) -> Result<usize, ReplayError> {
        if k.consts.contains_key(name) {
            return Err(ReplayError::Invalid(label.into(), format!("constant {name} is not fresh")));
        }
        let id = k.node(format!("#{name}"), Vec::new(), sort);
        k.consts.insert(name.to_string(), (id, sort));
        Ok(id)
    }

    fn bind(
        &self,
        k: &mut Kernel,
        rule: &Rule,
        subst: &Subst,
        slots: &[usize],
        label: &str,
    ) -> Result<BTreeMap<usize, usize>, ReplayError> {
        let mut out = BTreeMap::new();
        for &s in slots {
            let name = &rule.slots[s].name;
            let t = subst
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| ReplayError::Invalid(label.into(), format!("slot {name} not instantiated")))?;
            let n = self.term(k, t, label)?;
            if k.sort_of[n] != rule.slots[s].sort {
                return Err(ReplayError::Invalid(label.into(), format!("ill-sorted instance of {name}")));
            }
            out.insert(s, n);
        }
        Ok(out)
    }

    fn pin_context(&self, k: &Kernel, rule: &Rule, bind: &BTreeMap<usize, usize>, label: &str) -> Result<(), ReplayError> {
        if !rule.pinned {
            return Ok(());
        }
        for (slot, c) in rule.context.iter().zip(&self.context_consts) {
            let want = k.consts[c].0;
            if k.find(bind[slot]) != k.find(want) {
                return Err(ReplayError::Invalid(label.into(), "hypothesis instantiated away from the context".into()));
            }
        }
        Ok(())
    }

    fn holds(&self, k: &mut Kernel, atom: &Atom, bind: &BTreeMap<usize, usize>) -> bool {
        match atom {
            Atom::Rel(r, args) => {
                let want: Vec<usize> = args.iter().map(|a| k.find(bind[a])).collect();
                let name = &self.syms.rels[*r];
                k.facts
                    .iter()
                    .any(|(n, xs)| n == name && xs.iter().map(|x| k.find(*x)).eq(want.iter().copied()))
            }
            Atom::Fun(f, args, res) => {
                let ns: Vec<usize> = args.iter().map(|a| bind[a]).collect();
                let n = k.node(self.syms.funs[*f].clone(), ns, self.syms.fun_codomains[*f]);
                k.find(n) == k.find(bind[res])
            }
            Atom::Eq(a, b) => k.find(bind[a]) == k.find(bind[b]),
        }
    }

    fn assert_conj(
        &self,
        k: &mut Kernel,
        rule: &Rule,
        conj: &Conj,
        mut bind: BTreeMap<usize, usize>,
        witnesses: &[(String, String)],
        label: &str,
    ) -> Result<(), ReplayError> {
        if witnesses.len() != conj.exists.len() {
            return Err(ReplayError::Invalid(label.into(), "wrong number of witnesses".into()));
        }
        for (&s, (slot_name, c)) in conj.exists.iter().zip(witnesses) {
            if &rule.slots[s].name != slot_name {
                return Err(ReplayError::Invalid(label.into(), format!("witness for unexpected slot {slot_name}")));
            }
            let id = self.declare(k, c, rule.slots[s].sort, label)?;
            bind.insert(s, id);
        }
        for a in &conj.atoms {
            match a {
                Atom::Rel(r, args) => {
                    let xs = args.iter().map(|x| bind[x]).collect();
                    k.facts.push((self.syms.rels[*r].clone(), xs));
                }
                Atom::Fun(f, args, res) => {
                    let ns: Vec<usize> = args.iter().map(|a| bind[a]).collect();
                    let n = k.node(self.syms.funs[*f].clone(), ns, self.syms.fun_codomains[*f]);
                    k.union(n, bind[res]);
                }
                Atom::Eq(a, b) => k.union(bind[a], bind[b]),
            }
        }
        Ok(())
    }

    fn instance(
        &self,
        k: &mut Kernel,
        rule_name: &str,
        subst: &Subst,
        label: &str,
    ) -> Result<(&Rule, BTreeMap<usize, usize>), ReplayError> {
        let rule = *self
            .rules
            .get(rule_name)
            .ok_or_else(|| ReplayError::UnknownRule(label.into(), rule_name.into()))?;
        let universal = rule.universal();
        let bind = self.bind(k, rule, subst, &universal, label)?;
        self.pin_context(k, rule, &bind, label)?;
        for a in &rule.body.atoms {
            if !self.holds(k, a, &bind) {
                return Err(ReplayError::Invalid(label.into(), format!("antecedent of {rule_name} does not hold")));
            }
        }
        Ok((rule, bind))
    }

    fn run(&self, k: &mut Kernel, steps: &[Step], branch: &str) -> Result<(), ReplayError> {
        let mut last = branch.to_string();
        for s in steps {
            match s {
                Step::Constant { label, .. } => {
                    return Err(ReplayError::Invalid(label.clone(), "constants are only declared up front".into()))
                }
                Step::Apply {
                    label,
                    rule,
                    subst,
                    witnesses,
                    ..
                } => {
                    let (r, bind) = self.instance(k, rule, subst, label)?;
                    if r.head.len() != 1 {
                        return Err(ReplayError::Invalid(label.clone(), "apply needs a single conclusion".into()));
                    }
                    self.assert_conj(k, r, &r.head[0], bind, witnesses, label)?;
                    last = label.clone();
                }
                Step::Contradiction { label, rule, subst, .. } => {
                    let (r, _) = self.instance(k, rule, subst, label)?;
                    if !r.head.is_empty() {
                        return Err(ReplayError::Invalid(label.clone(), format!("{rule} does not conclude bot")));
                    }
                    return Ok(());
                }
                Step::Split {
                    label,
                    rule,
                    subst,
                    cases,
                    ..
                } => {
                    let (r, bind) = self.instance(k, rule, subst, label)?;
                    if r.head.len() != cases.len() {
                        return Err(ReplayError::Invalid(label.clone(), "split does not cover every disjunct".into()));
                    }
                    for (conj, case) in r.head.iter().zip(cases) {
                        let mut k2 = k.clone();
                        self.assert_conj(&mut k2, r, conj, bind.clone(), &case.witnesses, &case.label)?;
                        self.run(&mut k2, &case.steps, &case.label)?;
                    }
                    return Ok(());
                }
                Step::Close {
                    label,
                    disjunct,
                    subst,
                    ..
                } => {
                    let conj = self
                        .goal
                        .head
                        .get(*disjunct)
                        .ok_or_else(|| ReplayError::Invalid(label.clone(), "no such goal disjunct".into()))?;
                    let mut slots = self.goal.context.clone();
                    slots.extend(&conj.exists);
                    let ctx_subst: Subst = self
                        .goal
                        .context
                        .iter()
                        .zip(&self.context_consts)
                        .map(|(s, c)| (self.goal.slots[*s].name.clone(), GTerm::Const(c.clone())))
                        .chain(subst.iter().cloned())
                        .collect();
                    let bind = self.bind(k, self.goal, &ctx_subst, &slots, label)?;
                    for a in &conj.atoms {
                        if !self.holds(k, a, &bind) {
                            return Err(ReplayError::Invalid(label.clone(), "goal instance does not hold".into()));
                        }
                    }
                    return Ok(());
                }
            }
        }
        Err(ReplayError::Open(last))
    }
}

/// Re-validate a trace against the theory and sequent it claims to prove.
pub fn replay(theory: &Theory, seq: &Sequent, trace: &Trace) -> Result<(), ReplayError> {
    let syms = Symbols::new(&theory.signature);
    let axioms: Vec<(String, Sequent)> = theory
        .axioms
        .iter()
        .map(|a| (a.name.clone(), a.sequent.clone()))
        .collect();
    let rules = normal::theory_rules(&axioms, &syms)?;
    let problem = normal::problem(seq, &syms)?;
    let mut index: BTreeMap<String, &Rule> = rules.iter().map(|r| (r.name.clone(), r)).collect();
    for h in &problem.hyps {
        index.insert(h.name.clone(), h);
    }
    let mut k = Kernel::new();
    let mut consts = Vec::new();
    let mut rest = trace.steps.as_slice();
    for v in &problem.context {
        match rest.first() {
            Some(Step::Constant { label, name, sort }) if *sort == v.sort => {
                let checker_sort = syms.sort(sort);
                if k.consts.contains_key(name) {
                    return Err(ReplayError::Invalid(label.clone(), "duplicate constant".into()));
                }
                let id = k.node(format!("#{name}"), Vec::new(), checker_sort);
                k.consts.insert(name.clone(), (id, checker_sort));
                consts.push(name.clone());
                rest = &rest[1..];
            }
            _ => return Err(ReplayError::Invalid("0".into(), "context constants missing".into())),
        }
    }
    let checker = Checker {
        syms: syms.clone(),
        rules: index,
        goal: &problem.goal,
        context_consts: consts,
    };
    checker.run(&mut k, rest, "start")
}

/// Names occurring in a trace, used to keep witness names apart from
/// context constants.
pub fn constant_names(steps: &[Step]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in steps {
        match s {
            Step::Constant { name, .. } => {
                out.insert(name.clone());
            }
            Step::Apply { witnesses, .. } => out.extend(witnesses.iter().map(|(_, c)| c.clone())),
            Step::Split { cases, .. } => {
                for c in cases {
                    out.extend(c.witnesses.iter().map(|(_, w)| w.clone()));
                    out.extend(constant_names(&c.steps));
                }
            }
            _ => {}
        }
    }
    out
}
