//! Abstract syntax for many-sorted coherent logic.
//!
//! Terms carry their own sort, so most syntactic operations (substitution,
//! free-variable computation, α-equivalence) work without a signature at
//! hand. A [`Signature`] is needed only to check well-typing.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("unknown sort {0}")]
    UnknownSort(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("{symbol} expects {expected} arguments, found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("type mismatch in {symbol}: expected sort {expected}, found {found}")]
    TypeMismatch {
        symbol: String,
        expected: String,
        found: String,
    },
    #[error("connective {0} is not coherent (classical mode required)")]
    NotCoherent(String),
    #[error("substitution of {found} terms for {expected} variables")]
    SubstitutionLength { expected: usize, found: usize },
}

/// A sort-tagged variable. Two variables are the same only when both name and
/// sort agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Var {
            name: name.into(),
            sort: sort.into(),
        }
    }

    pub fn term(&self) -> Term {
        Term::Var(self.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(Var),
    App {
        fun: String,
        args: Vec<Term>,
        sort: String,
    },
}

impl Term {
    pub fn sort(&self) -> &str {
        match self {
            Term::Var(v) => &v.sort,
            Term::App { sort, .. } => sort,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App { .. } => None,
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App { args, .. } => args.iter().any(|a| a.mentions(v)),
        }
    }

    fn mentions_name(&self, name: &str) -> bool {
        match self {
            Term::Var(w) => w.name == name,
            Term::App { args, .. } => args.iter().any(|a| a.mentions_name(name)),
        }
    }

    pub fn substitute(&self, map: &[(Var, Term)]) -> Term {
        match self {
            Term::Var(v) => map
                .iter()
                .find(|(w, _)| w == v)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| self.clone()),
            Term::App { fun, args, sort } => Term::App {
                fun: fun.clone(),
                args: args.iter().map(|a| a.substitute(map)).collect(),
                sort: sort.clone(),
            },
        }
    }

    pub fn has_application(&self) -> bool {
        matches!(self, Term::App { .. })
    }

    /// Number of nested function applications.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Top,
    Bot,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Not(Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Rel(name.into(), args)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: Formula) -> Self {
        Formula::Exists(v, Box::new(body))
    }

    /// Right-nested conjunction; the empty conjunction is `top`.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.pop() {
            None => Formula::Top,
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Right-nested disjunction; the empty disjunction is `bot`.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.pop() {
            None => Formula::Bot,
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, f| Formula::or(f, acc)),
        }
    }

    /// Conjunction that drops `top` conjuncts.
    pub fn conj_simplified(items: impl IntoIterator<Item = Formula>) -> Self {
        Formula::conj(items.into_iter().filter(|f| *f != Formula::Top))
    }

    /// `exists v1 . exists v2 . ... body`, outermost quantifier first.
    pub fn exists_many(vars: &[Var], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// Pointwise equality of two variable lists (`top` when empty).
    pub fn vars_equal(xs: &[Var], ys: &[Var]) -> Self {
        Formula::conj(
            xs.iter()
                .zip(ys)
                .map(|(x, y)| Formula::eq(x.term(), y.term())),
        )
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Formula::Top | Formula::Bot | Formula::Rel(..) | Formula::Eq(..)
        )
    }

    pub fn is_classical(&self) -> bool {
        match self {
            Formula::Not(_) | Formula::Forall(..) => true,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_classical() || b.is_classical(),
            Formula::Exists(_, b) => b.is_classical(),
            _ => false,
        }
    }

    /// Number of formula nodes; terms are not counted.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Rel(..) | Formula::Eq(..) => 1,
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Exists(_, b) | Formula::Forall(_, b) | Formula::Not(b) => 1 + b.size(),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_context(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let push_term = |t: &Term, bound: &Vec<Var>, out: &mut Vec<Var>| {
            for v in t.vars() {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Rel(_, args) => args.iter().for_each(|t| push_term(t, bound, out)),
            Formula::Eq(a, b) => {
                push_term(a, bound, out);
                push_term(b, bound, out);
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_context().is_empty()
    }

    /// Every variable name used anywhere in the formula, free or bound.
    pub fn var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        let term_names = |t: &Term, out: &mut BTreeSet<String>| {
            for v in t.vars() {
                out.insert(v.name);
            }
        };
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Rel(_, args) => args.iter().for_each(|t| term_names(t, out)),
            Formula::Eq(a, b) => {
                term_names(a, out);
                term_names(b, out);
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Formula::Not(a) => a.collect_names(out),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                out.insert(v.name.clone());
                body.collect_names(out);
            }
        }
    }

    /// Relation and function symbols occurring in the formula.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        fn term_syms(t: &Term, out: &mut BTreeSet<String>) {
            if let Term::App { fun, args, .. } = t {
                out.insert(fun.clone());
                args.iter().for_each(|a| term_syms(a, out));
            }
        }
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Rel(r, args) => {
                out.insert(r.clone());
                args.iter().for_each(|t| term_syms(t, out));
            }
            Formula::Eq(a, b) => {
                term_syms(a, out);
                term_syms(b, out);
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::Not(a) => a.collect_symbols(out),
            Formula::Exists(_, body) | Formula::Forall(_, body) => body.collect_symbols(out),
        }
    }

    /// Sorts of all variables (free or bound) occurring in the formula.
    pub fn sorts_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Top | Formula::Bot => {}
                Formula::Rel(_, args) => {
                    for t in args {
                        out.insert(t.sort().to_string());
                        t.vars().into_iter().for_each(|v| {
                            out.insert(v.sort);
                        });
                    }
                }
                Formula::Eq(a, b) => {
                    for t in [a, b] {
                        out.insert(t.sort().to_string());
                        t.vars().into_iter().for_each(|v| {
                            out.insert(v.sort);
                        });
                    }
                }
                Formula::And(a, b) | Formula::Or(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Formula::Not(a) => stack.push(a),
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    out.insert(v.sort.clone());
                    stack.push(body);
                }
            }
        }
        out
    }
}

/// Deterministic supply of fresh variable names. A fresh name is a base name
/// with a numeric suffix that does not clash with any registered name.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    used: BTreeSet<String>,
}

impl FreshNames {
    pub fn new() -> Self {
        FreshNames::default()
    }

    pub fn avoiding<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FreshNames {
            used: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn reserve(&mut self, name: impl Into<String>) {
        self.used.insert(name.into());
    }

    pub fn reserve_formula(&mut self, f: &Formula) {
        self.used.extend(f.var_names());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "v" } else { stem };
        let mut n = 0usize;
        loop {
            let candidate = format!("{stem}{n}");
            if !self.used.contains(&candidate) {
                self.used.insert(candidate.clone());
                return candidate;
            }
            n += 1;
        }
    }

    pub fn fresh_var(&mut self, base: &str, sort: &str) -> Var {
        Var::new(self.fresh(base), sort)
    }
}

/// Capture-avoiding simultaneous substitution `phi[ctx/terms]`.
pub fn substitute(phi: &Formula, ctx: &[Var], terms: &[Term]) -> Result<Formula, SyntaxError> {
    if ctx.len() != terms.len() {
        return Err(SyntaxError::SubstitutionLength {
            expected: ctx.len(),
            found: terms.len(),
        });
    }
    for (v, t) in ctx.iter().zip(terms) {
        if v.sort != t.sort() {
            return Err(SyntaxError::TypeMismatch {
                symbol: v.name.clone(),
                expected: v.sort.clone(),
                found: t.sort().to_string(),
            });
        }
    }
    let map: Vec<(Var, Term)> = ctx.iter().cloned().zip(terms.iter().cloned()).collect();
    let mut fresh = FreshNames::new();
    fresh.reserve_formula(phi);
    for (v, t) in &map {
        fresh.reserve(v.name.clone());
        t.vars().into_iter().for_each(|w| fresh.reserve(w.name));
    }
    Ok(subst_rec(phi, &map, &mut fresh))
}

/// Substitution by a variable renaming.
pub fn rename(phi: &Formula, from: &[Var], to: &[Var]) -> Result<Formula, SyntaxError> {
    let terms: Vec<Term> = to.iter().map(Var::term).collect();
    substitute(phi, from, &terms)
}

fn subst_rec(phi: &Formula, map: &[(Var, Term)], fresh: &mut FreshNames) -> Formula {
    match phi {
        Formula::Top => Formula::Top,
        Formula::Bot => Formula::Bot,
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|t| t.substitute(map)).collect()),
        Formula::Eq(a, b) => Formula::Eq(a.substitute(map), b.substitute(map)),
        Formula::And(a, b) => Formula::and(subst_rec(a, map, fresh), subst_rec(b, map, fresh)),
        Formula::Or(a, b) => Formula::or(subst_rec(a, map, fresh), subst_rec(b, map, fresh)),
        Formula::Not(a) => Formula::Not(Box::new(subst_rec(a, map, fresh))),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let inner: Vec<(Var, Term)> = map.iter().filter(|(w, _)| w != v).cloned().collect();
            let body_free = body.free_context();
            let relevant: Vec<&(Var, Term)> = inner.iter().filter(|(w, _)| body_free.contains(w)).collect();
            let captures = relevant.iter().any(|(_, t)| t.mentions_name(&v.name));
            let (v2, body2) = if captures {
                let nv = fresh.fresh_var(&v.name, &v.sort);
                let mut m = inner.clone();
                m.push((v.clone(), nv.term()));
                (nv, subst_rec(body, &m, fresh))
            } else {
                (v.clone(), subst_rec(body, &inner, fresh))
            };
            if matches!(phi, Formula::Exists(..)) {
                Formula::exists(v2, body2)
            } else {
                Formula::Forall(v2, Box::new(body2))
            }
        }
    }
}

/// α-equivalence with the free variables matched through the first-occurrence
/// contexts of both formulae.
pub fn alpha_equal(a: &Formula, b: &Formula) -> bool {
    alpha_equal_in(a, &a.free_context(), b, &b.free_context())
}

/// α-equivalence relative to explicit contexts: the i-th variable of `ctx_a`
/// corresponds to the i-th variable of `ctx_b`. Free variables outside the
/// contexts must coincide literally.
pub fn alpha_equal_in(a: &Formula, ctx_a: &[Var], b: &Formula, ctx_b: &[Var]) -> bool {
    if ctx_a.len() != ctx_b.len() || ctx_a.iter().zip(ctx_b).any(|(x, y)| x.sort != y.sort) {
        return false;
    }
    let mut env = AlphaEnv {
        ctx_a,
        ctx_b,
        bound_a: Vec::new(),
        bound_b: Vec::new(),
    };
    env.formula(a, b)
}

struct AlphaEnv<'a> {
    ctx_a: &'a [Var],
    ctx_b: &'a [Var],
    bound_a: Vec<Var>,
    bound_b: Vec<Var>,
}

#[derive(PartialEq)]
enum Resolved<'v> {
    Bound(usize),
    Ctx(usize),
    Free(&'v Var),
}

impl AlphaEnv<'_> {
    fn resolve<'v>(bound: &[Var], ctx: &[Var], v: &'v Var) -> Resolved<'v> {
        if let Some(i) = bound.iter().rposition(|w| w == v) {
            return Resolved::Bound(bound.len() - 1 - i);
        }
        if let Some(i) = ctx.iter().position(|w| w == v) {
            return Resolved::Ctx(i);
        }
        Resolved::Free(v)
    }

    fn term(&self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                x.sort == y.sort
                    && Self::resolve(&self.bound_a, self.ctx_a, x)
                        == Self::resolve(&self.bound_b, self.ctx_b, y)
            }
            (
                Term::App { fun: f, args: xs, .. },
                Term::App { fun: g, args: ys, .. },
            ) => f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.term(x, y)),
            _ => false,
        }
    }

    fn formula(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::Top, Formula::Top) | (Formula::Bot, Formula::Bot) => true,
            (Formula::Rel(r, xs), Formula::Rel(s, ys)) => {
                r == s && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.term(x, y))
            }
            (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => self.term(a1, b1) && self.term(a2, b2),
            (Formula::And(a1, a2), Formula::And(b1, b2)) | (Formula::Or(a1, a2), Formula::Or(b1, b2)) => {
                self.formula(a1, b1) && self.formula(a2, b2)
            }
            (Formula::Not(x), Formula::Not(y)) => self.formula(x, y),
            (Formula::Exists(v, x), Formula::Exists(w, y)) | (Formula::Forall(v, x), Formula::Forall(w, y)) => {
                if v.sort != w.sort {
                    return false;
                }
                self.bound_a.push(v.clone());
                self.bound_b.push(w.clone());
                let r = self.formula(x, y);
                self.bound_a.pop();
                self.bound_b.pop();
                r
            }
            _ => false,
        }
    }
}

/// Rename every bound variable to a fresh name, leaving free variables alone.
pub fn rename_bound_apart(phi: &Formula, fresh: &mut FreshNames) -> Formula {
    match phi {
        Formula::Top | Formula::Bot | Formula::Rel(..) | Formula::Eq(..) => phi.clone(),
        Formula::And(a, b) => Formula::and(rename_bound_apart(a, fresh), rename_bound_apart(b, fresh)),
        Formula::Or(a, b) => Formula::or(rename_bound_apart(a, fresh), rename_bound_apart(b, fresh)),
        Formula::Not(a) => Formula::Not(Box::new(rename_bound_apart(a, fresh))),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let nv = fresh.fresh_var(&v.name, &v.sort);
            let body = subst_rec(body, &[(v.clone(), nv.term())], fresh);
            let body = rename_bound_apart(&body, fresh);
            if matches!(phi, Formula::Exists(..)) {
                Formula::exists(nv, body)
            } else {
                Formula::Forall(nv, Box::new(body))
            }
        }
    }
}

/// Eliminate nested function applications: every application ends up as the
/// left side of a graph atom `f(x1,..,xn) = y` with variable arguments and a
/// variable on the right. Applications are abstracted innermost-first,
/// left-to-right, as `phi(f(t)) ~> exists y . (f(t) = y & phi(y))`.
pub fn unfold_function_graphs(phi: &Formula) -> Formula {
    let mut fresh = FreshNames::new();
    fresh.reserve_formula(phi);
    unfold_rec(phi, &mut fresh)
}

fn unfold_rec(phi: &Formula, fresh: &mut FreshNames) -> Formula {
    match phi {
        Formula::Top | Formula::Bot => phi.clone(),
        Formula::Rel(..) | Formula::Eq(..) => unfold_atom(phi.clone(), fresh),
        Formula::And(a, b) => Formula::and(unfold_rec(a, fresh), unfold_rec(b, fresh)),
        Formula::Or(a, b) => Formula::or(unfold_rec(a, fresh), unfold_rec(b, fresh)),
        Formula::Not(a) => Formula::Not(Box::new(unfold_rec(a, fresh))),
        Formula::Exists(v, b) => Formula::exists(v.clone(), unfold_rec(b, fresh)),
        Formula::Forall(v, b) => Formula::Forall(v.clone(), Box::new(unfold_rec(b, fresh))),
    }
}

pub fn is_graph_atom(phi: &Formula) -> bool {
    match phi {
        Formula::Eq(Term::App { args, .. }, Term::Var(_)) => args.iter().all(|a| a.as_var().is_some()),
        _ => false,
    }
}

fn innermost_app(t: &Term) -> Option<&Term> {
    match t {
        Term::Var(_) => None,
        Term::App { args, .. } => args.iter().find_map(innermost_app).or(Some(t)),
    }
}

fn replace_term(t: &Term, target: &Term, with: &Term) -> Term {
    if t == target {
        return with.clone();
    }
    match t {
        Term::Var(_) => t.clone(),
        Term::App { fun, args, sort } => Term::App {
            fun: fun.clone(),
            args: args.iter().map(|a| replace_term(a, target, with)).collect(),
            sort: sort.clone(),
        },
    }
}

fn unfold_atom(atom: Formula, fresh: &mut FreshNames) -> Formula {
    if is_graph_atom(&atom) {
        return atom;
    }
    let target = match &atom {
        Formula::Rel(_, args) => args.iter().find_map(innermost_app).cloned(),
        Formula::Eq(a, b) => innermost_app(a).or_else(|| innermost_app(b)).cloned(),
        _ => None,
    };
    let Some(target) = target else {
        return atom;
    };
    let y = fresh.fresh_var("y", target.sort());
    let rest = match &atom {
        Formula::Rel(r, args) => Formula::Rel(
            r.clone(),
            args.iter().map(|a| replace_term(a, &target, &y.term())).collect(),
        ),
        Formula::Eq(a, b) => Formula::Eq(replace_term(a, &target, &y.term()), replace_term(b, &target, &y.term())),
        _ => unreachable!(),
    };
    let graph = Formula::eq(target, y.term());
    Formula::exists(y, Formula::and(graph, unfold_atom(rest, fresh)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSig {
    pub domain: Vec<String>,
    pub codomain: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub sorts: Vec<String>,
    pub relations: IndexMap<String, Vec<String>>,
    pub functions: IndexMap<String, FunctionSig>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    fn name_taken(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s == name)
            || self.relations.contains_key(name)
            || self.functions.contains_key(name)
    }

    pub fn add_sort(&mut self, name: impl Into<String>) -> Result<(), SyntaxError> {
        let name = name.into();
        if self.name_taken(&name) {
            return Err(SyntaxError::DuplicateName(name));
        }
        self.sorts.push(name);
        Ok(())
    }

    pub fn add_relation(&mut self, name: impl Into<String>, domain: Vec<String>) -> Result<(), SyntaxError> {
        let name = name.into();
        if self.name_taken(&name) {
            return Err(SyntaxError::DuplicateName(name));
        }
        for s in &domain {
            self.require_sort(s)?;
        }
        self.relations.insert(name, domain);
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        domain: Vec<String>,
        codomain: impl Into<String>,
    ) -> Result<(), SyntaxError> {
        let name = name.into();
        let codomain = codomain.into();
        if self.name_taken(&name) {
            return Err(SyntaxError::DuplicateName(name));
        }
        for s in domain.iter().chain(std::iter::once(&codomain)) {
            self.require_sort(s)?;
        }
        self.functions.insert(name, FunctionSig { domain, codomain });
        Ok(())
    }

    pub fn has_sort(&self, s: &str) -> bool {
        self.sorts.iter().any(|x| x == s)
    }

    pub fn require_sort(&self, s: &str) -> Result<(), SyntaxError> {
        if self.has_sort(s) {
            Ok(())
        } else {
            Err(SyntaxError::UnknownSort(s.to_string()))
        }
    }

    pub fn is_propositional(&self) -> bool {
        self.sorts.is_empty()
    }

    /// Is every symbol of `self` also a symbol of `other`, with the same type?
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.sorts.iter().all(|s| other.has_sort(s))
            && self.relations.iter().all(|(r, d)| other.relations.get(r) == Some(d))
            && self.functions.iter().all(|(f, d)| other.functions.get(f) == Some(d))
    }

    /// Build an application, checking argument sorts.
    pub fn app(&self, f: &str, args: Vec<Term>) -> Result<Term, SyntaxError> {
        let sig = self
            .functions
            .get(f)
            .ok_or_else(|| SyntaxError::UnknownFunction(f.to_string()))?;
        check_args(f, &sig.domain, &args)?;
        Ok(Term::App {
            fun: f.to_string(),
            args,
            sort: sig.codomain.clone(),
        })
    }

    pub fn check_term(&self, t: &Term) -> Result<(), SyntaxError> {
        match t {
            Term::Var(v) => self.require_sort(&v.sort),
            Term::App { fun, args, sort } => {
                let sig = self
                    .functions
                    .get(fun)
                    .ok_or_else(|| SyntaxError::UnknownFunction(fun.clone()))?;
                if &sig.codomain != sort {
                    return Err(SyntaxError::TypeMismatch {
                        symbol: fun.clone(),
                        expected: sig.codomain.clone(),
                        found: sort.clone(),
                    });
                }
                check_args(fun, &sig.domain, args)?;
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    /// Well-typing check. `classical` admits negation and universal
    /// quantification.
    pub fn check_formula(&self, phi: &Formula, classical: bool) -> Result<(), SyntaxError> {
        match phi {
            Formula::Top | Formula::Bot => Ok(()),
            Formula::Rel(r, args) => {
                let dom = self
                    .relations
                    .get(r)
                    .ok_or_else(|| SyntaxError::UnknownRelation(r.clone()))?;
                check_args(r, dom, args)?;
                args.iter().try_for_each(|a| self.check_term(a))
            }
            Formula::Eq(a, b) => {
                self.check_term(a)?;
                self.check_term(b)?;
                if a.sort() != b.sort() {
                    return Err(SyntaxError::TypeMismatch {
                        symbol: "=".into(),
                        expected: a.sort().to_string(),
                        found: b.sort().to_string(),
                    });
                }
                Ok(())
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.check_formula(a, classical)?;
                self.check_formula(b, classical)
            }
            Formula::Exists(v, body) => {
                self.require_sort(&v.sort)?;
                self.check_formula(body, classical)
            }
            Formula::Not(a) => {
                if !classical {
                    return Err(SyntaxError::NotCoherent("~".into()));
                }
                self.check_formula(a, classical)
            }
            Formula::Forall(v, body) => {
                if !classical {
                    return Err(SyntaxError::NotCoherent("forall".into()));
                }
                self.require_sort(&v.sort)?;
                self.check_formula(body, classical)
            }
        }
    }

    pub fn check_sequent(&self, s: &Sequent, classical: bool) -> Result<(), SyntaxError> {
        s.antecedent
            .iter()
            .chain(std::iter::once(&s.succedent))
            .try_for_each(|f| self.check_formula(f, classical))
    }
}

fn check_args(symbol: &str, domain: &[String], args: &[Term]) -> Result<(), SyntaxError> {
    if domain.len() != args.len() {
        return Err(SyntaxError::Arity {
            symbol: symbol.to_string(),
            expected: domain.len(),
            found: args.len(),
        });
    }
    for (s, a) in domain.iter().zip(args) {
        if s != a.sort() {
            return Err(SyntaxError::TypeMismatch {
                symbol: symbol.to_string(),
                expected: s.clone(),
                found: a.sort().to_string(),
            });
        }
    }
    Ok(())
}

/// `antecedent |- succedent`, implicitly universally closed over its context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequent {
    pub antecedent: Vec<Formula>,
    pub succedent: Formula,
}

impl Sequent {
    pub fn new(antecedent: Vec<Formula>, succedent: Formula) -> Self {
        Sequent { antecedent, succedent }
    }

    pub fn fact(succedent: Formula) -> Self {
        Sequent::new(Vec::new(), succedent)
    }

    pub fn context(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for f in self.antecedent.iter().chain(std::iter::once(&self.succedent)) {
            for v in f.free_context() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn antecedent_formula(&self) -> Formula {
        Formula::conj(self.antecedent.iter().cloned())
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = self.succedent.symbols();
        for f in &self.antecedent {
            out.extend(f.symbols());
        }
        out
    }

    pub fn is_classical(&self) -> bool {
        self.succedent.is_classical() || self.antecedent.iter().any(Formula::is_classical)
    }

    /// Rename the context positionally and compare bodies.
    pub fn alpha_eq(&self, other: &Sequent) -> bool {
        let ca = self.context();
        let cb = other.context();
        self.antecedent.len() == other.antecedent.len()
            && self
                .antecedent
                .iter()
                .zip(&other.antecedent)
                .all(|(a, b)| alpha_equal_in(a, &ca, b, &cb))
            && alpha_equal_in(&self.succedent, &ca, &other.succedent, &cb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Coherent,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub name: String,
    pub sequent: Sequent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    pub name: String,
    pub signature: Signature,
    pub axioms: Vec<Axiom>,
    pub mode: Mode,
}

impl Theory {
    pub fn new(name: impl Into<String>, signature: Signature) -> Self {
        Theory {
            name: name.into(),
            signature,
            axioms: Vec::new(),
            mode: Mode::Coherent,
        }
    }

    pub fn add_axiom(&mut self, name: impl Into<String>, sequent: Sequent) -> Result<(), SyntaxError> {
        let name = name.into();
        if self.axioms.iter().any(|a| a.name == name) {
            return Err(SyntaxError::DuplicateName(name));
        }
        self.signature
            .check_sequent(&sequent, self.mode == Mode::Classical)?;
        self.axioms.push(Axiom { name, sequent });
        Ok(())
    }

    pub fn axiom(&self, name: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.name == name)
    }

    pub fn check(&self) -> Result<(), SyntaxError> {
        self.axioms
            .iter()
            .try_for_each(|a| self.signature.check_sequent(&a.sequent, self.mode == Mode::Classical))
    }

    /// Same signature and axiom list up to α-equivalence of each axiom.
    pub fn alpha_eq(&self, other: &Theory) -> bool {
        self.signature == other.signature
            && self.mode == other.mode
            && self.axioms.len() == other.axioms.len()
            && self
                .axioms
                .iter()
                .zip(&other.axioms)
                .all(|(a, b)| a.name == b.name && a.sequent.alpha_eq(&b.sequent))
    }
}

/// A formula together with the ordered context it is read in. Two classes are
/// equal when their representatives are α-equivalent relative to the
/// contexts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstitutionClass {
    pub context: Vec<Var>,
    pub formula: Formula,
}

impl SubstitutionClass {
    pub fn new(context: Vec<Var>, formula: Formula) -> Self {
        SubstitutionClass { context, formula }
    }

    pub fn of(formula: Formula) -> Self {
        SubstitutionClass {
            context: formula.free_context(),
            formula,
        }
    }

    pub fn sorts(&self) -> Vec<String> {
        self.context.iter().map(|v| v.sort.clone()).collect()
    }

    /// Rename the context to `x1..xn` and bound variables apart.
    pub fn canonical(&self) -> SubstitutionClass {
        let ctx: Vec<Var> = self
            .context
            .iter()
            .enumerate()
            .map(|(i, v)| Var::new(format!("x{}", i + 1), v.sort.clone()))
            .collect();
        let mut renamed = rename(&self.formula, &self.context, &ctx).expect("context sorts agree");
        let mut fresh = FreshNames::avoiding(ctx.iter().map(|v| v.name.clone()));
        renamed = rename_bound_apart(&renamed, &mut fresh);
        SubstitutionClass::new(ctx, renamed)
    }

    /// Instantiate the class at the given terms.
    pub fn apply(&self, args: &[Term]) -> Result<Formula, SyntaxError> {
        substitute(&self.formula, &self.context, args)
    }

    pub fn apply_vars(&self, args: &[Var]) -> Result<Formula, SyntaxError> {
        rename(&self.formula, &self.context, args)
    }
}

impl PartialEq for SubstitutionClass {
    fn eq(&self, other: &Self) -> bool {
        alpha_equal_in(&self.formula, &self.context, &other.formula, &other.context)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n, "s")
    }
    fn a(x: &str, y: &str) -> Formula {
        Formula::rel("A", vec![v(x).term(), v(y).term()])
    }
    fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App {
            fun: f.into(),
            args,
            sort: "s".into(),
        }
    }

    #[test]
    fn alpha_renaming_examples() {
        assert!(alpha_equal(&a("x", "y"), &a("u", "v")));
        let ctx = vec![v("x"), v("y")];
        assert!(!alpha_equal_in(&a("x", "y"), &ctx, &a("y", "x"), &ctx));
        let e1 = Formula::exists(v("z"), a("x", "z"));
        let e2 = Formula::exists(v("w"), a("x", "w"));
        assert!(alpha_equal(&e1, &e2));
        // bound versus free are never confused
        let e3 = Formula::exists(v("z"), a("z", "x"));
        assert!(!alpha_equal(&e1, &e3));
    }

    #[test]
    fn substitution_examples() {
        let r = substitute(&a("x", "y"), &[v("y")], &[v("x").term()]).unwrap();
        assert_eq!(r, a("x", "x"));

        let phi = Formula::exists(v("x"), a("x", "y"));
        let r = substitute(&phi, &[v("y")], &[v("x").term()]).unwrap();
        let Formula::Exists(bound, body) = &r else { panic!() };
        assert_ne!(bound.name, "x");
        assert_eq!(**body, Formula::rel("A", vec![bound.term(), v("x").term()]));
        assert_eq!(r.free_context(), vec![v("x")]);

        let eq = Formula::eq(v("x").term(), v("y").term());
        let fz = app("f", vec![v("z").term()]);
        let r = substitute(&eq, &[v("x"), v("y")], &[fz.clone(), v("z").term()]).unwrap();
        assert_eq!(r, Formula::eq(fz, v("z").term()));
    }

    #[test]
    fn substitution_rejects_sort_mismatch() {
        let err = substitute(&a("x", "y"), &[v("x")], &[Var::new("u", "t").term()]).unwrap_err();
        assert!(matches!(err, SyntaxError::TypeMismatch { .. }));
    }

    #[test]
    fn free_context_examples() {
        assert_eq!(a("x", "y").free_context(), vec![v("x"), v("y")]);
        assert_eq!(Formula::exists(v("x"), a("x", "y")).free_context(), vec![v("y")]);
        assert!(Formula::Top.free_context().is_empty());
    }

    #[test]
    fn unfolding_examples() {
        let r = |t: Term| Formula::rel("R", vec![t]);
        let fx = app("f", vec![v("x").term()]);
        let got = unfold_function_graphs(&r(fx.clone()));
        let expect = Formula::exists(v("y"), Formula::and(Formula::eq(fx.clone(), v("y").term()), r(v("y").term())));
        assert!(alpha_equal(&got, &expect), "{got:?}");

        assert_eq!(unfold_function_graphs(&r(v("x").term())), r(v("x").term()));

        let gfx = app("g", vec![fx.clone()]);
        let got = unfold_function_graphs(&r(gfx));
        let expect = Formula::exists(
            v("y"),
            Formula::and(
                Formula::eq(fx, v("y").term()),
                Formula::exists(
                    v("w"),
                    Formula::and(Formula::eq(app("g", vec![v("y").term()]), v("w").term()), r(v("w").term())),
                ),
            ),
        );
        assert!(alpha_equal(&got, &expect), "{got:?}");
        assert_eq!(unfold_function_graphs(&got), got);
    }

    #[test]
    fn conj_and_disj_degenerate_cases() {
        assert_eq!(Formula::conj(vec![]), Formula::Top);
        assert_eq!(Formula::disj(vec![]), Formula::Bot);
        let p = Formula::rel("P", vec![]);
        assert_eq!(Formula::conj(vec![p.clone()]), p);
    }

    #[test]
    fn fresh_names_skip_used() {
        let mut f = FreshNames::avoiding(["x0", "x1"]);
        assert_eq!(f.fresh("x"), "x2");
        assert_eq!(f.fresh("x"), "x3");
    }

    #[test]
    fn signature_rejects_duplicates_and_unknown_sorts() {
        let mut sig = Signature::new();
        sig.add_sort("s").unwrap();
        assert_eq!(sig.add_relation("s", vec![]), Err(SyntaxError::DuplicateName("s".into())));
        assert_eq!(
            sig.add_function("f", vec!["t".into()], "s"),
            Err(SyntaxError::UnknownSort("t".into()))
        );
    }
}
