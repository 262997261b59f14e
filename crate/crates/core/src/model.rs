//! Finite Set-models: evaluation, model checking and exhaustive countermodel
//! search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Formula, Sequent, Signature, Term, Theory, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model does not interpret sort {0}")]
    MissingSort(String),
    #[error("model does not interpret symbol {0}")]
    MissingSymbol(String),
    #[error("table of {0} mentions an element outside its carrier")]
    OutOfRange(String),
    #[error("function {0} is not total")]
    NotTotal(String),
    #[error("unbound variable {0}")]
    Unbound(String),
}

/// Elements are indices into the carrier; labels are only for display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteModel {
    pub carriers: IndexMap<String, Vec<String>>,
    pub relations: IndexMap<String, BTreeSet<Vec<usize>>>,
    pub functions: IndexMap<String, BTreeMap<Vec<usize>, usize>>,
}

pub type Assignment = Vec<(Var, usize)>;

/// Every tuple over the given carrier sizes, in lexicographic order.
pub fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

impl FiniteModel {
    /// All carriers empty, all tables empty.
    pub fn empty(sig: &Signature) -> Self {
        FiniteModel {
            carriers: sig.sorts.iter().map(|s| (s.clone(), Vec::new())).collect(),
            relations: sig.relations.keys().map(|r| (r.clone(), BTreeSet::new())).collect(),
            functions: sig.functions.keys().map(|f| (f.clone(), BTreeMap::new())).collect(),
        }
    }

    /// Carriers labelled `0..n-1`.
    pub fn with_sizes(sig: &Signature, sizes: &[usize]) -> Self {
        let mut m = FiniteModel::empty(sig);
        for (s, n) in sig.sorts.iter().zip(sizes) {
            m.carriers.insert(s.clone(), (0..*n).map(|i| i.to_string()).collect());
        }
        m
    }

    pub fn size(&self, sort: &str) -> usize {
        self.carriers.get(sort).map_or(0, Vec::len)
    }

    pub fn sizes(&self, sorts: &[String]) -> Vec<usize> {
        sorts.iter().map(|s| self.size(s)).collect()
    }

    pub fn label(&self, sort: &str, i: usize) -> &str {
        &self.carriers[sort][i]
    }

    pub fn validate(&self, sig: &Signature) -> Result<(), ModelError> {
        for s in &sig.sorts {
            if !self.carriers.contains_key(s) {
                return Err(ModelError::MissingSort(s.clone()));
            }
        }
        for (r, dom) in &sig.relations {
            let table = self.relations.get(r).ok_or_else(|| ModelError::MissingSymbol(r.clone()))?;
            for t in table {
                if t.len() != dom.len() || t.iter().zip(dom).any(|(i, s)| *i >= self.size(s)) {
                    return Err(ModelError::OutOfRange(r.clone()));
                }
            }
        }
        for (f, fs) in &sig.functions {
            let table = self.functions.get(f).ok_or_else(|| ModelError::MissingSymbol(f.clone()))?;
            let cod = self.size(&fs.codomain);
            for args in tuples(&self.sizes(&fs.domain)) {
                match table.get(&args) {
                    Some(v) if *v < cod => {}
                    Some(_) => return Err(ModelError::OutOfRange(f.clone())),
                    None => return Err(ModelError::NotTotal(f.clone())),
                }
            }
            if table.len() != tuples(&self.sizes(&fs.domain)).len() {
                return Err(ModelError::OutOfRange(f.clone()));
            }
        }
        Ok(())
    }

    pub fn eval_term(&self, t: &Term, env: &Assignment) -> Result<usize, ModelError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, i)| *i)
                .ok_or_else(|| ModelError::Unbound(v.name.clone())),
            Term::App { fun, args, .. } => {
                let vals = args.iter().map(|a| self.eval_term(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.functions
                    .get(fun)
                    .ok_or_else(|| ModelError::MissingSymbol(fun.clone()))?
                    .get(&vals)
                    .copied()
                    .ok_or_else(|| ModelError::NotTotal(fun.clone()))
            }
        }
    }

    pub fn eval(&self, f: &Formula, env: &mut Assignment) -> Result<bool, ModelError> {
        Ok(match f {
            Formula::Top => true,
            Formula::Bot => false,
            Formula::Rel(r, args) => {
                let vals = args.iter().map(|a| self.eval_term(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.relations
                    .get(r)
                    .ok_or_else(|| ModelError::MissingSymbol(r.clone()))?
                    .contains(&vals)
            }
            Formula::Eq(a, b) => self.eval_term(a, env)? == self.eval_term(b, env)?,
            Formula::And(a, b) => self.eval(a, env)? && self.eval(b, env)?,
            Formula::Or(a, b) => self.eval(a, env)? || self.eval(b, env)?,
            Formula::Not(a) => !self.eval(a, env)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let want = matches!(f, Formula::Exists(..));
                let mut found = !want;
                for i in 0..self.size(&v.sort) {
                    env.push((v.clone(), i));
                    let r = self.eval(body, env);
                    env.pop();
                    if r? == want {
                        found = want;
                        break;
                    }
                }
                found
            }
        })
    }

    /// Does the sequent hold under this assignment of its context?
    pub fn holds_at(&self, s: &Sequent, env: &Assignment) -> Result<bool, ModelError> {
        let mut env = env.clone();
        for a in &s.antecedent {
            if !self.eval(a, &mut env)? {
                return Ok(true);
            }
        }
        self.eval(&s.succedent, &mut env)
    }

    /// First assignment (in lexicographic order) falsifying the sequent.
    pub fn falsifying_assignment(&self, s: &Sequent) -> Result<Option<Assignment>, ModelError> {
        let ctx = s.context();
        let sizes: Vec<usize> = ctx.iter().map(|v| self.size(&v.sort)).collect();
        for t in tuples(&sizes) {
            let env: Assignment = ctx.iter().cloned().zip(t).collect();
            if !self.holds_at(s, &env)? {
                return Ok(Some(env));
            }
        }
        Ok(None)
    }

    pub fn satisfies(&self, s: &Sequent) -> Result<bool, ModelError> {
        Ok(self.falsifying_assignment(s)?.is_none())
    }

    /// The set of tuples satisfying `f` over the ordered context `ctx`.
    pub fn extension(&self, ctx: &[Var], f: &Formula) -> Result<Vec<Vec<usize>>, ModelError> {
        let sizes: Vec<usize> = ctx.iter().map(|v| self.size(&v.sort)).collect();
        let mut out = Vec::new();
        for t in tuples(&sizes) {
            let mut env: Assignment = ctx.iter().cloned().zip(t.iter().copied()).collect();
            if self.eval(f, &mut env)? {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Reduct to a subsignature.
    pub fn restrict(&self, sig: &Signature) -> FiniteModel {
        FiniteModel {
            carriers: sig.sorts.iter().map(|s| (s.clone(), self.carriers.get(s).cloned().unwrap_or_default())).collect(),
            relations: sig
                .relations
                .keys()
                .map(|r| (r.clone(), self.relations.get(r).cloned().unwrap_or_default()))
                .collect(),
            functions: sig
                .functions
                .keys()
                .map(|f| (f.clone(), self.functions.get(f).cloned().unwrap_or_default()))
                .collect(),
        }
    }

    pub fn show_assignment(&self, env: &Assignment) -> String {
        let parts: Vec<String> = env
            .iter()
            .map(|(v, i)| format!("{}={}", v.name, self.label(&v.sort, *i)))
            .collect();
        parts.join(", ")
    }

    /// Render in the model DSL.
    pub fn render(&self, name: &str, theory: &str, sig: &Signature) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model {name} : {theory} {{");
        for (s, labels) in &self.carriers {
            let _ = writeln!(out, "  sort {s} = {{{}}}", labels.join(", "));
        }
        let tuple = |t: &[usize], dom: &[String]| -> String {
            let ls: Vec<&str> = t.iter().zip(dom).map(|(i, s)| self.label(s, *i)).collect();
            if ls.len() == 1 {
                ls[0].to_string()
            } else {
                format!("({})", ls.join(","))
            }
        };
        for (r, table) in &self.relations {
            let dom = &sig.relations[r];
            let items: Vec<String> = table.iter().map(|t| tuple(t, dom)).collect();
            let _ = writeln!(out, "  rel {r} = {{{}}}", items.join(", "));
        }
        for (f, table) in &self.functions {
            let fs = &sig.functions[f];
            let items: Vec<String> = table
                .iter()
                .map(|(args, v)| {
                    let lhs = if args.is_empty() { String::new() } else { tuple(args, &fs.domain) };
                    format!("{lhs}->{}", self.label(&fs.codomain, *v))
                })
                .collect();
            let _ = writeln!(out, "  fun {f} = {{{}}}", items.join(", "));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub assignment: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelCheck {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Check every axiom under every assignment; one violation (the first
/// falsifying assignment) is reported per failing axiom.
pub fn check_model(m: &FiniteModel, t: &Theory) -> Result<ModelCheck, ModelError> {
    m.validate(&t.signature)?;
    let mut violations = Vec::new();
    for ax in &t.axioms {
        if let Some(env) = m.falsifying_assignment(&ax.sequent)? {
            violations.push(Violation {
                axiom: ax.name.clone(),
                assignment: env
                    .iter()
                    .map(|(v, i)| (v.name.clone(), m.label(&v.sort, *i).to_string()))
                    .collect(),
            });
        }
    }
    Ok(ModelCheck {
        ok: violations.is_empty(),
        violations,
    })
}

/// Number of candidate structures `find_countermodel` would enumerate,
/// saturating at `u128::MAX`.
pub fn search_space(sig: &Signature, max_size: usize) -> u128 {
    let mut total: u128 = 0;
    for sizes in size_vectors(sig.sorts.len(), max_size) {
        total = total.saturating_add(structures_at(sig, &sig.sorts, &sizes));
    }
    total
}

fn structures_at(sig: &Signature, sorts: &[String], sizes: &[usize]) -> u128 {
    let size_of = |s: &String| sizes[sorts.iter().position(|x| x == s).expect("declared sort")] as u128;
    let mut n: u128 = 1;
    for fs in sig.functions.values() {
        let dom = fs.domain.iter().map(size_of).fold(1u128, |a, b| a.saturating_mul(b));
        let cod = size_of(&fs.codomain);
        n = n.saturating_mul(pow_sat(cod, dom));
    }
    for dom in sig.relations.values() {
        let cells = dom.iter().map(size_of).fold(1u128, |a, b| a.saturating_mul(b));
        n = n.saturating_mul(pow_sat(2, cells));
    }
    n
}

fn pow_sat(base: u128, exp: u128) -> u128 {
    if exp == 0 {
        return 1;
    }
    if base <= 1 {
        return base;
    }
    if exp >= 128 {
        return u128::MAX;
    }
    base.checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// Size vectors with entries in `0..=max`, ordered by total then
/// lexicographically.
pub fn size_vectors(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut all = tuples(&vec![max + 1; n]);
    all.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
    all
}

/// Exhaustive search, in canonical order, for a model of `t` with every
/// carrier of size at most `max_size` that falsifies `s`. Structures are
/// enumerated per size vector with function tables as an odometer (first
/// symbol most significant) and relation tables as ascending bitmasks.
pub fn find_countermodel(t: &Theory, s: &Sequent, max_size: usize) -> Option<(FiniteModel, Assignment)> {
    search_models(t, max_size, &mut |m| match m.falsifying_assignment(s) {
        Ok(Some(env)) => Some((m.clone(), env)),
        _ => None,
    })
}

/// Models of `t` with carriers of size at most `max_size`, in the order of
/// [`find_countermodel`], stopping after `limit` models.
pub fn models_up_to(t: &Theory, max_size: usize, limit: usize) -> Vec<FiniteModel> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    search_models(t, max_size, &mut |m| {
        out.push(m.clone());
        (out.len() >= limit).then_some(())
    });
    out
}

fn search_models<R>(t: &Theory, max_size: usize, visit: &mut dyn FnMut(&FiniteModel) -> Option<R>) -> Option<R> {
    let sig = &t.signature;
    let fun_only: Vec<&Sequent> = t
        .axioms
        .iter()
        .map(|a| &a.sequent)
        .filter(|seq| seq.symbols().iter().all(|x| sig.functions.contains_key(x)))
        .collect();
    let rest: Vec<&Sequent> = t
        .axioms
        .iter()
        .map(|a| &a.sequent)
        .filter(|seq| !seq.symbols().iter().all(|x| sig.functions.contains_key(x)))
        .collect();
    for sizes in size_vectors(sig.sorts.len(), max_size) {
        let base = FiniteModel::with_sizes(sig, &sizes);
        let fun_slots: Vec<(String, Vec<Vec<usize>>, usize)> = sig
            .functions
            .iter()
            .map(|(f, fs)| (f.clone(), tuples(&base.sizes(&fs.domain)), base.size(&fs.codomain)))
            .collect();
        if fun_slots.iter().any(|(_, dom, cod)| !dom.is_empty() && *cod == 0) {
            continue;
        }
        let rel_slots: Vec<(String, Vec<Vec<usize>>)> = sig
            .relations
            .iter()
            .map(|(r, dom)| (r.clone(), tuples(&base.sizes(dom))))
            .collect();
        let mut fun_digits: Vec<Vec<usize>> = fun_slots.iter().map(|(_, dom, _)| vec![0; dom.len()]).collect();
        loop {
            let mut m = base.clone();
            for ((f, dom, _), digits) in fun_slots.iter().zip(&fun_digits) {
                let table = m.functions.get_mut(f).expect("declared");
                for (args, v) in dom.iter().zip(digits) {
                    table.insert(args.clone(), *v);
                }
            }
            if fun_only.iter().all(|seq| m.satisfies(seq).unwrap_or(false)) {
                if let Some(found) = search_relations(&m, &rel_slots, &rest, visit) {
                    return Some(found);
                }
            }
            if !advance_functions(&mut fun_digits, &fun_slots) {
                break;
            }
        }
    }
    None
}

fn advance_functions(digits: &mut [Vec<usize>], slots: &[(String, Vec<Vec<usize>>, usize)]) -> bool {
    for k in (0..digits.len()).rev() {
        let cod = slots[k].2;
        for j in (0..digits[k].len()).rev() {
            if digits[k][j] + 1 < cod {
                digits[k][j] += 1;
                return true;
            }
            digits[k][j] = 0;
        }
    }
    false
}

fn search_relations<R>(
    base: &FiniteModel,
    rel_slots: &[(String, Vec<Vec<usize>>)],
    axioms: &[&Sequent],
    visit: &mut dyn FnMut(&FiniteModel) -> Option<R>,
) -> Option<R> {
    let mut masks: Vec<u64> = vec![0; rel_slots.len()];
    if rel_slots.iter().any(|(_, cells)| cells.len() >= 64) {
        return None;
    }
    loop {
        let mut m = base.clone();
        for ((r, cells), mask) in rel_slots.iter().zip(&masks) {
            let table = m.relations.get_mut(r).expect("declared");
            for (i, c) in cells.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    table.insert(c.clone());
                }
            }
        }
        if axioms.iter().all(|seq| m.satisfies(seq).unwrap_or(false)) {
            if let Some(found) = visit(&m) {
                return Some(found);
            }
        }
        let mut k = rel_slots.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            let limit = 1u64 << rel_slots[k].1.len();
            if masks[k] + 1 < limit {
                masks[k] += 1;
                break;
            }
            masks[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_theory;

    fn eq_theory() -> Theory {
        parse_theory(
            "theory EQ { sort s rel A : s s
               ax refl : |- A(x, x)
               ax symm : A(x, y) |- A(y, x)
               ax trans : A(x, y), A(y, z) |- A(x, z) }",
        )
        .unwrap()
    }

    fn model_with(t: &Theory, n: usize, pairs: &[(usize, usize)]) -> FiniteModel {
        let mut m = FiniteModel::with_sizes(&t.signature, &[n]);
        m.relations.insert("A".into(), pairs.iter().map(|(a, b)| vec![*a, *b]).collect());
        m
    }

    #[test]
    fn full_relation_is_a_model() {
        let t = eq_theory();
        let m = model_with(&t, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(check_model(&m, &t).unwrap().ok);
    }

    #[test]
    fn violation_names_axiom_and_assignment() {
        let t = eq_theory();
        let m = model_with(&t, 2, &[(0, 1)]);
        let c = check_model(&m, &t).unwrap();
        assert!(!c.ok);
        assert_eq!(c.violations[0].axiom, "refl");
        assert_eq!(c.violations[0].assignment, vec![("x".to_string(), "0".to_string())]);
    }

    #[test]
    fn search_orders_by_size_then_tables() {
        let t = eq_theory();
        let s = crate::parse::parse_sequent(&t.signature, "|- A(x, y)").unwrap();
        let (m, _) = find_countermodel(&t, &s, 2).unwrap();
        assert_eq!(m.size("s"), 2);
        let a: Vec<Vec<usize>> = m.relations["A"].iter().cloned().collect();
        assert_eq!(a, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn size_vectors_are_graded() {
        assert_eq!(
            size_vectors(2, 1),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn non_total_function_rejected() {
        let t = parse_theory("theory F { sort s fun f : s -> s }").unwrap();
        let m = FiniteModel::with_sizes(&t.signature, &[2]);
        assert_eq!(m.validate(&t.signature), Err(ModelError::NotTotal("f".into())));
    }
}
