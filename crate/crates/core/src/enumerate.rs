//! Deterministic enumeration of coherent formulae, ordered by size and then
//! by their printed form.

use std::collections::BTreeMap;

use crate::print;
use crate::syntax::{Formula, Signature, Term, Var};

/// Terms over `scope`: variables, then constants, then applications of
/// function symbols to variables.
pub(crate) fn terms(sig: &Signature, scope: &[Var]) -> Vec<Term> {
    let mut out: Vec<Term> = scope.iter().map(Var::term).collect();
    for (f, fs) in &sig.functions {
        if fs.domain.is_empty() {
            out.push(Term::App {
                fun: f.clone(),
                args: Vec::new(),
                sort: fs.codomain.clone(),
            });
        }
    }
    for (f, fs) in &sig.functions {
        if fs.domain.is_empty() {
            continue;
        }
        for args in arg_tuples(&fs.domain, scope) {
            out.push(Term::App {
                fun: f.clone(),
                args: args.iter().map(Var::term).collect(),
                sort: fs.codomain.clone(),
            });
        }
    }
    out
}

fn arg_tuples(sorts: &[String], scope: &[Var]) -> Vec<Vec<Var>> {
    let mut out = vec![Vec::new()];
    for s in sorts {
        let choices: Vec<&Var> = scope.iter().filter(|v| &v.sort == s).collect();
        let mut next = Vec::new();
        for t in &out {
            for c in &choices {
                let mut t2 = t.clone();
                t2.push((*c).clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn term_tuples(sorts: &[String], pool: &[Term]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for s in sorts {
        let choices: Vec<&Term> = pool.iter().filter(|t| t.sort() == s).collect();
        let mut next = Vec::new();
        for t in &out {
            for c in &choices {
                let mut t2 = t.clone();
                t2.push((*c).clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Atomic formulae over `scope`, excluding `top`, `bot` and trivial
/// equations `t = t`. Equations are oriented by the order of [`terms`].
pub fn atoms(sig: &Signature, scope: &[Var]) -> Vec<Formula> {
    let pool = terms(sig, scope);
    let mut out = Vec::new();
    for (r, dom) in &sig.relations {
        for args in term_tuples(dom, &pool) {
            out.push(Formula::rel(r.clone(), args));
        }
    }
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            if pool[i].sort() == pool[j].sort() {
                out.push(Formula::eq(pool[i].clone(), pool[j].clone()));
            }
        }
    }
    out
}

/// Formulae of size at most `max_size` whose free variables lie in `ctx`,
/// built from atoms with conjunction, disjunction and existential
/// quantification. Commutative pairs appear once, with distinct operands;
/// a quantified variable must occur in its body.
pub struct Enumerator<'a> {
    sig: &'a Signature,
    memo: BTreeMap<(usize, Vec<Var>), Vec<Formula>>,
}

impl<'a> Enumerator<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Enumerator {
            sig,
            memo: BTreeMap::new(),
        }
    }

    fn exact(&mut self, size: usize, scope: &[Var]) -> Vec<Formula> {
        let key = (size, scope.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out = atoms(self.sig, scope);
        } else if size >= 2 {
            for left in 1..size - 1 {
                let right = size - 1 - left;
                if left > right {
                    continue;
                }
                let ls = self.exact(left, scope);
                let rs = self.exact(right, scope);
                for a in &ls {
                    for b in &rs {
                        if left == right && a >= b {
                            continue;
                        }
                        out.push(Formula::and(a.clone(), b.clone()));
                        out.push(Formula::or(a.clone(), b.clone()));
                    }
                }
            }
            let name = (1..)
                .map(|i| format!("u{i}"))
                .find(|n| scope.iter().all(|v| &v.name != n))
                .expect("unbounded supply");
            for s in self.sig.sorts.clone() {
                let u = Var::new(name.clone(), s);
                let mut inner = scope.to_vec();
                inner.push(u.clone());
                for body in self.exact(size - 1, &inner) {
                    if body.free_context().contains(&u) {
                        out.push(Formula::exists(u.clone(), body));
                    }
                }
            }
        }
        self.memo.insert(key, out.clone());
        out
    }

    /// All formulae up to `max_size`, ordered by size then printed form.
    pub fn up_to(&mut self, ctx: &[Var], max_size: usize) -> Vec<Formula> {
        let mut out = Vec::new();
        for n in 1..=max_size {
            let mut layer: Vec<(String, Formula)> =
                self.exact(n, ctx).into_iter().map(|f| (print::formula(&f), f)).collect();
            layer.sort();
            layer.dedup_by(|a, b| a.0 == b.0);
            out.extend(layer.into_iter().map(|(_, f)| f));
        }
        out
    }
}

/// Formulae in `ctx` up to `max_size` that mention every variable of `ctx`.
pub fn formulas_mentioning_all(sig: &Signature, ctx: &[Var], max_size: usize) -> Vec<Formula> {
    Enumerator::new(sig)
        .up_to(ctx, max_size)
        .into_iter()
        .filter(|f| {
            let free = f.free_context();
            ctx.iter().all(|v| free.contains(v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_theory;

    #[test]
    fn atomic_binary_formulae_of_eq() {
        let t = parse_theory("theory EQ { sort s rel A : s s }").unwrap();
        let ctx = [Var::new("x", "s"), Var::new("y", "s")];
        let fs: Vec<String> = formulas_mentioning_all(&t.signature, &ctx, 1)
            .iter()
            .map(print::formula)
            .collect();
        assert_eq!(fs, ["A(x, y)", "A(y, x)", "x = y"]);
    }

    #[test]
    fn ordered_by_size_then_text() {
        let t = parse_theory("theory EQ { sort s rel A : s s }").unwrap();
        let ctx = [Var::new("x", "s")];
        let fs = Enumerator::new(&t.signature).up_to(&ctx, 3);
        for w in fs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!((a.size(), print::formula(a)) < (b.size(), print::formula(b)));
        }
        assert!(fs.iter().all(|f| f.free_context().iter().all(|v| v.name == "x")));
    }

    #[test]
    fn constants_are_terms() {
        let t = parse_theory("theory TWO { sort s fun a : -> s fun b : -> s }").unwrap();
        let fs: Vec<String> = formulas_mentioning_all(&t.signature, &[Var::new("x", "s")], 1)
            .iter()
            .map(print::formula)
            .collect();
        assert_eq!(fs, ["x = a", "x = b"]);
    }
}
