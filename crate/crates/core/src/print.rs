//! Pretty-printing in the concrete syntax accepted by [`crate::parse`].
//!
//! Free variables are annotated with their sort at first occurrence when
//! `annotate` is set, so that printed multi-sorted formulae re-parse without
//! relying on sort inference. Binders always carry their sort.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::syntax::{Formula, Sequent, Term, Theory, Var, Mode};

#[derive(Debug, Clone, Default)]
pub struct Printer {
    pub annotate: bool,
    seen: BTreeSet<Var>,
    clashes: BTreeSet<String>,
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

impl Printer {
    pub fn new(annotate: bool) -> Self {
        Printer {
            annotate,
            ..Printer::default()
        }
    }

    fn prepare(&mut self, formulas: &[&Formula]) {
        self.seen.clear();
        self.clashes.clear();
        for f in formulas {
            self.clashes.extend(f.var_names());
        }
    }

    pub fn term(&mut self, t: &Term, bound: &[Var], out: &mut String) {
        match t {
            Term::Var(v) => {
                out.push_str(&v.name);
                if self.annotate && !bound.contains(v) && self.seen.insert(v.clone()) {
                    let _ = write!(out, ":{}", v.sort);
                }
            }
            Term::App { fun, args, .. } => {
                out.push_str(fun);
                if args.is_empty() && !self.clashes.contains(fun) {
                    return;
                }
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.term(a, bound, out);
                }
                out.push(')');
            }
        }
    }

    fn formula_prec(&mut self, f: &Formula, ctx: u8, bound: &mut Vec<Var>, out: &mut String) {
        match f {
            Formula::Top => out.push_str("top"),
            Formula::Bot => out.push_str("bot"),
            Formula::Rel(r, args) => {
                out.push_str(r);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        self.term(a, bound, out);
                    }
                    out.push(')');
                }
            }
            Formula::Eq(a, b) => {
                self.term(a, bound, out);
                out.push_str(" = ");
                self.term(b, bound, out);
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (prec, op) = if matches!(f, Formula::And(..)) {
                    (PREC_AND, " & ")
                } else {
                    (PREC_OR, " | ")
                };
                let paren = ctx > prec;
                if paren {
                    out.push('(');
                }
                self.formula_prec(a, prec + 1, bound, out);
                out.push_str(op);
                self.formula_prec(b, prec, bound, out);
                if paren {
                    out.push(')');
                }
            }
            Formula::Not(a) => {
                out.push('~');
                self.formula_prec(a, PREC_UNARY + 1, bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let paren = ctx > 0;
                if paren {
                    out.push('(');
                }
                let kw = if matches!(f, Formula::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                let _ = write!(out, "{kw} {}:{} . ", v.name, v.sort);
                bound.push(v.clone());
                self.formula_prec(body, 0, bound, out);
                bound.pop();
                if paren {
                    out.push(')');
                }
            }
        }
    }

    /// Print one formula on its own (annotation state is reset).
    pub fn formula(&mut self, f: &Formula) -> String {
        self.prepare(&[f]);
        let mut out = String::new();
        self.formula_prec(f, 0, &mut Vec::new(), &mut out);
        out
    }

    /// Print a sequent; annotations are shared across its formulae.
    pub fn sequent(&mut self, s: &Sequent) -> String {
        let all: Vec<&Formula> = s.antecedent.iter().chain(std::iter::once(&s.succedent)).collect();
        self.prepare(&all);
        let mut out = String::new();
        for (i, f) in s.antecedent.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.formula_prec(f, PREC_OR, &mut Vec::new(), &mut out);
        }
        if !s.antecedent.is_empty() {
            out.push(' ');
        }
        out.push_str("|- ");
        self.formula_prec(&s.succedent, 0, &mut Vec::new(), &mut out);
        out
    }
}

/// Unannotated formula text, as used in reports.
pub fn formula(f: &Formula) -> String {
    Printer::new(false).formula(f)
}

pub fn sequent(s: &Sequent) -> String {
    Printer::new(false).sequent(s)
}

pub fn term(t: &Term) -> String {
    let mut out = String::new();
    Printer::new(false).term(t, &[], &mut out);
    out
}

/// A formula with its context, written `(x:s, y:t) phi`.
pub fn class(ctx: &[Var], f: &Formula) -> String {
    let vars: Vec<String> = ctx.iter().map(|v| v.to_string()).collect();
    format!("({}) {}", vars.join(", "), formula(f))
}

/// Render a theory in the theory DSL.
pub fn theory(t: &Theory) -> String {
    let mut out = String::new();
    let classical = if t.mode == Mode::Classical { " classical" } else { "" };
    let _ = writeln!(out, "theory {}{} {{", t.name, classical);
    for s in &t.signature.sorts {
        let _ = writeln!(out, "  sort {s}");
    }
    for (r, dom) in &t.signature.relations {
        if dom.is_empty() {
            let _ = writeln!(out, "  rel {r}");
        } else {
            let _ = writeln!(out, "  rel {r} : {}", dom.join(" "));
        }
    }
    for (f, sig) in &t.signature.functions {
        let dom = sig.domain.join(" ");
        let sep = if dom.is_empty() { "" } else { " " };
        let _ = writeln!(out, "  fun {f} : {dom}{sep}-> {}", sig.codomain);
    }
    let annotate = t.signature.sorts.len() > 1;
    for ax in &t.axioms {
        let _ = writeln!(out, "  ax {} : {}", ax.name, Printer::new(annotate).sequent(&ax.sequent));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n, "s")
    }

    #[test]
    fn precedence_and_binders() {
        let a = Formula::rel("A", vec![v("x").term(), v("y").term()]);
        let p = Formula::rel("P", vec![]);
        let f = Formula::and(Formula::or(p.clone(), p.clone()), Formula::exists(v("y"), a.clone()));
        assert_eq!(formula(&f), "(P | P) & (exists y:s . A(x, y))");
        let g = Formula::or(p.clone(), Formula::and(p.clone(), p.clone()));
        assert_eq!(formula(&g), "P | P & P");
        let h = Formula::and(Formula::and(p.clone(), p.clone()), p);
        assert_eq!(formula(&h), "(P & P) & P");
    }

    #[test]
    fn sequent_annotates_first_occurrence() {
        let a = Formula::rel("A", vec![v("x").term(), v("y").term()]);
        let b = Formula::rel("A", vec![v("y").term(), v("x").term()]);
        let s = Sequent::new(vec![a], b);
        assert_eq!(Printer::new(true).sequent(&s), "A(x:s, y:s) |- A(y, x)");
        assert_eq!(sequent(&s), "A(x, y) |- A(y, x)");
    }
}
