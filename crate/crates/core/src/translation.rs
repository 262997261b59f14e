//! Reconstruals between theories and the proof obligations that make them
//! translations, together with t-maps, homotopy equivalences and model
//! pullback.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{tuples, Assignment, FiniteModel, ModelError};
use crate::parse::{elaborate_formula, ParseError, RawDef, RawTMap, RawTrEntry, RawTranslation};
use crate::print;
use crate::prover::Budget;
use crate::report::{discharge_all, Goal, Obligation, Verdict, VerificationReport};
use crate::syntax::{
    rename, unfold_function_graphs, FreshNames, Formula, Mode, Sequent, SubstitutionClass, SyntaxError, Term, Theory,
    Var,
};

#[derive(Debug, Error)]
pub enum TranslationError {
    #[error("no image for symbol {0}")]
    Unmapped(String),
    #[error("endpoint mismatch: {0}")]
    Endpoint(String),
    #[error("ill-formed reconstrual: {0}")]
    IllFormed(String),
    #[error("{0}")]
    NotEquivalence(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SortImage {
    pub sorts: Vec<String>,
    /// Domain formula over a context of type `sorts`.
    pub domain: SubstitutionClass,
}

/// Symbol-wise data of a reconstrual. Relation images are read over the
/// concatenated image of the domain, function images over the image of the
/// domain followed by the image of the codomain, equality images over two
/// copies of the sort image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reconstrual {
    pub name: String,
    pub source: Theory,
    pub target: Theory,
    pub sorts: IndexMap<String, SortImage>,
    pub relations: IndexMap<String, SubstitutionClass>,
    pub functions: IndexMap<String, SubstitutionClass>,
    pub equality: IndexMap<String, SubstitutionClass>,
}

fn numbered(prefix: &str, sorts: &[String]) -> Vec<Var> {
    sorts
        .iter()
        .enumerate()
        .map(|(i, s)| Var::new(format!("{prefix}{}", i + 1), s.clone()))
        .collect()
}

impl Reconstrual {
    pub fn identity(t: &Theory) -> Self {
        let sig = &t.signature;
        let mut r = Reconstrual {
            name: "id".into(),
            source: t.clone(),
            target: t.clone(),
            sorts: IndexMap::new(),
            relations: IndexMap::new(),
            functions: IndexMap::new(),
            equality: IndexMap::new(),
        };
        for s in &sig.sorts {
            r.sorts.insert(
                s.clone(),
                SortImage {
                    sorts: vec![s.clone()],
                    domain: SubstitutionClass::new(numbered("x", &[s.clone()]), Formula::Top),
                },
            );
            let (x, y) = (Var::new("x1", s), Var::new("x2", s));
            r.equality.insert(
                s.clone(),
                SubstitutionClass::new(vec![x.clone(), y.clone()], Formula::eq(x.term(), y.term())),
            );
        }
        for (name, dom) in &sig.relations {
            let ctx = numbered("x", dom);
            let f = Formula::rel(name.clone(), ctx.iter().map(Var::term).collect());
            r.relations.insert(name.clone(), SubstitutionClass::new(ctx, f));
        }
        for (name, fs) in &sig.functions {
            let mut sorts = fs.domain.clone();
            sorts.push(fs.codomain.clone());
            let ctx = numbered("x", &sorts);
            let (args, out) = ctx.split_at(fs.domain.len());
            let app = Term::App {
                fun: name.clone(),
                args: args.iter().map(Var::term).collect(),
                sort: fs.codomain.clone(),
            };
            let f = Formula::eq(app, out[0].term());
            r.functions.insert(name.clone(), SubstitutionClass::new(ctx, f));
        }
        r
    }

    pub fn image_sorts(&self, sort: &str) -> Result<&[String], TranslationError> {
        self.sorts
            .get(sort)
            .map(|i| i.sorts.as_slice())
            .ok_or_else(|| TranslationError::Unmapped(sort.to_string()))
    }

    pub fn image_of_list(&self, sorts: &[String]) -> Result<Vec<String>, TranslationError> {
        let mut out = Vec::new();
        for s in sorts {
            out.extend(self.image_sorts(s)?.iter().cloned());
        }
        Ok(out)
    }

    /// `D_sort` instantiated at `vars`.
    pub fn domain(&self, sort: &str, vars: &[Var]) -> Result<Formula, TranslationError> {
        let img = self.sorts.get(sort).ok_or_else(|| TranslationError::Unmapped(sort.to_string()))?;
        Ok(img.domain.apply_vars(vars)?)
    }

    /// `E_sort(xs, ys)`.
    pub fn eq_image(&self, sort: &str, xs: &[Var], ys: &[Var]) -> Result<Formula, TranslationError> {
        let class = self.equality.get(sort).ok_or_else(|| TranslationError::Unmapped(format!("={sort}")))?;
        let vars: Vec<Var> = xs.iter().chain(ys).cloned().collect();
        Ok(class.apply_vars(&vars)?)
    }

    /// Check that every source symbol has an image of the right type and
    /// that every image is well-typed over the target.
    pub fn check(&self) -> Result<(), TranslationError> {
        let tsig = &self.target.signature;
        let classical = self.target.mode == Mode::Classical;
        let expect = |what: &str, class: &SubstitutionClass, sorts: &[String]| -> Result<(), TranslationError> {
            if class.sorts() != sorts {
                return Err(TranslationError::IllFormed(format!(
                    "image of {what} is read over ({}) but should be over ({})",
                    class.sorts().join(","),
                    sorts.join(",")
                )));
            }
            for s in sorts {
                tsig.require_sort(s)?;
            }
            tsig.check_formula(&class.formula, classical)?;
            for v in class.formula.free_context() {
                if !class.context.contains(&v) {
                    return Err(TranslationError::IllFormed(format!("image of {what} mentions {} outside its context", v.name)));
                }
            }
            Ok(())
        };
        let ssig = &self.source.signature;
        for s in &ssig.sorts {
            let img = self.sorts.get(s).ok_or_else(|| TranslationError::Unmapped(s.clone()))?;
            expect(&format!("sort {s}"), &img.domain, &img.sorts)?;
            let pair: Vec<String> = img.sorts.iter().chain(&img.sorts).cloned().collect();
            let e = self.equality.get(s).ok_or_else(|| TranslationError::Unmapped(format!("={s}")))?;
            expect(&format!("equality on {s}"), e, &pair)?;
        }
        for (r, dom) in &ssig.relations {
            let class = self.relations.get(r).ok_or_else(|| TranslationError::Unmapped(r.clone()))?;
            expect(r, class, &self.image_of_list(dom)?)?;
        }
        for (f, fs) in &ssig.functions {
            let class = self.functions.get(f).ok_or_else(|| TranslationError::Unmapped(f.clone()))?;
            let mut sorts = self.image_of_list(&fs.domain)?;
            sorts.extend(self.image_sorts(&fs.codomain)?.iter().cloned());
            expect(f, class, &sorts)?;
        }
        Ok(())
    }

    /// Image of a formula read in `ctx`; returns the image context (the
    /// concatenated images of `ctx`) together with the image formula.
    pub fn apply_in(&self, ctx: &[Var], phi: &Formula) -> Result<(Vec<Var>, Formula), TranslationError> {
        let phi = unfold_function_graphs(phi);
        let mut images = Images::new(self, [&phi]);
        let mut out_ctx = Vec::new();
        for v in ctx {
            out_ctx.extend(images.of(v)?);
        }
        let f = images.formula(&phi)?;
        Ok((out_ctx, f))
    }

    pub fn apply(&self, phi: &Formula) -> Result<Formula, TranslationError> {
        Ok(self.apply_in(&phi.free_context(), phi)?.1)
    }

    pub fn apply_class(&self, class: &SubstitutionClass) -> Result<SubstitutionClass, TranslationError> {
        let (ctx, f) = self.apply_in(&class.context, &class.formula)?;
        Ok(SubstitutionClass::new(ctx, f))
    }

    /// Image of a sequent. With `relativize`, the antecedent is strengthened
    /// by the domain formulae of the images of its context.
    pub fn apply_sequent(&self, s: &Sequent, relativize: bool) -> Result<Sequent, TranslationError> {
        let ante: Vec<Formula> = s.antecedent.iter().map(unfold_function_graphs).collect();
        let succ = unfold_function_graphs(&s.succedent);
        let mut images = Images::new(self, ante.iter().chain([&succ]));
        let mut antecedent = Vec::new();
        if relativize {
            for v in s.context() {
                let vs = images.of(&v)?;
                let d = self.domain(&v.sort, &vs)?;
                if d != Formula::Top {
                    antecedent.push(d);
                }
            }
        }
        for a in &ante {
            antecedent.push(images.formula(a)?);
        }
        let succedent = images.formula(&succ)?;
        Ok(Sequent::new(antecedent, succedent))
    }
}

/// Assignment of image variables to source variables, shared across the
/// formulae of one sequent so that a variable has the same image everywhere.
struct Images<'a> {
    map: &'a Reconstrual,
    vars: HashMap<Var, Vec<Var>>,
    claimed: BTreeSet<String>,
    fresh: FreshNames,
}

impl<'a> Images<'a> {
    fn new<'f>(map: &'a Reconstrual, phis: impl IntoIterator<Item = &'f Formula>) -> Self {
        let mut fresh = FreshNames::new();
        for f in phis {
            fresh.reserve_formula(f);
        }
        Images {
            map,
            vars: HashMap::new(),
            claimed: BTreeSet::new(),
            fresh,
        }
    }

    fn of(&mut self, v: &Var) -> Result<Vec<Var>, TranslationError> {
        if let Some(vs) = self.vars.get(v) {
            return Ok(vs.clone());
        }
        let sorts = self.map.image_sorts(&v.sort)?.to_vec();
        let vs: Vec<Var> = if sorts.len() == 1 && !self.claimed.contains(&v.name) {
            vec![Var::new(v.name.clone(), sorts[0].clone())]
        } else {
            sorts.iter().map(|s| self.fresh.fresh_var(&v.name, s)).collect()
        };
        for w in &vs {
            self.claimed.insert(w.name.clone());
        }
        self.vars.insert(v.clone(), vs.clone());
        Ok(vs)
    }

    fn block(&mut self, args: &[Term]) -> Result<Vec<Var>, TranslationError> {
        let mut out = Vec::new();
        for a in args {
            let v = a
                .as_var()
                .ok_or_else(|| TranslationError::IllFormed("nested application after unfolding".into()))?;
            out.extend(self.of(v)?);
        }
        Ok(out)
    }

    fn formula(&mut self, phi: &Formula) -> Result<Formula, TranslationError> {
        Ok(match phi {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Rel(r, args) => {
                let vs = self.block(args)?;
                let class = self.map.relations.get(r).ok_or_else(|| TranslationError::Unmapped(r.clone()))?;
                class.apply_vars(&vs)?
            }
            Formula::Eq(Term::App { fun, args, .. }, Term::Var(y)) => {
                let mut vs = self.block(args)?;
                vs.extend(self.of(y)?);
                let class = self.map.functions.get(fun).ok_or_else(|| TranslationError::Unmapped(fun.clone()))?;
                class.apply_vars(&vs)?
            }
            Formula::Eq(Term::Var(a), Term::Var(b)) => {
                let xs = self.of(a)?;
                let ys = self.of(b)?;
                self.map.eq_image(&a.sort, &xs, &ys)?
            }
            Formula::Eq(..) => return Err(TranslationError::IllFormed("equation between applications".into())),
            Formula::And(a, b) => Formula::and(self.formula(a)?, self.formula(b)?),
            Formula::Or(a, b) => Formula::or(self.formula(a)?, self.formula(b)?),
            Formula::Not(a) => Formula::Not(Box::new(self.formula(a)?)),
            Formula::Exists(v, body) => {
                let vs = self.of(v)?;
                let d = self.map.domain(&v.sort, &vs)?;
                let body = self.formula(body)?;
                Formula::exists_many(&vs, Formula::conj_simplified([d, body]))
            }
            Formula::Forall(v, body) => {
                let vs = self.of(v)?;
                let d = self.map.domain(&v.sort, &vs)?;
                let body = self.formula(body)?;
                let inner = if d == Formula::Top {
                    body
                } else {
                    Formula::or(Formula::Not(Box::new(d)), body)
                };
                vs.iter()
                    .rev()
                    .fold(inner, |acc, w| Formula::Forall(w.clone(), Box::new(acc)))
            }
        })
    }
}

/// A reconstrual together with the verdicts of its obligations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Translation {
    pub map: Reconstrual,
    pub report: VerificationReport,
    pub is_translation: Verdict,
    pub is_equality_preserving: Verdict,
    pub is_strong: Verdict,
}

/// The logical sequents of the source signature: equality is an
/// equivalence, relations respect it, and function graphs are total,
/// single-valued and respect it.
pub fn logical_sequents(t: &Theory) -> Vec<(String, Sequent)> {
    let sig = &t.signature;
    let mut out = Vec::new();
    let eq = |a: &Var, b: &Var| Formula::eq(a.term(), b.term());
    for s in &sig.sorts {
        let (x, y, z) = (Var::new("x", s), Var::new("y", s), Var::new("z", s));
        out.push((format!("refl:{s}"), Sequent::fact(eq(&x, &x))));
        out.push((format!("symm:{s}"), Sequent::new(vec![eq(&x, &y)], eq(&y, &x))));
        out.push((format!("trans:{s}"), Sequent::new(vec![eq(&x, &y), eq(&y, &z)], eq(&x, &z))));
    }
    for (r, dom) in &sig.relations {
        if dom.is_empty() {
            continue;
        }
        let xs = numbered("x", dom);
        let ys = numbered("y", dom);
        let mut ante: Vec<Formula> = xs.iter().zip(&ys).map(|(a, b)| eq(a, b)).collect();
        ante.push(Formula::rel(r.clone(), xs.iter().map(Var::term).collect()));
        out.push((format!("congruence:{r}"), Sequent::new(ante, Formula::rel(r.clone(), ys.iter().map(Var::term).collect()))));
    }
    for (f, fs) in &sig.functions {
        let xs = numbered("x", &fs.domain);
        let ys = numbered("y", &fs.domain);
        let (u, w) = (Var::new("u", &fs.codomain), Var::new("w", &fs.codomain));
        let app = |args: &[Var]| Term::App {
            fun: f.clone(),
            args: args.iter().map(Var::term).collect(),
            sort: fs.codomain.clone(),
        };
        out.push((
            format!("total:{f}"),
            Sequent::fact(Formula::exists(u.clone(), Formula::eq(app(&xs), u.term()))),
        ));
        out.push((
            format!("functional:{f}"),
            Sequent::new(vec![Formula::eq(app(&xs), u.term()), Formula::eq(app(&xs), w.term())], eq(&u, &w)),
        ));
        if !xs.is_empty() {
            let mut ante: Vec<Formula> = xs.iter().zip(&ys).map(|(a, b)| eq(a, b)).collect();
            ante.push(Formula::eq(app(&xs), u.term()));
            out.push((format!("congruence:{f}"), Sequent::new(ante, Formula::eq(app(&ys), u.term()))));
        }
    }
    out
}

/// Discharge the translation, equality-preservation and strongness
/// obligations of `f` in its target theory.
pub fn verify_translation(f: &Reconstrual, b: Budget) -> Translation {
    let mut report = VerificationReport::new(format!("translation {} : {} -> {}", f.name, f.source.name, f.target.name));
    if let Err(e) = f.check() {
        report.push(Obligation::check("well-formed", "", false, e.to_string()));
        return Translation {
            map: f.clone(),
            report,
            is_translation: Verdict::Failed,
            is_equality_preserving: Verdict::Failed,
            is_strong: Verdict::Failed,
        };
    }
    let mut goals = Vec::new();
    let mut failures = Vec::new();
    let mut push = |name: String, s: Result<Sequent, TranslationError>| match s {
        Ok(s) => goals.push(Goal::new(name, s)),
        Err(e) => failures.push(Obligation::check(name, "", false, e.to_string())),
    };
    for ax in &f.source.axioms {
        push(format!("axiom:{}", ax.name), f.apply_sequent(&ax.sequent, true));
    }
    for (name, s) in logical_sequents(&f.source) {
        push(format!("logic:{name}"), f.apply_sequent(&s, true));
    }
    for s in &f.source.signature.sorts {
        push(format!("ep:{s}:forward"), ep_sequent(f, s, true));
        push(format!("ep:{s}:backward"), ep_sequent(f, s, false));
    }
    let obligations = discharge_all(&f.target, &goals, b);
    for o in obligations.into_iter().chain(failures) {
        report.push(o);
    }
    for s in &f.source.signature.sorts {
        let img = &f.sorts[s];
        if img.domain.formula == Formula::Bot {
            report.note(format!("domain of {s} is empty"));
        }
    }
    let is_translation = Verdict::all([report.verdict_of("axiom:"), report.verdict_of("logic:")]);
    let is_equality_preserving = Verdict::all([is_translation, report.verdict_of("ep:")]);
    let short: Vec<&String> = f
        .source
        .signature
        .sorts
        .iter()
        .filter(|s| f.sorts[*s].sorts.len() != 1)
        .collect();
    let lengths = short.is_empty();
    report.push(Obligation::check(
        "strong:lengths",
        "every sort image has length 1",
        lengths,
        if lengths {
            String::new()
        } else {
            format!("sorts with image length other than 1: {}", short.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "))
        },
    ));
    let is_strong = Verdict::all([is_equality_preserving, Verdict::from_bool(lengths)]);
    Translation {
        map: f.clone(),
        report,
        is_translation,
        is_equality_preserving,
        is_strong,
    }
}

/// `E(x,y) |- x = y & D(x) & D(y)` or its converse.
fn ep_sequent(f: &Reconstrual, sort: &str, forward: bool) -> Result<Sequent, TranslationError> {
    let img = f.image_sorts(sort)?;
    let xs = numbered("x", img);
    let ys = numbered("y", img);
    let e = f.eq_image(sort, &xs, &ys)?;
    let parts = vec![Formula::vars_equal(&xs, &ys), f.domain(sort, &xs)?, f.domain(sort, &ys)?];
    Ok(if forward {
        Sequent::new(vec![e], Formula::conj_simplified(parts))
    } else {
        Sequent::new(parts.into_iter().filter(|p| *p != Formula::Top).collect(), e)
    })
}

/// `G F : T1 -> T3`.
pub fn compose_translations(f: &Reconstrual, g: &Reconstrual) -> Result<Reconstrual, TranslationError> {
    if f.target.name != g.source.name || f.target.signature != g.source.signature {
        return Err(TranslationError::Endpoint(format!(
            "{} ends at {} but {} starts at {}",
            f.name, f.target.name, g.name, g.source.name
        )));
    }
    let mut out = Reconstrual {
        name: format!("{}.{}", g.name, f.name),
        source: f.source.clone(),
        target: g.target.clone(),
        sorts: IndexMap::new(),
        relations: IndexMap::new(),
        functions: IndexMap::new(),
        equality: IndexMap::new(),
    };
    for (s, img) in &f.sorts {
        let (ctx, gd) = g.apply_in(&img.domain.context, &img.domain.formula)?;
        let mut parts = vec![gd];
        let mut at = 0;
        for v in &img.domain.context {
            let n = g.image_sorts(&v.sort)?.len();
            parts.push(g.domain(&v.sort, &ctx[at..at + n])?);
            at += n;
        }
        let sorts = g.image_of_list(&img.sorts)?;
        out.sorts.insert(
            s.clone(),
            SortImage {
                sorts,
                domain: SubstitutionClass::new(ctx, Formula::conj_simplified(parts)).canonical(),
            },
        );
    }
    for (r, c) in &f.relations {
        out.relations.insert(r.clone(), g.apply_class(c)?.canonical());
    }
    for (name, c) in &f.functions {
        out.functions.insert(name.clone(), g.apply_class(c)?.canonical());
    }
    for (s, c) in &f.equality {
        out.equality.insert(s.clone(), g.apply_class(c)?.canonical());
    }
    Ok(out)
}

/// A family of target formulae `chi_s` over `F s . G s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TMap {
    pub name: String,
    pub from: Reconstrual,
    pub to: Reconstrual,
    pub components: IndexMap<String, SubstitutionClass>,
    pub iso: bool,
    /// Additional source formulae for naturality checks.
    pub checks: Vec<SubstitutionClass>,
}

impl TMap {
    /// `chi_s(x, y) := (x = y)` componentwise, between reconstruals with the
    /// same sort images.
    pub fn trivial(name: impl Into<String>, from: &Reconstrual, to: &Reconstrual, iso: bool) -> Result<Self, TranslationError> {
        let mut components = IndexMap::new();
        for s in &from.source.signature.sorts {
            let fs = from.image_sorts(s)?;
            let gs = to.image_sorts(s)?;
            if fs != gs {
                return Err(TranslationError::Endpoint(format!("sort images of {s} differ")));
            }
            let xs = numbered("x", fs);
            let ys = numbered("y", gs);
            let ctx: Vec<Var> = xs.iter().chain(&ys).cloned().collect();
            components.insert(s.clone(), SubstitutionClass::new(ctx, Formula::vars_equal(&xs, &ys)));
        }
        Ok(TMap {
            name: name.into(),
            from: from.clone(),
            to: to.clone(),
            components,
            iso,
            checks: Vec::new(),
        })
    }

    pub fn chi(&self, sort: &str, xs: &[Var], ys: &[Var]) -> Result<Formula, TranslationError> {
        let c = self
            .components
            .get(sort)
            .ok_or_else(|| TranslationError::Unmapped(format!("component {sort}")))?;
        let vars: Vec<Var> = xs.iter().chain(ys).cloned().collect();
        Ok(c.apply_vars(&vars)?)
    }

    fn check_endpoints(&self) -> Result<(), TranslationError> {
        let (f, g) = (&self.from, &self.to);
        if f.source.name != g.source.name || f.target.name != g.target.name {
            return Err(TranslationError::Endpoint(format!(
                "{} : {} -> {} and {} : {} -> {}",
                f.name, f.source.name, f.target.name, g.name, g.source.name, g.target.name
            )));
        }
        for s in &f.source.signature.sorts {
            let want: Vec<String> = f.image_sorts(s)?.iter().chain(g.image_sorts(s)?).cloned().collect();
            let c = self
                .components
                .get(s)
                .ok_or_else(|| TranslationError::Unmapped(format!("component {s}")))?;
            if c.sorts() != want {
                return Err(TranslationError::IllFormed(format!("component {s} has the wrong context")));
            }
            f.target
                .signature
                .check_formula(&c.formula, f.target.mode == Mode::Classical)?;
        }
        Ok(())
    }

    /// `chi` over a list of source variables, split into image blocks.
    fn chi_blocks(&self, ctx: &[Var], fx: &[Var], gx: &[Var]) -> Result<Formula, TranslationError> {
        let mut parts = Vec::new();
        let (mut i, mut j) = (0, 0);
        for v in ctx {
            let n = self.from.image_sorts(&v.sort)?.len();
            let m = self.to.image_sorts(&v.sort)?.len();
            parts.push(self.chi(&v.sort, &fx[i..i + n], &gx[j..j + m])?);
            i += n;
            j += m;
        }
        Ok(Formula::conj_simplified(parts))
    }

    /// Naturality sequents for one source class: `chi(x,y), F phi(x) |- G phi(y)`
    /// and, for isomorphisms, the converse.
    fn naturality(&self, class: &SubstitutionClass) -> Result<Vec<(String, Sequent)>, TranslationError> {
        let (fx, fphi) = self.from.apply_in(&class.context, &class.formula)?;
        let (gx, gphi) = self.to.apply_in(&class.context, &class.formula)?;
        let mut fresh = FreshNames::new();
        fresh.reserve_formula(&fphi);
        fresh.reserve_formula(&gphi);
        fx.iter().chain(&gx).for_each(|v| fresh.reserve(v.name.clone()));
        let gy: Vec<Var> = gx.iter().map(|v| fresh.fresh_var(&v.name, &v.sort)).collect();
        let gphi = rename(&gphi, &gx, &gy)?;
        let chi = self.chi_blocks(&class.context, &fx, &gy)?;
        let mut out = vec![("".to_string(), Sequent::new(vec![chi.clone(), fphi.clone()], gphi.clone()))];
        if self.iso {
            out.push(("reverse".to_string(), Sequent::new(vec![chi, gphi], fphi)));
        }
        Ok(out)
    }
}

/// The atomic generators of a signature as substitution classes: relation
/// atoms, function graphs and equality per sort.
fn generators(t: &Theory) -> Vec<(String, SubstitutionClass)> {
    let sig = &t.signature;
    let mut out = Vec::new();
    for (r, dom) in &sig.relations {
        let ctx = numbered("x", dom);
        let f = Formula::rel(r.clone(), ctx.iter().map(Var::term).collect());
        out.push((r.clone(), SubstitutionClass::new(ctx, f)));
    }
    for (name, fs) in &sig.functions {
        let ctx = numbered("x", &fs.domain);
        let y = Var::new("y", &fs.codomain);
        let app = Term::App {
            fun: name.clone(),
            args: ctx.iter().map(Var::term).collect(),
            sort: fs.codomain.clone(),
        };
        let mut full = ctx.clone();
        full.push(y.clone());
        out.push((name.clone(), SubstitutionClass::new(full, Formula::eq(app, y.term()))));
    }
    for s in &sig.sorts {
        let (x, y) = (Var::new("x", s), Var::new("y", s));
        out.push((format!("={s}"), SubstitutionClass::new(vec![x.clone(), y.clone()], Formula::eq(x.term(), y.term()))));
    }
    out
}

/// Discharge the t-map obligations in the common target theory. With
/// `atoms_only` false the user-supplied check formulae are added to the
/// naturality obligations.
pub fn verify_tmap(chi: &TMap, atoms_only: bool, b: Budget) -> Result<VerificationReport, TranslationError> {
    chi.check_endpoints()?;
    let (f, g) = (&chi.from, &chi.to);
    let mut report = VerificationReport::new(format!(
        "{}tmap {} : {} => {}",
        if chi.iso { "iso " } else { "" },
        chi.name,
        f.name,
        g.name
    ));
    let mut goals = Vec::new();
    for s in &f.source.signature.sorts {
        let fs = f.image_sorts(s)?;
        let gs = g.image_sorts(s)?;
        let xs = numbered("x", fs);
        let ws = numbered("w", fs);
        let ys = numbered("y", gs);
        let zs = numbered("z", gs);
        let c = |a: &[Var], b: &[Var]| chi.chi(s, a, b);
        goals.push(Goal::new(
            format!("domain:{s}"),
            Sequent::new(vec![c(&xs, &ys)?], Formula::conj_simplified([f.domain(s, &xs)?, g.domain(s, &ys)?])),
        ));
        goals.push(Goal::new(
            format!("well-defined:{s}"),
            Sequent::new(vec![f.eq_image(s, &xs, &ws)?, g.eq_image(s, &ys, &zs)?, c(&ws, &zs)?], c(&xs, &ys)?),
        ));
        goals.push(Goal::new(
            format!("existence:{s}"),
            Sequent::new(
                nontrivial(f.domain(s, &xs)?),
                Formula::exists_many(&ys, Formula::conj_simplified([g.domain(s, &ys)?, c(&xs, &ys)?])),
            ),
        ));
        goals.push(Goal::new(
            format!("unique:{s}"),
            Sequent::new(vec![c(&xs, &ys)?, c(&xs, &zs)?], g.eq_image(s, &ys, &zs)?),
        ));
        if chi.iso {
            goals.push(Goal::new(
                format!("onto:{s}"),
                Sequent::new(
                    nontrivial(g.domain(s, &ys)?),
                    Formula::exists_many(&xs, Formula::conj_simplified([f.domain(s, &xs)?, c(&xs, &ys)?])),
                ),
            ));
            goals.push(Goal::new(
                format!("one-to-one:{s}"),
                Sequent::new(vec![c(&xs, &ys)?, c(&ws, &ys)?], f.eq_image(s, &xs, &ws)?),
            ));
        }
    }
    let mut classes = generators(&f.source);
    if !atoms_only {
        for (i, c) in chi.checks.iter().enumerate() {
            classes.push((format!("check{}", i + 1), c.clone()));
        }
    }
    for (name, class) in &classes {
        for (suffix, s) in chi.naturality(class)? {
            let n = if suffix.is_empty() {
                format!("naturality:{name}")
            } else {
                format!("naturality:{name}:{suffix}")
            };
            goals.push(Goal::new(n, s));
        }
    }
    for o in discharge_all(&f.target, &goals, b) {
        report.push(o);
    }
    Ok(report)
}

fn nontrivial(f: Formula) -> Vec<Formula> {
    if f == Formula::Top {
        Vec::new()
    } else {
        vec![f]
    }
}

/// Check that `chi1 : G F => 1` and `chi2 : F G => 1` are t-map isomorphisms.
pub fn verify_homotopy_equivalence(
    f: &Reconstrual,
    g: &Reconstrual,
    chi1: &TMap,
    chi2: &TMap,
    b: Budget,
) -> Result<VerificationReport, TranslationError> {
    let gf = compose_translations(f, g)?;
    let fg = compose_translations(g, f)?;
    let same_images = |a: &Reconstrual, b: &Reconstrual| {
        a.source.name == b.source.name
            && a.sorts.len() == b.sorts.len()
            && a.sorts.iter().all(|(s, i)| b.sorts.get(s).is_some_and(|j| j.sorts == i.sorts))
    };
    for (chi, comp, t) in [(chi1, &gf, &f.source), (chi2, &fg, &g.source)] {
        if !same_images(&chi.from, comp) || !same_images(&chi.to, &Reconstrual::identity(t)) {
            return Err(TranslationError::Endpoint(format!(
                "t-map {} does not run from {} to the identity of {}",
                chi.name, comp.name, t.name
            )));
        }
    }
    let mut report = VerificationReport::new(format!("homotopy equivalence {} / {}", f.name, g.name));
    for (label, chi, comp, t) in [("GF", chi1, gf, &f.source), ("FG", chi2, fg, &g.source)] {
        let mut chi = chi.clone();
        chi.from = comp;
        chi.to = Reconstrual::identity(t);
        chi.iso = true;
        report.extend(label, verify_tmap(&chi, true, b)?);
    }
    Ok(report)
}

/// Precompose a model of the target with `f`: carriers are the tuples
/// satisfying the domain formulae, identified along the image of equality.
pub fn pullback_model(f: &Reconstrual, m: &FiniteModel) -> Result<FiniteModel, TranslationError> {
    f.check()?;
    let ssig = &f.source.signature;
    let mut out = FiniteModel::empty(ssig);
    // For each source sort: class representatives and a tuple -> class index.
    let mut reps: IndexMap<String, Vec<Vec<usize>>> = IndexMap::new();
    let mut class_of: HashMap<String, BTreeMap<Vec<usize>, usize>> = HashMap::new();
    for s in &ssig.sorts {
        let img = &f.sorts[s];
        let xs = numbered("x", &img.sorts);
        let ys = numbered("y", &img.sorts);
        let dom = m.extension(&xs, &img.domain.apply_vars(&xs)?)?;
        let e = f.eq_image(s, &xs, &ys)?;
        let related = |a: &[usize], b: &[usize]| -> Result<bool, TranslationError> {
            let mut env: Assignment = xs.iter().cloned().zip(a.iter().copied()).collect();
            env.extend(ys.iter().cloned().zip(b.iter().copied()));
            Ok(m.eval(&e, &mut env)?)
        };
        let n = dom.len();
        let mut rel = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                rel[i][j] = related(&dom[i], &dom[j])?;
            }
        }
        for i in 0..n {
            if !rel[i][i] {
                return Err(TranslationError::NotEquivalence(format!("image of equality on {s} is not reflexive")));
            }
            for j in 0..n {
                if rel[i][j] != rel[j][i] {
                    return Err(TranslationError::NotEquivalence(format!("image of equality on {s} is not symmetric")));
                }
                for k in 0..n {
                    if rel[i][j] && rel[j][k] && !rel[i][k] {
                        return Err(TranslationError::NotEquivalence(format!(
                            "image of equality on {s} is not transitive"
                        )));
                    }
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut index = BTreeMap::new();
        for i in 0..n {
            if let Some(&c) = (0..i).find(|&j| rel[i][j]).and_then(|j| index.get(&dom[j])) {
                index.insert(dom[i].clone(), c);
            } else {
                index.insert(dom[i].clone(), classes.len());
                classes.push(dom[i].clone());
            }
        }
        let labels = classes
            .iter()
            .map(|t| {
                let ls: Vec<&str> = t.iter().zip(&img.sorts).map(|(i, s)| m.label(s, *i)).collect();
                if ls.len() == 1 {
                    ls[0].to_string()
                } else {
                    format!("({})", ls.join(","))
                }
            })
            .collect();
        out.carriers.insert(s.clone(), labels);
        reps.insert(s.clone(), classes);
        class_of.insert(s.clone(), index);
    }
    let concat = |sorts: &[String], t: &[usize]| -> Vec<usize> {
        t.iter().zip(sorts).flat_map(|(i, s)| reps[s][*i].clone()).collect()
    };
    for (r, dom) in &ssig.relations {
        let class = &f.relations[r];
        let table = out.relations.get_mut(r).expect("initialised");
        for t in tuples(&dom.iter().map(|s| reps[s].len()).collect::<Vec<_>>()) {
            let mut env: Assignment = class.context.iter().cloned().zip(concat(dom, &t)).collect();
            if m.eval(&class.formula, &mut env)? {
                table.insert(t);
            }
        }
    }
    for (name, fs) in &ssig.functions {
        let class = &f.functions[name];
        let cod_img = f.image_sorts(&fs.codomain)?;
        let table = out.functions.get_mut(name).expect("initialised");
        for t in tuples(&fs.domain.iter().map(|s| reps[s].len()).collect::<Vec<_>>()) {
            let args = concat(&fs.domain, &t);
            let mut hits = BTreeSet::new();
            for y in tuples(&m.sizes(cod_img)) {
                let Some(&c) = class_of[&fs.codomain].get(&y) else {
                    continue;
                };
                let vals: Vec<usize> = args.iter().copied().chain(y.iter().copied()).collect();
                let mut env: Assignment = class.context.iter().cloned().zip(vals).collect();
                if m.eval(&class.formula, &mut env)? {
                    hits.insert(c);
                }
            }
            match hits.len() {
                1 => {
                    table.insert(t, *hits.iter().next().expect("one hit"));
                }
                0 => return Err(TranslationError::NotEquivalence(format!("image of {name} is not total"))),
                _ => return Err(TranslationError::NotEquivalence(format!("image of {name} is not single-valued"))),
            }
        }
    }
    Ok(out)
}

fn typed_params(def: &RawDef, sorts: &[String], what: &str) -> Result<Vec<Var>, TranslationError> {
    if def.params.len() != sorts.len() {
        return Err(TranslationError::IllFormed(format!(
            "{what} takes {} parameters, found {}",
            sorts.len(),
            def.params.len()
        )));
    }
    Ok(def.params.iter().zip(sorts).map(|(p, s)| Var::new(p.clone(), s.clone())).collect())
}

fn elaborate_def(target: &Theory, def: &RawDef, ctx: Vec<Var>) -> Result<SubstitutionClass, TranslationError> {
    let f = elaborate_formula(&target.signature, &def.body, &ctx, target.mode == Mode::Classical)?;
    Ok(SubstitutionClass::new(ctx, f))
}

/// Build a reconstrual from its DSL form. Symbols without an entry go to the
/// target symbol of the same name, equality goes to componentwise equality
/// and domains default to `top`.
pub fn elaborate_translation(raw: &RawTranslation, source: &Theory, target: &Theory) -> Result<Reconstrual, TranslationError> {
    let ssig = &source.signature;
    let tsig = &target.signature;
    let mut r = Reconstrual {
        name: raw.name.clone(),
        source: source.clone(),
        target: target.clone(),
        sorts: IndexMap::new(),
        relations: IndexMap::new(),
        functions: IndexMap::new(),
        equality: IndexMap::new(),
    };
    for e in &raw.entries {
        if let RawTrEntry::Sort { sort, image, domain, .. } = e {
            ssig.require_sort(sort)?;
            for t in image {
                tsig.require_sort(t)?;
            }
            let d = match domain {
                Some(def) => elaborate_def(target, def, typed_params(def, image, &format!("domain of {sort}"))?)?,
                None => SubstitutionClass::new(numbered("x", image), Formula::Top),
            };
            r.sorts.insert(sort.clone(), SortImage { sorts: image.clone(), domain: d });
        }
    }
    for s in &ssig.sorts {
        if !r.sorts.contains_key(s) {
            if !tsig.has_sort(s) {
                return Err(TranslationError::Unmapped(s.clone()));
            }
            r.sorts.insert(
                s.clone(),
                SortImage {
                    sorts: vec![s.clone()],
                    domain: SubstitutionClass::new(numbered("x", &[s.clone()]), Formula::Top),
                },
            );
        }
    }
    let mut order = IndexMap::new();
    for s in &ssig.sorts {
        order.insert(s.clone(), r.sorts.shift_remove(s).expect("sort image present"));
    }
    r.sorts = order;
    for e in &raw.entries {
        match e {
            RawTrEntry::Sort { .. } => {}
            RawTrEntry::Rel(name, def) => {
                let dom = ssig
                    .relations
                    .get(name)
                    .ok_or_else(|| SyntaxError::UnknownRelation(name.clone()))?;
                let ctx = typed_params(def, &r.image_of_list(dom)?, name)?;
                r.relations.insert(name.clone(), elaborate_def(target, def, ctx)?);
            }
            RawTrEntry::Fun(name, def) => {
                let fs = ssig
                    .functions
                    .get(name)
                    .ok_or_else(|| SyntaxError::UnknownFunction(name.clone()))?;
                let mut sorts = r.image_of_list(&fs.domain)?;
                sorts.extend(r.image_sorts(&fs.codomain)?.iter().cloned());
                let ctx = typed_params(def, &sorts, name)?;
                r.functions.insert(name.clone(), elaborate_def(target, def, ctx)?);
            }
            RawTrEntry::Eq(sort, def) => {
                ssig.require_sort(sort)?;
                let img = r.image_sorts(sort)?;
                let sorts: Vec<String> = img.iter().chain(img).cloned().collect();
                let ctx = typed_params(def, &sorts, &format!("equality on {sort}"))?;
                r.equality.insert(sort.clone(), elaborate_def(target, def, ctx)?);
            }
        }
    }
    let defaults = Reconstrual::identity(source);
    for s in &ssig.sorts {
        if !r.equality.contains_key(s) {
            let img = r.image_sorts(s)?.to_vec();
            let xs = numbered("x", &img);
            let ys = numbered("y", &img);
            let ctx: Vec<Var> = xs.iter().chain(&ys).cloned().collect();
            r.equality.insert(s.clone(), SubstitutionClass::new(ctx, Formula::vars_equal(&xs, &ys)));
        }
    }
    for (name, dom) in &ssig.relations {
        if !r.relations.contains_key(name) {
            let want = r.image_of_list(dom)?;
            if tsig.relations.get(name) != Some(&want) {
                return Err(TranslationError::Unmapped(name.clone()));
            }
            r.relations.insert(name.clone(), defaults.relations[name].clone());
        }
    }
    for (name, fs) in &ssig.functions {
        if !r.functions.contains_key(name) {
            let dom = r.image_of_list(&fs.domain)?;
            let cod = r.image_sorts(&fs.codomain)?;
            let ok = tsig
                .functions
                .get(name)
                .is_some_and(|g| g.domain == dom && cod.len() == 1 && g.codomain == cod[0]);
            if !ok {
                return Err(TranslationError::Unmapped(name.clone()));
            }
            r.functions.insert(name.clone(), defaults.functions[name].clone());
        }
    }
    r.check()?;
    Ok(r)
}

/// Elaborate a t-map between two already resolved reconstruals.
pub fn elaborate_tmap(raw: &RawTMap, from: &Reconstrual, to: &Reconstrual) -> Result<TMap, TranslationError> {
    let target = &from.target;
    let mut components = IndexMap::new();
    for c in &raw.components {
        let fs = from.image_sorts(&c.sort)?;
        let gs = to.image_sorts(&c.sort)?;
        if c.left.len() != fs.len() || c.right.len() != gs.len() {
            return Err(TranslationError::IllFormed(format!(
                "component {} expects {}|{} variables",
                c.sort,
                fs.len(),
                gs.len()
            )));
        }
        let ctx: Vec<Var> = c
            .left
            .iter()
            .zip(fs)
            .chain(c.right.iter().zip(gs))
            .map(|(n, s)| Var::new(n.clone(), s.clone()))
            .collect();
        let f = elaborate_formula(&target.signature, &c.body, &ctx, target.mode == Mode::Classical)?;
        components.insert(c.sort.clone(), SubstitutionClass::new(ctx, f));
    }
    let mut checks = Vec::new();
    for def in &raw.checks {
        let src = &from.source;
        let f = elaborate_formula(&src.signature, &def.body, &[], src.mode == Mode::Classical)?;
        let free = f.free_context();
        let mut ctx = Vec::new();
        for p in &def.params {
            let v = free
                .iter()
                .find(|v| &v.name == p)
                .ok_or_else(|| TranslationError::IllFormed(format!("check {} does not mention {p}", def.label)))?;
            ctx.push(v.clone());
        }
        if free.len() != ctx.len() {
            return Err(TranslationError::IllFormed(format!("check {} has undeclared free variables", def.label)));
        }
        checks.push(SubstitutionClass::new(ctx, f));
    }
    let chi = TMap {
        name: raw.name.clone(),
        from: from.clone(),
        to: to.clone(),
        components,
        iso: raw.iso,
        checks,
    };
    chi.check_endpoints()?;
    Ok(chi)
}

/// Render a reconstrual in the translation DSL.
pub fn render_reconstrual(f: &Reconstrual) -> String {
    let mut out = format!("translation {} : {} -> {} {{\n", f.name, f.source.name, f.target.name);
    for (s, img) in &f.sorts {
        out.push_str(&format!(
            "  sort {s} => ({}) with D{} := {}\n",
            img.sorts.join(", "),
            params(&img.domain.context),
            print::formula(&img.domain.formula)
        ));
    }
    for (r, c) in &f.relations {
        out.push_str(&format!("  rel {r} => F{} := {}\n", params(&c.context), print::formula(&c.formula)));
    }
    for (n, c) in &f.functions {
        out.push_str(&format!("  fun {n} => F{} := {}\n", params(&c.context), print::formula(&c.formula)));
    }
    for (s, c) in &f.equality {
        out.push_str(&format!("  eq {s} => E{} := {}\n", params(&c.context), print::formula(&c.formula)));
    }
    out.push_str("}\n");
    out
}

fn params(ctx: &[Var]) -> String {
    format!("({})", ctx.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_document, parse_formula, parse_theory, RawItem};
    use crate::syntax::alpha_equal_in;

    const EQ: &str = include_str!("../fixtures/eq.th");
    const EQD: &str = include_str!("../fixtures/eqd.th");
    const P2: &str = include_str!("../fixtures/p2.th");

    fn translation(src: &Theory, tgt: &Theory, text: &str) -> Reconstrual {
        let items = parse_document(text).unwrap();
        let RawItem::Translation(raw) = &items[0] else { panic!("not a translation") };
        elaborate_translation(raw, src, tgt).unwrap()
    }

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn identity_image() {
        let eq = parse_theory(EQ).unwrap();
        let id = Reconstrual::identity(&eq);
        let phi = parse_formula(&eq.signature, "A(x,y)", &[]).unwrap();
        assert_eq!(id.apply(&phi).unwrap(), phi);
    }

    #[test]
    fn swap_image() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { rel A => F(x, y) := A(y, x) }");
        let phi = parse_formula(&eq.signature, "A(x,y) & A(y,z)", &[]).unwrap();
        let want = parse_formula(&eq.signature, "A(y,x) & A(z,y)", &[]).unwrap();
        assert_eq!(f.apply(&phi).unwrap(), want);
    }

    #[test]
    fn empty_sort_image() {
        let eq = parse_theory(EQ).unwrap();
        let p2 = parse_theory(P2).unwrap();
        let f = translation(&eq, &p2, "translation F : EQ -> P2 { sort s => () rel A => F() := top }");
        let phi = parse_formula(&eq.signature, "exists x:s . top", &[]).unwrap();
        assert_eq!(f.apply(&phi).unwrap(), Formula::Top);
    }

    #[test]
    fn identity_verifies_strongly() {
        let eq = parse_theory(EQ).unwrap();
        let t = verify_translation(&Reconstrual::identity(&eq), budget());
        assert_eq!(t.is_translation, Verdict::Proved, "{}", t.report.to_text());
        assert_eq!(t.is_equality_preserving, Verdict::Proved);
        assert_eq!(t.is_strong, Verdict::Proved);
    }

    #[test]
    fn top_image_is_a_translation() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { rel A => F(x, y) := top }");
        let t = verify_translation(&f, budget());
        assert_eq!(t.report.verdict_of("axiom:"), Verdict::Proved);
        assert_eq!(t.is_translation, Verdict::Proved);
    }

    #[test]
    fn propositional_swap_fails() {
        let p2 = parse_theory(P2).unwrap();
        let f = translation(&p2, &p2, "translation F : P2 -> P2 { rel P => F() := Q  rel Q => G() := P }");
        let t = verify_translation(&f, budget());
        assert_eq!(t.is_translation, Verdict::Failed);
        let ob = t.report.get("axiom:pq").unwrap();
        let (m, _) = ob.countermodel().unwrap();
        assert!(!m.relations["P"].contains(&vec![]));
        assert!(m.relations["Q"].contains(&vec![]));
    }

    #[test]
    fn composition_with_identity() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { rel A => F(x, y) := A(y, x) }");
        let id = Reconstrual::identity(&eq);
        for c in [compose_translations(&id, &f).unwrap(), compose_translations(&f, &id).unwrap()] {
            let (a, b) = (&c.relations["A"], &f.relations["A"]);
            assert!(alpha_equal_in(&a.formula, &a.context, &b.formula, &b.context));
        }
    }

    #[test]
    fn trivial_tmap_on_identity() {
        let eq = parse_theory(EQ).unwrap();
        let id = Reconstrual::identity(&eq);
        let chi = TMap::trivial("chi", &id, &id, true).unwrap();
        assert_eq!(verify_tmap(&chi, true, budget()).unwrap().verdict(), Verdict::Proved);
    }

    #[test]
    fn swap_is_not_naturally_the_identity_without_symmetry() {
        let eqd = parse_theory(EQD).unwrap();
        let f = translation(&eqd, &eqd, "translation F : EQD -> EQD { rel A => F(x, y) := A(y, x) }");
        let id = Reconstrual::identity(&eqd);
        let chi = TMap::trivial("chi", &f, &id, false).unwrap();
        let r = verify_tmap(&chi, true, budget()).unwrap();
        let ob = r.get("naturality:A").unwrap();
        assert_eq!(ob.verdict, Verdict::Failed, "{}", r.to_text());
        let (m, _) = ob.countermodel().unwrap();
        assert!(m.size("s") <= 2);
    }

    #[test]
    fn pullback_along_identity() {
        let eq = parse_theory(EQ).unwrap();
        let mut m = FiniteModel::with_sizes(&eq.signature, &[2]);
        m.relations.get_mut("A").unwrap().extend([vec![0, 0], vec![1, 1]]);
        let back = pullback_model(&Reconstrual::identity(&eq), &m).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn pullback_of_top_is_total() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { rel A => F(x, y) := top }");
        let mut m = FiniteModel::with_sizes(&eq.signature, &[2]);
        m.relations.get_mut("A").unwrap().extend([vec![0, 0], vec![1, 1]]);
        let back = pullback_model(&f, &m).unwrap();
        assert_eq!(back.relations["A"].len(), 4);
    }

    #[test]
    fn pullback_quotients_by_image_of_equality() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { eq s => E(x, y) := A(x, y) }");
        let mut m = FiniteModel::with_sizes(&eq.signature, &[3]);
        m.relations
            .get_mut("A")
            .unwrap()
            .extend([vec![0, 0], vec![1, 1], vec![2, 2], vec![0, 1], vec![1, 0]]);
        let back = pullback_model(&f, &m).unwrap();
        assert_eq!(back.carriers["s"], vec!["0".to_string(), "2".to_string()]);
        assert!(crate::model::check_model(&back, &eq).unwrap().ok);
    }
}
