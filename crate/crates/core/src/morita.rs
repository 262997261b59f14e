//! Morita and definitional extensions: the defining sequents of each sort
//! schema, recognition of extensions, the quotient retraction, bounded exact
//! completion, proper realizations and coproduct elimination.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::enumerate::formulas_mentioning_all;
use crate::model::{tuples, Assignment, FiniteModel, ModelError};
use crate::parse::{elaborate_formula, ParseError, RawClass, RawDef, RawExtSpec, RawExtend};
use crate::print;
use crate::prover::{prove_sequent, Budget, ProofResult};
use crate::report::{discharge, discharge_all, Goal, Obligation, Verdict, VerificationReport};
use crate::syntax::{
    alpha_equal_in, Axiom, Formula, Mode, Sequent, Signature, SubstitutionClass, SyntaxError, Term, Theory,
    Var,
};
use crate::translation::{
    verify_homotopy_equivalence, verify_translation, Reconstrual, SortImage, TMap, Translation, TranslationError,
};

#[derive(Debug, Error)]
pub enum MoritaError {
    #[error("name {0} is already in use")]
    NameClash(String),
    #[error("bad extension: {0}")]
    BadSpec(String),
    #[error("{0}")]
    NotApplicable(String),
    #[error("obligation {name} is {verdict}")]
    Unproved { name: String, verdict: Verdict },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Translation(#[from] TranslationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One extension step. Names left as `None` are derived from a hash of the
/// defining data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExtensionSpec {
    Product {
        sorts: Vec<String>,
        name: Option<String>,
        maps: Vec<String>,
    },
    Terminal {
        name: Option<String>,
    },
    Coproduct {
        sorts: Vec<String>,
        name: Option<String>,
        maps: Vec<String>,
    },
    Subsort {
        base: String,
        class: SubstitutionClass,
        name: Option<String>,
        map: Option<String>,
    },
    Quotient {
        base: String,
        class: SubstitutionClass,
        name: Option<String>,
        map: Option<String>,
    },
    DefineRel {
        name: String,
        class: SubstitutionClass,
    },
    /// The class is read over the domain followed by the codomain.
    DefineFun {
        name: String,
        class: SubstitutionClass,
    },
}

impl ExtensionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExtensionSpec::Product { .. } => "product",
            ExtensionSpec::Terminal { .. } => "terminal",
            ExtensionSpec::Coproduct { .. } => "coproduct",
            ExtensionSpec::Subsort { .. } => "subsort",
            ExtensionSpec::Quotient { .. } => "quotient",
            ExtensionSpec::DefineRel { .. } => "definitional relation",
            ExtensionSpec::DefineFun { .. } => "definitional function",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ExtensionSpec::Product { sorts, name, .. } => {
                format!("{} = product ({})", name.as_deref().unwrap_or("?"), sorts.join(", "))
            }
            ExtensionSpec::Terminal { name } => format!("{} = terminal", name.as_deref().unwrap_or("?")),
            ExtensionSpec::Coproduct { sorts, name, .. } => {
                format!("{} = coproduct ({})", name.as_deref().unwrap_or("?"), sorts.join(", "))
            }
            ExtensionSpec::Subsort { base, class, name, .. } => format!(
                "{} = subsort of {base} by {}",
                name.as_deref().unwrap_or("?"),
                print::class(&class.context, &class.formula)
            ),
            ExtensionSpec::Quotient { base, class, name, .. } => format!(
                "{} = quotient of {base} by {}",
                name.as_deref().unwrap_or("?"),
                print::class(&class.context, &class.formula)
            ),
            ExtensionSpec::DefineRel { name, class } | ExtensionSpec::DefineFun { name, class } => {
                format!("{name} := {}", print::class(&class.context, &class.formula))
            }
        }
    }
}

/// An obligation to be discharged in the theory reached before the step
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StagedObligation {
    pub stage: usize,
    pub name: String,
    pub sequent: Sequent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionResult {
    pub base: Theory,
    pub theory: Theory,
    /// Specs with every name resolved, in application order.
    pub specs: Vec<ExtensionSpec>,
    /// `stages[i]` is the theory before step `i`; the last entry is `theory`.
    pub stages: Vec<Theory>,
    pub definitions: Vec<Axiom>,
    pub obligations: Vec<StagedObligation>,
}

impl ExtensionResult {
    pub fn empty(t: &Theory) -> Self {
        ExtensionResult {
            base: t.clone(),
            theory: t.clone(),
            specs: Vec::new(),
            stages: vec![t.clone()],
            definitions: Vec::new(),
            obligations: Vec::new(),
        }
    }

    /// Discharge the admissibility obligations, each in its own stage.
    pub fn discharge(&self, b: Budget) -> VerificationReport {
        let mut report = VerificationReport::new(format!("admissibility {} -> {}", self.base.name, self.theory.name));
        for (i, stage) in self.stages.iter().enumerate() {
            let goals: Vec<Goal> = self
                .obligations
                .iter()
                .filter(|o| o.stage == i)
                .map(|o| Goal::new(o.name.clone(), o.sequent.clone()))
                .collect();
            for o in discharge_all(stage, &goals, b) {
                report.push(o);
            }
        }
        report
    }

    /// The steps, defining sequents and obligations, one per line.
    pub fn render(&self) -> String {
        let mut out = format!("extension {} -> {}\n", self.base.name, self.theory.name);
        for s in &self.specs {
            out.push_str(&format!("step {}: {}\n", s.kind(), s.describe()));
        }
        for d in &self.definitions {
            out.push_str(&format!("def {} : {}\n", d.name, print::sequent(&d.sequent)));
        }
        for o in &self.obligations {
            out.push_str(&format!("obligation {} at stage {} : {}\n", o.name, o.stage, print::sequent(&o.sequent)));
        }
        out
    }

    pub fn new_sorts(&self) -> Vec<String> {
        self.theory
            .signature
            .sorts
            .iter()
            .filter(|s| !self.base.signature.has_sort(s))
            .cloned()
            .collect()
    }
}

fn hash_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn name_taken(sig: &Signature, n: &str) -> bool {
    sig.has_sort(n) || sig.relations.contains_key(n) || sig.functions.contains_key(n)
}

/// A name `prefix` + hash digits of `encoding`, lengthened until fresh.
fn derived_name(sig: &Signature, prefix: &str, encoding: &str, taken: &BTreeSet<String>) -> String {
    let h = hash_hex(encoding);
    for len in 6..=h.len() {
        let n = format!("{prefix}{}", &h[..len]);
        if !name_taken(sig, &n) && !taken.contains(&n) {
            return n;
        }
    }
    let mut k = 0;
    loop {
        let n = format!("{prefix}{h}_{k}");
        if !name_taken(sig, &n) && !taken.contains(&n) {
            return n;
        }
        k += 1;
    }
}

fn canonical_text(c: &SubstitutionClass) -> String {
    let c = c.canonical();
    print::class(&c.context, &c.formula)
}

fn app(f: &str, args: &[Term], sort: &str) -> Term {
    Term::App {
        fun: f.to_string(),
        args: args.to_vec(),
        sort: sort.to_string(),
    }
}

fn v(name: &str, sort: &str) -> Var {
    Var::new(name, sort)
}

fn eq(a: Term, b: Term) -> Formula {
    Formula::eq(a, b)
}

/// The defining sequents of a coproduct `maps : sorts -> name`.
pub fn coproduct_sequents(name: &str, sorts: &[String], maps: &[String]) -> Vec<(String, Sequent)> {
    let z = v("z", name);
    let mut out = Vec::new();
    let cover = Formula::disj(sorts.iter().zip(maps).enumerate().map(|(i, (s, m))| {
        let x = v(&format!("x{}", i + 1), s);
        Formula::exists(x.clone(), eq(z.term(), app(m, &[x.term()], name)))
    }));
    out.push((format!("{name}:cover"), Sequent::fact(cover)));
    for (i, (s, m)) in sorts.iter().zip(maps).enumerate() {
        let (x, w) = (v("x", s), v("w", s));
        out.push((
            format!("{name}:injective{}", i + 1),
            Sequent::new(vec![eq(app(m, &[x.term()], name), app(m, &[w.term()], name))], eq(x.term(), w.term())),
        ));
    }
    let mut clashes = Vec::new();
    for i in 0..sorts.len() {
        for j in i + 1..sorts.len() {
            let xi = v(&format!("x{}", i + 1), &sorts[i]);
            let xj = v(&format!("x{}", j + 1), &sorts[j]);
            clashes.push(eq(app(&maps[i], &[xi.term()], name), app(&maps[j], &[xj.term()], name)));
        }
    }
    out.push((format!("{name}:disjoint"), Sequent::new(vec![Formula::disj(clashes)], Formula::Bot)));
    out
}

fn check_class(t: &Theory, class: &SubstitutionClass, sorts: &[String], what: &str) -> Result<(), MoritaError> {
    if class.sorts() != sorts {
        return Err(MoritaError::BadSpec(format!(
            "{what} must be read over ({}), found ({})",
            sorts.join(", "),
            class.sorts().join(", ")
        )));
    }
    t.signature.check_formula(&class.formula, t.mode == Mode::Classical)?;
    for w in class.formula.free_context() {
        if !class.context.contains(&w) {
            return Err(MoritaError::BadSpec(format!("{what} mentions {} outside its context", w.name)));
        }
    }
    Ok(())
}

/// Apply one extension step: add the new symbols and their defining
/// sequents, and list the admissibility obligations (over the old
/// signature).
pub fn extend_morita(t: &Theory, spec: &ExtensionSpec) -> Result<ExtensionResult, MoritaError> {
    let sig = &t.signature;
    let mut taken = BTreeSet::new();
    let fresh = |given: &Option<String>, prefix: &str, enc: &str, taken: &mut BTreeSet<String>| -> Result<String, MoritaError> {
        let n = match given {
            Some(n) => {
                if name_taken(sig, n) || taken.contains(n) {
                    return Err(MoritaError::NameClash(n.clone()));
                }
                n.clone()
            }
            None => derived_name(sig, prefix, enc, taken),
        };
        taken.insert(n.clone());
        Ok(n)
    };
    let mut out = t.clone();
    let mut defs: Vec<(String, Sequent)> = Vec::new();
    let mut obligations: Vec<(String, Sequent)> = Vec::new();
    let resolved: ExtensionSpec;
    match spec {
        ExtensionSpec::Product { sorts, name, maps } => {
            for s in sorts {
                sig.require_sort(s)?;
            }
            if !maps.is_empty() && maps.len() != sorts.len() {
                return Err(MoritaError::BadSpec("one projection per factor".into()));
            }
            let enc = format!("product|{}", sorts.join(","));
            let n = fresh(name, "P", &enc, &mut taken)?;
            let mut ms = Vec::new();
            for (i, s) in sorts.iter().enumerate() {
                let m = fresh(&maps.get(i).cloned(), &format!("pi{}_", i + 1), &format!("{enc}|{n}|{i}"), &mut taken)?;
                let _ = s;
                ms.push(m);
            }
            out.signature.add_sort(n.clone())?;
            for (m, s) in ms.iter().zip(sorts) {
                out.signature.add_function(m.clone(), vec![n.clone()], s.clone())?;
            }
            let z = v("z", &n);
            let xs: Vec<Var> = sorts.iter().enumerate().map(|(i, s)| v(&format!("x{}", i + 1), s)).collect();
            let body = Formula::conj(ms.iter().zip(&xs).map(|(m, x)| eq(app(m, &[z.term()], &x.sort), x.term())));
            defs.push((format!("{n}:exists"), Sequent::fact(Formula::exists(z, body))));
            let (x, y) = (v("x", &n), v("y", &n));
            let ante = ms
                .iter()
                .zip(sorts)
                .map(|(m, s)| eq(app(m, &[x.term()], s), app(m, &[y.term()], s)))
                .collect();
            defs.push((format!("{n}:extensional"), Sequent::new(ante, eq(x.term(), y.term()))));
            resolved = ExtensionSpec::Product {
                sorts: sorts.clone(),
                name: Some(n),
                maps: ms,
            };
        }
        ExtensionSpec::Terminal { name } => {
            let n = fresh(name, "One", "terminal", &mut taken)?;
            out.signature.add_sort(n.clone())?;
            let (x, y) = (v("x", &n), v("y", &n));
            defs.push((format!("{n}:inhabited"), Sequent::fact(Formula::exists(x.clone(), eq(x.term(), x.term())))));
            defs.push((format!("{n}:single"), Sequent::fact(eq(x.term(), y.term()))));
            resolved = ExtensionSpec::Terminal { name: Some(n) };
        }
        ExtensionSpec::Coproduct { sorts, name, maps } => {
            for s in sorts {
                sig.require_sort(s)?;
            }
            if !maps.is_empty() && maps.len() != sorts.len() {
                return Err(MoritaError::BadSpec("one injection per summand".into()));
            }
            let enc = format!("coproduct|{}", sorts.join(","));
            let n = fresh(name, "C", &enc, &mut taken)?;
            let mut ms = Vec::new();
            for i in 0..sorts.len() {
                ms.push(fresh(&maps.get(i).cloned(), &format!("rho{}_", i + 1), &format!("{enc}|{n}|{i}"), &mut taken)?);
            }
            out.signature.add_sort(n.clone())?;
            for (m, s) in ms.iter().zip(sorts) {
                out.signature.add_function(m.clone(), vec![s.clone()], n.clone())?;
            }
            defs.extend(coproduct_sequents(&n, sorts, &ms));
            resolved = ExtensionSpec::Coproduct {
                sorts: sorts.clone(),
                name: Some(n),
                maps: ms,
            };
        }
        ExtensionSpec::Subsort { base, class, name, map } => {
            sig.require_sort(base)?;
            check_class(t, class, std::slice::from_ref(base), "subsort class")?;
            let enc = format!("subsort|{base}|{}", canonical_text(class));
            let n = fresh(name, "S", &enc, &mut taken)?;
            let m = fresh(map, "i", &format!("{enc}|{n}"), &mut taken)?;
            out.signature.add_sort(n.clone())?;
            out.signature.add_function(m.clone(), vec![n.clone()], base.clone())?;
            let x = v("x", base);
            let y = v("y", &n);
            let phi = class.apply_vars(std::slice::from_ref(&x))?;
            let image = Formula::exists(y.clone(), eq(app(&m, &[y.term()], base), x.term()));
            defs.push((format!("{n}:image"), Sequent::new(vec![phi.clone()], image.clone())));
            defs.push((format!("{n}:image-converse"), Sequent::new(vec![image], phi)));
            let (a, c) = (v("x", &n), v("z", &n));
            defs.push((
                format!("{n}:injective"),
                Sequent::new(vec![eq(app(&m, &[a.term()], base), app(&m, &[c.term()], base))], eq(a.term(), c.term())),
            ));
            resolved = ExtensionSpec::Subsort {
                base: base.clone(),
                class: class.clone(),
                name: Some(n),
                map: Some(m),
            };
        }
        ExtensionSpec::Quotient { base, class, name, map } => {
            sig.require_sort(base)?;
            check_class(t, class, &[base.clone(), base.clone()], "quotient class")?;
            let enc = format!("quotient|{base}|{}", canonical_text(class));
            let n = fresh(name, "Q", &enc, &mut taken)?;
            let m = fresh(map, "q", &format!("{enc}|{n}"), &mut taken)?;
            out.signature.add_sort(n.clone())?;
            out.signature.add_function(m.clone(), vec![base.clone()], n.clone())?;
            let (x, y, w) = (v("x", base), v("y", base), v("w", base));
            let z = v("z", &n);
            let phi = |a: &Var, b: &Var| class.apply_vars(&[a.clone(), b.clone()]);
            defs.push((
                format!("{n}:surjective"),
                Sequent::fact(Formula::exists(x.clone(), eq(app(&m, &[x.term()], &n), z.term()))),
            ));
            let kernel = eq(app(&m, &[x.term()], &n), app(&m, &[y.term()], &n));
            defs.push((format!("{n}:kernel"), Sequent::new(vec![kernel.clone()], phi(&x, &y)?)));
            defs.push((format!("{n}:kernel-converse"), Sequent::new(vec![phi(&x, &y)?], kernel)));
            obligations.push((format!("{n}:refl"), Sequent::fact(phi(&x, &x)?)));
            obligations.push((format!("{n}:symm"), Sequent::new(vec![phi(&x, &y)?], phi(&y, &x)?)));
            obligations.push((format!("{n}:trans"), Sequent::new(vec![phi(&x, &y)?, phi(&y, &w)?], phi(&x, &w)?)));
            resolved = ExtensionSpec::Quotient {
                base: base.clone(),
                class: class.clone(),
                name: Some(n),
                map: Some(m),
            };
        }
        ExtensionSpec::DefineRel { name, class } => {
            fresh(&Some(name.clone()), "", "", &mut taken)?;
            for s in class.sorts() {
                sig.require_sort(&s)?;
            }
            check_class(t, class, &class.sorts(), "definition")?;
            out.signature.add_relation(name.clone(), class.sorts())?;
            let ctx = class.canonical().context;
            let atom = Formula::rel(name.clone(), ctx.iter().map(Var::term).collect());
            let phi = class.apply_vars(&ctx)?;
            defs.push((format!("{name}:def"), Sequent::new(vec![atom.clone()], phi.clone())));
            defs.push((format!("{name}:def-converse"), Sequent::new(vec![phi], atom)));
            resolved = spec.clone();
        }
        ExtensionSpec::DefineFun { name, class } => {
            fresh(&Some(name.clone()), "", "", &mut taken)?;
            let sorts = class.sorts();
            let Some((cod, dom)) = sorts.split_last() else {
                return Err(MoritaError::BadSpec(format!("definition of {name} needs an output variable")));
            };
            for s in &sorts {
                sig.require_sort(s)?;
            }
            check_class(t, class, &sorts, "definition")?;
            out.signature.add_function(name.clone(), dom.to_vec(), cod.clone())?;
            let ctx = class.canonical().context;
            let (xs, y) = ctx.split_at(dom.len());
            let y = &y[0];
            let args: Vec<Term> = xs.iter().map(Var::term).collect();
            let graph = eq(app(name, &args, cod), y.term());
            let phi = class.apply_vars(&ctx)?;
            defs.push((format!("{name}:def"), Sequent::new(vec![graph.clone()], phi.clone())));
            defs.push((format!("{name}:def-converse"), Sequent::new(vec![phi.clone()], graph)));
            obligations.push((format!("{name}:total"), Sequent::fact(Formula::exists(y.clone(), phi.clone()))));
            let y2 = Var::new(format!("{}'", y.name), cod.clone());
            let mut ctx2 = xs.to_vec();
            ctx2.push(y2.clone());
            obligations.push((
                format!("{name}:functional"),
                Sequent::new(vec![phi, class.apply_vars(&ctx2)?], eq(y.term(), y2.term())),
            ));
            resolved = spec.clone();
        }
    }
    for (n, s) in &defs {
        out.add_axiom(n.clone(), s.clone())?;
    }
    Ok(ExtensionResult {
        base: t.clone(),
        theory: out.clone(),
        specs: vec![resolved],
        stages: vec![t.clone(), out],
        definitions: defs.into_iter().map(|(name, sequent)| Axiom { name, sequent }).collect(),
        obligations: obligations
            .into_iter()
            .map(|(name, sequent)| StagedObligation { stage: 0, name, sequent })
            .collect(),
    })
}

/// Apply several steps in order; the final theory is renamed to `name`.
pub fn extend_chain(t: &Theory, specs: &[ExtensionSpec], name: &str) -> Result<ExtensionResult, MoritaError> {
    let mut acc = ExtensionResult::empty(t);
    for spec in specs {
        let step = extend_morita(&acc.theory, spec)?;
        acc = acc.then(step);
    }
    acc.theory.name = name.to_string();
    if let Some(last) = acc.stages.last_mut() {
        last.name = name.to_string();
    }
    Ok(acc)
}

impl ExtensionResult {
    /// Append a step taken from this result's theory.
    pub fn then(mut self, step: ExtensionResult) -> ExtensionResult {
        let offset = self.stages.len() - 1;
        self.stages.pop();
        self.stages.extend(step.stages);
        self.specs.extend(step.specs);
        self.definitions.extend(step.definitions);
        self.obligations.extend(step.obligations.into_iter().map(|mut o| {
            o.stage += offset;
            o
        }));
        self.theory = step.theory;
        self
    }
}

/// Elaborate an `extend` item against its base theory.
pub fn elaborate_extend(raw: &RawExtend, base: &Theory) -> Result<ExtensionResult, MoritaError> {
    let mut acc = ExtensionResult::empty(base);
    for (spec, _) in &raw.specs {
        let t = &acc.theory;
        let resolved = match spec {
            RawExtSpec::Product { sorts, name, maps } => ExtensionSpec::Product {
                sorts: sorts.clone(),
                name: name.clone(),
                maps: maps.clone(),
            },
            RawExtSpec::Terminal { name } => ExtensionSpec::Terminal { name: name.clone() },
            RawExtSpec::Coproduct { sorts, name, maps } => ExtensionSpec::Coproduct {
                sorts: sorts.clone(),
                name: name.clone(),
                maps: maps.clone(),
            },
            RawExtSpec::Subsort { base, class, name, map } => ExtensionSpec::Subsort {
                base: base.clone(),
                class: raw_class(t, class, &[base.clone()])?,
                name: name.clone(),
                map: map.clone(),
            },
            RawExtSpec::Quotient { base, class, name, map } => ExtensionSpec::Quotient {
                base: base.clone(),
                class: raw_class(t, class, &[base.clone(), base.clone()])?,
                name: name.clone(),
                map: map.clone(),
            },
            RawExtSpec::DefineRel { name, def } => ExtensionSpec::DefineRel {
                name: name.clone(),
                class: raw_def_class(t, def)?,
            },
            RawExtSpec::DefineFun { name, def } => ExtensionSpec::DefineFun {
                name: name.clone(),
                class: raw_def_class(t, def)?,
            },
        };
        let step = extend_morita(&acc.theory, &resolved)?;
        acc = acc.then(step);
    }
    acc.theory.name = raw.into.clone();
    if let Some(last) = acc.stages.last_mut() {
        last.name = raw.into.clone();
    }
    Ok(acc)
}

fn raw_class(t: &Theory, class: &RawClass, sorts: &[String]) -> Result<SubstitutionClass, MoritaError> {
    match class {
        RawClass::Symbol(r, _) => {
            let dom = t
                .signature
                .relations
                .get(r)
                .ok_or_else(|| SyntaxError::UnknownRelation(r.clone()))?;
            if dom.as_slice() != sorts {
                return Err(MoritaError::BadSpec(format!("relation {r} has the wrong domain")));
            }
            let ctx: Vec<Var> = dom.iter().enumerate().map(|(i, s)| v(&format!("x{}", i + 1), s)).collect();
            Ok(SubstitutionClass::new(ctx.clone(), Formula::rel(r.clone(), ctx.iter().map(Var::term).collect())))
        }
        RawClass::Abstraction(vars, body, _) => {
            if vars.len() != sorts.len() {
                return Err(MoritaError::BadSpec(format!("class must bind {} variables", sorts.len())));
            }
            let ctx: Vec<Var> = vars
                .iter()
                .zip(sorts)
                .map(|((n, s), want)| Var::new(n.clone(), s.clone().unwrap_or_else(|| want.clone())))
                .collect();
            let f = elaborate_formula(&t.signature, body, &ctx, t.mode == Mode::Classical)?;
            Ok(SubstitutionClass::new(ctx, f))
        }
    }
}

/// A definition `name(params) := body`, with parameter sorts inferred from
/// the body.
fn raw_def_class(t: &Theory, def: &RawDef) -> Result<SubstitutionClass, MoritaError> {
    let f = elaborate_formula(&t.signature, &def.body, &[], t.mode == Mode::Classical)?;
    let free = f.free_context();
    let mut ctx = Vec::new();
    for p in &def.params {
        let w = free
            .iter()
            .find(|w| &w.name == p)
            .ok_or_else(|| MoritaError::BadSpec(format!("cannot infer the sort of {p} in {}", def.label)))?;
        ctx.push(w.clone());
    }
    if ctx.len() != free.len() {
        return Err(MoritaError::BadSpec(format!("{} has free variables outside its parameters", def.label)));
    }
    Ok(SubstitutionClass::new(ctx, f))
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        Formula::Top => Vec::new(),
        _ => vec![f],
    }
}

fn disjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::Or(a, b) => {
            let mut out = disjuncts(a);
            out.extend(disjuncts(b));
            out
        }
        Formula::Bot => Vec::new(),
        _ => vec![f],
    }
}

fn distinct_vars(args: &[Term]) -> Option<Vec<Var>> {
    let vs: Vec<Var> = args.iter().map(|a| a.as_var().cloned()).collect::<Option<_>>()?;
    let set: BTreeSet<&Var> = vs.iter().collect();
    (set.len() == vs.len()).then_some(vs)
}

/// Candidate specs for a new symbol, read off the axioms that mention it.
fn candidates(sym: &str, plus: &Theory, current: &Theory, pending: &[&Axiom]) -> Vec<ExtensionSpec> {
    let psig = &plus.signature;
    let mut out = Vec::new();
    if psig.has_sort(sym) {
        for ax in pending {
            let s = &ax.sequent;
            if !s.antecedent.is_empty() {
                continue;
            }
            if let Formula::Exists(z, body) = &s.succedent {
                if z.sort == sym {
                    let mut maps = Vec::new();
                    let mut sorts = Vec::new();
                    for c in conjuncts(body) {
                        if let Formula::Eq(Term::App { fun, args, sort }, Term::Var(_)) = c {
                            if args.len() == 1 && args[0] == z.term() {
                                maps.push(fun.clone());
                                sorts.push(sort.clone());
                            }
                        }
                    }
                    if !maps.is_empty() {
                        out.push(ExtensionSpec::Product {
                            sorts,
                            name: Some(sym.to_string()),
                            maps,
                        });
                    }
                }
            }
            let ds = disjuncts(&s.succedent);
            let mut maps = Vec::new();
            let mut sorts = Vec::new();
            for d in &ds {
                if let Formula::Exists(x, body) = d {
                    if let Formula::Eq(Term::Var(z), Term::App { fun, args, .. }) = body.as_ref() {
                        if z.sort == sym && args.len() == 1 && args[0] == x.term() {
                            maps.push(fun.clone());
                            sorts.push(x.sort.clone());
                        }
                    }
                }
            }
            if !maps.is_empty() && maps.len() == ds.len() {
                out.push(ExtensionSpec::Coproduct {
                    sorts,
                    name: Some(sym.to_string()),
                    maps,
                });
            }
        }
        out.push(ExtensionSpec::Terminal { name: Some(sym.to_string()) });
        out.push(ExtensionSpec::Product {
            sorts: Vec::new(),
            name: Some(sym.to_string()),
            maps: Vec::new(),
        });
        for (f, fs) in &psig.functions {
            if current.signature.functions.contains_key(f) || fs.domain.len() != 1 {
                continue;
            }
            if fs.domain[0] == sym && current.signature.has_sort(&fs.codomain) {
                for ax in pending {
                    let s = &ax.sequent;
                    if let (1, Formula::Exists(y, body)) = (s.antecedent.len(), &s.succedent) {
                        if let Formula::Eq(Term::App { fun, args, .. }, Term::Var(x)) = body.as_ref() {
                            if fun == f && args.len() == 1 && args[0] == y.term() {
                                out.push(ExtensionSpec::Subsort {
                                    base: fs.codomain.clone(),
                                    class: SubstitutionClass::new(vec![x.clone()], s.antecedent[0].clone()),
                                    name: Some(sym.to_string()),
                                    map: Some(f.clone()),
                                });
                            }
                        }
                    }
                }
            }
            if fs.codomain == sym && current.signature.has_sort(&fs.domain[0]) {
                for ax in pending {
                    let s = &ax.sequent;
                    if s.antecedent.len() != 1 {
                        continue;
                    }
                    if let Formula::Eq(Term::App { fun: f1, args: a1, .. }, Term::App { fun: f2, args: a2, .. }) =
                        &s.antecedent[0]
                    {
                        if f1 == f && f2 == f {
                            if let (Some(x), Some(y)) = (a1[0].as_var(), a2[0].as_var()) {
                                if x != y {
                                    out.push(ExtensionSpec::Quotient {
                                        base: fs.domain[0].clone(),
                                        class: SubstitutionClass::new(vec![x.clone(), y.clone()], s.succedent.clone()),
                                        name: Some(sym.to_string()),
                                        map: Some(f.clone()),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    } else {
        for ax in pending {
            let s = &ax.sequent;
            if s.antecedent.len() != 1 {
                continue;
            }
            match &s.antecedent[0] {
                Formula::Rel(r, args) if r == sym => {
                    if let Some(ctx) = distinct_vars(args) {
                        out.push(ExtensionSpec::DefineRel {
                            name: sym.to_string(),
                            class: SubstitutionClass::new(ctx, s.succedent.clone()),
                        });
                    }
                }
                Formula::Eq(Term::App { fun, args, .. }, Term::Var(y)) if fun == sym => {
                    if let Some(mut ctx) = distinct_vars(args) {
                        if !ctx.contains(y) {
                            ctx.push(y.clone());
                            out.push(ExtensionSpec::DefineFun {
                                name: sym.to_string(),
                                class: SubstitutionClass::new(ctx, s.succedent.clone()),
                            });
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn spec_symbols(spec: &ExtensionSpec) -> Vec<String> {
    match spec {
        ExtensionSpec::Product { name, maps, .. } | ExtensionSpec::Coproduct { name, maps, .. } => {
            let mut v: Vec<String> = name.iter().cloned().collect();
            v.extend(maps.iter().cloned());
            v
        }
        ExtensionSpec::Terminal { name } => name.iter().cloned().collect(),
        ExtensionSpec::Subsort { name, map, .. } | ExtensionSpec::Quotient { name, map, .. } => {
            name.iter().chain(map.iter()).cloned().collect()
        }
        ExtensionSpec::DefineRel { name, .. } | ExtensionSpec::DefineFun { name, .. } => vec![name.clone()],
    }
}

/// Symbol declarations of `sym` agree between two signatures.
fn same_decl(a: &Signature, b: &Signature, sym: &str) -> bool {
    if a.has_sort(sym) {
        return b.has_sort(sym);
    }
    if let Some(d) = a.relations.get(sym) {
        return b.relations.get(sym) == Some(d);
    }
    match (a.functions.get(sym), b.functions.get(sym)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// Recognise `plus` as a chain of extension steps over `t`: every new symbol
/// is matched to a schema whose regenerated defining sequents are axioms of
/// `plus`, and the admissibility obligations are discharged.
pub fn recognize_extension(t: &Theory, plus: &Theory) -> (ExtensionResult, VerificationReport) {
    let mut report = VerificationReport::new(format!("extension {} -> {}", t.name, plus.name));
    let tsig = &t.signature;
    let psig = &plus.signature;
    let mut acc = ExtensionResult::empty(t);
    let subsig = tsig.is_subsignature_of(psig);
    report.push(Obligation::check("signature", "old symbols are kept", subsig, ""));
    let kept = t.axioms.iter().all(|a| plus.axioms.iter().any(|b| b.sequent.alpha_eq(&a.sequent)));
    report.push(Obligation::check("axioms", "old axioms are kept", kept, ""));
    if !subsig {
        return (acc, report);
    }
    let mut pending: Vec<&Axiom> = plus
        .axioms
        .iter()
        .filter(|b| !t.axioms.iter().any(|a| a.sequent.alpha_eq(&b.sequent)))
        .collect();
    let mut unclassified: Vec<String> = psig
        .sorts
        .iter()
        .chain(psig.relations.keys())
        .chain(psig.functions.keys())
        .filter(|s| !name_taken(tsig, s))
        .cloned()
        .collect();
    loop {
        let mut progress = false;
        for sym in unclassified.clone() {
            if !unclassified.contains(&sym) {
                continue;
            }
            for spec in candidates(&sym, plus, &acc.theory, &pending) {
                let Ok(step) = extend_morita(&acc.theory, &spec) else {
                    continue;
                };
                let new_syms = spec_symbols(&step.specs[0]);
                if !new_syms.iter().all(|s| unclassified.contains(s) && same_decl(&step.theory.signature, psig, s)) {
                    continue;
                }
                let mut claimed = Vec::new();
                let ok = step.definitions.iter().all(|d| {
                    match pending
                        .iter()
                        .position(|p| !claimed.contains(&p.name) && p.sequent.alpha_eq(&d.sequent))
                    {
                        Some(i) => {
                            claimed.push(pending[i].name.clone());
                            true
                        }
                        None => false,
                    }
                });
                if !ok {
                    continue;
                }
                report.push(Obligation::check(format!("schema:{sym}"), step.specs[0].describe(), true, step.specs[0].kind()));
                for c in &claimed {
                    report.push(Obligation::check(format!("definition:{c}"), "", true, format!("defines {sym}")));
                }
                pending.retain(|p| !claimed.contains(&p.name));
                unclassified.retain(|s| !new_syms.contains(s));
                acc = acc.then(step);
                progress = true;
                break;
            }
        }
        if !progress {
            break;
        }
    }
    for sym in &unclassified {
        report.push(Obligation::check(format!("schema:{sym}"), "", false, "not definable by any schema"));
    }
    for p in &pending {
        report.push(Obligation::check(
            format!("definition:{}", p.name),
            print::sequent(&p.sequent),
            false,
            "axiom is not a definition",
        ));
    }
    acc.theory.name = plus.name.clone();
    (acc, report)
}

pub fn verify_extension(t: &Theory, plus: &Theory, b: Budget) -> VerificationReport {
    let (acc, mut report) = recognize_extension(t, plus);
    report.extend("admissible", acc.discharge(b));
    report
}

/// The inclusion of `t` into an extension, verified as a translation; each
/// old axiom is re-proved in the extension.
pub fn inclusion_translation(t: &Theory, plus: &Theory, b: Budget) -> Result<Translation, MoritaError> {
    if !t.signature.is_subsignature_of(&plus.signature) {
        return Err(MoritaError::NotApplicable(format!("{} is not a subsignature of {}", t.name, plus.name)));
    }
    let mut f = Reconstrual::identity(t);
    f.name = format!("I_{}", plus.name);
    f.target = plus.clone();
    let mut tr = verify_translation(&f, b);
    for ax in &t.axioms {
        tr.report
            .push(discharge(plus, &format!("conservative:{}", ax.name), &ax.sequent, b));
    }
    Ok(tr)
}

/// The quotient sorts of a quotient-only extension with their data.
fn quotient_data(t: &Theory, plus: &Theory) -> Result<Vec<(String, String, String, SubstitutionClass)>, MoritaError> {
    let (acc, report) = recognize_extension(t, plus);
    if report.verdict() != Verdict::Proved {
        return Err(MoritaError::NotApplicable(format!("{} is not recognised as an extension of {}", plus.name, t.name)));
    }
    let mut out = Vec::new();
    for spec in &acc.specs {
        match spec {
            ExtensionSpec::Quotient {
                base,
                class,
                name: Some(n),
                map: Some(m),
            } => out.push((n.clone(), m.clone(), base.clone(), class.clone())),
            other => {
                return Err(MoritaError::NotApplicable(format!(
                    "extension contains a {} step, not only quotients",
                    other.kind()
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Retraction {
    pub inclusion: Translation,
    pub retraction: Translation,
    pub chi1: TMap,
    pub chi2: TMap,
    pub report: VerificationReport,
}

/// For a quotient-only extension `plus` of `t`: the retraction `R` sending
/// each quotient sort to its base and its equality to the defining class,
/// and the t-maps witnessing `R E ~ 1` and `E R ~ 1`.
pub fn quotient_retraction(t: &Theory, plus: &Theory, b: Budget) -> Result<Retraction, MoritaError> {
    let data = quotient_data(t, plus)?;
    let mut r = Reconstrual::identity(plus);
    r.name = format!("R_{}", plus.name);
    r.source = plus.clone();
    r.target = t.clone();
    for (sort, map, base, class) in &data {
        r.sorts.insert(
            sort.clone(),
            SortImage {
                sorts: vec![base.clone()],
                domain: SubstitutionClass::new(vec![v("x1", base)], Formula::Top),
            },
        );
        r.equality.insert(sort.clone(), class.canonical());
        r.functions.insert(map.clone(), class.canonical());
    }
    let mut e = Reconstrual::identity(t);
    e.name = format!("E_{}", plus.name);
    e.target = plus.clone();
    let gf = crate::translation::compose_translations(&e, &r)?;
    let chi1 = TMap::trivial("chi1", &gf, &Reconstrual::identity(t), true)?;
    let fg = crate::translation::compose_translations(&r, &e)?;
    let id_plus = Reconstrual::identity(plus);
    let mut chi2 = TMap {
        name: "chi2".into(),
        from: fg.clone(),
        to: id_plus.clone(),
        components: Default::default(),
        iso: true,
        checks: Vec::new(),
    };
    for s in &plus.signature.sorts {
        let q = data.iter().find(|d| &d.0 == s);
        let (x, y) = match q {
            Some((_, _, base, _)) => (v("x1", base), v("y1", s)),
            None => (v("x1", s), v("y1", s)),
        };
        let f = match q {
            Some((_, map, _, _)) => eq(app(map, &[x.term()], s), y.term()),
            None => eq(x.term(), y.term()),
        };
        chi2.components.insert(s.clone(), SubstitutionClass::new(vec![x, y], f));
    }
    let inclusion = verify_translation(&e, b);
    let retraction = verify_translation(&r, b);
    let mut report = VerificationReport::new(format!("quotient retraction {} / {}", t.name, plus.name));
    report.extend("E", inclusion.report.clone());
    report.extend("R", retraction.report.clone());
    for o in report.entries.iter_mut() {
        // Equality preservation and strongness are not claimed for R.
        if o.name.starts_with("R/ep:") || o.name.starts_with("R/strong") {
            o.name = o.name.replacen("R/", "R/info:", 1);
        }
    }
    let info: Vec<Obligation> = report.entries.iter().filter(|o| o.name.contains("/info:")).cloned().collect();
    report.entries.retain(|o| !o.name.contains("/info:"));
    report.extend("homotopy", verify_homotopy_equivalence(&e, &r, &chi1, &chi2, b)?);
    for o in info {
        report.note(format!("{} [{}]", o.name, o.verdict));
    }
    Ok(Retraction {
        inclusion,
        retraction,
        chi1,
        chi2,
        report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub sort: String,
    pub formula: String,
    pub verdict: Verdict,
    pub duplicate_of: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Completion {
    pub extension: ExtensionResult,
    pub candidates: Vec<Candidate>,
    pub report: VerificationReport,
}

/// Quotient every sort by each provable equivalence relation of size at
/// most `depth` mentioning both variables, one quotient per class of
/// provably equivalent relations.
pub fn exact_completion_slice(t: &Theory, depth: usize, b: Budget) -> Result<Completion, MoritaError> {
    let mut report = VerificationReport::new(format!("exact completion of {} at depth {depth}", t.name));
    let mut candidates = Vec::new();
    let mut specs = Vec::new();
    for s in &t.signature.sorts {
        let ctx = [v("x", s), v("y", s)];
        let cands = formulas_mentioning_all(&t.signature, &ctx, depth);
        let mut goals = Vec::new();
        for f in &cands {
            let class = SubstitutionClass::new(ctx.to_vec(), f.clone());
            let (x, y, z) = (v("x", s), v("y", s), v("z", s));
            let phi = |a: &Var, b: &Var| class.apply_vars(&[a.clone(), b.clone()]);
            goals.push(Goal::new("refl", Sequent::fact(phi(&x, &x)?)));
            goals.push(Goal::new("symm", Sequent::new(vec![phi(&x, &y)?], phi(&y, &x)?)));
            goals.push(Goal::new("trans", Sequent::new(vec![phi(&x, &y)?, phi(&y, &z)?], phi(&x, &z)?)));
        }
        let results = discharge_all(t, &goals, b);
        let mut kept: Vec<SubstitutionClass> = Vec::new();
        for (i, f) in cands.iter().enumerate() {
            let verdict = Verdict::all(results[3 * i..3 * i + 3].iter().map(|o| o.verdict));
            let text = print::formula(f);
            let mut dup = None;
            if verdict == Verdict::Proved {
                let class = SubstitutionClass::new(ctx.to_vec(), f.clone());
                for k in &kept {
                    let there = Sequent::new(vec![class.formula.clone()], k.formula.clone());
                    let back = Sequent::new(vec![k.formula.clone()], class.formula.clone());
                    let same = [there, back]
                        .iter()
                        .all(|q| matches!(prove_sequent(t, q, b), Ok(ProofResult::Proved(_))));
                    if same {
                        dup = Some(print::formula(&k.formula));
                        break;
                    }
                }
                if dup.is_none() {
                    kept.push(class.clone());
                    specs.push(ExtensionSpec::Quotient {
                        base: s.clone(),
                        class,
                        name: None,
                        map: None,
                    });
                }
            }
            if verdict == Verdict::Unknown {
                report.note(format!("candidate {text} on {s} is undecided at budget {b}"));
            }
            report.push(Obligation::with_verdict(
                format!("candidate:{s}:{}", i + 1),
                text.clone(),
                verdict,
                match &dup {
                    Some(d) => format!("equivalent to {d}"),
                    None if verdict == Verdict::Proved => "kept".to_string(),
                    None => String::new(),
                },
            ));
            candidates.push(Candidate {
                sort: s.clone(),
                formula: text,
                verdict,
                duplicate_of: dup,
            });
        }
    }
    let extension = extend_chain(t, &specs, &format!("{}_ex{depth}", t.name))?;
    for spec in &extension.specs {
        report.note(format!("added {}", spec.describe()));
    }
    if candidates.iter().any(|c| c.verdict == Verdict::Unknown) {
        report.note("incomplete: undecided candidates were not quotiented");
    }
    // Rejected candidates are informative, not failures of the construction.
    for o in report.entries.iter_mut() {
        if o.verdict != Verdict::Proved {
            o.evidence = crate::report::Evidence::Note(format!("rejected ({})", o.verdict));
            o.verdict = Verdict::Proved;
        }
    }
    Ok(Completion {
        extension,
        candidates,
        report,
    })
}

/// Two disjoint, jointly inhabited unary formulae on one sort.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Realization {
    pub sort: String,
    pub phi: SubstitutionClass,
    pub psi: SubstitutionClass,
    pub disjoint: ProofResult,
    pub inhabited: ProofResult,
}

impl Realization {
    pub fn obligations(sort: &str, phi: &SubstitutionClass, psi: &SubstitutionClass) -> Result<(Sequent, Sequent), MoritaError> {
        let x = v("x", sort);
        let y = v("y", sort);
        let disjoint = Sequent::new(
            vec![phi.apply_vars(std::slice::from_ref(&x))?, psi.apply_vars(std::slice::from_ref(&x))?],
            Formula::Bot,
        );
        let inhabited = Sequent::fact(Formula::and(
            Formula::exists(x.clone(), phi.apply_vars(std::slice::from_ref(&x))?),
            Formula::exists(y.clone(), psi.apply_vars(std::slice::from_ref(&y))?),
        ));
        Ok((disjoint, inhabited))
    }
}

/// Search pairs of unary formulae (ordered by the larger index, then the
/// smaller) for a realization.
pub fn find_proper_realization(t: &Theory, depth: usize, b: Budget) -> Result<(Option<Realization>, Vec<String>), MoritaError> {
    let mut log = Vec::new();
    for s in &t.signature.sorts {
        let x = v("x", s);
        let cands = formulas_mentioning_all(&t.signature, std::slice::from_ref(&x), depth);
        let goals: Vec<Goal> = cands
            .iter()
            .map(|f| Goal::new(print::formula(f), Sequent::fact(Formula::exists(x.clone(), f.clone()))))
            .collect();
        let inhabited: Vec<&Formula> = discharge_all(t, &goals, b)
            .iter()
            .zip(&cands)
            .filter_map(|(o, f)| {
                if o.verdict != Verdict::Proved {
                    log.push(format!("{s}: {} not provably inhabited ({})", o.name, o.verdict));
                }
                (o.verdict == Verdict::Proved).then_some(f)
            })
            .collect();
        for j in 1..inhabited.len() {
            for i in 0..j {
                let phi = SubstitutionClass::new(vec![x.clone()], inhabited[i].clone());
                let psi = SubstitutionClass::new(vec![x.clone()], inhabited[j].clone());
                let (d, inh) = Realization::obligations(s, &phi, &psi)?;
                let dr = prove_sequent(t, &d, b).map_err(|e| MoritaError::BadSpec(e.to_string()))?;
                if !dr.is_proved() {
                    log.push(format!(
                        "{s}: {} / {} not provably disjoint ({})",
                        print::formula(&phi.formula),
                        print::formula(&psi.formula),
                        Verdict::of(&dr)
                    ));
                    continue;
                }
                let ir = prove_sequent(t, &inh, b).map_err(|e| MoritaError::BadSpec(e.to_string()))?;
                if !ir.is_proved() {
                    log.push(format!("{s}: joint inhabitation undecided ({})", Verdict::of(&ir)));
                    continue;
                }
                return Ok((
                    Some(Realization {
                        sort: s.clone(),
                        phi,
                        psi,
                        disjoint: dr,
                        inhabited: ir,
                    }),
                    log,
                ));
            }
        }
    }
    Ok((None, log))
}

/// Carry a realization along a translation whose image of the sort has
/// length one, relativizing to the domain formula, and re-prove it.
pub fn transport_properness(f: &Translation, r: &Realization, b: Budget) -> Result<Realization, MoritaError> {
    if f.is_translation != Verdict::Proved {
        return Err(MoritaError::NotApplicable(format!("{} is not a verified translation", f.map.name)));
    }
    let map = &f.map;
    let img = map.image_sorts(&r.sort)?;
    if img.len() != 1 {
        return Err(MoritaError::NotApplicable(format!("image of {} does not have length 1", r.sort)));
    }
    let sort = img[0].clone();
    let image = |c: &SubstitutionClass| -> Result<SubstitutionClass, MoritaError> {
        let (ctx, phi) = map.apply_in(&c.context, &c.formula)?;
        let d = map.domain(&r.sort, &ctx)?;
        Ok(SubstitutionClass::new(ctx, Formula::conj_simplified([phi, d])).canonical())
    };
    let phi = image(&r.phi)?;
    let psi = image(&r.psi)?;
    let (d, inh) = Realization::obligations(&sort, &phi, &psi)?;
    let dr = prove_sequent(&map.target, &d, b).map_err(|e| MoritaError::BadSpec(e.to_string()))?;
    if !dr.is_proved() {
        return Err(MoritaError::Unproved {
            name: format!("disjoint: {}", print::sequent(&d)),
            verdict: Verdict::of(&dr),
        });
    }
    let ir = prove_sequent(&map.target, &inh, b).map_err(|e| MoritaError::BadSpec(e.to_string()))?;
    if !ir.is_proved() {
        return Err(MoritaError::Unproved {
            name: format!("inhabited: {}", print::sequent(&inh)),
            verdict: Verdict::of(&ir),
        });
    }
    Ok(Realization {
        sort,
        phi,
        psi,
        disjoint: dr,
        inhabited: ir,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoproductElimination {
    pub extension: ExtensionResult,
    /// Name of the quotient sort standing for the coproduct.
    pub sum: String,
    pub injections: [String; 2],
    pub report: VerificationReport,
}

/// Build `s1 + s2` as `(s1 x s2 x tau)/eps`, where `tau` is the subsort of
/// the realized sort cut out by `phi | psi`, and check the admissibility and
/// coproduct sequents.
pub fn eliminate_coproduct(t: &Theory, r: &Realization, s1: &str, s2: &str, b: Budget) -> Result<CoproductElimination, MoritaError> {
    t.signature.require_sort(s1)?;
    t.signature.require_sort(s2)?;
    let x = v("x", &r.sort);
    let either = Formula::or(
        r.phi.apply_vars(std::slice::from_ref(&x))?,
        r.psi.apply_vars(std::slice::from_ref(&x))?,
    );
    let sub = ExtensionSpec::Subsort {
        base: r.sort.clone(),
        class: SubstitutionClass::new(vec![x], either),
        name: None,
        map: None,
    };
    let acc = extend_chain(t, &[sub], &t.name)?;
    let (tau, incl) = match &acc.specs[0] {
        ExtensionSpec::Subsort {
            name: Some(n), map: Some(m), ..
        } => (n.clone(), m.clone()),
        _ => unreachable!("subsort step"),
    };
    let prod = ExtensionSpec::Product {
        sorts: vec![s1.to_string(), s2.to_string(), tau.clone()],
        name: None,
        maps: Vec::new(),
    };
    let step = extend_morita(&acc.theory, &prod)?;
    let (p, pis) = match &step.specs[0] {
        ExtensionSpec::Product {
            name: Some(n), maps, ..
        } => (n.clone(), maps.clone()),
        _ => unreachable!("product step"),
    };
    let acc = acc.then(step);
    let (w1, w2) = (v("w1", &p), v("w2", &p));
    let proj = |k: usize, w: &Var, sort: &str| app(&pis[k], &[w.term()], sort);
    let point = |w: &Var| app(&incl, &[proj(2, w, &tau)], &r.sort);
    let side = |c: &SubstitutionClass, k: usize, sort: &str| -> Result<Formula, MoritaError> {
        Ok(Formula::conj([
            c.apply(&[point(&w1)])?,
            c.apply(&[point(&w2)])?,
            eq(proj(k, &w1, sort), proj(k, &w2, sort)),
        ]))
    };
    let eps = SubstitutionClass::new(vec![w1.clone(), w2.clone()], Formula::or(side(&r.phi, 0, s1)?, side(&r.psi, 1, s2)?));
    let quot = ExtensionSpec::Quotient {
        base: p.clone(),
        class: eps,
        name: None,
        map: None,
    };
    let step = extend_morita(&acc.theory, &quot)?;
    let (sum, q) = match &step.specs[0] {
        ExtensionSpec::Quotient {
            name: Some(n), map: Some(m), ..
        } => (n.clone(), m.clone()),
        _ => unreachable!("quotient step"),
    };
    let mut acc = acc.then(step);
    let mut injections = Vec::new();
    for (k, (c, s)) in [(&r.phi, s1), (&r.psi, s2)].into_iter().enumerate() {
        let xk = v("x", s);
        let y = v("y", &sum);
        let w = v("w", &p);
        let body = Formula::exists(
            w.clone(),
            Formula::conj([
                eq(proj(k, &w, s), xk.term()),
                c.apply(&[point(&w)])?,
                eq(app(&q, &[w.term()], &sum), y.term()),
            ]),
        );
        let name = derived_name(&acc.theory.signature, &format!("rho{}_", k + 1), &format!("{sum}|{k}"), &BTreeSet::new());
        let spec = ExtensionSpec::DefineFun {
            name: name.clone(),
            class: SubstitutionClass::new(vec![xk, y], body),
        };
        let step = extend_morita(&acc.theory, &spec)?;
        acc = acc.then(step);
        injections.push(name);
    }
    acc.theory.name = format!("{}_sum", t.name);
    if let Some(last) = acc.stages.last_mut() {
        last.name = acc.theory.name.clone();
    }
    let mut report = VerificationReport::new(format!("coproduct elimination in {} on {}", t.name, r.sort));
    report.extend("admissible", acc.discharge(b));
    let goals: Vec<Goal> = coproduct_sequents(&sum, &[s1.to_string(), s2.to_string()], &injections)
        .into_iter()
        .map(|(n, s)| Goal::new(n.replacen(&format!("{sum}:"), "", 1), s))
        .collect();
    for o in discharge_all(&acc.theory, &goals, b) {
        report.push(Obligation {
            name: format!("coproduct:{}", o.name),
            ..o
        });
    }
    Ok(CoproductElimination {
        extension: acc,
        sum,
        injections: [injections[0].clone(), injections[1].clone()],
        report,
    })
}

/// Interpret the steps of an extension in a model of its base: products as
/// tuples, coproducts as tagged unions, subsorts as extensions, quotients as
/// equivalence classes and defined symbols by evaluation.
pub fn expand_model(m: &FiniteModel, ext: &ExtensionResult) -> Result<FiniteModel, MoritaError> {
    let mut cur = m.clone();
    for (i, spec) in ext.specs.iter().enumerate() {
        let next_sig = &ext.stages[i + 1].signature;
        let mut out = FiniteModel::empty(next_sig);
        for (s, c) in &cur.carriers {
            out.carriers.insert(s.clone(), c.clone());
        }
        for (r, t) in &cur.relations {
            out.relations.insert(r.clone(), t.clone());
        }
        for (f, t) in &cur.functions {
            out.functions.insert(f.clone(), t.clone());
        }
        let label = |m: &FiniteModel, sorts: &[String], t: &[usize]| -> String {
            let ls: Vec<&str> = t.iter().zip(sorts).map(|(i, s)| m.label(s, *i)).collect();
            format!("({})", ls.join(","))
        };
        match spec {
            ExtensionSpec::Product {
                sorts,
                name: Some(n),
                maps,
            } => {
                let elems = tuples(&cur.sizes(sorts));
                out.carriers.insert(n.clone(), elems.iter().map(|t| label(&cur, sorts, t)).collect());
                for (k, m) in maps.iter().enumerate() {
                    let table = out.functions.get_mut(m).expect("declared");
                    for (e, t) in elems.iter().enumerate() {
                        table.insert(vec![e], t[k]);
                    }
                }
            }
            ExtensionSpec::Terminal { name: Some(n) } => {
                out.carriers.insert(n.clone(), vec!["*".into()]);
            }
            ExtensionSpec::Coproduct {
                sorts,
                name: Some(n),
                maps,
            } => {
                let mut labels = Vec::new();
                for (k, (s, m)) in sorts.iter().zip(maps).enumerate() {
                    let table = out.functions.get_mut(m).expect("declared");
                    for e in 0..cur.size(s) {
                        table.insert(vec![e], labels.len());
                        labels.push(format!("{}:{}", k + 1, cur.label(s, e)));
                    }
                }
                out.carriers.insert(n.clone(), labels);
            }
            ExtensionSpec::Subsort {
                base,
                class,
                name: Some(n),
                map: Some(f),
            } => {
                let ext = cur.extension(&class.context, &class.formula)?;
                out.carriers
                    .insert(n.clone(), ext.iter().map(|t| cur.label(base, t[0]).to_string()).collect());
                let table = out.functions.get_mut(f).expect("declared");
                for (e, t) in ext.iter().enumerate() {
                    table.insert(vec![e], t[0]);
                }
            }
            ExtensionSpec::Quotient {
                base,
                class,
                name: Some(n),
                map: Some(f),
            } => {
                let size = cur.size(base);
                let rel: BTreeSet<Vec<usize>> = cur.extension(&class.context, &class.formula)?.into_iter().collect();
                let related = |a: usize, b: usize| rel.contains(&vec![a, b]);
                for a in 0..size {
                    for b in 0..size {
                        let bad = !related(a, a)
                            || related(a, b) != related(b, a)
                            || (0..size).any(|c| related(a, b) && related(b, c) && !related(a, c));
                        if bad {
                            return Err(MoritaError::NotApplicable(format!(
                                "{} is not an equivalence relation in the model",
                                print::formula(&class.formula)
                            )));
                        }
                    }
                }
                let mut reps: Vec<usize> = Vec::new();
                let mut class_of = vec![0; size];
                for a in 0..size {
                    match reps.iter().position(|&r| related(r, a)) {
                        Some(c) => class_of[a] = c,
                        None => {
                            class_of[a] = reps.len();
                            reps.push(a);
                        }
                    }
                }
                out.carriers
                    .insert(n.clone(), reps.iter().map(|&r| format!("[{}]", cur.label(base, r))).collect());
                let table = out.functions.get_mut(f).expect("declared");
                for (a, c) in class_of.iter().enumerate() {
                    table.insert(vec![a], *c);
                }
            }
            ExtensionSpec::DefineRel { name, class } => {
                let ext = cur.extension(&class.context, &class.formula)?;
                out.relations.insert(name.clone(), ext.into_iter().collect());
            }
            ExtensionSpec::DefineFun { name, class } => {
                let sorts = class.sorts();
                let (cod, dom) = sorts.split_last().expect("output variable");
                let table = out.functions.get_mut(name).expect("declared");
                for args in tuples(&cur.sizes(dom)) {
                    let mut hits = Vec::new();
                    for y in 0..cur.size(cod) {
                        let mut env: Assignment = class.context.iter().cloned().zip(args.iter().copied().chain([y])).collect();
                        if cur.eval(&class.formula, &mut env)? {
                            hits.push(y);
                        }
                    }
                    if hits.len() != 1 {
                        return Err(MoritaError::NotApplicable(format!("{name} is not functional in the model")));
                    }
                    table.insert(args, hits[0]);
                }
            }
            other => return Err(MoritaError::BadSpec(format!("unresolved step {}", other.describe()))),
        }
        cur = out;
    }
    Ok(cur)
}

/// `F^`: the equality-preserving replacement of `f`, landing in the target
/// extended by one quotient per source sort. A translation that already
/// preserves equality is returned unchanged.
pub fn make_equality_preserving(f: &Translation, b: Budget) -> Result<(Translation, ExtensionResult), MoritaError> {
    let map = &f.map;
    if f.is_equality_preserving == Verdict::Proved {
        return Ok((f.clone(), ExtensionResult::empty(&map.target)));
    }
    if f.is_translation != Verdict::Proved {
        return Err(MoritaError::NotApplicable(format!("{} is not a verified translation", map.name)));
    }
    let target = &map.target;
    let mut acc = ExtensionResult::empty(target);
    // Per source sort: the quotient sort, its map and the packing data.
    struct Packed {
        sort: String,
        map: String,
        carrier: String,
        projections: Vec<String>,
    }
    let mut packed: Vec<(String, Packed)> = Vec::new();
    for s in &map.source.signature.sorts {
        let img = map.image_sorts(s)?.to_vec();
        let (carrier, projections) = if img.len() == 1 {
            (img[0].clone(), Vec::new())
        } else {
            let step = extend_morita(
                &acc.theory,
                &ExtensionSpec::Product {
                    sorts: img.clone(),
                    name: None,
                    maps: Vec::new(),
                },
            )?;
            let ExtensionSpec::Product { name: Some(n), maps, .. } = step.specs[0].clone() else {
                unreachable!("product step")
            };
            acc = acc.then(step);
            (n, maps)
        };
        let (u, w) = (v("u", &carrier), v("w", &carrier));
        let xs: Vec<Var> = img.iter().enumerate().map(|(i, t)| v(&format!("x{}", i + 1), t)).collect();
        let ys: Vec<Var> = img.iter().enumerate().map(|(i, t)| v(&format!("y{}", i + 1), t)).collect();
        let unpack = |z: &Var, vs: &[Var]| -> Formula {
            if projections.is_empty() {
                eq(z.term(), vs[0].term())
            } else {
                Formula::conj(projections.iter().zip(vs).map(|(p, x)| eq(app(p, &[z.term()], &x.sort), x.term())))
            }
        };
        let related = if projections.is_empty() {
            map.eq_image(s, std::slice::from_ref(&u), std::slice::from_ref(&w))?
        } else {
            Formula::exists_many(
                &xs.iter().chain(&ys).cloned().collect::<Vec<_>>(),
                Formula::conj([unpack(&u, &xs), unpack(&w, &ys), map.eq_image(s, &xs, &ys)?]),
            )
        };
        let class = SubstitutionClass::new(vec![u.clone(), w.clone()], Formula::or(related, eq(u.term(), w.term())));
        let existing = find_quotient(&acc.theory, &carrier, &class, b);
        let (qs, qm) = match existing {
            Some(found) => found,
            None => {
                let step = extend_morita(
                    &acc.theory,
                    &ExtensionSpec::Quotient {
                        base: carrier.clone(),
                        class,
                        name: None,
                        map: None,
                    },
                )?;
                let ExtensionSpec::Quotient {
                    name: Some(n), map: Some(m), ..
                } = step.specs[0].clone()
                else {
                    unreachable!("quotient step")
                };
                acc = acc.then(step);
                (n, m)
            }
        };
        packed.push((
            s.clone(),
            Packed {
                sort: qs,
                map: qm,
                carrier,
                projections,
            },
        ));
    }
    acc.theory.name = format!("{}_ep", target.name);
    if let Some(last) = acc.stages.last_mut() {
        last.name = acc.theory.name.clone();
    }
    let lookup = |s: &str| &packed.iter().find(|(n, _)| n == s).expect("every sort packed").1;
    // `pack(xs, y)`: the tuple xs is sent to y by the quotient map.
    let pack = |s: &str, xs: &[Var], y: &Var| -> Formula {
        let p = lookup(s);
        if p.projections.is_empty() {
            eq(app(&p.map, &[xs[0].term()], &p.sort), y.term())
        } else {
            let u = Var::new(format!("{}_u", y.name), p.carrier.clone());
            Formula::exists(
                u.clone(),
                Formula::conj(
                    p.projections
                        .iter()
                        .zip(xs)
                        .map(|(pr, x)| eq(app(pr, &[u.term()], &x.sort), x.term()))
                        .chain([eq(app(&p.map, &[u.term()], &p.sort), y.term())]),
                ),
            )
        }
    };
    // The image of a class over source sorts `sorts`: exists xs (F phi(xs) & pack).
    let lift = |sorts: &[String], c: &SubstitutionClass| -> Result<SubstitutionClass, MoritaError> {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        let mut packs = Vec::new();
        let mut at = 0;
        for (k, s) in sorts.iter().enumerate() {
            let n = map.image_sorts(s)?.len();
            let xs: Vec<Var> = c.context[at..at + n]
                .iter()
                .enumerate()
                .map(|(i, w)| Var::new(format!("a{}_{}", k + 1, i + 1), w.sort.clone()))
                .collect();
            let y = Var::new(format!("y{}", k + 1), lookup(s).sort.clone());
            packs.push(pack(s, &xs, &y));
            inner.extend(xs);
            outer.push(y);
            at += n;
        }
        let body = Formula::conj_simplified(std::iter::once(c.apply_vars(&inner)?).chain(packs));
        Ok(SubstitutionClass::new(outer, Formula::exists_many(&inner, body)))
    };
    let mut hat = Reconstrual {
        name: format!("{}^", map.name),
        source: map.source.clone(),
        target: acc.theory.clone(),
        sorts: Default::default(),
        relations: Default::default(),
        functions: Default::default(),
        equality: Default::default(),
    };
    for s in &map.source.signature.sorts {
        let p = lookup(s);
        let img = &map.sorts[s];
        let d = lift(std::slice::from_ref(s), &img.domain)?;
        hat.sorts.insert(
            s.clone(),
            SortImage {
                sorts: vec![p.sort.clone()],
                domain: d.canonical(),
            },
        );
        hat.equality
            .insert(s.clone(), lift(&[s.clone(), s.clone()], &map.equality[s])?.canonical());
    }
    for (r, dom) in &map.source.signature.relations {
        hat.relations.insert(r.clone(), lift(dom, &map.relations[r])?.canonical());
    }
    for (name, fs) in &map.source.signature.functions {
        let mut sorts = fs.domain.clone();
        sorts.push(fs.codomain.clone());
        hat.functions.insert(name.clone(), lift(&sorts, &map.functions[name])?.canonical());
    }
    Ok((verify_translation(&hat, b), acc))
}

/// An existing quotient of `base` whose defining class is α-equal to, or
/// provably bi-entails, `class`.
fn find_quotient(t: &Theory, base: &str, class: &SubstitutionClass, b: Budget) -> Option<(String, String)> {
    for (f, fs) in &t.signature.functions {
        if fs.domain.len() != 1 || fs.domain[0] != base {
            continue;
        }
        for ax in &t.axioms {
            let s = &ax.sequent;
            if s.antecedent.len() != 1 {
                continue;
            }
            let Formula::Eq(Term::App { fun: f1, args: a1, .. }, Term::App { fun: f2, args: a2, .. }) = &s.antecedent[0]
            else {
                continue;
            };
            if f1 != f || f2 != f {
                continue;
            }
            let (Some(x), Some(y)) = (a1[0].as_var(), a2[0].as_var()) else {
                continue;
            };
            let found = SubstitutionClass::new(vec![x.clone(), y.clone()], s.succedent.clone());
            let same = alpha_equal_in(&found.formula, &found.context, &class.formula, &class.context) || {
                let mine = class.apply_vars(&[x.clone(), y.clone()]);
                mine.is_ok_and(|m| {
                    let there = Sequent::new(vec![m.clone()], found.formula.clone());
                    let back = Sequent::new(vec![found.formula.clone()], m);
                    [there, back]
                        .iter()
                        .all(|q| matches!(prove_sequent(t, q, b), Ok(ProofResult::Proved(_))))
                })
            };
            if same {
                return Some((fs.codomain.clone(), f.clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_model;
    use crate::parse::{parse_document, parse_formula, parse_sequent, parse_theory, RawItem};
    use crate::translation::elaborate_translation;

    const EQ: &str = include_str!("../fixtures/eq.th");
    const P2: &str = include_str!("../fixtures/p2.th");
    const TWO: &str = include_str!("../fixtures/two.th");

    fn class(t: &Theory, ctx: &[Var], text: &str) -> SubstitutionClass {
        SubstitutionClass::new(ctx.to_vec(), parse_formula(&t.signature, text, ctx).unwrap())
    }

    fn quotient_of_eq() -> (Theory, ExtensionResult) {
        let eq = parse_theory(EQ).unwrap();
        let c = class(&eq, &[v("x", "s"), v("y", "s")], "A(x,y)");
        let spec = ExtensionSpec::Quotient {
            base: "s".into(),
            class: c,
            name: Some("sA".into()),
            map: Some("p".into()),
        };
        let r = extend_chain(&eq, &[spec], "EQplus").unwrap();
        (eq, r)
    }

    #[test]
    fn quotient_schema() {
        let (eq, r) = quotient_of_eq();
        assert_eq!(r.definitions.len(), 3);
        assert_eq!(r.obligations.len(), 3);
        let kernel = parse_sequent(&r.theory.signature, "p(x) = p(y) |- A(x,y)").unwrap();
        assert!(r.definitions.iter().any(|d| d.sequent.alpha_eq(&kernel)));
        assert_eq!(r.discharge(Budget::default()).verdict(), Verdict::Proved);
        assert_eq!(verify_extension(&eq, &r.theory, Budget::default()).verdict(), Verdict::Proved);
    }

    #[test]
    fn terminal_and_coproduct_counts() {
        let p2 = parse_theory(P2).unwrap();
        let r = extend_morita(&p2, &ExtensionSpec::Terminal { name: Some("one".into()) }).unwrap();
        assert_eq!(r.definitions.len(), 2);
        let two = parse_theory(TWO).unwrap();
        let r = extend_morita(
            &two,
            &ExtensionSpec::Coproduct {
                sorts: vec!["s".into(), "s".into()],
                name: Some("ss".into()),
                maps: vec!["r1".into(), "r2".into()],
            },
        )
        .unwrap();
        assert_eq!(r.definitions.len(), 4);
        assert_eq!(verify_extension(&two, &r.theory, Budget::default()).verdict(), Verdict::Proved);
    }

    #[test]
    fn foreign_axiom_is_not_a_definition() {
        let eq = parse_theory(EQ).unwrap();
        let mut plus = eq.clone();
        let s = parse_sequent(&eq.signature, "A(x,y) |- bot").unwrap();
        plus.add_axiom("extra", s).unwrap();
        let rep = verify_extension(&eq, &plus, Budget::default());
        assert_eq!(rep.get("definition:extra").unwrap().verdict, Verdict::Failed);
    }

    #[test]
    fn definitional_relation() {
        let p2 = parse_theory(P2).unwrap();
        let spec = ExtensionSpec::DefineRel {
            name: "S".into(),
            class: class(&p2, &[], "P | Q"),
        };
        let r = extend_chain(&p2, &[spec], "P2S").unwrap();
        assert_eq!(verify_extension(&p2, &r.theory, Budget::default()).verdict(), Verdict::Proved);
        let inc = inclusion_translation(&p2, &r.theory, Budget::default()).unwrap();
        assert_eq!(inc.is_strong, Verdict::Proved);
    }

    #[test]
    fn name_clash() {
        let eq = parse_theory(EQ).unwrap();
        let err = extend_morita(&eq, &ExtensionSpec::Terminal { name: Some("A".into()) });
        assert!(matches!(err, Err(MoritaError::NameClash(_))));
    }

    #[test]
    fn derived_names_are_stable() {
        let eq = parse_theory(EQ).unwrap();
        let c = class(&eq, &[v("x", "s"), v("y", "s")], "A(x,y)");
        let spec = ExtensionSpec::Quotient {
            base: "s".into(),
            class: c,
            name: None,
            map: None,
        };
        let a = extend_morita(&eq, &spec).unwrap();
        let b = extend_morita(&eq, &spec).unwrap();
        assert_eq!(a.theory.signature, b.theory.signature);
    }

    #[test]
    fn retraction_of_quotient() {
        let (eq, r) = quotient_of_eq();
        let ret = quotient_retraction(&eq, &r.theory, Budget::default()).unwrap();
        assert_eq!(ret.report.verdict(), Verdict::Proved, "{}", ret.report.to_text());
        assert_eq!(ret.retraction.is_translation, Verdict::Proved);
        assert_eq!(ret.retraction.is_equality_preserving, Verdict::Failed);
    }

    #[test]
    fn completion_of_eq() {
        let eq = parse_theory(EQ).unwrap();
        let c = exact_completion_slice(&eq, 1, Budget::default()).unwrap();
        let kept: Vec<&Candidate> = c
            .candidates
            .iter()
            .filter(|c| c.verdict == Verdict::Proved && c.duplicate_of.is_none())
            .collect();
        let forms: Vec<&str> = kept.iter().map(|c| c.formula.as_str()).collect();
        assert_eq!(forms, ["A(x, y)", "x = y"]);
        assert_eq!(c.extension.new_sorts().len(), 2);
    }

    #[test]
    fn realization_in_two() {
        let two = parse_theory(TWO).unwrap();
        let (r, _) = find_proper_realization(&two, 1, Budget::default()).unwrap();
        let r = r.unwrap();
        assert_eq!(print::formula(&r.phi.formula), "x = a");
        assert_eq!(print::formula(&r.psi.formula), "x = b");
    }

    #[test]
    fn coproduct_elimination_in_two() {
        let two = parse_theory(TWO).unwrap();
        let (r, _) = find_proper_realization(&two, 1, Budget::default()).unwrap();
        let r = r.unwrap();
        let e = eliminate_coproduct(&two, &r, "s", "s", Budget::new(10, 12, 5)).unwrap();
        assert_eq!(e.report.verdict(), Verdict::Proved, "{}", e.report.to_text());
        let mut m = FiniteModel::with_sizes(&two.signature, &[2]);
        m.functions.get_mut("a").unwrap().insert(vec![], 0);
        m.functions.get_mut("b").unwrap().insert(vec![], 1);
        let big = expand_model(&m, &e.extension).unwrap();
        assert_eq!(big.size(&e.sum), 4);
        assert!(check_model(&big, &e.extension.theory).unwrap().ok);
    }

    fn translation(src: &Theory, tgt: &Theory, text: &str) -> Reconstrual {
        let items = parse_document(text).unwrap();
        let RawItem::Translation(raw) = &items[0] else { panic!("not a translation") };
        elaborate_translation(raw, src, tgt).unwrap()
    }

    #[test]
    fn transport_along_swap() {
        let two = parse_theory(TWO).unwrap();
        let (r, _) = find_proper_realization(&two, 1, Budget::default()).unwrap();
        let f = translation(&two, &two, "translation F : TWO -> TWO { fun a => F(y) := y = b  fun b => G(y) := y = a }");
        let tr = verify_translation(&f, Budget::default());
        assert_eq!(tr.is_translation, Verdict::Proved, "{}", tr.report.to_text());
        let moved = transport_properness(&tr, &r.unwrap(), Budget::default()).unwrap();
        let same = |c: &SubstitutionClass, text: &str| {
            let x = &c.context[0];
            let want = parse_formula(&two.signature, text, std::slice::from_ref(x)).unwrap();
            [
                Sequent::new(vec![c.formula.clone()], want.clone()),
                Sequent::new(vec![want], c.formula.clone()),
            ]
            .iter()
            .all(|s| prove_sequent(&two, s, Budget::default()).unwrap().is_proved())
        };
        assert!(same(&moved.phi, "x1 = b"));
        assert!(same(&moved.psi, "x1 = a"));
    }

    #[test]
    fn identity_is_already_equality_preserving() {
        let eq = parse_theory(EQ).unwrap();
        let tr = verify_translation(&Reconstrual::identity(&eq), Budget::default());
        let (hat, ext) = make_equality_preserving(&tr, Budget::default()).unwrap();
        assert!(ext.specs.is_empty());
        assert_eq!(hat.is_equality_preserving, Verdict::Proved);
    }

    #[test]
    fn equality_to_a_is_repaired_by_quotient() {
        let eq = parse_theory(EQ).unwrap();
        let f = translation(&eq, &eq, "translation F : EQ -> EQ { eq s => E(x, y) := A(x, y) }");
        let tr = verify_translation(&f, Budget::default());
        assert_eq!(tr.is_translation, Verdict::Proved, "{}", tr.report.to_text());
        assert_ne!(tr.is_equality_preserving, Verdict::Proved);
        let (hat, ext) = make_equality_preserving(&tr, Budget::default()).unwrap();
        assert_eq!(ext.specs.len(), 1);
        assert_eq!(ext.discharge(Budget::default()).verdict(), Verdict::Proved);
        assert_eq!(hat.is_equality_preserving, Verdict::Proved, "{}", hat.report.to_text());
        let sort = &ext.new_sorts()[0];
        assert_eq!(hat.map.image_sorts("s").unwrap(), [sort.clone()]);
    }
}
