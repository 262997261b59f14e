//! Finite coherent-category presentations and their internal logic, finite
//! bounded distributive lattices, and the syntactic side: bounded slices of
//! the syntactic category, Lindenbaum lattices, the propositionality
//! classifiers and the round trip through the internal logic of a slice.

mod classify;
mod lattice;
mod roundtrip;
mod slice;

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{ParseError, RawCatDecl, RawCategory};
use crate::report::{Obligation, VerificationReport};
use crate::syntax::{Formula, Sequent, Signature, SyntaxError, Term, Theory, Var};
use crate::translation::TranslationError;

pub use classify::{classify_propositionality, Decomposition, PropClassification};
pub use lattice::{elaborate_lattice, lattice_presentation, BDLattice};
pub use roundtrip::{canonical_round_trip, RoundTrip};
pub use slice::{
    existential_reflector, lindenbaum, sample_models, subobject_leq, syntactic_slice, LindenbaumLattice, SliceMorphism,
    SliceObject, SyntacticSlice,
};

#[derive(Debug, Error)]
pub enum CatError {
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("duplicate name {0}")]
    Duplicate(String),
    #[error("ill-typed declaration: {0}")]
    Typing(String),
    #[error("presentation is not coherent: {0}")]
    Invalid(String),
    #[error("not a lattice: {0}")]
    NotLattice(String),
    #[error("{0}")]
    Context(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Translation(#[from] TranslationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignatedProduct {
    pub object: String,
    pub left: String,
    pub right: String,
    pub p1: String,
    pub p2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignatedEqualizer {
    pub object: String,
    pub f: String,
    pub g: String,
    pub e: String,
}

/// `m1 v m2 = join` in the subobject poset of `base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignatedJoin {
    pub base: String,
    pub m1: String,
    pub m2: String,
    pub join: String,
}

/// A finite category with designated coherent structure. Identities are
/// implicit and named `id_X`; the composition table lists composites of
/// non-identity pairs as `(g, f) -> g.f`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FinCatPresentation {
    pub name: String,
    pub objects: Vec<String>,
    pub morphisms: IndexMap<String, (String, String)>,
    pub comp: BTreeMap<(String, String), String>,
    pub terminal: Vec<String>,
    pub products: Vec<DesignatedProduct>,
    pub equalizers: Vec<DesignatedEqualizer>,
    pub joins: Vec<DesignatedJoin>,
    pub bottoms: Vec<(String, String)>,
    pub covers: Vec<String>,
}

pub fn identity_name(object: &str) -> String {
    format!("id_{object}")
}

impl FinCatPresentation {
    pub fn new(name: impl Into<String>) -> Self {
        FinCatPresentation {
            name: name.into(),
            ..Default::default()
        }
    }

    /// The object whose identity is `name`, if any.
    pub fn identity_of(&self, name: &str) -> Option<&str> {
        let x = name.strip_prefix("id_")?;
        self.objects.iter().find(|o| o.as_str() == x).map(|o| o.as_str())
    }

    pub fn typing(&self, name: &str) -> Option<(String, String)> {
        if let Some(x) = self.identity_of(name) {
            return Some((x.to_string(), x.to_string()));
        }
        self.morphisms.get(name).cloned()
    }

    /// Identities in object order, then declared morphisms.
    pub fn all_morphisms(&self) -> Vec<String> {
        self.objects
            .iter()
            .map(|o| identity_name(o))
            .chain(self.morphisms.keys().cloned())
            .collect()
    }

    pub fn hom(&self, a: &str, b: &str) -> Vec<String> {
        self.all_morphisms()
            .into_iter()
            .filter(|m| self.typing(m).is_some_and(|(d, c)| d == a && c == b))
            .collect()
    }

    /// `g . f`, or `None` when the pair is not composable or the table has
    /// no entry.
    pub fn compose(&self, g: &str, f: &str) -> Option<String> {
        let (_, cf) = self.typing(f)?;
        let (dg, _) = self.typing(g)?;
        if cf != dg {
            return None;
        }
        if self.identity_of(f).is_some() {
            return Some(g.to_string());
        }
        if self.identity_of(g).is_some() {
            return Some(f.to_string());
        }
        self.comp.get(&(g.to_string(), f.to_string())).cloned()
    }

    fn add_object(&mut self, o: &str) -> Result<(), CatError> {
        if self.objects.iter().any(|x| x == o) {
            return Err(CatError::Duplicate(o.to_string()));
        }
        self.objects.push(o.to_string());
        Ok(())
    }

    fn require_object(&self, o: &str) -> Result<(), CatError> {
        if self.objects.iter().any(|x| x == o) {
            Ok(())
        } else {
            Err(CatError::UnknownObject(o.to_string()))
        }
    }

    fn require_morphism(&self, m: &str) -> Result<(String, String), CatError> {
        self.typing(m).ok_or_else(|| CatError::UnknownMorphism(m.to_string()))
    }

    /// Monos named in the joins and bottoms over `base`, with `id_base`
    /// first.
    pub fn subobjects(&self, base: &str) -> Vec<String> {
        let mut out = vec![identity_name(base)];
        let named = self
            .joins
            .iter()
            .filter(|j| j.base == base)
            .flat_map(|j| [j.m1.clone(), j.m2.clone(), j.join.clone()])
            .chain(self.bottoms.iter().filter(|(b, _)| b == base).map(|(_, m)| m.clone()));
        for m in named {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    /// Objects carrying a subobject poset.
    pub fn lattice_bases(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for b in self.joins.iter().map(|j| &j.base).chain(self.bottoms.iter().map(|(b, _)| b)) {
            if !out.contains(b) {
                out.push(b.clone());
            }
        }
        out
    }
}

/// Build a presentation from its DSL form.
pub fn elaborate_category(raw: &RawCategory) -> Result<FinCatPresentation, CatError> {
    let mut c = FinCatPresentation::new(raw.name.clone());
    for (d, _) in &raw.decls {
        if let RawCatDecl::Ob(names) = d {
            for n in names {
                c.add_object(n)?;
            }
        }
    }
    for (d, _) in &raw.decls {
        if let RawCatDecl::Mor(f, a, b) = d {
            c.require_object(a)?;
            c.require_object(b)?;
            if c.morphisms.contains_key(f) || c.identity_of(f).is_some() {
                return Err(CatError::Duplicate(f.clone()));
            }
            c.morphisms.insert(f.clone(), (a.clone(), b.clone()));
        }
    }
    for (d, _) in &raw.decls {
        match d {
            RawCatDecl::Ob(_) | RawCatDecl::Mor(..) => {}
            RawCatDecl::Comp(g, f, h) => {
                let (df, cf) = c.require_morphism(f)?;
                let (dg, cg) = c.require_morphism(g)?;
                let (dh, ch) = c.require_morphism(h)?;
                if cf != dg || dh != df || ch != cg {
                    return Err(CatError::Typing(format!("comp {g}.{f} = {h}")));
                }
                if c.comp.insert((g.clone(), f.clone()), h.clone()).is_some() {
                    return Err(CatError::Duplicate(format!("{g}.{f}")));
                }
            }
            RawCatDecl::Terminal(x) => {
                c.require_object(x)?;
                c.terminal.push(x.clone());
            }
            RawCatDecl::Product(p, a, b, p1, p2) => {
                for o in [p, a, b] {
                    c.require_object(o)?;
                }
                if c.require_morphism(p1)? != (p.clone(), a.clone()) || c.require_morphism(p2)? != (p.clone(), b.clone()) {
                    return Err(CatError::Typing(format!("projections of {p} = {a} x {b}")));
                }
                c.products.push(DesignatedProduct {
                    object: p.clone(),
                    left: a.clone(),
                    right: b.clone(),
                    p1: p1.clone(),
                    p2: p2.clone(),
                });
            }
            RawCatDecl::Equalizer(e_obj, f, g, e) => {
                c.require_object(e_obj)?;
                let tf = c.require_morphism(f)?;
                let tg = c.require_morphism(g)?;
                let te = c.require_morphism(e)?;
                if tf != tg || te != (e_obj.clone(), tf.0.clone()) {
                    return Err(CatError::Typing(format!("equalizer {e_obj} = eq({f},{g}) via {e}")));
                }
                c.equalizers.push(DesignatedEqualizer {
                    object: e_obj.clone(),
                    f: f.clone(),
                    g: g.clone(),
                    e: e.clone(),
                });
            }
            RawCatDecl::Join(b, m1, m2, m3) => {
                c.require_object(b)?;
                for m in [m1, m2, m3] {
                    if c.require_morphism(m)?.1 != *b {
                        return Err(CatError::Typing(format!("{m} is not a subobject of {b}")));
                    }
                }
                c.joins.push(DesignatedJoin {
                    base: b.clone(),
                    m1: m1.clone(),
                    m2: m2.clone(),
                    join: m3.clone(),
                });
            }
            RawCatDecl::Bottom(b, m) => {
                c.require_object(b)?;
                if c.require_morphism(m)?.1 != *b {
                    return Err(CatError::Typing(format!("{m} is not a subobject of {b}")));
                }
                c.bottoms.push((b.clone(), m.clone()));
            }
            RawCatDecl::Cover(f) => {
                c.require_morphism(f)?;
                c.covers.push(f.clone());
            }
        }
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// validation

/// Check the category laws and the designated structure against the finite
/// data. Every check is one report entry; failures name the offending data.
pub fn validate_coherent_presentation(c: &FinCatPresentation) -> VerificationReport {
    let mut r = VerificationReport::new(format!("category {}", c.name));
    let ms = c.all_morphisms();

    let mut missing = Vec::new();
    for f in &ms {
        for g in &ms {
            if c.identity_of(f).is_some() || c.identity_of(g).is_some() {
                continue;
            }
            let (_, cf) = c.typing(f).expect("declared");
            let (dg, _) = c.typing(g).expect("declared");
            if cf == dg && !c.comp.contains_key(&(g.clone(), f.clone())) {
                missing.push(format!("{g}.{f}"));
            }
        }
    }
    r.push(Obligation::check(
        "category:table",
        "every composable pair has a composite",
        missing.is_empty(),
        if missing.is_empty() { String::new() } else { format!("missing {}", missing.join(", ")) },
    ));

    let mut bad_units = Vec::new();
    for ((g, f), h) in &c.comp {
        let expect = if c.identity_of(f).is_some() {
            Some(g)
        } else if c.identity_of(g).is_some() {
            Some(f)
        } else {
            None
        };
        if let Some(e) = expect {
            if e != h {
                bad_units.push(format!("{g}.{f} = {h}"));
            }
        }
    }
    r.push(Obligation::check(
        "category:unit",
        "identities are units",
        bad_units.is_empty(),
        bad_units.join(", "),
    ));

    let mut bad_assoc = Vec::new();
    for f in &ms {
        for g in &ms {
            let Some(gf) = c.compose(g, f) else { continue };
            for h in &ms {
                let Some(hg) = c.compose(h, g) else { continue };
                let (Some(a), Some(b)) = (c.compose(h, &gf), c.compose(&hg, f)) else { continue };
                if a != b {
                    bad_assoc.push(format!("{h}.{g}.{f}: {h}.({gf}) = {a} but ({hg}).{f} = {b}"));
                }
            }
        }
    }
    r.push(Obligation::check(
        "category:assoc",
        "composition is associative",
        bad_assoc.is_empty(),
        if bad_assoc.is_empty() { String::new() } else { format!("fails at {}", bad_assoc.join("; ")) },
    ));

    for t in &c.terminal {
        let bad: Vec<String> = c
            .objects
            .iter()
            .filter(|x| c.hom(x, t).len() != 1)
            .map(|x| format!("|hom({x},{t})| = {}", c.hom(x, t).len()))
            .collect();
        r.push(Obligation::check(format!("terminal:{t}"), format!("{t} is terminal"), bad.is_empty(), bad.join(", ")));
    }

    for p in &c.products {
        let mut bad = Vec::new();
        for x in &c.objects {
            let pairs: Vec<(String, String)> = c
                .hom(x, &p.object)
                .iter()
                .map(|h| (c.compose(&p.p1, h).unwrap_or_default(), c.compose(&p.p2, h).unwrap_or_default()))
                .collect();
            let distinct: BTreeSet<&(String, String)> = pairs.iter().collect();
            let expected = c.hom(x, &p.left).len() * c.hom(x, &p.right).len();
            if distinct.len() != pairs.len() || pairs.len() != expected {
                bad.push(format!("from {x}: {} maps into {} but {expected} pairs", pairs.len(), p.object));
            }
        }
        r.push(Obligation::check(
            format!("product:{}={}x{}", p.object, p.left, p.right),
            format!("{} = {} x {} with {} {}", p.object, p.left, p.right, p.p1, p.p2),
            bad.is_empty(),
            bad.join(", "),
        ));
    }

    for e in &c.equalizers {
        let mut bad = Vec::new();
        if c.compose(&e.f, &e.e) != c.compose(&e.g, &e.e) {
            bad.push(format!("{}.{} differs from {}.{}", e.f, e.e, e.g, e.e));
        }
        let (x, _) = c.typing(&e.f).expect("declared");
        for z in &c.objects {
            let images: Vec<String> = c.hom(z, &e.object).iter().filter_map(|k| c.compose(&e.e, k)).collect();
            let distinct: BTreeSet<&String> = images.iter().collect();
            let equalized: BTreeSet<String> = c
                .hom(z, &x)
                .into_iter()
                .filter(|h| c.compose(&e.f, h) == c.compose(&e.g, h))
                .collect();
            if distinct.len() != images.len() || distinct.into_iter().cloned().collect::<BTreeSet<_>>() != equalized {
                bad.push(format!("from {z}"));
            }
        }
        r.push(Obligation::check(
            format!("equalizer:{}=eq({},{})", e.object, e.f, e.g),
            format!("{} = eq({},{}) via {}", e.object, e.f, e.g, e.e),
            bad.is_empty(),
            bad.join(", "),
        ));
    }

    let mut monos: Vec<String> = Vec::new();
    for b in c.lattice_bases() {
        for m in c.subobjects(&b) {
            if !monos.contains(&m) {
                monos.push(m);
            }
        }
    }
    for m in &monos {
        let (d, _) = c.typing(m).expect("declared");
        let bad: Vec<String> = c
            .objects
            .iter()
            .filter(|z| {
                let images: Vec<Option<String>> = c.hom(z, &d).iter().map(|k| c.compose(m, k)).collect();
                images.iter().collect::<BTreeSet<_>>().len() != images.len()
            })
            .cloned()
            .collect();
        r.push(Obligation::check(
            format!("mono:{m}"),
            format!("{m} is monic"),
            bad.is_empty(),
            if bad.is_empty() { String::new() } else { format!("not left-cancellable from {}", bad.join(", ")) },
        ));
    }

    for f in &c.covers {
        let (_, y) = c.typing(f).expect("declared");
        let bad: Vec<String> = c
            .objects
            .iter()
            .filter(|z| {
                let images: Vec<Option<String>> = c.hom(&y, z).iter().map(|k| c.compose(k, f)).collect();
                images.iter().collect::<BTreeSet<_>>().len() != images.len()
            })
            .cloned()
            .collect();
        r.push(Obligation::check(
            format!("cover:{f}"),
            format!("{f} is epic"),
            bad.is_empty(),
            if bad.is_empty() { String::new() } else { format!("not right-cancellable into {}", bad.join(", ")) },
        ));
    }

    for b in c.lattice_bases() {
        subobject_checks(c, &b, &mut r);
    }
    r
}

/// Order, joins, bottom, meets and distributivity of the designated
/// subobjects of `base`.
fn subobject_checks(c: &FinCatPresentation, base: &str, r: &mut VerificationReport) {
    let subs = c.subobjects(base);
    let n = subs.len();
    let dom = |m: &str| c.typing(m).expect("declared").0;
    let leq: Vec<Vec<bool>> = subs
        .iter()
        .map(|m| {
            subs.iter()
                .map(|k| c.hom(&dom(m), &dom(k)).iter().any(|h| c.compose(k, h).as_deref() == Some(m)))
                .collect()
        })
        .collect();
    let same = |i: usize, j: usize| leq[i][j] && leq[j][i];
    let index = |m: &str| subs.iter().position(|x| x == m).expect("listed");
    let lub = |i: usize, j: usize| -> Option<usize> {
        let ups: Vec<usize> = (0..n).filter(|&u| leq[i][u] && leq[j][u]).collect();
        ups.iter().copied().find(|&u| ups.iter().all(|&v| leq[u][v]))
    };
    let glb = |i: usize, j: usize| -> Option<usize> {
        let downs: Vec<usize> = (0..n).filter(|&u| leq[u][i] && leq[u][j]).collect();
        downs.iter().copied().find(|&u| downs.iter().all(|&v| leq[v][u]))
    };

    for jn in c.joins.iter().filter(|j| j.base == base) {
        let (i, j, k) = (index(&jn.m1), index(&jn.m2), index(&jn.join));
        let ok = lub(i, j).is_some_and(|u| same(u, k));
        r.push(Obligation::check(
            format!("sub:{base}:join:{}v{}", jn.m1, jn.m2),
            format!("{} v {} = {} in Sub({base})", jn.m1, jn.m2, jn.join),
            ok,
            if ok { String::new() } else { format!("{} is not the least upper bound", jn.join) },
        ));
    }
    for (_, m) in c.bottoms.iter().filter(|(b, _)| b == base) {
        let i = index(m);
        let bad: Vec<&String> = (0..n).filter(|&k| !leq[i][k]).map(|k| &subs[k]).collect();
        r.push(Obligation::check(
            format!("sub:{base}:bottom"),
            format!("{m} is least in Sub({base})"),
            bad.is_empty(),
            if bad.is_empty() { String::new() } else { format!("not below {}", bad.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")) },
        ));
    }

    let mut missing = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if lub(i, j).is_none() {
                missing.push(format!("join of {} and {}", subs[i], subs[j]));
            }
            if glb(i, j).is_none() {
                missing.push(format!("meet of {} and {}", subs[i], subs[j]));
            }
        }
    }
    let lattice = missing.is_empty();
    r.push(Obligation::check(
        format!("sub:{base}:lattice"),
        format!("Sub({base}) is a lattice"),
        lattice,
        missing.join(", "),
    ));
    if lattice {
        let mut bad = None;
        'outer: for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let lhs = glb(a, lub(b, d).expect("lattice")).expect("lattice");
                    let rhs = lub(glb(a, b).expect("lattice"), glb(a, d).expect("lattice")).expect("lattice");
                    if !same(lhs, rhs) {
                        bad = Some(format!("{} ^ ({} v {})", subs[a], subs[b], subs[d]));
                        break 'outer;
                    }
                }
            }
        }
        r.push(Obligation::check(
            format!("sub:{base}:distributive"),
            format!("Sub({base}) is distributive"),
            bad.is_none(),
            bad.map(|b| format!("fails at {b}")).unwrap_or_default(),
        ));
    }
}

// ---------------------------------------------------------------------------
// internal logic

fn app(f: &str, arg: Term, sort: &str) -> Term {
    Term::App {
        fun: f.to_string(),
        args: vec![arg],
        sort: sort.to_string(),
    }
}

/// The internal logic of a validated presentation.
pub fn internal_logic(c: &FinCatPresentation) -> Result<Theory, CatError> {
    let report = validate_coherent_presentation(c);
    let failed: Vec<String> = report
        .entries
        .iter()
        .filter(|e| !e.verdict.is_proved())
        .map(|e| e.name.clone())
        .collect();
    if !failed.is_empty() {
        return Err(CatError::Invalid(failed.join(", ")));
    }
    Ok(theory_of_presentation(c))
}

/// The internal-logic theory of `c` without validating it first: identity
/// axioms, one triangle per table entry, then the product, equalizer,
/// terminal, join, bottom and cover schemas over the designated structure.
pub fn theory_of_presentation(c: &FinCatPresentation) -> Theory {
    let mut sig = Signature::new();
    for o in &c.objects {
        sig.add_sort(o.clone()).expect("distinct objects");
    }
    for m in c.all_morphisms() {
        let (d, cd) = c.typing(&m).expect("declared");
        sig.add_function(m, vec![d], cd).expect("distinct morphisms");
    }
    let mut t = Theory::new(format!("T_{}", c.name), sig);
    let mut add = |name: String, s: Sequent| t.add_axiom(name, s).expect("well-typed schema");
    let typing = |m: &str| c.typing(m).expect("declared");

    for o in &c.objects {
        let x = Var::new("x", o);
        add(format!("id:{o}"), Sequent::fact(Formula::eq(app(&identity_name(o), x.term(), o), x.term())));
    }
    for ((g, f), h) in &c.comp {
        let (d, mid) = typing(f);
        let (_, cd) = typing(g);
        let x = Var::new("x", d);
        let lhs = app(g, app(f, x.term(), &mid), &cd);
        add(format!("comp:{g}.{f}"), Sequent::fact(Formula::eq(lhs, app(h, x.term(), &cd))));
    }
    for p in &c.products {
        let (a, b) = (Var::new("a", &p.object), Var::new("b", &p.object));
        let (x, y) = (Var::new("x", &p.left), Var::new("y", &p.right));
        let pi = |m: &str, v: &Var, s: &str| app(m, v.term(), s);
        add(
            format!("product:{}={}x{}:unique", p.object, p.left, p.right),
            Sequent::new(
                vec![
                    Formula::eq(pi(&p.p1, &a, &p.left), pi(&p.p1, &b, &p.left)),
                    Formula::eq(pi(&p.p2, &a, &p.right), pi(&p.p2, &b, &p.right)),
                ],
                Formula::eq(a.term(), b.term()),
            ),
        );
        add(
            format!("product:{}={}x{}:exists", p.object, p.left, p.right),
            Sequent::fact(Formula::exists(
                a.clone(),
                Formula::and(
                    Formula::eq(pi(&p.p1, &a, &p.left), x.term()),
                    Formula::eq(pi(&p.p2, &a, &p.right), y.term()),
                ),
            )),
        );
    }
    for e in &c.equalizers {
        let (xo, yo) = typing(&e.f);
        let (x1, x2) = (Var::new("x", &e.object), Var::new("y", &e.object));
        add(
            format!("equalizer:{}=eq({},{}):mono", e.object, e.f, e.g),
            Sequent::new(
                vec![Formula::eq(app(&e.e, x1.term(), &xo), app(&e.e, x2.term(), &xo))],
                Formula::eq(x1.term(), x2.term()),
            ),
        );
        let ex = app(&e.e, x1.term(), &xo);
        add(
            format!("equalizer:{}=eq({},{}):commutes", e.object, e.f, e.g),
            Sequent::fact(Formula::eq(app(&e.f, ex.clone(), &yo), app(&e.g, ex, &yo))),
        );
        let y = Var::new("y", &xo);
        add(
            format!("equalizer:{}=eq({},{}):universal", e.object, e.f, e.g),
            Sequent::new(
                vec![Formula::eq(app(&e.f, y.term(), &yo), app(&e.g, y.term(), &yo))],
                Formula::exists(x1.clone(), Formula::eq(app(&e.e, x1.term(), &xo), y.term())),
            ),
        );
    }
    for o in &c.terminal {
        let (x, y) = (Var::new("x", o), Var::new("y", o));
        add(format!("terminal:{o}:unique"), Sequent::fact(Formula::eq(x.term(), y.term())));
        add(
            format!("terminal:{o}:inhabited"),
            Sequent::fact(Formula::exists(x.clone(), Formula::eq(x.term(), x.term()))),
        );
    }
    let image = |m: &str, var: &str, x: &Var| {
        let (d, cd) = typing(m);
        let v = Var::new(var, d);
        Formula::exists(v.clone(), Formula::eq(app(m, v.term(), &cd), x.term()))
    };
    for j in &c.joins {
        let x = Var::new("x", &j.base);
        let parts = Formula::or(image(&j.m1, "a", &x), image(&j.m2, "b", &x));
        let whole = image(&j.join, "c", &x);
        let tag = format!("join:{}v{}", j.m1, j.m2);
        add(format!("{tag}:intro"), Sequent::new(vec![parts.clone()], whole.clone()));
        add(format!("{tag}:elim"), Sequent::new(vec![whole], parts));
    }
    for (_, m) in &c.bottoms {
        let (d, _) = typing(m);
        let x = Var::new("x", d);
        add(format!("bottom:{m}"), Sequent::new(vec![Formula::eq(x.term(), x.term())], Formula::Bot));
    }
    for f in &c.covers {
        let (_, cd) = typing(f);
        add(format!("cover:{f}"), Sequent::fact(image(f, "x", &Var::new("y", cd))));
    }
    t
}

/// Render a presentation in the category DSL.
pub fn render_presentation(c: &FinCatPresentation) -> String {
    let mut out = format!("category {} {{\n", c.name);
    out.push_str(&format!("  ob {}\n", c.objects.join(" ")));
    for (m, (a, b)) in &c.morphisms {
        out.push_str(&format!("  mor {m} : {a} -> {b}\n"));
    }
    for ((g, f), h) in &c.comp {
        out.push_str(&format!("  comp {g}.{f} = {h}\n"));
    }
    for t in &c.terminal {
        out.push_str(&format!("  terminal {t}\n"));
    }
    for p in &c.products {
        out.push_str(&format!("  product {} = {} x {} with {} {}\n", p.object, p.left, p.right, p.p1, p.p2));
    }
    for e in &c.equalizers {
        out.push_str(&format!("  equalizer {} = eq({}, {}) via {}\n", e.object, e.f, e.g, e.e));
    }
    for (b, m) in &c.bottoms {
        out.push_str(&format!("  bottom on Sub({b}): {m}\n"));
    }
    for j in &c.joins {
        out.push_str(&format!("  join on Sub({}): {} v {} = {}\n", j.base, j.m1, j.m2, j.join));
    }
    for f in &c.covers {
        out.push_str(&format!("  cover {f}\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_document, RawItem};
    use crate::print;

    pub(crate) fn category(text: &str) -> FinCatPresentation {
        let items = parse_document(text).unwrap();
        let RawItem::Category(raw) = &items[0] else { panic!("not a category") };
        elaborate_category(raw).unwrap()
    }

    fn l2() -> FinCatPresentation {
        category(include_str!("../../fixtures/l2.cat"))
    }

    #[test]
    fn two_element_chain_is_coherent() {
        let r = validate_coherent_presentation(&l2());
        assert!(r.verdict().is_proved(), "{}", r.to_text());
        assert!(r.get("sub:O:distributive").is_some());
    }

    #[test]
    fn broken_associativity_is_located() {
        let c = category(
            "category B { ob X
               mor f : X -> X  mor g : X -> X
               comp f.f = g  comp f.g = f  comp g.f = g  comp g.g = g }",
        );
        let r = validate_coherent_presentation(&c);
        let e = r.get("category:assoc").unwrap();
        assert!(!e.verdict.is_proved());
        assert!(matches!(&e.evidence, crate::report::Evidence::Note(n) if n.contains("fails at")));
        assert!(internal_logic(&c).is_err());
    }

    #[test]
    fn terminal_schemas() {
        let t = internal_logic(&l2()).unwrap();
        let show = |n: &str| print::sequent(&t.axiom(n).unwrap().sequent);
        assert_eq!(show("terminal:O:unique"), "|- x = y");
        assert_eq!(show("terminal:O:inhabited"), "|- exists x:O . x = x");
        assert_eq!(show("bottom:z"), "x = x |- bot");
    }

    #[test]
    fn cover_schema() {
        let c = category("category C { ob X Y  mor f : X -> Y  cover f }");
        let t = theory_of_presentation(&c);
        assert_eq!(print::sequent(&t.axiom("cover:f").unwrap().sequent), "|- exists x:X . f(x) = y");
    }

    #[test]
    fn one_object_category() {
        let c = category("category One { ob X }");
        let t = internal_logic(&c).unwrap();
        assert_eq!(t.signature.sorts, ["X"]);
        assert_eq!(t.signature.functions.keys().collect::<Vec<_>>(), ["id_X"]);
        assert_eq!(t.axioms.len(), 1);
        assert_eq!(print::sequent(&t.axioms[0].sequent), "|- id_X(x) = x");
    }

    #[test]
    fn render_round_trips() {
        let c = l2();
        assert_eq!(category(&render_presentation(&c)), c);
    }
}
