//! Bounded slices of the syntactic category, Lindenbaum lattices, the
//! subobject order and the existential reflector.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BDLattice, CatError};
use crate::enumerate::{formulas_mentioning_all, term_tuples, terms, Enumerator};
use crate::model::{models_up_to, search_space, Assignment, FiniteModel};
use crate::print;
use crate::prover::{prove_sequent, Budget, ProofResult};
use crate::report::Verdict;
use crate::syntax::{substitute, Formula, Sequent, SubstitutionClass, Term, Theory, Var};

/// Extensions of a formula, or values of a term tuple, in each sample
/// model.
pub(crate) type Fingerprint = Vec<Vec<Vec<usize>>>;

const SAMPLE_LIMIT: usize = 48;
const SAMPLE_SPACE: u128 = 50_000;
const MAX_CONTEXT: usize = 3;
const LINDENBAUM_CAP: usize = 64;

/// Models of `t` used to separate formulae before any proof is attempted:
/// all models up to the largest carrier size whose search space stays
/// small, capped in number.
pub fn sample_models(t: &Theory) -> Vec<FiniteModel> {
    let size = (1..=3).rev().find(|&k| search_space(&t.signature, k) <= SAMPLE_SPACE).unwrap_or(0);
    models_up_to(t, size, SAMPLE_LIMIT)
}

pub(crate) fn ctx_vars(prefix: &str, sorts: &[String]) -> Vec<Var> {
    sorts
        .iter()
        .enumerate()
        .map(|(i, s)| Var::new(format!("{prefix}{}", i + 1), s.clone()))
        .collect()
}

pub(crate) fn fingerprint(models: &[FiniteModel], ctx: &[Var], f: &Formula) -> Fingerprint {
    models.iter().map(|m| m.extension(ctx, f).unwrap_or_default()).collect()
}

fn fp_leq(a: &Fingerprint, b: &Fingerprint) -> bool {
    a.iter().zip(b).all(|(x, y)| x.iter().all(|t| y.contains(t)))
}

pub(crate) fn term_fingerprint(models: &[FiniteModel], ctx: &[Var], dom: &Formula, ts: &[Term]) -> Fingerprint {
    models
        .iter()
        .map(|m| {
            m.extension(ctx, dom)
                .unwrap_or_default()
                .into_iter()
                .map(|a| {
                    let env: Assignment = ctx.iter().cloned().zip(a).collect();
                    ts.iter().map(|t| m.eval_term(t, &env).unwrap_or(usize::MAX)).collect()
                })
                .collect()
        })
        .collect()
}

/// Verdict of `ante |- succ`; prover errors count as Unknown.
pub(crate) fn entails(t: &Theory, ante: &Formula, succ: &Formula, b: Budget) -> Verdict {
    let ante = if *ante == Formula::Top { vec![] } else { vec![ante.clone()] };
    match prove_sequent(t, &Sequent::new(ante, succ.clone()), b) {
        Ok(r) => Verdict::of(&r),
        Err(_) => Verdict::Unknown,
    }
}

pub(crate) fn bi_entails(t: &Theory, a: &Formula, c: &Formula, b: Budget) -> Verdict {
    match entails(t, a, c, b) {
        Verdict::Proved => entails(t, c, a, b),
        v => v,
    }
}

/// Outcome of looking a formula up among class representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Lookup {
    Found(usize),
    Absent,
    Undecided,
}

/// Representatives of bi-entailment classes in one context, in the order
/// they were first met.
pub(crate) struct Classes<'a> {
    t: &'a Theory,
    b: Budget,
    models: &'a [FiniteModel],
    pub ctx: Vec<Var>,
    pub reps: Vec<(Formula, Fingerprint)>,
    pub log: Vec<String>,
}

impl<'a> Classes<'a> {
    pub fn new(t: &'a Theory, b: Budget, models: &'a [FiniteModel], ctx: Vec<Var>) -> Self {
        Classes {
            t,
            b,
            models,
            ctx,
            reps: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn lookup(&self, f: &Formula, fp: &Fingerprint) -> Lookup {
        let mut undecided = false;
        for (i, (r, rfp)) in self.reps.iter().enumerate() {
            if rfp != fp {
                continue;
            }
            match bi_entails(self.t, r, f, self.b) {
                Verdict::Proved => return Lookup::Found(i),
                Verdict::Unknown => undecided = true,
                Verdict::Failed => {}
            }
        }
        if undecided {
            Lookup::Undecided
        } else {
            Lookup::Absent
        }
    }

    /// Index of the class of `f`, adding it when no representative is
    /// provably equivalent.
    pub fn classify(&mut self, f: Formula) -> usize {
        let fp = fingerprint(self.models, &self.ctx, &f);
        match self.lookup(&f, &fp) {
            Lookup::Found(i) => i,
            found => {
                if found == Lookup::Undecided {
                    self.log.push(format!(
                        "kept apart without proof: {}",
                        print::class(&self.ctx, &f)
                    ));
                }
                self.reps.push((f, fp));
                self.reps.len() - 1
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceObject {
    pub name: String,
    pub class: SubstitutionClass,
    #[serde(skip)]
    pub(crate) fingerprint: Fingerprint,
}

/// A morphism `x |-> t(x)`; its formula is `phi(x) & psi(y) & y = t(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceMorphism {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub terms: Vec<Term>,
    pub identity: bool,
    #[serde(skip)]
    pub(crate) fingerprint: Fingerprint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntacticSlice {
    pub theory: Theory,
    pub depth: usize,
    pub budget: Budget,
    pub objects: Vec<SliceObject>,
    pub morphisms: Vec<SliceMorphism>,
    /// `(g, f) -> g.f` by morphism index.
    pub composition: BTreeMap<(usize, usize), usize>,
    /// Composable pairs whose composite is not among the morphisms.
    pub open_composites: Vec<(usize, usize)>,
    pub log: Vec<String>,
    /// No merge or morphism was left undecided.
    pub complete: bool,
    #[serde(skip)]
    pub(crate) models: Vec<FiniteModel>,
}

/// Sort lists of length at most the largest arity in the signature.
fn contexts(t: &Theory) -> Vec<Vec<String>> {
    let sig = &t.signature;
    let arity = sig
        .relations
        .values()
        .map(Vec::len)
        .chain(sig.functions.values().map(|f| f.domain.len() + 1))
        .max()
        .unwrap_or(0);
    let max = if sig.sorts.is_empty() { 0 } else { arity.clamp(1, MAX_CONTEXT) };
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for c in &layer {
            for s in &sig.sorts {
                let mut c2 = c.clone();
                c2.push(s.clone());
                next.push(c2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Objects are bi-entailment classes of `top`, `bot` and the formulae up
/// to `depth` that mention their whole context; morphisms are term tuples
/// `t` with `phi |- psi(t)` proved, identified when provably equal.
pub fn syntactic_slice(t: &Theory, depth: usize, b: Budget) -> SyntacticSlice {
    let models = sample_models(t);
    let ctxs = contexts(t);
    let per_ctx: Vec<(Vec<(Formula, Fingerprint)>, Vec<String>)> = ctxs
        .par_iter()
        .map(|sorts| {
            let ctx = ctx_vars("x", sorts);
            let mut classes = Classes::new(t, b, &models, ctx.clone());
            let cands = [Formula::Top, Formula::Bot]
                .into_iter()
                .chain(formulas_mentioning_all(&t.signature, &ctx, depth));
            for f in cands {
                classes.classify(f);
            }
            (classes.reps, classes.log)
        })
        .collect();
    let mut objects = Vec::new();
    let mut log = Vec::new();
    for (sorts, (reps, l)) in ctxs.iter().zip(per_ctx) {
        let ctx = ctx_vars("x", sorts);
        for (f, fp) in reps {
            objects.push(SliceObject {
                name: format!("o{}", objects.len() + 1),
                class: SubstitutionClass::new(ctx.clone(), f),
                fingerprint: fp,
            });
        }
        log.extend(l);
    }
    let mut slice = SyntacticSlice {
        theory: t.clone(),
        depth,
        budget: b,
        objects,
        morphisms: Vec::new(),
        composition: BTreeMap::new(),
        open_composites: Vec::new(),
        complete: true,
        log,
        models,
    };
    slice.enumerate_morphisms();
    slice.compose_all();
    slice.complete = slice.log.is_empty();
    slice
}

impl SyntacticSlice {
    pub fn sorts_of(&self, o: usize) -> Vec<String> {
        self.objects[o].class.sorts()
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.morphisms.len())
            .filter(|&m| self.morphisms[m].source == a && self.morphisms[m].target == b)
            .collect()
    }

    pub fn identity(&self, o: usize) -> usize {
        (0..self.morphisms.len())
            .find(|&m| self.morphisms[m].identity && self.morphisms[m].source == o)
            .expect("every object has an identity")
    }

    /// First pair of objects with more than one morphism between them.
    pub fn non_thin_pair(&self) -> Option<(usize, usize)> {
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for m in &self.morphisms {
            *count.entry((m.source, m.target)).or_default() += 1;
        }
        count.into_iter().find(|(_, n)| *n > 1).map(|(k, _)| k)
    }

    pub fn is_thin(&self) -> bool {
        self.non_thin_pair().is_none()
    }

    /// The object `[top]` over `sorts`.
    pub fn top_object(&self, sorts: &[String]) -> Option<usize> {
        (0..self.objects.len()).find(|&o| self.sorts_of(o) == sorts && self.objects[o].class.formula == Formula::Top)
    }

    /// The object provably equivalent to `f`, read over `x1..xn` of `sorts`.
    pub(crate) fn find_object(&self, sorts: &[String], f: &Formula) -> Lookup {
        let ctx = ctx_vars("x", sorts);
        let fp = fingerprint(&self.models, &ctx, f);
        let mut undecided = false;
        for (o, obj) in self.objects.iter().enumerate() {
            if obj.class.sorts() != sorts || obj.fingerprint != fp {
                continue;
            }
            match bi_entails(&self.theory, &obj.class.formula, f, self.budget) {
                Verdict::Proved => return Lookup::Found(o),
                Verdict::Unknown => undecided = true,
                Verdict::Failed => {}
            }
        }
        if undecided {
            Lookup::Undecided
        } else {
            Lookup::Absent
        }
    }

    /// The morphism `source -> target` provably equal to `x |-> ts`.
    pub(crate) fn find_morphism(&self, source: usize, target: usize, ts: &[Term]) -> Option<usize> {
        let class = &self.objects[source].class;
        let fp = term_fingerprint(&self.models, &class.context, &class.formula, ts);
        self.hom(source, target).into_iter().find(|&m| {
            let cand = &self.morphisms[m];
            cand.fingerprint == fp && self.equal_terms(source, &cand.terms, ts) == Verdict::Proved
        })
    }

    fn equal_terms(&self, source: usize, a: &[Term], c: &[Term]) -> Verdict {
        if a == c {
            return Verdict::Proved;
        }
        let eqs = Formula::conj(a.iter().zip(c).map(|(s, t)| Formula::eq(s.clone(), t.clone())));
        entails(&self.theory, &self.objects[source].class.formula, &eqs, self.budget)
    }

    /// The formula `phi(x) & psi(y) & y = t(x)` of a morphism over the
    /// source context `x1..` followed by the target context `y1..`.
    pub fn morphism_formula(&self, m: usize) -> SubstitutionClass {
        let mor = &self.morphisms[m];
        let src = &self.objects[mor.source].class;
        let tgt = &self.objects[mor.target].class;
        let ys = ctx_vars("y", &tgt.sorts());
        let psi = tgt.apply_vars(&ys).expect("sorts agree");
        let mut parts = vec![src.formula.clone(), psi];
        for (y, t) in ys.iter().zip(&mor.terms) {
            parts.push(Formula::eq(t.clone(), y.term()));
        }
        let ctx: Vec<Var> = src.context.iter().cloned().chain(ys).collect();
        SubstitutionClass::new(ctx, Formula::conj_simplified(parts))
    }

    /// `exists y (theta(x, y) & eta(y, z))` over `x.., z..`.
    pub fn existential_composite(&self, g: usize, f: usize) -> SubstitutionClass {
        let theta = self.morphism_formula(f);
        let eta = self.morphism_formula(g);
        let (nx, ny) = (
            self.objects[self.morphisms[f].source].class.context.len(),
            self.objects[self.morphisms[f].target].class.context.len(),
        );
        let xs = theta.context[..nx].to_vec();
        let mid = ctx_vars("w", &theta.sorts()[nx..]);
        let zs = ctx_vars("z", &eta.sorts()[ny..]);
        let a: Vec<Var> = xs.iter().cloned().chain(mid.iter().cloned()).collect();
        let c: Vec<Var> = mid.iter().cloned().chain(zs.iter().cloned()).collect();
        let body = Formula::and(theta.apply_vars(&a).expect("sorts"), eta.apply_vars(&c).expect("sorts"));
        SubstitutionClass::new(xs.into_iter().chain(zs).collect(), Formula::exists_many(&mid, body))
    }

    /// The three sequents making a formula a morphism: typing, totality
    /// and single-valuedness.
    pub fn morphism_sequents(&self, m: usize) -> Vec<(String, Sequent)> {
        let theta = self.morphism_formula(m);
        let mor = &self.morphisms[m];
        let src = &self.objects[mor.source].class;
        let tgt = &self.objects[mor.target].class;
        let nx = src.context.len();
        let xs = theta.context[..nx].to_vec();
        let ys = theta.context[nx..].to_vec();
        let zs = ctx_vars("z", &tgt.sorts());
        let xz: Vec<Var> = xs.iter().cloned().chain(zs.iter().cloned()).collect();
        let typing = Sequent::new(
            vec![theta.formula.clone()],
            Formula::and(src.formula.clone(), tgt.apply_vars(&ys).expect("sorts")),
        );
        let total = Sequent::new(vec![src.formula.clone()], Formula::exists_many(&ys, theta.formula.clone()));
        let single = Sequent::new(
            vec![theta.formula.clone(), theta.apply_vars(&xz).expect("sorts")],
            Formula::vars_equal(&ys, &zs),
        );
        vec![("typing".into(), typing), ("total".into(), total), ("functional".into(), single)]
    }

    fn enumerate_morphisms(&mut self) {
        let sig = &self.theory.signature;
        let n = self.objects.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |c| (a, c))).collect();
        let found: Vec<(Vec<(Vec<Term>, bool, Fingerprint)>, Vec<String>)> = pairs
            .par_iter()
            .map(|&(a, c)| {
                let src = &self.objects[a].class;
                let tgt = &self.objects[c].class;
                let pool = terms(sig, &src.context);
                let mut tuples = term_tuples(&tgt.sorts(), &pool);
                let id: Vec<Term> = src.context.iter().map(Var::term).collect();
                if a == c {
                    tuples.retain(|ts| *ts != id);
                    tuples.insert(0, id.clone());
                }
                let mut kept: Vec<(Vec<Term>, bool, Fingerprint)> = Vec::new();
                let mut log = Vec::new();
                for ts in tuples {
                    let is_id = a == c && ts == id;
                    if !is_id {
                        let psi = substitute(&tgt.formula, &tgt.context, &ts).expect("sorts agree");
                        let seq = Sequent::new(vec![src.formula.clone()], psi.clone());
                        if !self.models.iter().all(|m| m.satisfies(&seq).unwrap_or(false)) {
                            continue;
                        }
                        match entails(&self.theory, &src.formula, &psi, self.budget) {
                            Verdict::Proved => {}
                            Verdict::Failed => continue,
                            Verdict::Unknown => {
                                log.push(format!("morphism not decided: {} -> {} by {}", self.objects[a].name, self.objects[c].name, show_terms(&ts)));
                                continue;
                            }
                        }
                    }
                    let fp = term_fingerprint(&self.models, &src.context, &src.formula, &ts);
                    let mut duplicate = false;
                    for (other, _, ofp) in &kept {
                        if *ofp != fp {
                            continue;
                        }
                        let eqs = Formula::conj(other.iter().zip(&ts).map(|(s, t)| Formula::eq(s.clone(), t.clone())));
                        match entails(&self.theory, &src.formula, &eqs, self.budget) {
                            Verdict::Proved => {
                                duplicate = true;
                                break;
                            }
                            Verdict::Unknown => log.push(format!(
                                "morphisms not identified: {} -> {} by {} and {}",
                                self.objects[a].name,
                                self.objects[c].name,
                                show_terms(other),
                                show_terms(&ts)
                            )),
                            Verdict::Failed => {}
                        }
                    }
                    if !duplicate {
                        kept.push((ts, is_id, fp));
                    }
                }
                (kept, log)
            })
            .collect();
        let mut count = 0;
        for (&(a, c), (kept, log)) in pairs.iter().zip(found) {
            for (ts, identity, fp) in kept {
                let name = if identity {
                    super::identity_name(&self.objects[a].name)
                } else {
                    count += 1;
                    format!("m{count}")
                };
                self.morphisms.push(SliceMorphism {
                    name,
                    source: a,
                    target: c,
                    terms: ts,
                    identity,
                    fingerprint: fp,
                });
            }
            self.log.extend(log);
        }
    }

    fn compose_all(&mut self) {
        let k = self.morphisms.len();
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|g| (0..k).map(move |f| (g, f)))
            .filter(|&(g, f)| self.morphisms[f].target == self.morphisms[g].source)
            .collect();
        let results: Vec<Option<usize>> = pairs
            .par_iter()
            .map(|&(g, f)| {
                let (mf, mg) = (&self.morphisms[f], &self.morphisms[g]);
                if mf.identity {
                    return Some(g);
                }
                if mg.identity {
                    return Some(f);
                }
                let mid = &self.objects[mg.source].class.context;
                let ts: Vec<Term> = mg
                    .terms
                    .iter()
                    .map(|t| {
                        let map: Vec<(Var, Term)> = mid.iter().cloned().zip(mf.terms.iter().cloned()).collect();
                        t.substitute(&map)
                    })
                    .collect();
                self.find_morphism(mf.source, mg.target, &ts)
            })
            .collect();
        for (&(g, f), r) in pairs.iter().zip(results) {
            match r {
                Some(h) => {
                    self.composition.insert((g, f), h);
                }
                None => self.open_composites.push((g, f)),
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "slice of {} at depth {} with budget {}: {} objects, {} morphisms",
            self.theory.name,
            self.depth,
            self.budget,
            self.objects.len(),
            self.morphisms.len()
        );
        for o in &self.objects {
            let _ = writeln!(out, "  object {} = [{}]", o.name, print::class(&o.class.context, &o.class.formula));
        }
        for m in &self.morphisms {
            let _ = writeln!(
                out,
                "  morphism {} : {} -> {} = {}",
                m.name,
                self.objects[m.source].name,
                self.objects[m.target].name,
                show_terms(&m.terms)
            );
        }
        let _ = writeln!(
            out,
            "  composites: {} found, {} outside the slice",
            self.composition.len(),
            self.open_composites.len()
        );
        let _ = writeln!(out, "  thin: {}", self.is_thin());
        for l in &self.log {
            let _ = writeln!(out, "  note: {l}");
        }
        out
    }
}

fn show_terms(ts: &[Term]) -> String {
    format!("({})", ts.iter().map(print::term).collect::<Vec<_>>().join(", "))
}

/// `phi |- psi`, the order of subobjects of the merged context.
pub fn subobject_leq(t: &Theory, phi: &Formula, psi: &Formula, b: Budget) -> Result<ProofResult, CatError> {
    let classical = t.mode == crate::syntax::Mode::Classical;
    t.signature.check_formula(phi, classical)?;
    t.signature.check_formula(psi, classical)?;
    let a = phi.free_context();
    for v in psi.free_context() {
        if let Some(w) = a.iter().find(|w| w.name == v.name && w.sort != v.sort) {
            return Err(CatError::Context(format!("variable {} has sorts {} and {}", v.name, w.sort, v.sort)));
        }
    }
    let ante = if *phi == Formula::Top { vec![] } else { vec![phi.clone()] };
    prove_sequent(t, &Sequent::new(ante, psi.clone()), b).map_err(|e| CatError::Context(e.to_string()))
}

/// The sentence `exists x.. phi` closing the whole context of `phi`.
pub fn existential_reflector(t: &Theory, phi: &Formula) -> Result<Formula, CatError> {
    t.signature.check_formula(phi, t.mode == crate::syntax::Mode::Classical)?;
    Ok(Formula::exists_many(&phi.free_context(), phi.clone()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LindenbaumLattice {
    pub theory: String,
    pub depth: usize,
    pub budget: Budget,
    pub lattice: BDLattice,
    pub representatives: Vec<Formula>,
    /// Every sentence class is present and every merge and order pair was
    /// decided.
    pub exact: bool,
    pub notes: Vec<String>,
}

impl LindenbaumLattice {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "lindenbaum lattice of {} at depth {} with budget {}: {} classes{}",
            self.theory,
            self.depth,
            self.budget,
            self.lattice.len(),
            if self.exact { "" } else { " (depth-bounded approximation)" }
        );
        for (i, f) in self.representatives.iter().enumerate() {
            let _ = writeln!(out, "  c{i} = {}", print::formula(f));
        }
        for (a, c) in self.lattice.covering_pairs() {
            let _ = writeln!(out, "  c{a} <= c{c}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

/// Sentence classes of `t`: `top`, `bot`, one inhabitation sentence per
/// sort and the sentences up to `depth`, closed under `&` and `|`, ordered
/// by proved entailment.
pub fn lindenbaum(t: &Theory, depth: usize, b: Budget) -> Result<LindenbaumLattice, CatError> {
    let models = sample_models(t);
    let mut classes = Classes::new(t, b, &models, Vec::new());
    let mut cands = vec![Formula::Top, Formula::Bot];
    for s in &t.signature.sorts {
        cands.push(Formula::exists(Var::new("x", s.clone()), Formula::Top));
    }
    cands.extend(Enumerator::new(&t.signature).up_to(&[], depth));
    for f in cands {
        classes.classify(f);
    }
    let mut capped = false;
    let mut done = 0;
    loop {
        let n = classes.reps.len();
        let mut grew = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if j < done && i < done {
                    continue;
                }
                for f in [
                    Formula::and(classes.reps[i].0.clone(), classes.reps[j].0.clone()),
                    Formula::or(classes.reps[i].0.clone(), classes.reps[j].0.clone()),
                ] {
                    if classes.reps.len() >= LINDENBAUM_CAP {
                        capped = true;
                        break;
                    }
                    let before = classes.reps.len();
                    classes.classify(f);
                    grew |= classes.reps.len() > before;
                }
            }
        }
        done = n;
        if !grew || capped {
            break;
        }
    }
    let n = classes.reps.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let verdicts: Vec<Verdict> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, fa) = &classes.reps[i];
            let (c, fc) = &classes.reps[j];
            if !fp_leq(fa, fc) {
                Verdict::Failed
            } else {
                entails(t, a, c, b)
            }
        })
        .collect();
    let mut notes = classes.log.clone();
    let mut order = Vec::new();
    for (&(i, j), v) in pairs.iter().zip(&verdicts) {
        match v {
            Verdict::Proved => order.push((i, j)),
            Verdict::Unknown => notes.push(format!(
                "entailment not decided: {} |- {}",
                print::formula(&classes.reps[i].0),
                print::formula(&classes.reps[j].0)
            )),
            Verdict::Failed => {}
        }
    }
    if capped {
        notes.push(format!("closure stopped at {LINDENBAUM_CAP} classes"));
    }
    let exact = notes.is_empty() && t.signature.sorts.is_empty();
    let names: Vec<String> = classes.reps.iter().map(|(f, _)| print::formula(f)).collect();
    let lattice = BDLattice::from_order(format!("L_{}", t.name), names, &order)?;
    Ok(LindenbaumLattice {
        theory: t.name.clone(),
        depth,
        budget: b,
        lattice,
        representatives: classes.reps.into_iter().map(|(f, _)| f).collect(),
        exact,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_theory};

    fn fixture(name: &str) -> Theory {
        let text = std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        parse_theory(&text).unwrap()
    }

    #[test]
    fn lindenbaum_of_free_theories() {
        let l1 = lindenbaum(&fixture("free1.th"), 3, Budget::default()).unwrap();
        assert_eq!(l1.lattice.len(), 3);
        assert!(l1.lattice.is_chain() && l1.exact);
        let l2 = lindenbaum(&fixture("free2.th"), 3, Budget::default()).unwrap();
        assert_eq!(l2.lattice.len(), 6);
        assert!(l2.lattice.check().verdict().is_proved());
        assert!(!l2.lattice.is_chain());
    }

    #[test]
    fn lindenbaum_of_p2_is_a_four_chain() {
        let l = lindenbaum(&fixture("p2.th"), 3, Budget::default()).unwrap();
        assert_eq!(l.lattice.len(), 4);
        assert!(l.lattice.is_chain());
        let p = l.lattice.index("P").unwrap();
        let q = l.lattice.index("Q").unwrap();
        assert!(l.lattice.leq[p][q] && !l.lattice.leq[q][p]);
    }

    #[test]
    fn p2_slice_is_thin() {
        let s = syntactic_slice(&fixture("p2.th"), 2, Budget::default());
        let names: Vec<String> = s.objects.iter().map(|o| print::formula(&o.class.formula)).collect();
        assert_eq!(names, ["top", "bot", "P", "Q"]);
        assert!(s.is_thin());
        assert_eq!(s.morphisms.len(), 10);
        assert!(s.open_composites.is_empty());
    }

    #[test]
    fn eq_slice_identity_and_inclusion() {
        let t = fixture("eq.th");
        let s = syntactic_slice(&t, 1, Budget::default());
        let ss = vec!["s".to_string(), "s".to_string()];
        let ctx = ctx_vars("x", &ss);
        let a = parse_formula(&t.signature, "A(x1, x2)", &ctx).unwrap();
        let Lookup::Found(oa) = s.find_object(&ss, &a) else { panic!("no [A]") };
        let id = s.identity(oa);
        for (name, seq) in s.morphism_sequents(id) {
            assert!(prove_sequent(&t, &seq, Budget::default()).unwrap().is_proved(), "{name}");
        }
        let top = s.top_object(&ss).unwrap();
        let incl: Vec<Term> = ctx.iter().map(Var::term).collect();
        assert!(s.find_morphism(oa, top, &incl).is_some());
        assert!(!s.is_thin());
    }

    #[test]
    fn composition_matches_the_existential_composite() {
        let t = fixture("eq.th");
        let s = syntactic_slice(&t, 1, Budget::default());
        for (&(g, f), &h) in s.composition.iter().take(40) {
            let comp = s.existential_composite(g, f);
            let direct = s.morphism_formula(h);
            let direct = direct.apply_vars(&comp.context).unwrap();
            assert_eq!(bi_entails(&t, &comp.formula, &direct, Budget::default()), Verdict::Proved);
        }
        for m in 0..s.morphisms.len() {
            for (name, seq) in s.morphism_sequents(m) {
                assert!(prove_sequent(&t, &seq, Budget::default()).unwrap().is_proved(), "{name} of {m}");
            }
        }
    }

    #[test]
    fn subobject_order() {
        let p2 = fixture("p2.th");
        let f = |s: &str| parse_formula(&p2.signature, s, &[]).unwrap();
        assert!(subobject_leq(&p2, &f("P"), &f("Q"), Budget::default()).unwrap().is_proved());
        assert!(subobject_leq(&p2, &f("Q"), &f("P"), Budget::default()).unwrap().is_refuted());
        let eq = fixture("eq.th");
        let ctx = ctx_vars("x", &["s".to_string(), "s".to_string()]);
        let a = parse_formula(&eq.signature, "A(x1, x2)", &ctx).unwrap();
        assert!(subobject_leq(&eq, &a, &Formula::Top, Budget::default()).unwrap().is_proved());
    }

    #[test]
    fn reflector() {
        let eq = fixture("eq.th");
        let ctx = [Var::new("x", "s"), Var::new("y", "s")];
        let a = parse_formula(&eq.signature, "A(x, y)", &ctx).unwrap();
        let r = existential_reflector(&eq, &a).unwrap();
        assert_eq!(print::formula(&r), "exists x:s . exists y:s . A(x, y)");
        assert_eq!(existential_reflector(&eq, &r).unwrap(), r);
        let p2 = fixture("p2.th");
        let p = parse_formula(&p2.signature, "P", &[]).unwrap();
        assert_eq!(existential_reflector(&p2, &p).unwrap(), p);
        let d = parse_formula(&eq.signature, "A(x, x)", &ctx).unwrap();
        let rd = existential_reflector(&eq, &d).unwrap();
        assert_eq!(print::formula(&rd), "exists x:s . A(x, x)");
        let inhabited = Formula::exists(Var::new("x", "s"), Formula::Top);
        assert!(subobject_leq(&eq, &inhabited, &rd, Budget::uniform(2)).unwrap().is_proved());
    }
}
