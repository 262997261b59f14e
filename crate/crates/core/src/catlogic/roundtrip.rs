//! The translation `H` of a theory into the internal logic of its bounded
//! slice, the translation `Theta` back, and the round trip `Theta H phi`.

use std::fmt::Write as _;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slice::{ctx_vars, entails, syntactic_slice, Lookup, SyntacticSlice};
use super::{
    theory_of_presentation, CatError, DesignatedEqualizer, DesignatedJoin, DesignatedProduct, FinCatPresentation,
};
use crate::print;
use crate::prover::Budget;
use crate::report::{discharge_all, Goal, Verdict, VerificationReport};
use crate::syntax::{rename, Formula, Sequent, SubstitutionClass, Term, Theory, Var};
use crate::translation::{verify_translation, Reconstrual, SortImage, Translation};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundTrip {
    pub slice: SyntacticSlice,
    pub presentation: FinCatPresentation,
    pub internal: Theory,
    pub h: Translation,
    pub theta: Translation,
    pub report: VerificationReport,
}

impl RoundTrip {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "round trip of {} at depth {} with budget {}: {} sorts and {} function symbols in the internal logic",
            self.slice.theory.name,
            self.slice.depth,
            self.slice.budget,
            self.internal.signature.sorts.len(),
            self.internal.signature.functions.len()
        );
        let _ = writeln!(out, "H is a translation: {}", self.h.is_translation);
        let _ = writeln!(out, "Theta is a translation: {}", self.theta.is_translation);
        let _ = writeln!(out, "Theta H phi -|- phi: {}", self.report.verdict_of("roundtrip/"));
        out.push_str(&self.report.to_text());
        out
    }
}

fn lookup_object(slice: &SyntacticSlice, sorts: &[String], f: &Formula, what: &str) -> Result<usize, CatError> {
    match slice.find_object(sorts, f) {
        Lookup::Found(o) => Ok(o),
        _ => Err(CatError::Context(format!("the slice has no object for {what}"))),
    }
}

fn lookup_morphism(slice: &SyntacticSlice, a: usize, c: usize, ts: &[Term], what: &str) -> Result<String, CatError> {
    slice
        .find_morphism(a, c, ts)
        .map(|m| slice.morphisms[m].name.clone())
        .ok_or_else(|| CatError::Context(format!("the slice has no morphism for {what}")))
}

fn top(slice: &SyntacticSlice, sorts: &[String]) -> Result<usize, CatError> {
    slice
        .top_object(sorts)
        .ok_or_else(|| CatError::Context(format!("the slice has no context ({})", sorts.join(", "))))
}

fn unary(f: &str, z: &Var, sort: &str) -> Term {
    Term::App {
        fun: f.to_string(),
        args: vec![z.term()],
        sort: sort.to_string(),
    }
}

/// The slice as a presentation: `[top]` of the empty context is terminal,
/// `[top]` contexts split into products, `[phi & t = u]` equalizes `t` and
/// `u` when it is in the slice, inclusions into `[top]` carry the joins
/// and bottom that exist in the slice, and surjective morphisms are covers.
fn slice_presentation(slice: &SyntacticSlice) -> FinCatPresentation {
    let name = |o: usize| slice.objects[o].name.clone();
    let mut c = FinCatPresentation::new(format!("C_{}", slice.theory.name));
    c.objects = (0..slice.objects.len()).map(name).collect();
    for m in slice.morphisms.iter().filter(|m| !m.identity) {
        c.morphisms.insert(m.name.clone(), (name(m.source), name(m.target)));
    }
    for (&(g, f), &h) in &slice.composition {
        let (mg, mf) = (&slice.morphisms[g], &slice.morphisms[f]);
        if !mg.identity && !mf.identity {
            c.comp.insert((mg.name.clone(), mf.name.clone()), slice.morphisms[h].name.clone());
        }
    }
    if let Some(o) = slice.top_object(&[]) {
        c.terminal.push(name(o));
    }
    let tops: Vec<usize> = (0..slice.objects.len())
        .filter(|&o| slice.objects[o].class.formula == Formula::Top)
        .collect();
    for &p in &tops {
        let sorts = slice.sorts_of(p);
        let xs: Vec<Term> = slice.objects[p].class.context.iter().map(Var::term).collect();
        for k in 1..sorts.len() {
            let (Some(l), Some(r)) = (slice.top_object(&sorts[..k]), slice.top_object(&sorts[k..])) else { continue };
            let (Some(p1), Some(p2)) = (slice.find_morphism(p, l, &xs[..k]), slice.find_morphism(p, r, &xs[k..])) else {
                continue;
            };
            c.products.push(DesignatedProduct {
                object: name(p),
                left: name(l),
                right: name(r),
                p1: slice.morphisms[p1].name.clone(),
                p2: slice.morphisms[p2].name.clone(),
            });
        }
    }
    let k = slice.morphisms.len();
    let parallel: Vec<(usize, usize)> = (0..k)
        .flat_map(|f| (f + 1..k).map(move |g| (f, g)))
        .filter(|&(f, g)| {
            let (mf, mg) = (&slice.morphisms[f], &slice.morphisms[g]);
            mf.source == mg.source && mf.target == mg.target
        })
        .collect();
    let equalizers: Vec<Option<DesignatedEqualizer>> = parallel
        .par_iter()
        .map(|&(f, g)| {
            let (mf, mg) = (&slice.morphisms[f], &slice.morphisms[g]);
            let src = &slice.objects[mf.source].class;
            let eqs = mf.terms.iter().zip(&mg.terms).map(|(a, b)| Formula::eq(a.clone(), b.clone()));
            let phi = Formula::conj_simplified(std::iter::once(src.formula.clone()).chain(eqs));
            let Lookup::Found(e) = slice.find_object(&src.sorts(), &phi) else { return None };
            let xs: Vec<Term> = src.context.iter().map(Var::term).collect();
            let incl = slice.find_morphism(e, mf.source, &xs)?;
            Some(DesignatedEqualizer {
                object: name(e),
                f: mf.name.clone(),
                g: mg.name.clone(),
                e: slice.morphisms[incl].name.clone(),
            })
        })
        .collect();
    c.equalizers = equalizers.into_iter().flatten().collect();
    let joins: Vec<Vec<DesignatedJoin>> = tops
        .par_iter()
        .map(|&t| {
            let sorts = slice.sorts_of(t);
            let xs: Vec<Term> = slice.objects[t].class.context.iter().map(Var::term).collect();
            let subs: Vec<usize> = (0..slice.objects.len()).filter(|&o| slice.sorts_of(o) == sorts).collect();
            let incl = |o: usize| slice.find_morphism(o, t, &xs).map(|m| slice.morphisms[m].name.clone());
            let mut out = Vec::new();
            for (i, &a) in subs.iter().enumerate() {
                for &b in &subs[i + 1..] {
                    let phi = Formula::or(slice.objects[a].class.formula.clone(), slice.objects[b].class.formula.clone());
                    if let Lookup::Found(j) = slice.find_object(&sorts, &phi) {
                        if let (Some(m1), Some(m2), Some(m3)) = (incl(a), incl(b), incl(j)) {
                            out.push(DesignatedJoin {
                                base: name(t),
                                m1,
                                m2,
                                join: m3,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect();
    for (&t, js) in tops.iter().zip(joins) {
        c.joins.extend(js);
        let sorts = slice.sorts_of(t);
        let xs: Vec<Term> = slice.objects[t].class.context.iter().map(Var::term).collect();
        let bot = (0..slice.objects.len()).find(|&o| slice.sorts_of(o) == sorts && slice.objects[o].class.formula == Formula::Bot);
        if let Some(m) = bot.and_then(|o| slice.find_morphism(o, t, &xs)) {
            c.bottoms.push((name(t), slice.morphisms[m].name.clone()));
        }
    }
    let covers: Vec<Option<String>> = slice
        .morphisms
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            if m.identity {
                return None;
            }
            let theta = slice.morphism_formula(k);
            let src_len = slice.objects[m.source].class.context.len();
            let ys = theta.context[src_len..].to_vec();
            let tgt = slice.objects[m.target].class.apply_vars(&ys).expect("sorts agree");
            let image = Formula::exists_many(&theta.context[..src_len], theta.formula.clone());
            let seq = Sequent::new(vec![tgt.clone()], image.clone());
            if !slice.models.iter().all(|md| md.satisfies(&seq).unwrap_or(false)) {
                return None;
            }
            (entails(&slice.theory, &tgt, &image, slice.budget) == Verdict::Proved).then(|| m.name.clone())
        })
        .collect();
    c.covers = covers.into_iter().flatten().collect();
    c
}

/// `H : T -> T_C`. Sorts go to `[top]` of one variable, relations to the
/// image of their coordinate morphisms, functions to graphs through the
/// `[top]` object of their domain.
fn h_translation(t: &Theory, slice: &SyntacticSlice, internal: &Theory) -> Result<Reconstrual, CatError> {
    let sig = &t.signature;
    let obj = |o: usize| slice.objects[o].name.clone();
    let mut h = Reconstrual {
        name: "H".into(),
        source: t.clone(),
        target: internal.clone(),
        sorts: IndexMap::new(),
        relations: IndexMap::new(),
        functions: IndexMap::new(),
        equality: IndexMap::new(),
    };
    let sort_obj = |s: &String| top(slice, std::slice::from_ref(s));
    for s in &sig.sorts {
        let o = obj(sort_obj(s)?);
        h.sorts.insert(
            s.clone(),
            SortImage {
                sorts: vec![o.clone()],
                domain: SubstitutionClass::new(vec![Var::new("x1", o.clone())], Formula::Top),
            },
        );
        let (x, y) = (Var::new("x1", o.clone()), Var::new("x2", o));
        h.equality.insert(s.clone(), SubstitutionClass::new(vec![x.clone(), y.clone()], Formula::eq(x.term(), y.term())));
    }
    for (r, dom) in &sig.relations {
        let xs = ctx_vars("x", dom);
        let atom = Formula::rel(r.clone(), xs.iter().map(Var::term).collect());
        let or = lookup_object(slice, dom, &atom, r)?;
        let z = Var::new("z", obj(or));
        let mut parts = Vec::new();
        let mut ctx = Vec::new();
        for (k, (x, s)) in xs.iter().zip(dom).enumerate() {
            let target = sort_obj(s)?;
            let j = lookup_morphism(slice, or, target, &[x.term()], &format!("coordinate {} of {r}", k + 1))?;
            let xv = Var::new(x.name.clone(), obj(target));
            parts.push(Formula::eq(unary(&j, &z, &obj(target)), xv.term()));
            ctx.push(xv);
        }
        h.relations.insert(r.clone(), SubstitutionClass::new(ctx, Formula::exists(z, Formula::conj(parts))));
    }
    for (f, fs) in &sig.functions {
        let n = fs.domain.len();
        let dom_obj = top(slice, &fs.domain)?;
        let cod_obj = sort_obj(&fs.codomain)?;
        let xs = ctx_vars("x", &fs.domain);
        let app = Term::App {
            fun: f.clone(),
            args: xs.iter().map(Var::term).collect(),
            sort: fs.codomain.clone(),
        };
        let mf = lookup_morphism(slice, dom_obj, cod_obj, &[app], f)?;
        let mut ctx: Vec<Var> = Vec::new();
        for (x, s) in xs.iter().zip(&fs.domain) {
            ctx.push(Var::new(x.name.clone(), obj(sort_obj(s)?)));
        }
        let y = Var::new(format!("x{}", n + 1), obj(cod_obj));
        let body = if n == 1 {
            Formula::eq(unary(&mf, &ctx[0], &obj(cod_obj)), y.term())
        } else {
            let z = Var::new("z", obj(dom_obj));
            let mut parts = Vec::new();
            for (k, (x, s)) in xs.iter().zip(&fs.domain).enumerate() {
                let target = sort_obj(s)?;
                let p = lookup_morphism(slice, dom_obj, target, &[x.term()], &format!("projection {} of {f}", k + 1))?;
                parts.push(Formula::eq(unary(&p, &z, &obj(target)), ctx[k].term()));
            }
            parts.push(Formula::eq(unary(&mf, &z, &obj(cod_obj)), y.term()));
            Formula::exists(z, Formula::conj(parts))
        };
        ctx.push(y);
        h.functions.insert(f.clone(), SubstitutionClass::new(ctx, body));
    }
    Ok(h)
}

/// `Theta : T_C -> T`. The sort `[phi]` goes to the sorts of its context
/// with domain `phi`; a morphism goes to its formula.
fn theta_translation(t: &Theory, slice: &SyntacticSlice, internal: &Theory) -> Reconstrual {
    let mut th = Reconstrual {
        name: "Theta".into(),
        source: internal.clone(),
        target: t.clone(),
        sorts: IndexMap::new(),
        relations: IndexMap::new(),
        functions: IndexMap::new(),
        equality: IndexMap::new(),
    };
    for o in &slice.objects {
        th.sorts.insert(
            o.name.clone(),
            SortImage {
                sorts: o.class.sorts(),
                domain: o.class.clone(),
            },
        );
        let ys = ctx_vars("y", &o.class.sorts());
        let eq = Formula::conj_simplified([Formula::vars_equal(&o.class.context, &ys), o.class.formula.clone()]);
        let ctx: Vec<Var> = o.class.context.iter().cloned().chain(ys).collect();
        th.equality.insert(o.name.clone(), SubstitutionClass::new(ctx, eq));
    }
    for (k, m) in slice.morphisms.iter().enumerate() {
        th.functions.insert(m.name.clone(), slice.morphism_formula(k));
    }
    th
}

/// Build the internal logic of the slice at `depth`, the translations `H`
/// and `Theta`, verify both, and prove `Theta H phi -|- phi` for every
/// slice object.
pub fn canonical_round_trip(t: &Theory, depth: usize, b: Budget) -> Result<RoundTrip, CatError> {
    let slice = syntactic_slice(t, depth, b);
    let presentation = slice_presentation(&slice);
    let mut internal = theory_of_presentation(&presentation);
    internal.name = format!("TC_{}", t.name);
    let h_map = h_translation(t, &slice, &internal)?;
    let theta_map = theta_translation(t, &slice, &internal);

    let mut goals = Vec::new();
    for o in &slice.objects {
        let (ctx1, f1) = h_map.apply_in(&o.class.context, &o.class.formula)?;
        let (ctx2, f2) = theta_map.apply_in(&ctx1, &f1)?;
        let back = rename(&f2, &ctx2, &o.class.context)?;
        let phi = o.class.formula.clone();
        let ante = |f: &Formula| if *f == Formula::Top { vec![] } else { vec![f.clone()] };
        goals.push(Goal::new(format!("roundtrip:{}:forward", o.name), Sequent::new(ante(&back), phi.clone())));
        goals.push(Goal::new(format!("roundtrip:{}:backward", o.name), Sequent::new(ante(&phi), back)));
    }
    let h = verify_translation(&h_map, b);
    let theta = verify_translation(&theta_map, b);
    let mut report = VerificationReport::new(format!("round trip of {} at depth {depth}", t.name));
    for (prefix, tr) in [("H", &h), ("theta", &theta)] {
        let mut part = tr.report.clone();
        let (strong, rest): (Vec<_>, Vec<_>) = part.entries.into_iter().partition(|e| e.name == "strong:lengths");
        part.entries = rest;
        for e in strong {
            part.notes.push(format!("{prefix} strong: {} {}", e.verdict, e.statement));
        }
        report.extend(prefix, part);
    }
    for o in discharge_all(t, &goals, b) {
        report.entries.push(crate::report::Obligation {
            name: format!("roundtrip/{}", o.name.trim_start_matches("roundtrip:")),
            ..o
        });
    }
    for o in &slice.objects {
        report.note(format!("{} = [{}]", o.name, print::class(&o.class.context, &o.class.formula)));
    }
    report.note(format!(
        "slice: {} objects, {} morphisms, {} composites outside the slice{}",
        slice.objects.len(),
        slice.morphisms.len(),
        slice.open_composites.len(),
        if slice.complete { "" } else { ", some merges undecided" }
    ));
    Ok(RoundTrip {
        slice,
        presentation,
        internal,
        h,
        theta,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_theory;

    fn fixture(name: &str) -> Theory {
        let text = std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        parse_theory(&text).unwrap()
    }

    #[test]
    fn p2_round_trip() {
        let r = canonical_round_trip(&fixture("p2.th"), 2, Budget::default()).unwrap();
        assert_eq!(r.slice.objects.len(), 4);
        assert_eq!(r.report.verdict_of("roundtrip/"), Verdict::Proved, "{}", r.render());
        assert_eq!(r.h.is_translation, Verdict::Proved, "{}", r.render());
        assert_eq!(r.theta.is_translation, Verdict::Proved, "{}", r.render());
    }

    #[test]
    fn eq_round_trip_on_the_relation() {
        let t = fixture("eq.th");
        let r = canonical_round_trip(&t, 1, Budget::default()).unwrap();
        assert_eq!(r.report.verdict_of("roundtrip/"), Verdict::Proved, "{}", r.render());
        let h_a = &r.h.map.relations["A"];
        assert!(print::formula(&h_a.formula).starts_with("exists z:"));
    }

    #[test]
    fn two_round_trip() {
        let r = canonical_round_trip(&fixture("two.th"), 2, Budget::default()).unwrap();
        assert_eq!(r.report.verdict_of("roundtrip/"), Verdict::Proved, "{}", r.render());
    }
}
