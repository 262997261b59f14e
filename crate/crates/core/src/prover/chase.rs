//! Forward-chaining saturation with case splits.
//!
//! Each round collects every rule instance whose antecedent holds and whose
//! conclusion does not, applies all single-conclusion instances, and closes
//! the branch on a `bot` conclusion or once the goal holds. When a round
//! changes nothing, function applications are totalized one layer deeper;
//! when that changes nothing either, the first disjunctive instance is split.
//! A branch where nothing applies is saturated: its classes form a model of
//! the theory in which the goal fails.

use super::egraph::{Class, EGraph};
use super::normal::{Atom, Conj, Rule, Symbols};
use super::trace::{Case, GAtom, GTerm, Step, Subst};

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub rounds: usize,
    pub witnesses: usize,
    pub splits: usize,
    pub class_cap: usize,
    pub term_depth: u32,
}

#[derive(Debug)]
pub enum Outcome {
    Proved(Vec<Step>),
    Saturated(Box<Branch>),
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub eg: EGraph,
    pub context: Vec<Class>,
    labels: Vec<String>,
    prefix: String,
    counter: usize,
    witnesses: usize,
    witness_names: usize,
    splits: usize,
    rounds: usize,
    incomplete: Option<String>,
    steps: Vec<Step>,
    reserved: Vec<String>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub max_witnesses: usize,
    pub max_rounds: usize,
    pub max_classes: usize,
}

pub struct Chase<'a> {
    syms: &'a Symbols,
    rules: Vec<&'a Rule>,
    goal: &'a Rule,
    limits: Limits,
    pub stats: Stats,
}

type Binding = Vec<Option<Class>>;

/// Backtracking conjunctive matching. `must` lists slots that have to be
/// bound in every reported match; slots not fixed by any atom range over all
/// classes of their sort. The callback returns `true` to stop the search.
fn search(
    eg: &EGraph,
    sorts: &[usize],
    atoms: &[Atom],
    done: &mut Vec<bool>,
    bind: &mut Binding,
    must: &[usize],
    out: &mut dyn FnMut(&Binding) -> bool,
) -> bool {
    let mut best: Option<(usize, i32)> = None;
    for (i, a) in atoms.iter().enumerate() {
        if done[i] {
            continue;
        }
        let score = match a {
            Atom::Eq(x, y) => match (bind[*x].is_some(), bind[*y].is_some()) {
                (true, true) => 100,
                (true, false) | (false, true) => 80,
                _ => 0,
            },
            Atom::Fun(_, args, _) if args.iter().all(|s| bind[*s].is_some()) => 90,
            Atom::Fun(_, args, r) => 5 + args.iter().chain(std::iter::once(r)).filter(|s| bind[**s].is_some()).count() as i32,
            Atom::Rel(_, args) => 10 + 2 * args.iter().filter(|s| bind[**s].is_some()).count() as i32,
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    let Some((i, _)) = best else {
        return enumerate_rest(eg, sorts, bind, must, 0, out);
    };
    done[i] = true;
    let stop = match &atoms[i] {
        Atom::Eq(x, y) => match (bind[*x], bind[*y]) {
            (Some(a), Some(b)) => a == b && search(eg, sorts, atoms, done, bind, must, out),
            (Some(a), None) => with(bind, *y, a, |bind| search(eg, sorts, atoms, done, bind, must, out)),
            (None, Some(b)) => with(bind, *x, b, |bind| search(eg, sorts, atoms, done, bind, must, out)),
            (None, None) => {
                let cands: Vec<Class> = eg.classes_of_sort(sorts[*x]).collect();
                let mut stop = false;
                for c in cands {
                    bind[*x] = Some(c);
                    bind[*y] = Some(c);
                    if search(eg, sorts, atoms, done, bind, must, out) {
                        stop = true;
                        break;
                    }
                }
                bind[*x] = None;
                bind[*y] = None;
                stop
            }
        },
        Atom::Fun(f, args, r) if args.iter().all(|s| bind[*s].is_some()) => {
            let key: Vec<Class> = args.iter().map(|s| bind[*s].expect("bound")).collect();
            match (eg.fun_get(*f, &key), bind[*r]) {
                (None, _) => false,
                (Some(v), Some(w)) => v == w && search(eg, sorts, atoms, done, bind, must, out),
                (Some(v), None) => with(bind, *r, v, |bind| search(eg, sorts, atoms, done, bind, must, out)),
            }
        }
        Atom::Fun(f, args, r) => {
            let mut slots = args.clone();
            slots.push(*r);
            let rows: Vec<Vec<Class>> = eg
                .fun_entries(*f)
                .map(|(k, v)| {
                    let mut row = k.clone();
                    row.push(v);
                    row
                })
                .collect();
            match_rows(eg, sorts, atoms, done, bind, must, out, &slots, rows.iter())
        }
        Atom::Rel(r, args) => match args.first().and_then(|s| bind[*s]) {
            Some(first) => match_rows(eg, sorts, atoms, done, bind, must, out, args, eg.rel_tuples_from(*r, first)),
            None => match_rows(eg, sorts, atoms, done, bind, must, out, args, eg.rel_tuples(*r)),
        },
    };
    done[i] = false;
    stop
}

#[allow(clippy::too_many_arguments)]
fn match_rows<'r>(
    eg: &EGraph,
    sorts: &[usize],
    atoms: &[Atom],
    done: &mut Vec<bool>,
    bind: &mut Binding,
    must: &[usize],
    out: &mut dyn FnMut(&Binding) -> bool,
    slots: &[usize],
    rows: impl Iterator<Item = &'r Vec<Class>>,
) -> bool {
    for row in rows {
        let mut newly = Vec::new();
        let mut ok = true;
        for (s, c) in slots.iter().zip(row) {
            match bind[*s] {
                Some(b) if b != *c => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    bind[*s] = Some(*c);
                    newly.push(*s);
                }
            }
        }
        let stop = ok && search(eg, sorts, atoms, done, bind, must, out);
        for s in newly {
            bind[s] = None;
        }
        if stop {
            return true;
        }
    }
    false
}

fn with(bind: &mut Binding, slot: usize, c: Class, k: impl FnOnce(&mut Binding) -> bool) -> bool {
    bind[slot] = Some(c);
    let r = k(bind);
    bind[slot] = None;
    r
}

fn enumerate_rest(
    eg: &EGraph,
    sorts: &[usize],
    bind: &mut Binding,
    must: &[usize],
    from: usize,
    out: &mut dyn FnMut(&Binding) -> bool,
) -> bool {
    let Some(k) = (from..must.len()).find(|k| bind[must[*k]].is_none()) else {
        return out(bind);
    };
    let s = must[k];
    let cands: Vec<Class> = eg.classes_of_sort(sorts[s]).collect();
    for c in cands {
        bind[s] = Some(c);
        if enumerate_rest(eg, sorts, bind, must, k + 1, out) {
            bind[s] = None;
            return true;
        }
    }
    bind[s] = None;
    false
}

fn first_match(eg: &EGraph, sorts: &[usize], conj: &Conj, init: &Binding) -> Option<Binding> {
    let mut bind = init.clone();
    let mut done = vec![false; conj.atoms.len()];
    let mut found = None;
    search(eg, sorts, &conj.atoms, &mut done, &mut bind, &conj.exists, &mut |b| {
        found = Some(b.clone());
        true
    });
    found
}

impl Branch {
    fn next_label(&mut self) -> String {
        self.counter += 1;
        let l = format!("{}{}", self.prefix, self.counter);
        self.labels.push(l.clone());
        l
    }

    fn origin(&self) -> u32 {
        self.labels.len() as u32
    }

    fn fresh_witness(&mut self) -> String {
        loop {
            let n = format!("w{}", self.witness_names);
            self.witness_names += 1;
            if !self.reserved.contains(&n) {
                return n;
            }
        }
    }
}

impl<'a> Chase<'a> {
    pub fn new(syms: &'a Symbols, hyps: &'a [Rule], axioms: &'a [Rule], goal: &'a Rule, limits: Limits) -> Self {
        Chase {
            syms,
            rules: hyps.iter().chain(axioms).collect(),
            goal,
            limits,
            stats: Stats::default(),
        }
    }

    /// Initial branch: one constant per context variable plus the theory's
    /// constants.
    pub fn start(&self, context: &[(String, usize)]) -> Branch {
        let mut eg = EGraph::new(self.syms);
        let mut steps = Vec::new();
        let mut labels = Vec::new();
        let mut ctx = Vec::new();
        for (i, (name, sort)) in context.iter().enumerate() {
            ctx.push(eg.add_class(*sort, GTerm::Const(name.clone()), 0));
            let label = (i + 1).to_string();
            labels.push(label.clone());
            steps.push(Step::Constant {
                label,
                name: name.clone(),
                sort: self.syms.sorts[*sort].clone(),
            });
        }
        for f in 0..self.syms.funs.len() {
            if self.syms.fun_domains[f].is_empty() {
                eg.app(self.syms, f, &[]);
            }
        }
        Branch {
            eg,
            context: ctx,
            counter: labels.len(),
            labels,
            prefix: String::new(),
            witnesses: 0,
            witness_names: 0,
            splits: 0,
            rounds: 0,
            incomplete: None,
            steps,
            reserved: context.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    fn sorts(rule: &Rule) -> Vec<usize> {
        rule.slots.iter().map(|s| s.sort).collect()
    }

    fn pinned(&self, b: &Branch, rule: &Rule) -> Binding {
        let mut bind = vec![None; rule.slots.len()];
        if rule.pinned {
            for (s, c) in rule.context.iter().zip(&b.context) {
                bind[*s] = Some(b.eg.find(*c));
            }
        }
        bind
    }

    fn head_holds(&self, b: &Branch, rule: &Rule, bind: &Binding) -> bool {
        let sorts = Self::sorts(rule);
        rule.head.iter().any(|c| first_match(&b.eg, &sorts, c, bind).is_some())
    }

    fn triggers(&self, b: &Branch, rule: &Rule, limit: usize) -> Vec<Binding> {
        let sorts = Self::sorts(rule);
        let mut bind = self.pinned(b, rule);
        let universal = rule.universal();
        let mut done = vec![false; rule.body.atoms.len()];
        let mut out = Vec::new();
        search(&b.eg, &sorts, &rule.body.atoms, &mut done, &mut bind, &universal, &mut |m| {
            if !self.head_holds(b, rule, m) {
                out.push(m.clone());
            }
            out.len() >= limit
        });
        out
    }

    fn premises(&self, b: &Branch, atoms: &[Atom], bind: &Binding) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in atoms {
            let o = match a {
                Atom::Rel(r, args) => {
                    let t: Vec<Class> = args.iter().map(|s| b.eg.find(bind[*s].expect("bound"))).collect();
                    b.eg.rel_origin(*r, &t)
                }
                Atom::Fun(f, args, _) => {
                    let t: Vec<Class> = args.iter().map(|s| b.eg.find(bind[*s].expect("bound"))).collect();
                    b.eg.fun_origin(*f, &t)
                }
                Atom::Eq(..) => 0,
            };
            if o > 0 {
                let l = b.labels[o as usize - 1].clone();
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
        out
    }

    fn subst(&self, b: &Branch, rule: &Rule, slots: &[usize], bind: &Binding) -> Subst {
        slots
            .iter()
            .map(|s| (rule.slots[*s].name.clone(), b.eg.repr_of(bind[*s].expect("bound")).clone()))
            .collect()
    }

    /// Number of fresh elements needed to instantiate a conclusion.
    fn witnesses_needed(conj: &Conj, bind: &Binding) -> usize {
        let mut known: Vec<bool> = bind.iter().map(Option::is_some).collect();
        let mut count = 0;
        loop {
            let mut progress = true;
            while progress {
                progress = false;
                for a in &conj.atoms {
                    match a {
                        Atom::Fun(_, args, r) if !known[*r] && args.iter().all(|s| known[*s]) => {
                            known[*r] = true;
                            progress = true;
                        }
                        Atom::Eq(x, y) if known[*x] != known[*y] => {
                            known[*x] = true;
                            known[*y] = true;
                            progress = true;
                        }
                        _ => {}
                    }
                }
            }
            match conj.exists.iter().find(|s| !known[**s]) {
                Some(s) => {
                    known[*s] = true;
                    count += 1;
                }
                None => return count,
            }
        }
    }

    /// Assert one disjunct of a rule instance. Returns the witness names and
    /// the instantiated conclusion, or `None` when the witness budget is
    /// exhausted (nothing is changed in that case).
    fn assert_conj(
        &self,
        b: &mut Branch,
        rule: &Rule,
        conj: &Conj,
        binding: &Binding,
    ) -> Option<(Vec<(String, String)>, Vec<GAtom>)> {
        let charged = !rule.pinned;
        if charged && b.witnesses + Self::witnesses_needed(conj, binding) > self.limits.witnesses {
            return None;
        }
        let mut bind = binding.clone();
        let origin = b.origin();
        let mut created: Vec<(usize, String)> = Vec::new();
        loop {
            let mut progress = true;
            while progress {
                progress = false;
                for a in &conj.atoms {
                    match a {
                        Atom::Fun(f, args, r) if bind[*r].is_none() && args.iter().all(|s| bind[*s].is_some()) => {
                            let key: Vec<Class> = args.iter().map(|s| bind[*s].expect("bound")).collect();
                            let (c, _) = b.eg.app(self.syms, *f, &key);
                            bind[*r] = Some(c);
                            progress = true;
                        }
                        Atom::Eq(x, y) if bind[*x].is_some() != bind[*y].is_some() => {
                            let c = bind[*x].or(bind[*y]);
                            bind[*x] = c;
                            bind[*y] = c;
                            progress = true;
                        }
                        _ => {}
                    }
                }
            }
            match conj.exists.iter().find(|s| bind[**s].is_none()) {
                Some(s) => {
                    let name = b.fresh_witness();
                    let c = b.eg.add_class(rule.slots[*s].sort, GTerm::Const(name.clone()), 0);
                    created.push((*s, name));
                    if charged {
                        b.witnesses += 1;
                    }
                    bind[*s] = Some(c);
                }
                None => break,
            }
        }
        let witnesses: Vec<(String, String)> = conj
            .exists
            .iter()
            .map(|s| {
                let name = match created.iter().find(|(c, _)| c == s) {
                    Some((_, n)) => n.clone(),
                    None => b.fresh_witness(),
                };
                (rule.slots[*s].name.clone(), name)
            })
            .collect();
        let mut conclusion = Vec::new();
        for a in &conj.atoms {
            match a {
                Atom::Rel(r, args) => {
                    let t: Vec<Class> = args.iter().map(|s| bind[*s].expect("bound")).collect();
                    conclusion.push(GAtom::Rel(
                        self.syms.rels[*r].clone(),
                        t.iter().map(|c| b.eg.repr_of(*c).clone()).collect(),
                    ));
                    b.eg.add_rel(*r, t, origin + 1);
                }
                Atom::Fun(f, args, res) => {
                    let t: Vec<Class> = args.iter().map(|s| bind[*s].expect("bound")).collect();
                    let lhs = GTerm::App(self.syms.funs[*f].clone(), t.iter().map(|c| b.eg.repr_of(*c).clone()).collect());
                    conclusion.push(GAtom::Eq(lhs, b.eg.repr_of(bind[*res].expect("bound")).clone()));
                    b.eg.set_fun(*f, &t, bind[*res].expect("bound"), origin + 1);
                }
                Atom::Eq(x, y) => {
                    let (cx, cy) = (bind[*x].expect("bound"), bind[*y].expect("bound"));
                    conclusion.push(GAtom::Eq(b.eg.repr_of(cx).clone(), b.eg.repr_of(cy).clone()));
                    b.eg.union(cx, cy);
                }
            }
        }
        b.eg.rebuild();
        Some((witnesses, conclusion))
    }

    fn goal_close(&self, b: &mut Branch) -> Option<Step> {
        let sorts = Self::sorts(self.goal);
        let init = self.pinned(b, self.goal);
        for (j, conj) in self.goal.head.iter().enumerate() {
            if let Some(m) = first_match(&b.eg, &sorts, conj, &init) {
                let premises = self.premises(b, &conj.atoms, &m);
                let subst = self.subst(b, self.goal, &conj.exists, &m);
                let label = b.next_label();
                return Some(Step::Close {
                    label,
                    disjunct: j,
                    premises,
                    subst,
                });
            }
        }
        None
    }

    fn totality(&self, b: &mut Branch) -> bool {
        let mut changed = false;
        for f in 0..self.syms.funs.len() {
            let dom = &self.syms.fun_domains[f];
            let pools: Vec<Vec<Class>> = dom.iter().map(|s| b.eg.classes_of_sort(*s).collect()).collect();
            let mut idx = vec![0usize; dom.len()];
            if pools.iter().any(Vec::is_empty) {
                continue;
            }
            loop {
                let args: Vec<Class> = idx.iter().zip(&pools).map(|(i, p)| p[*i]).collect();
                if b.eg.fun_get(f, &args).is_none() {
                    let d = args.iter().map(|c| b.eg.depth[*c as usize]).max().unwrap_or(0);
                    if d + 1 > self.limits.term_depth {
                        b.incomplete.get_or_insert_with(|| "term depth limit".into());
                    } else {
                        b.eg.app(self.syms, f, &args);
                        changed = true;
                    }
                }
                let mut k = idx.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < pools[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX || idx.is_empty() {
                    break;
                }
            }
        }
        changed
    }

    fn note(&mut self, b: &Branch) {
        self.stats.max_witnesses = self.stats.max_witnesses.max(b.witnesses);
        self.stats.max_rounds = self.stats.max_rounds.max(b.rounds);
        self.stats.max_classes = self.stats.max_classes.max(b.eg.num_classes());
    }

    pub fn run(&mut self, mut b: Branch) -> Outcome {
        loop {
            b.eg.rebuild();
            self.note(&b);
            if let Some(step) = self.goal_close(&mut b) {
                b.steps.push(step);
                return Outcome::Proved(b.steps);
            }
            if b.eg.num_classes() > self.limits.class_cap {
                return Outcome::Unknown(format!("more than {} elements", self.limits.class_cap));
            }
            if b.rounds >= self.limits.rounds {
                return Outcome::Unknown(format!("round limit {} reached", self.limits.rounds));
            }
            b.rounds += 1;
            let mut det: Vec<(&Rule, Binding)> = Vec::new();
            let mut disj: Option<(&Rule, Binding)> = None;
            for rule in self.rules.clone() {
                let limit = if rule.head.len() == 1 { usize::MAX } else { 1 };
                if rule.head.len() > 1 && disj.is_some() {
                    continue;
                }
                for m in self.triggers(&b, rule, limit) {
                    match rule.head.len() {
                        0 => {
                            let premises = self.premises(&b, &rule.body.atoms, &m);
                            let subst = self.subst(&b, rule, &rule.universal(), &m);
                            let label = b.next_label();
                            b.steps.push(Step::Contradiction {
                                label,
                                rule: rule.name.clone(),
                                premises,
                                subst,
                            });
                            return Outcome::Proved(b.steps);
                        }
                        1 => det.push((rule, m)),
                        _ => {
                            if disj.is_none() {
                                disj = Some((rule, m));
                            }
                        }
                    }
                }
            }
            let mut changed = false;
            for (rule, m) in det {
                let m: Binding = m.iter().map(|c| c.map(|c| b.eg.find(c))).collect();
                if self.head_holds(&b, rule, &m) {
                    continue;
                }
                let premises = self.premises(&b, &rule.body.atoms, &m);
                let subst = self.subst(&b, rule, &rule.universal(), &m);
                match self.assert_conj(&mut b, rule, &rule.head[0], &m) {
                    Some((witnesses, conclusion)) => {
                        let label = b.next_label();
                        b.steps.push(Step::Apply {
                            label,
                            rule: rule.name.clone(),
                            premises,
                            subst,
                            witnesses,
                            conclusion,
                        });
                        changed = true;
                    }
                    None => {
                        b.incomplete.get_or_insert_with(|| "witness limit reached".into());
                    }
                }
                if b.eg.num_classes() > self.limits.class_cap {
                    break;
                }
            }
            if changed {
                continue;
            }
            if self.totality(&mut b) {
                continue;
            }
            if let Some((rule, m)) = disj {
                if b.splits >= self.limits.splits {
                    return Outcome::Unknown(format!("split limit {} reached", self.limits.splits));
                }
                return self.split(b, rule, m);
            }
            self.note(&b);
            return match b.incomplete.take() {
                Some(reason) => Outcome::Unknown(reason),
                None => Outcome::Saturated(Box::new(b)),
            };
        }
    }

    fn split(&mut self, mut b: Branch, rule: &Rule, m: Binding) -> Outcome {
        let premises = self.premises(&b, &rule.body.atoms, &m);
        let subst = self.subst(&b, rule, &rule.universal(), &m);
        let label = b.next_label();
        let mut cases = Vec::new();
        let mut unknown: Option<String> = None;
        for (i, conj) in rule.head.iter().enumerate() {
            let mut child = b.clone();
            child.splits += 1;
            child.steps = Vec::new();
            child.prefix = format!("{label}.{}.", i + 1);
            child.counter = 0;
            let case_label = format!("{label}.{}", i + 1);
            let Some((witnesses, conclusion)) = self.assert_conj(&mut child, rule, conj, &m) else {
                unknown.get_or_insert_with(|| "witness limit reached".into());
                continue;
            };
            child.labels.push(case_label.clone());
            match self.run(child) {
                Outcome::Proved(steps) => cases.push(Case {
                    label: case_label,
                    witnesses,
                    conclusion,
                    steps,
                }),
                Outcome::Saturated(open) => return Outcome::Saturated(open),
                Outcome::Unknown(r) => {
                    unknown.get_or_insert(r);
                }
            }
        }
        if let Some(r) = unknown {
            return Outcome::Unknown(r);
        }
        b.steps.push(Step::Split {
            label,
            rule: rule.name.clone(),
            premises,
            subst,
            cases,
        });
        Outcome::Proved(b.steps)
    }
}
