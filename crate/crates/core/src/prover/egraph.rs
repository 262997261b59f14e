//! Ground facts modulo equality: a union-find over element classes with
//! relation tables and a congruence-closed function table.

use std::collections::BTreeMap;

use super::normal::Symbols;
use super::trace::GTerm;

pub type Class = u32;

/// Facts remember the label index of the step that introduced them
/// (`0` when none did) so that traces can cite premises.
#[derive(Debug, Clone)]
pub struct EGraph {
    parent: Vec<Class>,
    pub sort: Vec<usize>,
    pub repr: Vec<GTerm>,
    pub depth: Vec<u32>,
    rels: Vec<BTreeMap<Vec<Class>, u32>>,
    funs: Vec<BTreeMap<Vec<Class>, (Class, u32)>>,
    dirty: bool,
    roots: usize,
}

impl EGraph {
    pub fn new(syms: &Symbols) -> Self {
        EGraph {
            parent: Vec::new(),
            sort: Vec::new(),
            repr: Vec::new(),
            depth: Vec::new(),
            rels: vec![BTreeMap::new(); syms.rels.len()],
            funs: vec![BTreeMap::new(); syms.funs.len()],
            dirty: false,
            roots: 0,
        }
    }

    pub fn find(&self, mut x: Class) -> Class {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    pub fn add_class(&mut self, sort: usize, repr: GTerm, depth: u32) -> Class {
        let id = self.parent.len() as Class;
        self.parent.push(id);
        self.sort.push(sort);
        self.repr.push(repr);
        self.depth.push(depth);
        self.roots += 1;
        id
    }

    pub fn num_classes(&self) -> usize {
        self.roots
    }

    pub fn classes(&self) -> impl Iterator<Item = Class> + '_ {
        (0..self.parent.len() as Class).filter(move |c| self.parent[*c as usize] == *c)
    }

    pub fn classes_of_sort(&self, sort: usize) -> impl Iterator<Item = Class> + '_ {
        self.classes().filter(move |c| self.sort[*c as usize] == sort)
    }

    pub fn repr_of(&self, c: Class) -> &GTerm {
        &self.repr[self.find(c) as usize]
    }

    /// Merge two classes; the smaller id survives. Returns whether anything
    /// changed. Tables are stale until [`EGraph::rebuild`].
    pub fn union(&mut self, a: Class, b: Class) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        let d = self.depth[hi as usize].min(self.depth[lo as usize]);
        self.depth[lo as usize] = d;
        self.roots -= 1;
        self.dirty = true;
        true
    }

    /// Restore canonical tables and congruence closure.
    pub fn rebuild(&mut self) {
        while self.dirty {
            self.dirty = false;
            for x in 0..self.parent.len() {
                let r = self.find(x as Class);
                self.parent[x] = r;
            }
            for table in &mut self.rels {
                let old = std::mem::take(table);
                for (t, o) in old {
                    let t2: Vec<Class> = t.iter().map(|c| self.parent[*c as usize]).collect();
                    let e = table.entry(t2).or_insert(o);
                    if *e == 0 || (o != 0 && o < *e) {
                        *e = o;
                    }
                }
            }
            let mut merges = Vec::new();
            for table in &mut self.funs {
                let old = std::mem::take(table);
                for (args, (res, o)) in old {
                    let args2: Vec<Class> = args.iter().map(|c| self.parent[*c as usize]).collect();
                    let res2 = self.parent[res as usize];
                    match table.get(&args2) {
                        Some((r, _)) if *r != res2 => merges.push((*r, res2)),
                        Some(_) => {}
                        None => {
                            table.insert(args2, (res2, o));
                        }
                    }
                }
            }
            for (a, b) in merges {
                self.union(a, b);
            }
        }
    }


    pub fn rel_origin(&self, r: usize, t: &[Class]) -> u32 {
        self.rels[r].get(t).copied().unwrap_or(0)
    }

    /// Insert a relation fact over canonical classes; returns whether it is new.
    pub fn add_rel(&mut self, r: usize, t: Vec<Class>, origin: u32) -> bool {
        let t: Vec<Class> = t.into_iter().map(|c| self.find(c)).collect();
        if self.rels[r].contains_key(&t) {
            return false;
        }
        self.rels[r].insert(t, origin);
        true
    }

    pub fn rel_tuples(&self, r: usize) -> impl Iterator<Item = &Vec<Class>> {
        self.rels[r].keys()
    }

    /// Tuples whose first component is `first`.
    pub fn rel_tuples_from(&self, r: usize, first: Class) -> impl Iterator<Item = &Vec<Class>> {
        self.rels[r].range(vec![first]..vec![first + 1]).map(|(k, _)| k)
    }

    pub fn fun_get(&self, f: usize, args: &[Class]) -> Option<Class> {
        self.funs[f].get(args).map(|(r, _)| *r)
    }

    pub fn fun_origin(&self, f: usize, args: &[Class]) -> u32 {
        self.funs[f].get(args).map_or(0, |(_, o)| *o)
    }

    pub fn fun_entries(&self, f: usize) -> impl Iterator<Item = (&Vec<Class>, Class)> {
        self.funs[f].iter().map(|(k, (r, _))| (k, *r))
    }


    /// The class of `f(args)`, created if absent. The flag reports creation.
    pub fn app(&mut self, syms: &Symbols, f: usize, args: &[Class]) -> (Class, bool) {
        let args: Vec<Class> = args.iter().map(|c| self.find(*c)).collect();
        if let Some((r, _)) = self.funs[f].get(&args) {
            return (self.find(*r), false);
        }
        let repr = GTerm::App(
            syms.funs[f].clone(),
            args.iter().map(|a| self.repr[*a as usize].clone()).collect(),
        );
        let depth = 1 + args.iter().map(|a| self.depth[*a as usize]).max().unwrap_or(0);
        let c = self.add_class(syms.fun_codomains[f], repr, depth);
        self.funs[f].insert(args, (c, 0));
        (c, true)
    }

    /// Record `f(args) = res`; returns whether anything changed.
    pub fn set_fun(&mut self, f: usize, args: &[Class], res: Class, origin: u32) -> bool {
        let args: Vec<Class> = args.iter().map(|c| self.find(*c)).collect();
        let res = self.find(res);
        match self.funs[f].get_mut(&args) {
            Some((r, o)) => {
                if *o == 0 {
                    *o = origin;
                }
                let r = *r;
                self.union(r, res)
            }
            None => {
                self.funs[f].insert(args, (res, origin));
                true
            }
        }
    }
}
