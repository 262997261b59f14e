//! Finite bounded distributive lattices and their thin presentations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{identity_name, CatError, DesignatedJoin, DesignatedProduct, FinCatPresentation};
use crate::parse::RawLattice;
use crate::report::{Obligation, VerificationReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BDLattice {
    pub name: String,
    pub elements: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub top: usize,
    pub bottom: usize,
}

impl BDLattice {
    /// The lattice generated by the reflexive-transitive closure of
    /// `pairs`. Fails when the closure is not antisymmetric or some pair
    /// lacks a meet or a join.
    pub fn from_order(name: impl Into<String>, elements: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self, CatError> {
        let n = elements.len();
        if n == 0 {
            return Err(CatError::NotLattice("no elements".into()));
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(CatError::NotLattice(format!("{} and {} are identified", elements[i], elements[j])));
                }
            }
        }
        let bound = |i: usize, j: usize, upper: bool| -> Option<usize> {
            let cands: Vec<usize> = (0..n)
                .filter(|&u| if upper { leq[i][u] && leq[j][u] } else { leq[u][i] && leq[u][j] })
                .collect();
            cands
                .iter()
                .copied()
                .find(|&u| cands.iter().all(|&v| if upper { leq[u][v] } else { leq[v][u] }))
        };
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                meet[i][j] = bound(i, j, false)
                    .ok_or_else(|| CatError::NotLattice(format!("{} and {} have no meet", elements[i], elements[j])))?;
                join[i][j] = bound(i, j, true)
                    .ok_or_else(|| CatError::NotLattice(format!("{} and {} have no join", elements[i], elements[j])))?;
            }
        }
        let top = (0..n).find(|&t| (0..n).all(|i| leq[i][t])).ok_or_else(|| CatError::NotLattice("no top".into()))?;
        let bottom = (0..n)
            .find(|&b| (0..n).all(|i| leq[b][i]))
            .ok_or_else(|| CatError::NotLattice("no bottom".into()))?;
        Ok(BDLattice {
            name: name.into(),
            elements,
            leq,
            meet,
            join,
            top,
            bottom,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// Pairs `a < b` with nothing strictly between them.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let lt = |a: usize, b: usize| a != b && self.leq[a][b];
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Whether the elements form a chain.
    pub fn is_chain(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| (0..n).all(|b| self.leq[a][b] || self.leq[b][a]))
    }

    /// Exhaustive check of the lattice laws, the bounds and distributivity.
    pub fn check(&self) -> VerificationReport {
        let mut r = VerificationReport::new(format!("lattice {}", self.name));
        let n = self.len();
        let e = |i: usize| self.elements[i].as_str();
        let (m, j) = (&self.meet, &self.join);
        let first = |pred: &dyn Fn(usize, usize, usize) -> bool| -> Option<String> {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !pred(a, b, c) {
                            return Some(format!("fails at ({}, {}, {})", e(a), e(b), e(c)));
                        }
                    }
                }
            }
            None
        };
        let mut law = |name: &str, stmt: &str, pred: &dyn Fn(usize, usize, usize) -> bool| {
            let bad = first(pred);
            r.push(Obligation::check(name, stmt, bad.is_none(), bad.unwrap_or_default()));
        };
        law("idempotent", "a ^ a = a and a v a = a", &|a, _, _| m[a][a] == a && j[a][a] == a);
        law("commutative", "a ^ b = b ^ a and a v b = b v a", &|a, b, _| m[a][b] == m[b][a] && j[a][b] == j[b][a]);
        law("associative", "(a ^ b) ^ c = a ^ (b ^ c) and dually", &|a, b, c| {
            m[m[a][b]][c] == m[a][m[b][c]] && j[j[a][b]][c] == j[a][j[b][c]]
        });
        law("absorption", "a ^ (a v b) = a and a v (a ^ b) = a", &|a, b, _| m[a][j[a][b]] == a && j[a][m[a][b]] == a);
        law("order", "a <= b iff a ^ b = a", &|a, b, _| self.leq[a][b] == (m[a][b] == a));
        law("bounds", "bottom <= a <= top", &|a, _, _| self.leq[self.bottom][a] && self.leq[a][self.top]);
        law("distributive", "a ^ (b v c) = (a ^ b) v (a ^ c)", &|a, b, c| m[a][j[b][c]] == j[m[a][b]][m[a][c]]);
        r
    }

    /// A bijection `h` with `a <= b` iff `h(a) <= h(b)`, found by
    /// exhaustive backtracking.
    pub fn isomorphism(&self, other: &BDLattice) -> Option<Vec<usize>> {
        let n = self.len();
        if n != other.len() {
            return None;
        }
        let mut assign = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn go(k: usize, a: &BDLattice, b: &BDLattice, assign: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
            let n = a.len();
            if k == n {
                return true;
            }
            for cand in 0..n {
                if used[cand] {
                    continue;
                }
                let ok = (0..k).all(|i| a.leq[i][k] == b.leq[assign[i]][cand] && a.leq[k][i] == b.leq[cand][assign[i]]);
                if ok {
                    assign[k] = cand;
                    used[cand] = true;
                    if go(k + 1, a, b, assign, used) {
                        return true;
                    }
                    used[cand] = false;
                }
            }
            false
        }
        go(0, self, other, &mut assign, &mut used).then_some(assign)
    }

    /// Element list and covering pairs in the lattice DSL.
    pub fn render(&self) -> String {
        let mut out = format!("lattice {} {{\n  elements {}\n", self.name, self.elements.join(" "));
        for (a, b) in self.covering_pairs() {
            let _ = writeln!(out, "  le {} {}", self.elements[a], self.elements[b]);
        }
        out.push_str("}\n");
        out
    }
}

pub fn elaborate_lattice(raw: &RawLattice) -> Result<BDLattice, CatError> {
    let mut elements: Vec<String> = Vec::new();
    for e in &raw.elements {
        if elements.contains(e) {
            return Err(CatError::Duplicate(e.clone()));
        }
        elements.push(e.clone());
    }
    let index = |e: &str| {
        elements
            .iter()
            .position(|x| x == e)
            .ok_or_else(|| CatError::UnknownObject(e.to_string()))
    };
    let mut pairs = Vec::new();
    for (a, b) in &raw.le {
        pairs.push((index(a)?, index(b)?));
    }
    BDLattice::from_order(raw.name.clone(), elements.clone(), &pairs)
}

/// The lattice as a thin category: one arrow `le_a_b` for each `a < b`,
/// the top as terminal object, meets as products of distinct pairs, and
/// joins and bottom in the subobjects of the top.
pub fn lattice_presentation(l: &BDLattice) -> FinCatPresentation {
    let n = l.len();
    let e = |i: usize| l.elements[i].clone();
    let arrow = |a: usize, b: usize| if a == b { identity_name(&e(a)) } else { format!("le_{}_{}", e(a), e(b)) };
    let mut c = FinCatPresentation::new(l.name.clone());
    c.objects = l.elements.clone();
    for a in 0..n {
        for b in 0..n {
            if a != b && l.leq[a][b] {
                c.morphisms.insert(arrow(a, b), (e(a), e(b)));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                if a != b && b != d && l.leq[a][b] && l.leq[b][d] {
                    c.comp.insert((arrow(b, d), arrow(a, b)), arrow(a, d));
                }
            }
        }
    }
    c.terminal.push(e(l.top));
    for a in 0..n {
        for b in a + 1..n {
            let m = l.meet[a][b];
            c.products.push(DesignatedProduct {
                object: e(m),
                left: e(a),
                right: e(b),
                p1: arrow(m, a),
                p2: arrow(m, b),
            });
        }
    }
    let t = l.top;
    for a in 0..n {
        for b in a + 1..n {
            c.joins.push(DesignatedJoin {
                base: e(t),
                m1: arrow(a, t),
                m2: arrow(b, t),
                join: arrow(l.join[a][b], t),
            });
        }
    }
    c.bottoms.push((e(t), arrow(l.bottom, t)));
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catlogic::validate_coherent_presentation;
    use crate::parse::{parse_document, RawItem};

    pub(crate) fn lattice(text: &str) -> BDLattice {
        let items = parse_document(text).unwrap();
        let RawItem::Lattice(raw) = &items[0] else { panic!("not a lattice") };
        elaborate_lattice(raw).unwrap()
    }

    const FREE: &str = "lattice F { elements b0 pq p q pvq t1
        le b0 pq  le pq p  le pq q  le p pvq  le q pvq  le pvq t1 }";

    #[test]
    fn free_lattice_on_two_generators() {
        let l = lattice(FREE);
        assert_eq!(l.len(), 6);
        assert!(l.check().verdict().is_proved());
        let (p, q) = (l.index("p").unwrap(), l.index("q").unwrap());
        assert_eq!(l.elements[l.meet[p][q]], "pq");
        assert_eq!(l.elements[l.join[p][q]], "pvq");
        let r = validate_coherent_presentation(&lattice_presentation(&l));
        assert!(r.verdict().is_proved(), "{}", r.to_text());
    }

    #[test]
    fn pentagon_is_not_distributive() {
        let l = lattice("lattice N5 { elements z a b c u  le z a  le a b  le z c  le b u  le c u }");
        let r = l.check();
        assert!(!r.get("distributive").unwrap().verdict.is_proved());
    }

    #[test]
    fn missing_join_is_rejected() {
        let items = parse_document("lattice V { elements z a b  le z a  le z b }").unwrap();
        let RawItem::Lattice(raw) = &items[0] else { panic!() };
        assert!(matches!(elaborate_lattice(raw), Err(CatError::NotLattice(_))));
    }

    #[test]
    fn isomorphism_by_matching() {
        let a = lattice("lattice D { elements z a b u  le z a  le z b  le a u  le b u }");
        let b = lattice("lattice E { elements u b a z  le z b  le z a  le b u  le a u }");
        let h = a.isomorphism(&b).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.leq[i][j], b.leq[h[i]][h[j]]);
            }
        }
        let chain = lattice("lattice C { elements z a b u  le z a  le a b  le b u }");
        assert!(a.isomorphism(&chain).is_none());
    }

    #[test]
    fn render_round_trips() {
        let l = lattice(FREE);
        assert_eq!(lattice(&l.render()), l);
    }

    #[test]
    fn thin_presentations_have_only_diagonal_congruences() {
        let l = lattice(FREE);
        for x in 0..l.len() {
            for r in (0..l.len()).filter(|&r| l.leq[r][x]) {
                let reflexive = l.leq[x][r];
                assert_eq!(reflexive, r == x);
            }
        }
    }
}
