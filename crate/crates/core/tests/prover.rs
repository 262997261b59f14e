use cohwork::prover::{decide_propositional, prove_sequent, replay, Budget, ProofResult};
use cohwork::{parse_sequent, parse_theory};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ATOMS: [&str; 4] = ["P", "Q", "R", "S"];

/// A formula as a disjunction of conjunctions of atom indices.
type Dnf = Vec<Vec<usize>>;

fn show_conj(c: &[usize]) -> String {
    if c.is_empty() {
        return "top".into();
    }
    c.iter().map(|i| ATOMS[*i]).collect::<Vec<_>>().join(" & ")
}

fn show(d: &Dnf) -> String {
    if d.is_empty() {
        return "bot".into();
    }
    d.iter().map(|c| format!("({})", show_conj(c))).collect::<Vec<_>>().join(" | ")
}

fn eval(d: &Dnf, v: u32) -> bool {
    d.iter().any(|c| c.iter().all(|i| v >> i & 1 == 1))
}

fn random_dnf(rng: &mut StdRng, n: usize, max_disj: usize) -> Dnf {
    let k = rng.gen_range(0..=max_disj);
    (0..k)
        .map(|_| {
            let m = rng.gen_range(0..=2);
            (0..m).map(|_| rng.gen_range(0..n)).collect()
        })
        .collect()
}

struct Case {
    n: usize,
    axioms: Vec<(Vec<usize>, Dnf)>,
}

impl Case {
    fn text(&self) -> String {
        let mut s = String::from("theory R {");
        for a in &ATOMS[..self.n] {
            s.push_str(&format!(" rel {a} :"));
        }
        for (i, (l, r)) in self.axioms.iter().enumerate() {
            let lhs = if l.is_empty() { String::new() } else { show_conj(l) };
            s.push_str(&format!(" ax a{i} : {lhs} |- {}", show(r)));
        }
        s.push_str(" }");
        s
    }

    fn entails(&self, l: &[usize], r: &Dnf) -> bool {
        (0..1u32 << self.n).all(|v| {
            let models = self.axioms.iter().all(|(a, b)| !a.iter().all(|i| v >> i & 1 == 1) || eval(b, v));
            !models || !l.iter().all(|i| v >> i & 1 == 1) || eval(r, v)
        })
    }
}

fn random_case(rng: &mut StdRng) -> Case {
    let n = rng.gen_range(1..=4);
    let k = rng.gen_range(0..=6);
    let axioms = (0..k)
        .map(|_| {
            let m = rng.gen_range(0..=2);
            ((0..m).map(|_| rng.gen_range(0..n)).collect(), random_dnf(rng, n, 3))
        })
        .collect();
    Case { n, axioms }
}

#[test]
fn propositional_agreement() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut unknown = 0;
    for _ in 0..200 {
        let case = random_case(&mut rng);
        let t = parse_theory(&case.text()).unwrap();
        for _ in 0..10 {
            let l: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..case.n)).collect();
            let r = random_dnf(&mut rng, case.n, 3);
            let lhs = if l.is_empty() { String::new() } else { show_conj(&l) };
            let s = parse_sequent(&t.signature, &format!("{lhs} |- {}", show(&r))).unwrap();
            let truth = case.entails(&l, &r);
            assert_eq!(decide_propositional(&t, &s).unwrap(), truth);
            match prove_sequent(&t, &s, Budget::new(10, 4, 4)).unwrap() {
                ProofResult::Proved(tr) => {
                    assert!(truth, "unsound: {}", case.text());
                    replay(&t, &s, &tr).unwrap();
                }
                ProofResult::Refuted { .. } => assert!(!truth),
                ProofResult::Unknown { .. } => unknown += 1,
            }
        }
    }
    assert_eq!(unknown, 0);
}
