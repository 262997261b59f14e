//! Acceptance suite. Prints one PASS/FAIL line per criterion. Every suite
//! returns a report string built only from deterministic data, and the
//! determinism criterion reruns all of them and compares bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cohwork::catlogic::{canonical_round_trip, classify_propositionality, internal_logic, lattice_presentation, lindenbaum, BDLattice};
use cohwork::model::{check_model, models_up_to, FiniteModel};
use cohwork::morita::{eliminate_coproduct, expand_model, find_proper_realization, quotient_retraction};
use cohwork::print;
use cohwork::prover::{prove_sequent, Budget, ProofResult};
use cohwork::report::Verdict;
use cohwork::syntax::{rename, Formula, Sequent, Signature, Theory};
use cohwork::translation::{pullback_model, verify_translation};
use cohwork::workspace::Workspace;
use cohwork_cli::{run, Command, Format, JobConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const LIMIT: Duration = Duration::from_secs(300);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

fn corpus() -> Workspace {
    let files: Vec<PathBuf> = ["translations.tr", "models.mdl", "lattices.lat", "extensions.ext", "certificates.cert"]
        .iter()
        .map(|f| fixture(f))
        .collect();
    Workspace::open(&files).unwrap()
}

type Suite = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 ---------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Prop {
    Top,
    Bot,
    Atom(usize),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn random(rng: &mut StdRng, atoms: usize, depth: usize) -> Prop {
        let leaf = depth == 0 || rng.gen_bool(0.35);
        if leaf {
            return match rng.gen_range(0..10) {
                0 => Prop::Top,
                1 => Prop::Bot,
                _ => Prop::Atom(rng.gen_range(0..atoms)),
            };
        }
        let a = Box::new(Prop::random(rng, atoms, depth - 1));
        let b = Box::new(Prop::random(rng, atoms, depth - 1));
        if rng.gen_bool(0.5) {
            Prop::And(a, b)
        } else {
            Prop::Or(a, b)
        }
    }

    fn eval(&self, v: u32) -> bool {
        match self {
            Prop::Top => true,
            Prop::Bot => false,
            Prop::Atom(i) => v >> i & 1 == 1,
            Prop::And(a, b) => a.eval(v) && b.eval(v),
            Prop::Or(a, b) => a.eval(v) || b.eval(v),
        }
    }

    fn formula(&self) -> Formula {
        match self {
            Prop::Top => Formula::Top,
            Prop::Bot => Formula::Bot,
            Prop::Atom(i) => Formula::rel(format!("p{i}"), vec![]),
            Prop::And(a, b) => Formula::and(a.formula(), b.formula()),
            Prop::Or(a, b) => Formula::or(a.formula(), b.formula()),
        }
    }
}

/// Semantic consequence by enumerating all valuations.
fn valuation_oracle(atoms: usize, axioms: &[(Vec<Prop>, Prop)], ante: &[Prop], succ: &Prop) -> bool {
    (0..1u32 << atoms).all(|v| {
        let model = axioms.iter().all(|(a, s)| !a.iter().all(|p| p.eval(v)) || s.eval(v));
        !model || !ante.iter().all(|p| p.eval(v)) || succ.eval(v)
    })
}

fn suite_prover() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(20_241);
    let budget = Budget::new(10, 4, 4);
    let (mut agree, mut total, mut unsound, mut unknown) = (0, 0, 0, 0);
    for k in 0..200 {
        let atoms = rng.gen_range(1..=4);
        let mut sig = Signature::new();
        for i in 0..atoms {
            sig.add_relation(format!("p{i}"), vec![]).unwrap();
        }
        let mut t = Theory::new(format!("R{k}"), sig);
        let n_ax = rng.gen_range(0..=6);
        let mut axioms = Vec::new();
        for j in 0..n_ax {
            let ante: Vec<Prop> = (0..rng.gen_range(0..=2)).map(|_| Prop::random(&mut rng, atoms, 2)).collect();
            let succ = Prop::random(&mut rng, atoms, 2);
            let s = Sequent::new(ante.iter().map(Prop::formula).collect(), succ.formula());
            t.add_axiom(format!("a{j}"), s).unwrap();
            axioms.push((ante, succ));
        }
        for _ in 0..10 {
            let ante: Vec<Prop> = (0..rng.gen_range(0..=2)).map(|_| Prop::random(&mut rng, atoms, 2)).collect();
            let succ = Prop::random(&mut rng, atoms, 2);
            let s = Sequent::new(ante.iter().map(Prop::formula).collect(), succ.formula());
            let truth = valuation_oracle(atoms, &axioms, &ante, &succ);
            total += 1;
            match prove_sequent(&t, &s, budget).map_err(|e| e.to_string())? {
                ProofResult::Proved(_) if truth => agree += 1,
                ProofResult::Proved(_) => unsound += 1,
                ProofResult::Refuted { .. } if !truth => agree += 1,
                ProofResult::Refuted { .. } => {}
                ProofResult::Unknown { .. } => unknown += 1,
            }
        }
    }
    let report = format!("{agree}/{total} agree with the valuation oracle, {unsound} unsound, {unknown} unknown");
    ensure(agree == total && unsound == 0, || report.clone())?;
    Ok(report)
}

// 2 ---------------------------------------------------------------------

fn suite_pullback() -> Result<String, String> {
    let mut ws = corpus();
    let mut out = String::new();
    let (mut cases, mut bad) = (0, Vec::new());
    for name in ws.translation_names() {
        let f = ws.translation(&name).map_err(|e| e.to_string())?;
        if verify_translation(&f, Budget::default()).is_translation != Verdict::Proved {
            let _ = writeln!(out, "{name}: not a verified translation, skipped");
            continue;
        }
        let mut models: Vec<(String, FiniteModel)> = ws.models_of(&f.target.name).map_err(|e| e.to_string())?;
        models.retain(|(_, m)| check_model(m, &f.target).is_ok_and(|c| c.ok));
        for (i, m) in models_up_to(&f.target, 3, 400).into_iter().enumerate() {
            models.push((format!("random{i}"), m));
        }
        let mut n = 0;
        for (mn, m) in &models {
            let pulled = pullback_model(&f, m).map_err(|e| format!("{name} on {mn}: {e}"))?;
            n += 1;
            if !check_model(&pulled, &f.source).is_ok_and(|c| c.ok) {
                bad.push(format!("{name} on {mn}"));
            }
        }
        cases += n;
        let _ = writeln!(out, "{name}: {n} target models pulled back");
    }
    let _ = writeln!(out, "{cases} cases, {} failures", bad.len());
    ensure(bad.is_empty() && cases > 0, || format!("{out}{}", bad.join(", ")))?;
    Ok(out)
}

// 3 ---------------------------------------------------------------------

/// A theory whose unary predicates partition `s`, so that "same part" is
/// provably an equivalence relation, with random extra axioms.
fn random_partition_theory(seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let parts = rng.gen_range(2..=3);
    let mut text = format!("theory RP{seed} {{ sort s");
    for i in 0..parts {
        let _ = write!(text, " rel P{i} : s");
    }
    text.push_str(" rel R : s s");
    let cover: Vec<String> = (0..parts).map(|i| format!("P{i}(x)")).collect();
    let _ = write!(text, " ax cover : |- {}", cover.join(" | "));
    for i in 0..parts {
        for j in i + 1..parts {
            let _ = write!(text, " ax d{i}{j} : P{i}(x), P{j}(x) |- bot");
        }
    }
    for k in 0..rng.gen_range(1..=3) {
        let i = rng.gen_range(0..parts);
        let j = rng.gen_range(0..parts);
        let ax = match rng.gen_range(0..3) {
            0 => format!("P{i}(x) |- exists y . R(x, y) & P{j}(y)"),
            1 => format!("R(x, y), P{i}(x) |- P{j}(y) | R(y, x)"),
            _ => format!("|- exists x . P{i}(x)"),
        };
        let _ = write!(text, " ax e{k} : {ax}");
    }
    let same: Vec<String> = (0..parts).map(|i| format!("P{i}(x) & P{i}(y)")).collect();
    let _ = write!(text, " }}\nextend RP{seed} with quotient s by {{x, y | {}}} as q via p into RP{seed}Q", same.join(" | "));
    text
}

fn suite_quotient() -> Result<String, String> {
    let budget = Budget::new(10, 4, 4);
    let mut out = String::new();
    let mut ws = corpus();
    let mut cases = vec![("EQ".to_string(), "EQ_QUOT".to_string())];
    for seed in [3, 11] {
        ws.load_text(&format!("random{seed}"), &random_partition_theory(seed)).map_err(|e| e.to_string())?;
        cases.push((format!("RP{seed}"), format!("RP{seed}Q")));
    }
    for (base, ext) in cases {
        let t = ws.theory(&base).map_err(|e| e.to_string())?;
        let plus = ws.theory(&ext).map_err(|e| e.to_string())?;
        let r = quotient_retraction(&t, &plus, budget).map_err(|e| e.to_string())?;
        let line = format!(
            "{base}: {} obligations, {} failed, {} unknown, homotopy {}",
            r.report.entries.len(),
            r.report.count(Verdict::Failed),
            r.report.count(Verdict::Unknown),
            r.report.verdict_of("homotopy")
        );
        let _ = writeln!(out, "{line}");
        ensure(r.report.count(Verdict::Unknown) == 0 && r.report.verdict() == Verdict::Proved, || {
            format!("{line}\n{}", r.report.to_text())
        })?;
    }
    Ok(out)
}

// 4 ---------------------------------------------------------------------

fn suite_round_trip() -> Result<String, String> {
    let mut out = String::new();
    for name in ["p2.th", "eq.th", "two.th"] {
        let t = cohwork::parse_theory(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let budget = Budget::default();
        let rt = canonical_round_trip(&t, 3, budget).map_err(|e| e.to_string())?;
        let entries: Vec<_> = rt.report.entries.iter().filter(|e| e.name.starts_with("roundtrip/")).collect();
        let failed = entries.iter().filter(|e| e.verdict == Verdict::Failed).count();
        let unknown = entries.iter().filter(|e| e.verdict == Verdict::Unknown).count();
        let ratio = unknown as f64 / entries.len().max(1) as f64;
        let mut line = format!(
            "{}: {} objects, {} obligations, {failed} failed, {unknown} unknown",
            t.name,
            rt.slice.objects.len(),
            entries.len()
        );
        ensure(failed == 0 && ratio <= 0.05, || format!("{line}\n{}", rt.report.to_text()))?;
        if unknown > 0 {
            let again = canonical_round_trip(&t, 3, budget.scaled(2)).map_err(|e| e.to_string())?;
            let left = again
                .report
                .entries
                .iter()
                .filter(|e| e.name.starts_with("roundtrip/") && e.verdict != Verdict::Proved)
                .count();
            let _ = write!(line, ", {left} open at budget {}", budget.scaled(2));
            ensure(left == 0, || line.clone())?;
        }
        // Semantic cross-check: phi and Theta H phi have the same extension
        // in every small model.
        let models = models_up_to(&t, 2, 200);
        let mut mismatches = 0;
        for o in &rt.slice.objects {
            let (c1, f1) = rt.h.map.apply_in(&o.class.context, &o.class.formula).map_err(|e| e.to_string())?;
            let (c2, f2) = rt.theta.map.apply_in(&c1, &f1).map_err(|e| e.to_string())?;
            let back = rename(&f2, &c2, &o.class.context).map_err(|e| e.to_string())?;
            for m in &models {
                let a = m.extension(&o.class.context, &o.class.formula).map_err(|e| e.to_string())?;
                let b = m.extension(&o.class.context, &back).map_err(|e| e.to_string())?;
                if a != b {
                    mismatches += 1;
                }
            }
        }
        let _ = writeln!(out, "{line}, {} models, {mismatches} semantic mismatches", models.len());
        ensure(mismatches == 0, || out.clone())?;
    }
    Ok(out)
}

// 5 ---------------------------------------------------------------------

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive order-isomorphism test over all bijections.
fn order_isomorphic(a: &BDLattice, b: &BDLattice) -> bool {
    a.len() == b.len()
        && permutations(a.len())
            .iter()
            .any(|p| (0..a.len()).all(|i| (0..a.len()).all(|j| a.leq[i][j] == b.leq[p[i]][p[j]])))
}

fn suite_lattices() -> Result<String, String> {
    let ws = corpus();
    let mut out = String::new();
    for name in ["C2", "D4", "F6"] {
        let l = ws.lattice(name).map_err(|e| e.to_string())?;
        let t = internal_logic(&lattice_presentation(&l)).map_err(|e| e.to_string())?;
        let lt = lindenbaum(&t, 1, Budget::default()).map_err(|e| e.to_string())?;
        let found = lt.lattice.isomorphism(&l);
        let oracle = order_isomorphic(&lt.lattice, &l);
        let line = format!(
            "{name}: {} elements, {} classes, matching {}, permutation oracle {}",
            l.len(),
            lt.lattice.len(),
            found.is_some(),
            oracle
        );
        let _ = writeln!(out, "{line}");
        ensure(found.is_some() && oracle, || format!("{line}\n{}", lt.render()))?;
    }
    Ok(out)
}

// 6 ---------------------------------------------------------------------

fn suite_harnik() -> Result<String, String> {
    let mut ws = corpus();
    let two = ws.theory("TWO").map_err(|e| e.to_string())?;
    let budget = Budget::new(10, 12, 5);
    let (r, _) = find_proper_realization(&two, 1, budget).map_err(|e| e.to_string())?;
    let r = r.ok_or("no realization in TWO")?;
    let e = eliminate_coproduct(&two, &r, "s", "s", budget).map_err(|e| e.to_string())?;
    let mut out = String::new();
    let mut wanted: Vec<String> = ["refl", "symm", "trans"].iter().map(|k| format!("admissible/{}:{k}", e.sum)).collect();
    wanted.push("coproduct:disjoint".to_string());
    for w in &wanted {
        let v = e.report.get(w).map(|o| o.verdict);
        let _ = writeln!(out, "{}: {}", w.replace(&e.sum, "eps"), v.map(|v| v.to_string()).unwrap_or("missing".into()));
        ensure(v == Some(Verdict::Proved), || format!("{w} is {v:?}\n{}", e.report.to_text()))?;
    }
    let (_, m) = ws.model("TWO_CANON").map_err(|e| e.to_string())?;
    let big = expand_model(&m, &e.extension).map_err(|e| e.to_string())?;
    let expected = 2 * m.size("s");
    let _ = writeln!(out, "quotient carrier: {} elements (disjoint union of two copies: {expected})", big.size(&e.sum));
    ensure(big.size(&e.sum) == 4 && expected == 4, || out.clone())?;
    ensure(check_model(&big, &e.extension.theory).is_ok_and(|c| c.ok), || "expansion is not a model".into())?;
    Ok(out)
}

// 7 ---------------------------------------------------------------------

fn suite_classifier() -> Result<String, String> {
    let mut ws = corpus();
    let mut out = String::new();
    let b = Budget::default();
    let p2 = classify_propositionality(&ws.theory("P2").unwrap(), 2, b).map_err(|e| e.to_string())?;
    let _ = writeln!(out, "P2: propositional {}", p2.propositional);
    ensure(p2.propositional == Verdict::Proved, || p2.render())?;

    let eq = ws.theory("EQ").unwrap();
    let c = classify_propositionality(&eq, 2, b).map_err(|e| e.to_string())?;
    let cm = c.report.get("cond5:s").and_then(|o| o.countermodel()).map(|(m, env)| (m.clone(), env.clone()));
    let (m, env) = cm.ok_or_else(|| c.render())?;
    // Independent check of the countermodel: A is an equivalence relation on
    // a two-element carrier and the two witnesses differ.
    let n = m.size("s");
    let a = &m.relations["A"];
    let holds = |i: usize, j: usize| a.contains(&vec![i, j]);
    let equivalence = (0..n).all(|i| holds(i, i))
        && (0..n).all(|i| (0..n).all(|j| !holds(i, j) || holds(j, i)))
        && (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(holds(i, j) && holds(j, k)) || holds(i, k))));
    let distinct = env.len() == 2 && env[0].1 != env[1].1;
    let _ = writeln!(
        out,
        "EQ: propositional {}, countermodel of size {n} to |- x = y ({})",
        c.propositional,
        cohwork::report::model_summary(&m)
    );
    ensure(c.propositional == Verdict::Failed && n == 2 && equivalence && distinct, || c.render())?;

    let two = classify_propositionality(&ws.theory("TWO").unwrap(), 2, b).map_err(|e| e.to_string())?;
    let pieces: Vec<String> = two
        .decompositions
        .iter()
        .flat_map(|d| d.pieces.iter().map(print::formula))
        .collect();
    let _ = writeln!(
        out,
        "TWO: propositional {}, parapropositional {}, pieces {}",
        two.propositional,
        two.parapropositional,
        pieces.join(" + ")
    );
    ensure(two.propositional == Verdict::Failed && two.parapropositional == Verdict::Proved, || two.render())?;
    Ok(out)
}

// 8 ---------------------------------------------------------------------

fn suite_goldens() -> Result<String, String> {
    let mut ws = corpus();
    let mut out = String::new();
    let names = ws.extension_names();
    let mut kinds = std::collections::BTreeSet::new();
    for n in &names {
        let e = ws.extension(n).map_err(|e| e.to_string())?;
        kinds.extend(e.specs.iter().map(|s| s.kind()));
        let emitted: String = e
            .definitions
            .iter()
            .map(|d| format!("{} : {}\n", d.name, print::sequent(&d.sequent)))
            .collect();
        let golden = std::fs::read_to_string(fixture(&format!("golden/{n}.defs"))).map_err(|e| format!("{n}: {e}"))?;
        let same = emitted.split_whitespace().eq(golden.split_whitespace());
        let _ = writeln!(out, "{n}: {} sequents, match {same}", e.definitions.len());
        ensure(same, || format!("{n}\nemitted:\n{emitted}golden:\n{golden}"))?;
    }
    let kinds: Vec<&str> = kinds.into_iter().collect();
    let _ = writeln!(out, "schemas: {}", kinds.join(", "));
    ensure(kinds.len() == 5, || out.clone())?;
    Ok(out)
}

// 9 ---------------------------------------------------------------------

fn cli_jobs() -> Vec<JobConfig> {
    let f = |n: &str| fixture(n);
    let corpus: Vec<PathBuf> = ["translations.tr", "models.mdl", "lattices.lat", "extensions.ext", "certificates.cert"]
        .iter()
        .map(|n| f(n))
        .collect();
    let mut jobs = vec![
        JobConfig::new(Command::Prove {
            args: vec![f("eq.th").display().to_string(), "A(x,y) & A(y,z) |- A(x,z)".into()],
            theory: None,
        }),
        JobConfig::new(Command::CheckTranslation {
            files: corpus.clone(),
            translation: None,
        }),
        JobConfig::new(Command::ClassifyProp {
            files: vec![f("two.th")],
            theory: None,
        }),
        JobConfig::new(Command::ClassifyEquiv {
            files: corpus.clone(),
            certificate: Some("SELF".into()),
        }),
        JobConfig::new(Command::Extend {
            files: corpus.clone(),
            extension: None,
        }),
        JobConfig::new(Command::CheckTmap {
            files: corpus,
            tmap: Some("chi_swap".into()),
            spot_checks: 6,
        }),
    ];
    jobs[5].seed = 99;
    let mut rt = JobConfig::new(Command::RoundTrip {
        files: vec![f("eq.th")],
        theory: None,
    });
    rt.depth = 3;
    jobs.push(rt);
    jobs
}

fn suite_determinism(first: &[(usize, Result<String, String>)]) -> Result<String, String> {
    let mut out = String::new();
    for (k, before) in first {
        let again = SUITES[*k - 1].1();
        ensure(&again == before, || format!("suite {k} changed between runs"))?;
        let _ = writeln!(out, "suite {k}: identical");
    }
    for job in cli_jobs() {
        for format in [Format::Text, Format::Structured] {
            let mut j = job.clone();
            j.format = format;
            let (a, b) = (run(&j), run(&j));
            ensure(a.output == b.output && a.code == b.code, || format!("{} ({format:?}) changed", job.command.name()))?;
        }
        let _ = writeln!(out, "{}: identical text and structured reports", job.command.name());
    }
    Ok(out)
}

const SUITES: [(&str, Suite); 8] = [
    ("propositional prover completeness", suite_prover),
    ("translation semantics", suite_pullback),
    ("quotient homotopy", suite_quotient),
    ("round trip", suite_round_trip),
    ("lattice faithfulness", suite_lattices),
    ("coproduct elimination", suite_harnik),
    ("propositionality classifier", suite_classifier),
    ("extension golden files", suite_goldens),
];

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut first = Vec::new();
    let mut all = true;
    for (i, (name, suite)) in SUITES.iter().enumerate() {
        let start = Instant::now();
        let r = suite();
        let took = start.elapsed();
        let ok = r.is_ok() && took < LIMIT;
        all &= ok;
        let detail = match &r {
            Ok(s) => s.lines().collect::<Vec<_>>().join("; "),
            Err(e) => e.lines().next().unwrap_or("").to_string(),
        };
        let line = format!(
            "criterion {}: {} {name} ({:.1}s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        println!("{line}");
        if let Err(e) = &r {
            eprintln!("{e}");
        }
        lines.push(line);
        first.push((i + 1, r));
    }
    let start = Instant::now();
    let r = suite_determinism(&first);
    let took = start.elapsed();
    let ok = r.is_ok() && took < LIMIT;
    all &= ok;
    println!(
        "criterion 9: {} determinism ({:.1}s) {}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        match &r {
            Ok(s) => s.lines().collect::<Vec<_>>().join("; "),
            Err(e) => e.clone(),
        }
    );
    assert!(all, "some acceptance criteria failed");
}
