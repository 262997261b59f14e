//! Batch jobs: one command over a set of input files, producing a report
//! and an exit status.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Subcommand;
use cohwork::catlogic::{
    canonical_round_trip, classify_propositionality, internal_logic, lattice_presentation, lindenbaum, render_presentation,
    syntactic_slice, validate_coherent_presentation,
};
use cohwork::enumerate::formulas_mentioning_all;
use cohwork::model::check_model;
use cohwork::morita::{
    eliminate_coproduct, exact_completion_slice, expand_model, find_proper_realization, quotient_retraction, transport_properness,
    verify_extension, Realization,
};
use cohwork::parse::{parse_sequent, RawCertificate, RawLevel};
use cohwork::print;
use cohwork::prover::{prove_sequent, Budget, ProofResult};
use cohwork::report::{Obligation, Verdict, VerificationReport};
use cohwork::syntax::{SubstitutionClass, Theory, Var};
use cohwork::translation::{pullback_model, render_reconstrual, verify_homotopy_equivalence, verify_tmap, verify_translation};
use cohwork::workspace::{Workspace, WorkspaceError};
use cohwork::find_countermodel;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::equivalence::{classify_equivalence, Artifacts, Claim, EquivalenceCertificate};
use crate::output::{Format, JobReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PROVED: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Parse and type-check theories.
    CheckTheory {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Prove a sequent: FILE... SEQUENT.
    Prove {
        #[arg(required = true, num_args = 2..)]
        args: Vec<String>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Search for a finite countermodel: FILE... SEQUENT.
    Countermodel {
        #[arg(required = true, num_args = 2..)]
        args: Vec<String>,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
    },
    /// Check finite models against their theories.
    CheckModel {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Verify reconstruals as translations.
    CheckTranslation {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        translation: Option<String>,
    },
    /// Compose translations along a path such as G.F and verify the result.
    Compose {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        path: String,
    },
    /// Verify t-maps.
    CheckTmap {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        tmap: Option<String>,
        /// Also check naturality on this many random composite formulae.
        #[arg(long, default_value_t = 0)]
        spot_checks: usize,
    },
    /// Verify that two translations and two t-maps form a homotopy equivalence.
    CheckHomotopy {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        chi1: String,
        #[arg(long)]
        chi2: String,
    },
    /// Pull a model of the target back along a translation.
    PullbackModel {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        translation: String,
        #[arg(long)]
        model: String,
    },
    /// Build extensions and discharge their admissibility conditions.
    Extend {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        extension: Option<String>,
    },
    /// Recognise one theory as a Morita extension of another.
    CheckExtension {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        base: String,
        #[arg(long)]
        extension: String,
    },
    /// Quotient by the provable equivalence relations up to the depth.
    ExactSlice {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// The retraction of a quotient extension and its homotopy equivalence.
    QuotientRetraction {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        base: String,
        #[arg(long)]
        extension: String,
    },
    /// Search for two disjoint inhabited unary formulae.
    FindProper {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Carry a realization of the source along a translation.
    TransportProper {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        translation: String,
    },
    /// Build a coproduct of two sorts from products, a subsort and a quotient.
    EliminateCoproduct {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Expand this model of the theory to the new sorts.
        #[arg(long)]
        model: Option<String>,
    },
    /// Validate a finite presentation and print its internal logic.
    InternalLogic {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        category: Option<String>,
        #[arg(long, conflicts_with = "category")]
        lattice: Option<String>,
    },
    /// The bounded syntactic category of a theory.
    SyntacticSlice {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// The lattice of sentences of a theory, or of the internal logic of a lattice.
    Lindenbaum {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long, conflicts_with = "theory")]
        lattice: Option<String>,
    },
    /// Decide propositionality and parapropositionality at bounded depth.
    ClassifyProp {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Check the levels claimed by an equivalence certificate.
    ClassifyEquiv {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        certificate: Option<String>,
    },
    /// Translate into the internal logic of the slice and back.
    RoundTrip {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        theory: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckTheory { .. } => "check-theory",
            Command::Prove { .. } => "prove",
            Command::Countermodel { .. } => "countermodel",
            Command::CheckModel { .. } => "check-model",
            Command::CheckTranslation { .. } => "check-translation",
            Command::Compose { .. } => "compose",
            Command::CheckTmap { .. } => "check-tmap",
            Command::CheckHomotopy { .. } => "check-homotopy",
            Command::PullbackModel { .. } => "pullback-model",
            Command::Extend { .. } => "extend",
            Command::CheckExtension { .. } => "check-extension",
            Command::ExactSlice { .. } => "exact-slice",
            Command::QuotientRetraction { .. } => "quotient-retraction",
            Command::FindProper { .. } => "find-proper",
            Command::TransportProper { .. } => "transport-proper",
            Command::EliminateCoproduct { .. } => "eliminate-coproduct",
            Command::InternalLogic { .. } => "internal-logic",
            Command::SyntacticSlice { .. } => "syntactic-slice",
            Command::Lindenbaum { .. } => "lindenbaum",
            Command::ClassifyProp { .. } => "classify-prop",
            Command::ClassifyEquiv { .. } => "classify-equiv",
            Command::RoundTrip { .. } => "round-trip",
        }
    }

    /// Input files, and the sequent for `prove` and `countermodel`.
    fn inputs(&self) -> (Vec<PathBuf>, Option<String>) {
        match self {
            Command::Prove { args, .. } | Command::Countermodel { args, .. } => {
                let (seq, files) = args.split_last().expect("at least two arguments");
                (files.iter().map(PathBuf::from).collect(), Some(seq.clone()))
            }
            Command::CheckTheory { files, .. }
            | Command::CheckModel { files, .. }
            | Command::CheckTranslation { files, .. }
            | Command::Compose { files, .. }
            | Command::CheckTmap { files, .. }
            | Command::CheckHomotopy { files, .. }
            | Command::PullbackModel { files, .. }
            | Command::Extend { files, .. }
            | Command::CheckExtension { files, .. }
            | Command::ExactSlice { files, .. }
            | Command::QuotientRetraction { files, .. }
            | Command::FindProper { files, .. }
            | Command::TransportProper { files, .. }
            | Command::EliminateCoproduct { files, .. }
            | Command::InternalLogic { files, .. }
            | Command::SyntacticSlice { files, .. }
            | Command::Lindenbaum { files, .. }
            | Command::ClassifyProp { files, .. }
            | Command::ClassifyEquiv { files, .. }
            | Command::RoundTrip { files, .. } => (files.clone(), None),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: Command,
    pub budget: Budget,
    pub depth: usize,
    pub format: Format,
    pub seed: u64,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            budget: Budget::default(),
            depth: 2,
            format: Format::Text,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub code: i32,
    pub output: String,
    pub report: Option<JobReport>,
}

/// Input problems: unreadable files, parse errors, unknown names and
/// artifacts that do not fit together.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error("{0}")]
    Other(String),
}

fn input(e: impl std::fmt::Display) -> InputError {
    InputError::Other(e.to_string())
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Proved => EXIT_PROVED,
        Verdict::Failed => EXIT_FAILED,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

pub fn run(job: &JobConfig) -> JobOutcome {
    let cmd = &job.command;
    let (files, sequent) = cmd.inputs();
    let mut header = vec![
        ("tool".to_string(), format!("cohwork {VERSION}")),
        ("command".to_string(), cmd.name().to_string()),
        (
            "inputs".to_string(),
            files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" "),
        ),
        ("budget".to_string(), job.budget.to_string()),
        ("depth".to_string(), job.depth.to_string()),
    ];
    if let Command::CheckTmap { spot_checks, .. } = cmd {
        if *spot_checks > 0 {
            header.push(("seed".to_string(), job.seed.to_string()));
        }
    }
    if let Some(s) = &sequent {
        header.push(("sequent".to_string(), s.clone()));
    }
    let mut report = JobReport::new(header);
    let result = Workspace::open(&files)
        .map_err(InputError::from)
        .and_then(|mut ws| dispatch(job, &mut ws, sequent.as_deref(), &mut report));
    match result {
        Ok(v) => {
            report.verdict = v;
            JobOutcome {
                code: exit_code(v),
                output: report.render(job.format),
                report: Some(report),
            }
        }
        Err(e) => JobOutcome {
            code: EXIT_INPUT,
            output: format!("error: {e}\n"),
            report: None,
        },
    }
}

fn pick_theory(ws: &mut Workspace, name: &Option<String>) -> Result<Theory, InputError> {
    let n = match name {
        Some(n) => n.clone(),
        None => ws
            .theory_names()
            .into_iter()
            .next()
            .ok_or_else(|| input("no theory in the input files"))?,
    };
    Ok(ws.theory(&n)?)
}

fn pick(names: Vec<String>, chosen: &Option<String>, kind: &str) -> Result<Vec<String>, InputError> {
    match chosen {
        Some(n) => Ok(vec![n.clone()]),
        None if names.is_empty() => Err(input(format!("no {kind} in the input files"))),
        None => Ok(names),
    }
}

fn proof_obligation(name: &str, statement: String, r: ProofResult) -> Obligation {
    Obligation {
        name: name.to_string(),
        statement,
        verdict: Verdict::of(&r),
        evidence: cohwork::report::Evidence::Result(Box::new(r)),
    }
}

fn realization_text(r: &Realization) -> String {
    let show = |c: &SubstitutionClass| print::class(&c.context, &c.formula);
    format!("sort {}: [{}] and [{}]\n", r.sort, show(&r.phi), show(&r.psi))
}

fn realization_report(title: String, r: &Realization) -> VerificationReport {
    let mut rep = VerificationReport::new(title);
    let show = |c: &SubstitutionClass| print::class(&c.context, &c.formula);
    rep.push(proof_obligation(
        "disjoint",
        format!("{} & {} |- bot", show(&r.phi), show(&r.psi)),
        r.disjoint.clone(),
    ));
    rep.push(proof_obligation(
        "inhabited",
        format!("|- exists {} & exists {}", show(&r.phi), show(&r.psi)),
        r.inhabited.clone(),
    ));
    rep
}

fn dispatch(job: &JobConfig, ws: &mut Workspace, sequent: Option<&str>, out: &mut JobReport) -> Result<Verdict, InputError> {
    let b = job.budget;
    let depth = job.depth;
    match &job.command {
        Command::CheckTheory { theory, .. } => {
            let names = pick(ws.theory_names(), theory, "theory")?;
            let mut rep = VerificationReport::new("theories");
            for n in names {
                let t = ws.theory(&n)?;
                out.section(format!("theory {n}"), print::theory(&t));
                rep.push(Obligation::check(
                    format!("well-formed:{n}"),
                    format!("{n} parses and type-checks"),
                    true,
                    format!(
                        "{} sorts, {} relations, {} functions, {} axioms",
                        t.signature.sorts.len(),
                        t.signature.relations.len(),
                        t.signature.functions.len(),
                        t.axioms.len()
                    ),
                ));
            }
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::Prove { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let s = parse_sequent(&t.signature, sequent.unwrap_or_default()).map_err(input)?;
            let r = prove_sequent(&t, &s, b).map_err(input)?;
            match &r {
                ProofResult::Proved(trace) => out.section("trace", trace.to_text()),
                ProofResult::Refuted { model, assignment } => {
                    let mut body = model.render("counter", &t.name, &t.signature);
                    let _ = writeln!(body, "falsified at {}", model.show_assignment(assignment));
                    out.section("countermodel", body)
                }
                ProofResult::Unknown { .. } => {}
            }
            let mut rep = VerificationReport::new(format!("prove in {}", t.name));
            rep.push(proof_obligation("goal", print::sequent(&s), r));
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::Countermodel { theory, max_size, .. } => {
            let t = pick_theory(ws, theory)?;
            let s = parse_sequent(&t.signature, sequent.unwrap_or_default()).map_err(input)?;
            let mut rep = VerificationReport::new(format!("countermodel search in {} up to size {max_size}", t.name));
            match find_countermodel(&t, &s, *max_size) {
                Some((m, env)) => {
                    let mut body = m.render("counter", &t.name, &t.signature);
                    let _ = writeln!(body, "falsified at {}", m.show_assignment(&env));
                    out.section("countermodel", body);
                    rep.push(proof_obligation(
                        "goal",
                        print::sequent(&s),
                        ProofResult::Refuted { model: m, assignment: env },
                    ));
                }
                None => rep.push(Obligation::with_verdict(
                    "goal",
                    print::sequent(&s),
                    Verdict::Unknown,
                    format!("no countermodel with carriers of size at most {max_size}"),
                )),
            }
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::CheckModel { model, .. } => {
            let names = pick(ws.model_names(), model, "model")?;
            let mut rep = VerificationReport::new("models");
            for n in names {
                let (t, m) = ws.model(&n)?;
                let c = check_model(&m, &t).map_err(input)?;
                let note = c
                    .violations
                    .iter()
                    .map(|v| {
                        let at: Vec<String> = v.assignment.iter().map(|(x, e)| format!("{x}={e}")).collect();
                        format!("{} fails at [{}]", v.axiom, at.join(", "))
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                rep.push(Obligation::check(format!("model:{n}"), format!("{n} is a model of {}", t.name), c.ok, note));
            }
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::CheckTranslation { translation, .. } => {
            let names = pick(ws.translation_names(), translation, "translation")?;
            let mut vs = Vec::new();
            for n in names {
                let f = ws.translation_path(&n, None)?;
                let t = verify_translation(&f, b);
                out.section(
                    format!("translation {n}"),
                    format!(
                        "{}translation: {}\nequality-preserving: {}\nstrong: {}\n",
                        render_reconstrual(&f),
                        t.is_translation,
                        t.is_equality_preserving,
                        t.is_strong
                    ),
                );
                vs.push(t.is_translation);
                out.report(t.report);
            }
            Ok(Verdict::all(vs))
        }
        Command::Compose { path, .. } => {
            let f = ws.translation_path(path, None)?;
            let t = verify_translation(&f, b);
            out.section(format!("composite {path}"), render_reconstrual(&f));
            let v = t.is_translation;
            out.report(t.report);
            Ok(v)
        }
        Command::CheckTmap { tmap, spot_checks, .. } => {
            let names = pick(ws.tmap_names(), tmap, "tmap")?;
            let mut vs = Vec::new();
            for n in names {
                let mut chi = ws.tmap(&n)?;
                let atoms_only = *spot_checks == 0 && chi.checks.is_empty();
                if *spot_checks > 0 {
                    let extra = random_checks(&chi.from.source, *spot_checks, job.seed);
                    let shown: Vec<String> = extra.iter().map(|c| print::class(&c.context, &c.formula)).collect();
                    out.section(format!("spot checks for {n}"), shown.join("\n"));
                    chi.checks.extend(extra);
                }
                let rep = verify_tmap(&chi, atoms_only, b).map_err(input)?;
                vs.push(rep.verdict());
                out.report(rep);
            }
            Ok(Verdict::all(vs))
        }
        Command::CheckHomotopy { f, g, chi1, chi2, .. } => {
            let (f, g) = (ws.translation_path(f, None)?, ws.translation_path(g, None)?);
            let (c1, c2) = (ws.tmap(chi1)?, ws.tmap(chi2)?);
            let rep = verify_homotopy_equivalence(&f, &g, &c1, &c2, b).map_err(input)?;
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::PullbackModel { translation, model, .. } => {
            let f = ws.translation_path(translation, None)?;
            let (t, m) = ws.model(model)?;
            if t.name != f.target.name {
                return Err(input(format!("{model} is a model of {}, not of {}", t.name, f.target.name)));
            }
            let tr = verify_translation(&f, b);
            let pulled = pullback_model(&f, &m).map_err(input)?;
            let name = format!("{}_{}", f.name, model);
            out.section("pulled back model", pulled.render(&name, &f.source.name, &f.source.signature));
            let c = check_model(&pulled, &f.source).map_err(input)?;
            let mut rep = VerificationReport::new(format!("pullback of {model} along {}", f.name));
            rep.push(Obligation::with_verdict("translation", format!("{} is a translation", f.name), tr.is_translation, ""));
            let note: Vec<String> = c.violations.iter().map(|v| v.axiom.clone()).collect();
            rep.push(Obligation::check(
                "model",
                format!("{name} is a model of {}", f.source.name),
                c.ok,
                if note.is_empty() { String::new() } else { format!("violated: {}", note.join(", ")) },
            ));
            let v = rep.verdict_of("model");
            out.report(rep);
            Ok(v)
        }
        Command::Extend { extension, .. } => {
            let names = pick(ws.extension_names(), extension, "extension")?;
            let mut vs = Vec::new();
            for n in names {
                let e = ws.extension(&n)?;
                out.section(format!("extension {n}"), e.render());
                let rep = e.discharge(b);
                vs.push(rep.verdict());
                out.report(rep);
            }
            Ok(Verdict::all(vs))
        }
        Command::CheckExtension { base, extension, .. } => {
            let (t, plus) = (ws.theory(base)?, ws.theory(extension)?);
            let rep = verify_extension(&t, &plus, b);
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::ExactSlice { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let c = exact_completion_slice(&t, depth, b).map_err(input)?;
            let mut body = String::new();
            for cand in &c.candidates {
                let _ = writeln!(
                    body,
                    "{} on {}: {}{}",
                    cand.verdict,
                    cand.sort,
                    cand.formula,
                    cand.duplicate_of.as_ref().map(|d| format!(" (same as {d})")).unwrap_or_default()
                );
            }
            out.section("candidates", body);
            out.section("extension", c.extension.render());
            let v = c.report.verdict();
            out.report(c.report);
            Ok(v)
        }
        Command::QuotientRetraction { base, extension, .. } => {
            let (t, plus) = (ws.theory(base)?, ws.theory(extension)?);
            let r = quotient_retraction(&t, &plus, b).map_err(input)?;
            out.section("retraction", render_reconstrual(&r.retraction.map));
            let v = r.report.verdict();
            out.report(r.report);
            Ok(v)
        }
        Command::FindProper { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let (r, log) = find_proper_realization(&t, depth, b).map_err(input)?;
            if !log.is_empty() {
                out.section("search", log.join("\n"));
            }
            match r {
                Some(r) => {
                    out.section("realization", realization_text(&r));
                    let rep = realization_report(format!("realization in {}", t.name), &r);
                    let v = rep.verdict();
                    out.report(rep);
                    Ok(v)
                }
                None => {
                    let mut rep = VerificationReport::new(format!("realization in {}", t.name));
                    rep.push(Obligation::with_verdict(
                        "found",
                        "two disjoint inhabited unary formulae",
                        Verdict::Unknown,
                        format!("none found up to depth {depth}"),
                    ));
                    out.report(rep);
                    Ok(Verdict::Unknown)
                }
            }
        }
        Command::TransportProper { translation, .. } => {
            let f = ws.translation_path(translation, None)?;
            let (r, _) = find_proper_realization(&f.source, depth, b).map_err(input)?;
            let r = r.ok_or_else(|| input(format!("no realization of {} found up to depth {depth}", f.source.name)))?;
            out.section(format!("realization in {}", f.source.name), realization_text(&r));
            let tr = verify_translation(&f, b);
            let moved = transport_properness(&tr, &r, b).map_err(input)?;
            out.section(format!("transported to {}", f.target.name), realization_text(&moved));
            let rep = realization_report(format!("transported realization in {}", f.target.name), &moved);
            let v = rep.verdict();
            out.report(rep);
            Ok(v)
        }
        Command::EliminateCoproduct { theory, left, right, model, .. } => {
            let t = pick_theory(ws, theory)?;
            let (r, _) = find_proper_realization(&t, depth, b).map_err(input)?;
            let r = r.ok_or_else(|| input(format!("no realization of {} found up to depth {depth}", t.name)))?;
            out.section("realization", realization_text(&r));
            let e = eliminate_coproduct(&t, &r, left, right, b).map_err(input)?;
            out.section("extension", e.extension.render());
            let mut vs = vec![e.report.verdict()];
            out.report(e.report.clone());
            if let Some(mn) = model {
                let (mt, m) = ws.model(mn)?;
                if mt.name != t.name {
                    return Err(input(format!("{mn} is a model of {}, not of {}", mt.name, t.name)));
                }
                let big = expand_model(&m, &e.extension).map_err(input)?;
                out.section(
                    format!("expansion of {mn}"),
                    big.render(&format!("{mn}_plus"), &e.extension.theory.name, &e.extension.theory.signature),
                );
                let c = check_model(&big, &e.extension.theory).map_err(input)?;
                let mut rep = VerificationReport::new(format!("expansion of {mn}"));
                rep.push(Obligation::check(
                    "model",
                    format!("the expansion is a model of {}", e.extension.theory.name),
                    c.ok,
                    "",
                ));
                rep.note(format!("carrier of {} has {} elements", e.sum, big.size(&e.sum)));
                vs.push(rep.verdict());
                out.report(rep);
            }
            Ok(Verdict::all(vs))
        }
        Command::InternalLogic { category, lattice, .. } => {
            let c = match (category, lattice) {
                (_, Some(l)) => lattice_presentation(&ws.lattice(l)?),
                (Some(c), None) => ws.category(c)?,
                (None, None) => {
                    let first = ws
                        .category_names()
                        .into_iter()
                        .next()
                        .ok_or_else(|| input("no category in the input files"))?;
                    ws.category(&first)?
                }
            };
            out.section("presentation", render_presentation(&c));
            let rep = validate_coherent_presentation(&c);
            let v = rep.verdict();
            if v == Verdict::Proved {
                let t = internal_logic(&c).map_err(input)?;
                out.section("internal logic", print::theory(&t));
            }
            out.report(rep);
            Ok(v)
        }
        Command::SyntacticSlice { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let s = syntactic_slice(&t, depth, b);
            out.section("slice", s.render());
            let mut rep = VerificationReport::new(format!("slice of {} at depth {depth}", t.name));
            rep.push(Obligation::with_verdict(
                "complete",
                "every composite and class of the slice was decided",
                if s.complete { Verdict::Proved } else { Verdict::Unknown },
                s.log.join("; "),
            ));
            out.report(rep);
            Ok(if s.complete { Verdict::Proved } else { Verdict::Unknown })
        }
        Command::Lindenbaum { theory, lattice, .. } => {
            if let Some(ln) = lattice {
                let l = ws.lattice(ln)?;
                let c = lattice_presentation(&l);
                let t = internal_logic(&c).map_err(input)?;
                let lt = lindenbaum(&t, depth, b).map_err(input)?;
                out.section("lindenbaum", lt.render());
                let mut rep = VerificationReport::new(format!("lindenbaum of the internal logic of {ln}"));
                let iso = lt.lattice.isomorphism(&l);
                let note = iso
                    .as_ref()
                    .map(|m| {
                        m.iter()
                            .enumerate()
                            .map(|(i, j)| format!("c{i} -> {}", l.elements[*j]))
                            .collect::<Vec<_>>()
                            .join(", ")
                    })
                    .unwrap_or_else(|| format!("{} classes against {} elements", lt.lattice.len(), l.len()));
                rep.push(Obligation::check("isomorphic", format!("the lattice of classes is isomorphic to {ln}"), iso.is_some(), note));
                let v = rep.verdict();
                out.report(rep);
                return Ok(v);
            }
            let t = pick_theory(ws, theory)?;
            let lt = lindenbaum(&t, depth, b).map_err(input)?;
            out.section("lindenbaum", lt.render());
            Ok(if lt.exact { Verdict::Proved } else { Verdict::Unknown })
        }
        Command::ClassifyProp { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let c = classify_propositionality(&t, depth, b).map_err(input)?;
            let mut body = String::new();
            let _ = writeln!(body, "propositional: {}", c.propositional);
            let _ = writeln!(body, "parapropositional: {}", c.parapropositional);
            for d in &c.decompositions {
                let pieces: Vec<String> = d.pieces.iter().map(|p| format!("[{}]", print::formula(p))).collect();
                let _ = writeln!(body, "[top on {}] = {}", d.sort, pieces.join(" + "));
            }
            out.section("classification", body);
            for (sort, m, env) in &c.countermodels {
                let mut body = m.render(&format!("counter_{sort}"), &t.name, &t.signature);
                let _ = writeln!(body, "falsifies |- x = y on {sort} at {}", m.show_assignment(env));
                out.section(format!("countermodel on {sort}"), body);
            }
            let v = c.report.verdict();
            out.report(c.report);
            Ok(v)
        }
        Command::ClassifyEquiv { certificate, .. } => {
            let name = match certificate {
                Some(n) => n.clone(),
                None => ws
                    .certificate_names()
                    .into_iter()
                    .next()
                    .ok_or_else(|| input("no certificate in the input files"))?,
            };
            let raw = ws.certificate(&name)?.clone();
            let cert = resolve_certificate(ws, &raw)?;
            let chart = classify_equivalence(&cert, b);
            out.section("chart", chart.render());
            let v = chart.verdict();
            out.report(chart.report);
            Ok(v)
        }
        Command::RoundTrip { theory, .. } => {
            let t = pick_theory(ws, theory)?;
            let rt = canonical_round_trip(&t, depth, b).map_err(input)?;
            out.section(
                "round trip",
                format!(
                    "slice: {} objects, {} morphisms\nH is a translation: {}\nTheta is a translation: {}\n",
                    rt.slice.objects.len(),
                    rt.slice.morphisms.len(),
                    rt.h.is_translation,
                    rt.theta.is_translation
                ),
            );
            let v = rt.report.verdict_of("roundtrip/");
            out.report(rt.report);
            Ok(v)
        }
    }
}

/// `n` formulae of the source signature in one variable of the first sort,
/// drawn from the enumeration at size 3 with a seeded generator.
fn random_checks(t: &Theory, n: usize, seed: u64) -> Vec<SubstitutionClass> {
    let mut pool = Vec::new();
    for s in &t.signature.sorts {
        let x = Var::new("x", s.clone());
        for f in formulas_mentioning_all(&t.signature, std::slice::from_ref(&x), 3) {
            pool.push(SubstitutionClass::new(vec![x.clone()], f));
        }
    }
    if t.signature.sorts.is_empty() {
        for f in formulas_mentioning_all(&t.signature, &[], 3) {
            pool.push(SubstitutionClass::new(Vec::new(), f));
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(n);
    pool
}

fn artifacts(ws: &mut Workspace, names: &[String]) -> Result<Artifacts, InputError> {
    if names.len() > 4 {
        return Err(input("at most F G chi1 chi2 may be given"));
    }
    let mut a = Artifacts::default();
    if let Some(n) = names.first() {
        a.f = Some(ws.translation_path(n, None)?);
    }
    if let Some(n) = names.get(1) {
        a.g = Some(ws.translation_path(n, None)?);
    }
    if let Some(n) = names.get(2) {
        a.chi1 = Some(ws.tmap(n)?);
    }
    if let Some(n) = names.get(3) {
        a.chi2 = Some(ws.tmap(n)?);
    }
    Ok(a)
}

pub fn resolve_certificate(ws: &mut Workspace, raw: &RawCertificate) -> Result<EquivalenceCertificate, InputError> {
    let left = ws.theory(&raw.left)?;
    let right = ws.theory(&raw.right)?;
    let mut claims = Vec::new();
    for (lv, _) in &raw.levels {
        claims.push(match lv {
            RawLevel::Logical => Claim::Logical,
            RawLevel::Definitional(ns) => Claim::Definitional(artifacts(ws, ns)?),
            RawLevel::Weak(ns) => Claim::Weak(artifacts(ws, ns)?),
            RawLevel::Morita { left, right, artifacts: ns } => Claim::Morita {
                left: left.iter().map(|n| ws.extension(n)).collect::<Result<_, _>>()?,
                right: right.iter().map(|n| ws.extension(n)).collect::<Result<_, _>>()?,
                tops: artifacts(ws, ns)?,
            },
        });
    }
    Ok(EquivalenceCertificate {
        name: raw.name.clone(),
        left,
        right,
        claims,
    })
}
