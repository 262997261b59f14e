//! Verification reports: named obligations with three-valued verdicts.

use std::fmt;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::Assignment;
use crate::print;
use crate::prover::{prove_sequent, Budget, ProofResult};
use crate::syntax::{Sequent, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Proved,
    Failed,
    Unknown,
}

impl Verdict {
    pub fn of(r: &ProofResult) -> Self {
        match r {
            ProofResult::Proved(_) => Verdict::Proved,
            ProofResult::Refuted { .. } => Verdict::Failed,
            ProofResult::Unknown { .. } => Verdict::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Proved
        } else {
            Verdict::Failed
        }
    }

    /// Proved only if every verdict is; any failure dominates an unknown.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Self {
        let mut out = Verdict::Proved;
        for v in vs {
            match v {
                Verdict::Failed => return Verdict::Failed,
                Verdict::Unknown => out = Verdict::Unknown,
                Verdict::Proved => {}
            }
        }
        out
    }

    pub fn is_proved(self) -> bool {
        self == Verdict::Proved
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "Proved",
            Verdict::Failed => "Failed",
            Verdict::Unknown => "Unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    None,
    Result(Box<ProofResult>),
    Note(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    pub name: String,
    pub statement: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl Obligation {
    pub fn check(name: impl Into<String>, statement: impl Into<String>, ok: bool, note: impl Into<String>) -> Self {
        let note = note.into();
        Obligation {
            name: name.into(),
            statement: statement.into(),
            verdict: Verdict::from_bool(ok),
            evidence: if note.is_empty() { Evidence::None } else { Evidence::Note(note) },
        }
    }

    pub fn with_verdict(name: impl Into<String>, statement: impl Into<String>, verdict: Verdict, note: impl Into<String>) -> Self {
        let note = note.into();
        Obligation {
            name: name.into(),
            statement: statement.into(),
            verdict,
            evidence: if note.is_empty() { Evidence::None } else { Evidence::Note(note) },
        }
    }

    pub fn result(&self) -> Option<&ProofResult> {
        match &self.evidence {
            Evidence::Result(r) => Some(r),
            _ => None,
        }
    }

    pub fn countermodel(&self) -> Option<(&crate::model::FiniteModel, &Assignment)> {
        self.result().and_then(ProofResult::countermodel)
    }
}

/// A sequent to discharge in a theory.
#[derive(Debug, Clone)]
pub struct Goal {
    pub name: String,
    pub sequent: Sequent,
}

impl Goal {
    pub fn new(name: impl Into<String>, sequent: Sequent) -> Self {
        Goal {
            name: name.into(),
            sequent,
        }
    }
}

/// Prove one sequent; prover errors become failed obligations.
pub fn discharge(t: &Theory, name: &str, s: &Sequent, b: Budget) -> Obligation {
    let statement = print::sequent(s);
    match prove_sequent(t, s, b) {
        Ok(r) => Obligation {
            name: name.to_string(),
            statement,
            verdict: Verdict::of(&r),
            evidence: Evidence::Result(Box::new(r)),
        },
        Err(e) => Obligation {
            name: name.to_string(),
            statement,
            verdict: Verdict::Failed,
            evidence: Evidence::Note(e.to_string()),
        },
    }
}

/// Discharge goals concurrently; entries keep the order of `goals`.
pub fn discharge_all(t: &Theory, goals: &[Goal], b: Budget) -> Vec<Obligation> {
    goals.par_iter().map(|g| discharge(t, &g.name, &g.sequent, b)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub entries: Vec<Obligation>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerificationReport {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.entries.iter().map(|e| e.verdict))
    }

    pub fn push(&mut self, o: Obligation) {
        self.entries.push(o);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn extend(&mut self, prefix: &str, other: VerificationReport) {
        for mut e in other.entries {
            if !prefix.is_empty() {
                e.name = format!("{prefix}/{}", e.name);
            }
            self.entries.push(e);
        }
        self.notes.extend(other.notes);
    }

    /// Verdict of the entries whose name starts with `prefix`.
    pub fn verdict_of(&self, prefix: &str) -> Verdict {
        Verdict::all(self.entries.iter().filter(|e| e.name.starts_with(prefix)).map(|e| e.verdict))
    }

    pub fn get(&self, name: &str) -> Option<&Obligation> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == v).count()
    }

    /// One record per obligation. Countermodels are printed inline;
    /// derivations are referenced by their length.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "report {}", self.title);
        for e in &self.entries {
            let _ = writeln!(out, "- {} [{}] {}", e.name, e.verdict, e.statement);
            match &e.evidence {
                Evidence::None => {}
                Evidence::Note(n) => {
                    let _ = writeln!(out, "    note: {n}");
                }
                Evidence::Result(r) => match r.as_ref() {
                    ProofResult::Proved(t) => {
                        let _ = writeln!(out, "    trace: {} steps", t.len());
                    }
                    ProofResult::Refuted { model, assignment } => {
                        let _ = writeln!(out, "    countermodel: {}", model_summary(model));
                        if !assignment.is_empty() {
                            let _ = writeln!(out, "    at: {}", model.show_assignment(assignment));
                        }
                    }
                    ProofResult::Unknown { reason, budget } => {
                        let _ = writeln!(out, "    unknown at budget {budget}: {reason}");
                    }
                },
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "verdict {} ({} proved, {} failed, {} unknown)",
            self.verdict(),
            self.count(Verdict::Proved),
            self.count(Verdict::Failed),
            self.count(Verdict::Unknown)
        );
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "title": self.title,
            "verdict": self.verdict(),
            "entries": self.entries,
            "notes": self.notes,
        })
    }
}

/// Compact one-line rendering of a finite model.
pub fn model_summary(m: &crate::model::FiniteModel) -> String {
    let mut parts = Vec::new();
    for (s, c) in &m.carriers {
        parts.push(format!("{s}={{{}}}", c.join(",")));
    }
    for (r, t) in &m.relations {
        let rows: Vec<String> = t
            .iter()
            .map(|row| match row.len() {
                0 => "()".to_string(),
                1 => row[0].to_string(),
                _ => format!("({})", row.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")),
            })
            .collect();
        parts.push(format!("{r}={{{}}}", rows.join(",")));
    }
    for (f, t) in &m.functions {
        let rows: Vec<String> = t
            .iter()
            .map(|(args, v)| {
                let a: Vec<String> = args.iter().map(|i| i.to_string()).collect();
                match a.len() {
                    0 => format!("->{v}"),
                    1 => format!("{}->{v}", a[0]),
                    _ => format!("({})->{v}", a.join(",")),
                }
            })
            .collect();
        parts.push(format!("{f}={{{}}}", rows.join(",")));
    }
    parts.join(" ")
}
