//! Job reports in two renderings: plain text, and structured JSON lines
//! with one record per obligation.

use std::fmt::Write as _;

use cohwork::report::{model_summary, Evidence, Obligation, Verdict, VerificationReport};
use cohwork::ProofResult;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

/// Everything a job prints: a header, free-form sections, verification
/// reports and the overall verdict.
#[derive(Debug, Clone)]
pub struct JobReport {
    pub header: Vec<(String, String)>,
    pub sections: Vec<(String, String)>,
    pub reports: Vec<VerificationReport>,
    pub verdict: Verdict,
}

impl JobReport {
    pub fn new(header: Vec<(String, String)>) -> Self {
        JobReport {
            header,
            sections: Vec::new(),
            reports: Vec::new(),
            verdict: Verdict::Proved,
        }
    }

    pub fn section(&mut self, title: impl Into<String>, body: impl Into<String>) {
        self.sections.push((title.into(), body.into()));
    }

    pub fn report(&mut self, r: VerificationReport) {
        self.reports.push(r);
    }

    /// The verdicts of all obligations, in print order.
    pub fn verdicts(&self) -> Vec<(String, String, Verdict)> {
        self.reports
            .iter()
            .flat_map(|r| r.entries.iter().map(move |e| (r.title.clone(), e.name.clone(), e.verdict)))
            .collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Structured => self.to_structured(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}: {v}");
        }
        for (title, body) in &self.sections {
            let _ = writeln!(out, "\n== {title}");
            out.push_str(body);
            if !body.ends_with('\n') {
                out.push('\n');
            }
        }
        for r in &self.reports {
            out.push('\n');
            out.push_str(&r.to_text());
        }
        let _ = writeln!(out, "\noverall: {}", self.verdict);
        out
    }

    pub fn to_structured(&self) -> String {
        let mut lines: Vec<Value> = Vec::new();
        let header: serde_json::Map<String, Value> =
            self.header.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        lines.push(json!({ "record": "job", "header": header }));
        for (title, body) in &self.sections {
            lines.push(json!({ "record": "section", "title": title, "text": body }));
        }
        for r in &self.reports {
            for e in &r.entries {
                lines.push(obligation_record(&r.title, e));
            }
            for n in &r.notes {
                lines.push(json!({ "record": "note", "report": r.title, "text": n }));
            }
            lines.push(json!({
                "record": "report",
                "report": r.title,
                "verdict": r.verdict(),
                "proved": r.count(Verdict::Proved),
                "failed": r.count(Verdict::Failed),
                "unknown": r.count(Verdict::Unknown),
            }));
        }
        lines.push(json!({ "record": "overall", "verdict": self.verdict }));
        let mut out = String::new();
        for l in lines {
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out
    }
}

fn obligation_record(report: &str, e: &Obligation) -> Value {
    let evidence = match &e.evidence {
        Evidence::None => Value::Null,
        Evidence::Note(n) => json!({ "kind": "note", "text": n }),
        Evidence::Result(r) => match r.as_ref() {
            ProofResult::Proved(t) => json!({ "kind": "trace", "steps": t.len() }),
            ProofResult::Refuted { model, assignment } => json!({
                "kind": "countermodel",
                "model": model_summary(model),
                "at": model.show_assignment(assignment),
            }),
            ProofResult::Unknown { reason, budget } => json!({
                "kind": "unknown",
                "reason": reason,
                "budget": budget.to_string(),
            }),
        },
    };
    json!({
        "record": "obligation",
        "report": report,
        "name": e.name,
        "sequent": e.statement,
        "verdict": e.verdict,
        "evidence": evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> JobReport {
        let mut j = JobReport::new(vec![("tool".into(), "x".into())]);
        let mut r = VerificationReport::new("r");
        r.push(Obligation::check("a", "|- top", true, ""));
        r.push(Obligation::with_verdict("b", "|- bot", Verdict::Unknown, "budget"));
        j.report(r);
        j.verdict = Verdict::Unknown;
        j
    }

    #[test]
    fn renderings_carry_the_same_verdicts() {
        let j = sample();
        let text = j.to_text();
        assert!(text.contains("- a [Proved]") && text.contains("- b [Unknown]"));
        let records: Vec<Value> = j.to_structured().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        let obligations: Vec<(String, String)> = records
            .iter()
            .filter(|r| r["record"] == "obligation")
            .map(|r| (r["name"].as_str().unwrap().to_string(), r["verdict"].as_str().unwrap().to_string()))
            .collect();
        assert_eq!(obligations, vec![("a".into(), "Proved".into()), ("b".into(), "Unknown".into())]);
        assert_eq!(records.last().unwrap()["verdict"], "Unknown");
    }
}
