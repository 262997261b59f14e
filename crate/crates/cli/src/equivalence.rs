//! Checking claimed standards of equivalence between two theories and
//! charting them: logical, definitional, weakly intertranslatable and
//! Morita at bounded scale, with implication running upward.

use std::fmt::Write as _;

use cohwork::morita::{verify_extension, ExtensionResult};
use cohwork::report::{discharge_all, Goal, Obligation, Verdict, VerificationReport};
use cohwork::translation::{verify_homotopy_equivalence, verify_translation, Reconstrual, TMap};
use cohwork::{Budget, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Logical,
    Definitional,
    Weak,
    Morita,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Logical, Level::Definitional, Level::Weak, Level::Morita];

    pub fn label(self) -> &'static str {
        match self {
            Level::Logical => "logical",
            Level::Definitional => "definitional",
            Level::Weak => "weakly intertranslatable",
            Level::Morita => "morita (bounded)",
        }
    }
}

/// `F : left -> right`, `G : right -> left`, `chi1 : GF => 1`, `chi2 : FG => 1`.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub f: Option<Reconstrual>,
    pub g: Option<Reconstrual>,
    pub chi1: Option<TMap>,
    pub chi2: Option<TMap>,
}

#[derive(Debug, Clone)]
pub enum Claim {
    Logical,
    Definitional(Artifacts),
    Weak(Artifacts),
    /// Extension chains over each side, then a definitional equivalence of
    /// the two tops.
    Morita {
        left: Vec<ExtensionResult>,
        right: Vec<ExtensionResult>,
        tops: Artifacts,
    },
}

impl Claim {
    pub fn level(&self) -> Level {
        match self {
            Claim::Logical => Level::Logical,
            Claim::Definitional(_) => Level::Definitional,
            Claim::Weak(_) => Level::Weak,
            Claim::Morita { .. } => Level::Morita,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub name: String,
    pub left: Theory,
    pub right: Theory,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Verified(Verdict),
    Implied(Level),
    NotClaimed,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub certificate: String,
    pub nodes: Vec<(Level, Status)>,
    pub report: VerificationReport,
}

impl Chart {
    pub fn status(&self, level: Level) -> Status {
        self.nodes.iter().find(|(l, _)| *l == level).map(|(_, s)| *s).unwrap_or(Status::NotClaimed)
    }

    /// Combined verdict of the claimed levels; nothing claimed is a failure.
    pub fn verdict(&self) -> Verdict {
        let vs: Vec<Verdict> = self
            .nodes
            .iter()
            .filter_map(|(_, s)| match s {
                Status::Verified(v) => Some(*v),
                _ => None,
            })
            .collect();
        if vs.is_empty() {
            Verdict::Failed
        } else {
            Verdict::all(vs)
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "chart for {} (implication is upward)", self.certificate);
        for (i, (level, status)) in self.nodes.iter().enumerate().rev() {
            let shown = match status {
                Status::Verified(v) => format!("{v} (verified)"),
                Status::Implied(by) => format!("implied by {}", by.label()),
                Status::NotClaimed => "not claimed".to_string(),
            };
            let _ = writeln!(out, "  {:<26} {shown}", level.label());
            if i > 0 {
                let _ = writeln!(out, "    ^");
            }
        }
        out
    }
}

fn missing(report: &mut VerificationReport, prefix: &str, what: &str) -> Verdict {
    report.push(Obligation::with_verdict(
        format!("{prefix}:artifacts"),
        format!("{what} supplied"),
        Verdict::Failed,
        format!("missing {what}"),
    ));
    Verdict::Failed
}

fn check_logical(left: &Theory, right: &Theory, b: Budget, report: &mut VerificationReport) -> Verdict {
    if left.signature != right.signature {
        report.push(Obligation::check(
            "logical:signature",
            format!("{} and {} share a signature", left.name, right.name),
            false,
            "the signatures differ",
        ));
        return Verdict::Failed;
    }
    report.push(Obligation::check(
        "logical:signature",
        format!("{} and {} share a signature", left.name, right.name),
        true,
        "",
    ));
    let mut vs = Vec::new();
    for (from, to) in [(left, right), (right, left)] {
        let goals: Vec<Goal> = from
            .axioms
            .iter()
            .map(|a| Goal::new(format!("logical:{}:{}", to.name, a.name), a.sequent.clone()))
            .collect();
        for o in discharge_all(to, &goals, b) {
            vs.push(o.verdict);
            report.push(o);
        }
    }
    Verdict::all(vs)
}

/// The given t-map, or the identity t-map when the composite has the same
/// sort images as the identity.
fn tmap_or_trivial(
    chi: &Option<TMap>,
    first: &Reconstrual,
    second: &Reconstrual,
    label: &str,
    report: &mut VerificationReport,
) -> Option<TMap> {
    if let Some(c) = chi {
        return Some(c.clone());
    }
    let comp = cohwork::translation::compose_translations(first, second).ok()?;
    let id = Reconstrual::identity(&first.source);
    let t = TMap::trivial(format!("1_{label}"), &comp, &id, true).ok()?;
    report.note(format!("{label}: no t-map supplied, the identity t-map x = y is used"));
    Some(t)
}

fn check_homotopy(
    prefix: &str,
    a: &Artifacts,
    strong: bool,
    b: Budget,
    report: &mut VerificationReport,
) -> Verdict {
    let (Some(f), Some(g)) = (&a.f, &a.g) else {
        return missing(report, prefix, "both translations");
    };
    let mut vs = Vec::new();
    for tr in [f, g] {
        let t = verify_translation(tr, b);
        let mut flags = vec![("translation", t.is_translation)];
        if strong {
            flags.push(("equality-preserving", t.is_equality_preserving));
            flags.push(("strong", t.is_strong));
        }
        for (flag, v) in flags {
            report.push(Obligation::with_verdict(
                format!("{prefix}:{}:{flag}", tr.name),
                format!("{} is {flag}", tr.name),
                v,
                "",
            ));
            vs.push(v);
        }
    }
    if vs.iter().any(|v| *v == Verdict::Failed) {
        return Verdict::Failed;
    }
    let chi1 = tmap_or_trivial(&a.chi1, f, g, "GF", report);
    let chi2 = tmap_or_trivial(&a.chi2, g, f, "FG", report);
    let (Some(chi1), Some(chi2)) = (chi1, chi2) else {
        vs.push(missing(report, prefix, "t-maps"));
        return Verdict::all(vs);
    };
    match verify_homotopy_equivalence(f, g, &chi1, &chi2, b) {
        Ok(r) => {
            vs.push(r.verdict());
            report.extend(&format!("{prefix}:homotopy"), r);
        }
        Err(e) => {
            report.push(Obligation::check(format!("{prefix}:homotopy"), "t-maps fit the translations", false, e.to_string()));
            vs.push(Verdict::Failed);
        }
    }
    Verdict::all(vs)
}

fn check_chain(prefix: &str, start: &Theory, chain: &[ExtensionResult], b: Budget, report: &mut VerificationReport) -> (Verdict, Theory) {
    let mut cur = start.clone();
    let mut vs = Vec::new();
    for (i, ext) in chain.iter().enumerate() {
        if ext.base.name != cur.name {
            report.push(Obligation::check(
                format!("{prefix}:{i}:base"),
                format!("{} extends {}", ext.theory.name, cur.name),
                false,
                format!("it extends {}", ext.base.name),
            ));
            return (Verdict::Failed, cur);
        }
        let r = verify_extension(&cur, &ext.theory, b);
        vs.push(r.verdict());
        report.extend(&format!("{prefix}:{i}"), r);
        cur = ext.theory.clone();
    }
    (Verdict::all(vs), cur)
}

pub fn classify_equivalence(cert: &EquivalenceCertificate, b: Budget) -> Chart {
    let mut report = VerificationReport::new(format!("certificate {} : {} ~ {}", cert.name, cert.left.name, cert.right.name));
    let mut verified: Vec<(Level, Verdict)> = Vec::new();
    for claim in &cert.claims {
        let v = match claim {
            Claim::Logical => check_logical(&cert.left, &cert.right, b, &mut report),
            Claim::Definitional(a) => check_homotopy("definitional", a, true, b, &mut report),
            Claim::Weak(a) => check_homotopy("weak", a, false, b, &mut report),
            Claim::Morita { left, right, tops } => {
                let (lv, lt) = check_chain("morita:left", &cert.left, left, b, &mut report);
                let (rv, rt) = check_chain("morita:right", &cert.right, right, b, &mut report);
                let ends = |f: &Option<Reconstrual>, s: &Theory, t: &Theory| {
                    f.as_ref().is_none_or(|f| f.source.name == s.name && f.target.name == t.name)
                };
                if !ends(&tops.f, &lt, &rt) || !ends(&tops.g, &rt, &lt) {
                    report.push(Obligation::check(
                        "morita:tops",
                        format!("the translations run between {} and {}", lt.name, rt.name),
                        false,
                        "",
                    ));
                    Verdict::Failed
                } else {
                    Verdict::all([lv, rv, check_homotopy("morita:tops", tops, true, b, &mut report)])
                }
            }
        };
        verified.push((claim.level(), v));
    }
    let mut nodes = Vec::new();
    let mut proved_below: Option<Level> = None;
    for level in Level::ALL {
        let v = verified.iter().filter(|(l, _)| *l == level).map(|(_, v)| *v).reduce(|a, b| Verdict::all([a, b]));
        let status = match (v, proved_below) {
            (Some(Verdict::Proved), _) => Status::Verified(Verdict::Proved),
            (_, Some(by)) => Status::Implied(by),
            (Some(v), None) => Status::Verified(v),
            (None, None) => Status::NotClaimed,
        };
        if let Some(v) = v {
            if v != Verdict::Proved && proved_below.is_some() {
                report.note(format!("{} was claimed and came back {v}; it is still implied from below", level.label()));
            }
        }
        if status == Status::Verified(Verdict::Proved) && proved_below.is_none() {
            proved_below = Some(level);
        }
        nodes.push((level, status));
    }
    Chart {
        certificate: cert.name.clone(),
        nodes,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cohwork::parse_theory;

    const EQ: &str = "theory EQ { sort s  rel A : s s  ax refl : |- A(x,x)  ax symm : A(x,y) |- A(y,x)
                      ax trans : A(x,y), A(y,z) |- A(x,z) }";

    fn ids(t: &Theory) -> Artifacts {
        Artifacts {
            f: Some(Reconstrual::identity(t)),
            g: Some(Reconstrual::identity(t)),
            chi1: None,
            chi2: None,
        }
    }

    #[test]
    fn self_equivalence_proves_every_level() {
        let eq = parse_theory(EQ).unwrap();
        let cert = EquivalenceCertificate {
            name: "self".into(),
            left: eq.clone(),
            right: eq.clone(),
            claims: vec![
                Claim::Logical,
                Claim::Definitional(ids(&eq)),
                Claim::Weak(ids(&eq)),
                Claim::Morita {
                    left: vec![],
                    right: vec![],
                    tops: ids(&eq),
                },
            ],
        };
        let chart = classify_equivalence(&cert, Budget::default());
        for l in Level::ALL {
            assert_eq!(chart.status(l), Status::Verified(Verdict::Proved), "{}", chart.report.to_text());
        }
        assert_eq!(chart.verdict(), Verdict::Proved);
    }

    #[test]
    fn implication_only_runs_upward() {
        let eq = parse_theory(EQ).unwrap();
        let cert = EquivalenceCertificate {
            name: "def".into(),
            left: eq.clone(),
            right: eq.clone(),
            claims: vec![Claim::Definitional(ids(&eq))],
        };
        let chart = classify_equivalence(&cert, Budget::default());
        assert_eq!(chart.status(Level::Logical), Status::NotClaimed);
        assert_eq!(chart.status(Level::Weak), Status::Implied(Level::Definitional));
        assert_eq!(chart.status(Level::Morita), Status::Implied(Level::Definitional));
        assert!(chart.render().contains("implied by definitional"));
    }

    #[test]
    fn missing_artifacts_fail_with_reason() {
        let eq = parse_theory(EQ).unwrap();
        let cert = EquivalenceCertificate {
            name: "bare".into(),
            left: eq.clone(),
            right: eq,
            claims: vec![Claim::Weak(Artifacts::default())],
        };
        let chart = classify_equivalence(&cert, Budget::default());
        assert_eq!(chart.status(Level::Weak), Status::Verified(Verdict::Failed));
        assert!(chart.report.to_text().contains("missing both translations"));
    }
}
