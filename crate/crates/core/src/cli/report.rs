//! Reports (`eds-waves/report@1`) and their text rendering.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::numcheck::GridReport;

pub const REPORT_SCHEMA: &str = "eds-waves/report@1";

/// Residuals longer than this are cut in `explain`.
pub const RESIDUAL_LIMIT: usize = 160;

/// A boolean outcome and the identity that decided it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub identity: String,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

impl Check {
    pub fn new(identity: impl Into<String>, holds: bool) -> Self {
        Check { identity: identity.into(), holds, residual: None }
    }

    pub fn with_residual(mut self, r: Option<String>) -> Self {
        self.residual = r;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Reduction {
    pub chart: Vec<String>,
    pub speed: String,
    pub f_tilde: String,
    pub v1: String,
    pub v2: String,
    pub flow: Check,
    pub commute: Check,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Criterion {
    pub frobenius: Check,
    pub closed: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Direct {
    pub frobenius: Check,
    pub brackets: Check,
    pub closed: Check,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Integrability {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    pub direct: Direct,
    pub frobenius: bool,
    pub closed: bool,
    pub agreement: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<[bool; 2]>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Structure {
    pub order: Vec<String>,
    pub solvable: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<String>,
    pub expected: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Integral {
    pub name: String,
    pub expr: String,
    pub provenance: String,
    pub annihilated: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<Check>,
    pub expected: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Density {
    pub name: String,
    pub density: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conservation: Option<Check>,
    pub class: String,
    pub classification: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite_of_supplied: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_class: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Numeric {
    pub name: String,
    pub tol: f64,
    pub grid: GridReport,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema: String,
    pub document: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    pub pde: String,
    pub stages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Reduction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrability: Option<Integrability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
    #[serde(default)]
    pub integrals: Vec<Integral>,
    #[serde(default)]
    pub densities: Vec<Density>,
    #[serde(default)]
    pub numeric: Vec<Numeric>,
    #[serde(default)]
    pub errors: Vec<StageError>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    pub pass: bool,
}

impl Report {
    /// Every requested verdict passed and no stage failed.
    pub fn all_pass(&self) -> bool {
        self.errors.is_empty()
            && self.integrability.as_ref().is_none_or(|i| i.pass)
            && self.structure.as_ref().is_none_or(|s| s.pass)
            && self.integrals.iter().all(|i| i.pass)
            && self.densities.iter().all(|d| d.pass)
            && self.numeric.iter().all(|n| n.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn truncate(s: &str) -> String {
    if s.chars().count() <= RESIDUAL_LIMIT {
        s.to_string()
    } else {
        let head: String = s.chars().take(RESIDUAL_LIMIT).collect();
        format!("{head} ... ({} chars)", s.chars().count())
    }
}

fn check_line(out: &mut String, indent: &str, c: &Check) {
    let _ = writeln!(out, "{indent}{} [{}]", if c.holds { "holds" } else { "fails" }, c.identity);
    if let Some(r) = c.residual.as_ref().filter(|_| !c.holds) {
        let pad: String = indent.chars().take_while(|c| *c == ' ').collect();
        let _ = writeln!(out, "{pad}    residual: {}", truncate(r));
    }
}

/// Human-readable rendering of a report.
pub fn explain(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}", r.document, r.pde);
    if let Some(c) = &r.convention {
        let _ = writeln!(out, "convention: {c}");
    }
    if let Some(red) = &r.reduction {
        let _ = writeln!(out, "reduced rhs (speed {}): {}", red.speed, red.f_tilde);
        let _ = writeln!(out, "  V1 = {}", red.v1);
        let _ = writeln!(out, "  V2 = {}", red.v2);
        check_line(&mut out, "  flow: ", &red.flow);
        check_line(&mut out, "  commute: ", &red.commute);
    }
    if let Some(i) = &r.integrability {
        let _ = writeln!(out, "{} integrability: frobenius={} closed={}", mark(i.pass), i.frobenius, i.closed);
        if let Some(c) = &i.criterion {
            check_line(&mut out, "  criterion frobenius: ", &c.frobenius);
            for k in &c.closed {
                check_line(&mut out, "  criterion closed: ", k);
            }
        }
        check_line(&mut out, "  direct frobenius: ", &i.direct.frobenius);
        check_line(&mut out, "  direct brackets: ", &i.direct.brackets);
        check_line(&mut out, "  direct closed: ", &i.direct.closed);
        check_line(&mut out, "  agreement: ", &i.agreement);
    }
    if let Some(s) = &r.structure {
        let _ = writeln!(out, "{} structure ({}): solvable={} expected={}", mark(s.pass), s.order.join(", "), s.solvable.holds, s.expected);
        check_line(&mut out, "  ", &s.solvable);
        if let Some(w) = &s.witness {
            let _ = writeln!(out, "  kernel witness: {}", truncate(w));
        }
    }
    for i in &r.integrals {
        let _ = writeln!(out, "{} integral {} ({}): {}", mark(i.pass), i.name, i.provenance, truncate(&i.expr));
        check_line(&mut out, "  ", &i.annihilated);
        if let Some(q) = &i.quadrature {
            check_line(&mut out, "  quadrature: ", q);
        }
    }
    for d in &r.densities {
        let _ = writeln!(out, "{} density {}: tier {}", mark(d.pass), d.name, d.class);
        if let Some(c) = &d.conservation {
            check_line(&mut out, "  conservation: ", c);
        }
        check_line(&mut out, "  classification: ", &d.classification);
    }
    for n in &r.numeric {
        let _ = writeln!(out, "{} numeric {} (tol {:e}, {} nodes, {} skipped)", mark(n.pass), n.name, n.tol, n.grid.nodes, n.grid.skipped);
        for c in &n.checks {
            check_line(&mut out, "  ", c);
        }
    }
    for e in &r.errors {
        let _ = writeln!(out, "FAIL stage {}: {}", e.stage, e.message);
    }
    for d in &r.diagnostics {
        let _ = writeln!(out, "note: {d}");
    }
    let _ = writeln!(out, "{} overall", mark(r.pass));
    out
}
