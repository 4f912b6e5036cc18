//! Report data model and emission in stable JSON or human-readable text.
//!
//! Field names are stable and backed by the versioned schema shipped at
//! `crates/germ-cli/schema/report.schema.json`; series and ideal generators
//! are canonical strings (graded order, `p/q` rationals) that parse back to
//! the same values.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub kind: String,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcase: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_membership: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiltrationOut {
    pub v1: Vec<String>,
    pub ideal_j: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionOut {
    /// Canonical series string; vector solutions are bracketed
    /// `[s1, s2, ...]`.
    pub series: String,
    /// Lower bound on the residual order: the residual vanishes modulo
    /// `m^(residual_order)`, clamped to `verified_degree + 1`.
    pub residual_order: u32,
    /// True when the residual order is exactly known (a nonzero residual
    /// survived below the truncation).
    pub residual_order_exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionOut {
    pub step: u32,
    pub failed_degree: u32,
    pub residual_slice: String,
    pub reason: String,
    pub certifies_nonexistence: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeterminacyOut {
    pub flavor: String,
    pub bound: Option<u32>,
    pub statement: String,
    pub tangent_dims_per_slice: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationOut {
    pub applicable: bool,
    pub part1: bool,
    pub part2: bool,
    pub fired: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub char_poly: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub task: String,
    pub trunc: u32,
    pub variables: Vec<String>,
    pub unknowns: Vec<String>,
    pub verified_degree: u32,
    pub verdicts: Vec<Verdict>,
    pub ideals: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtration: Option<FiltrationOut>,
    pub solution: Option<SolutionOut>,
    pub obstruction: Option<ObstructionOut>,
    pub determinacy: Option<DeterminacyOut>,
    pub deformation: Option<DeformationOut>,
    pub timing_ms: u64,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(task: &str, trunc: u32, variables: Vec<String>, unknowns: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            task: task.to_string(),
            trunc,
            variables,
            unknowns,
            verified_degree: trunc,
            verdicts: Vec::new(),
            ideals: BTreeMap::new(),
            filtration: None,
            solution: None,
            obstruction: None,
            determinacy: None,
            deformation: None,
            timing_ms: 0,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        push(&mut out, format!("task: {}", self.task));
        push(
            &mut out,
            format!(
                "ring: Q[{}] / m^{}   unknowns: [{}]",
                self.variables.join(", "),
                self.trunc + 1,
                self.unknowns.join(", ")
            ),
        );
        push(
            &mut out,
            format!("verified degree: {}", self.verified_degree),
        );
        for v in &self.verdicts {
            let mut line = format!(
                "verdict {}: {}",
                v.kind,
                if v.pass { "pass" } else { "fail" }
            );
            if let Some(s) = &v.subcase {
                line.push_str(&format!(" [{s}]"));
            }
            if !v.detail.is_empty() {
                line.push_str(&format!(" -- {}", v.detail));
            }
            if let Some(f) = &v.failing_membership {
                line.push_str(&format!(" (failing: {f})"));
            }
            push(&mut out, line);
        }
        for (name, gens) in &self.ideals {
            push(&mut out, format!("ideal {name} = ({})", gens.join(", ")));
        }
        if let Some(f) = &self.filtration {
            push(
                &mut out,
                format!("filtration: V1 = {{{}}}", f.v1.join(", ")),
            );
            push(
                &mut out,
                format!("            J  = ({})", f.ideal_j.join(", ")),
            );
        }
        if let Some(s) = &self.solution {
            push(&mut out, format!("solution: {}", s.series));
            push(
                &mut out,
                format!(
                    "residual order {} {}",
                    if s.residual_order_exact { "=" } else { ">=" },
                    s.residual_order
                ),
            );
        }
        if let Some(o) = &self.obstruction {
            push(
                &mut out,
                format!(
                    "obstruction at step {} (degree slice {}): {}",
                    o.step, o.failed_degree, o.reason
                ),
            );
            push(
                &mut out,
                format!("unmatchable residual slice: {}", o.residual_slice),
            );
            push(
                &mut out,
                format!(
                    "certifies non-existence: {}",
                    if o.certifies_nonexistence {
                        "yes (L injective on V1 modulo truncation)"
                    } else {
                        "no (obstruction under default choices only)"
                    }
                ),
            );
        }
        if let Some(d) = &self.determinacy {
            push(
                &mut out,
                format!("determinacy ({}): {}", d.flavor, d.statement),
            );
        }
        if let Some(d) = &self.deformation {
            push(
                &mut out,
                format!(
                    "deformation: applicable={} part1={} part2={} fired={}",
                    d.applicable,
                    d.part1,
                    d.part2,
                    d.fired.as_deref().unwrap_or("none")
                ),
            );
            if let Some(r) = &d.root {
                push(&mut out, format!("root: {r}"));
            }
        }
        for n in &self.notes {
            push(&mut out, format!("note: {n}"));
        }
        push(&mut out, format!("time: {} ms", self.timing_ms));
        out
    }
}

/// Error object for usage/parse failures (exit code 2).
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub schema_version: String,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<u32>,
}

impl ErrorReport {
    pub fn new(error: String, pos: Option<(u32, u32)>) -> Self {
        ErrorReport {
            schema_version: SCHEMA_VERSION.to_string(),
            error,
            line: pos.map(|p| p.0),
            col: pos.map(|p| p.1),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error serialization cannot fail")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}
