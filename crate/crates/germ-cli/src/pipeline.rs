//! Task orchestration: decompose, certify, verify higher order, solve, and
//! assemble the report.
//!
//! Solve-like tasks run the ring at an internal truncation slightly above
//! the requested one (by the largest Jacobian entry degree, capped): the
//! coefficient of degree `d` in a solution is pinned by the residual slice
//! at `d + deg(L)`, so the margin makes every reported coefficient the one
//! of the true solution. Reports are stated at the requested degree.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};

use germ_core::certify::{
    check_certificate, BkSubcase, CertificateKind, CertificateParams, CertificateReport,
};
use germ_core::deform::{root_deformation, DeformCertificate, MatrixFamily, PolyFamily};
use germ_core::jetgroup::{determinacy_bound, tangent_space, GroupFlavor, JetQuotient};
use germ_core::modfilt::{Filtration, Ideal, LiftStrategy, Submodule};
use germ_core::series::{Monomial, SeriesVec, TruncSeries};
use germ_core::solver::{
    decompose, solve_order_by_order, verify_higher_order, EquationSystem, ObstructionReason,
    SolveOptions, SolveOutcome,
};

use crate::problem::{CertKind, DetFlavor, ProblemSpec, Task};
use crate::report::{
    DeformationOut, DeterminacyOut, FiltrationOut, ObstructionOut, Report, SolutionOut, Verdict,
};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trunc_override: Option<u32>,
    pub seed: Option<u64>,
}

/// Cap on the internal truncation margin; Jacobian entries of higher degree
/// leave the top coefficients at their graded-lex-minimal values.
const MARGIN_CAP: u32 = 6;

pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<Report> {
    let started = Instant::now();
    let trunc = opts.trunc_override.unwrap_or(spec.trunc);
    let mut report = match spec.task {
        Task::Solve => run_solve(spec, trunc, opts.seed)?,
        Task::Certify(kind) => run_certify(spec, trunc, kind)?,
        Task::DeformRoot => run_deform_root(spec, trunc)?,
        Task::DeformEig => run_deform_eig(spec, trunc)?,
        Task::Determinacy(flavor) => run_determinacy(spec, trunc, flavor)?,
    };
    report.timing_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

fn names(spec: &ProblemSpec) -> Vec<&str> {
    spec.vars.iter().map(|s| s.as_str()).collect()
}

fn series_str(s: &TruncSeries, names: &[&str]) -> String {
    s.display_with(names)
}

fn vec_str(v: &SeriesVec, names: &[&str]) -> String {
    if v.rank() == 1 {
        series_str(v.entry(0), names)
    } else {
        let parts: Vec<String> = v.entries().iter().map(|e| series_str(e, names)).collect();
        format!("[{}]", parts.join(", "))
    }
}

fn ideal_strings(i: &Ideal, names: &[&str]) -> Vec<String> {
    i.generators()
        .iter()
        .map(|g| series_str(g, names))
        .collect()
}

fn submodule_strings(s: &Submodule, names: &[&str]) -> Vec<String> {
    s.generators().iter().map(|g| vec_str(g, names)).collect()
}

fn build_system(spec: &ProblemSpec, trunc: u32) -> Result<EquationSystem> {
    if spec.unknowns.is_empty() {
        bail!("this task needs an unknowns clause");
    }
    decompose(
        spec.equations_at(trunc),
        spec.vars.len(),
        spec.unknowns.len(),
    )
    .map_err(|e| anyhow!("{e}"))
}

/// The filtration declared in the problem file, if any: a submodule clause
/// becomes V1, an ideal clause becomes J (with V1 defaulting to J * R^n).
fn filtration_from_file(
    spec: &ProblemSpec,
    trunc: u32,
    degree: u32,
    nunknowns: usize,
) -> Result<Option<Filtration>> {
    let ideal = spec.ideal_generators_at(trunc).map(|gens| {
        let base = Ideal::new(spec.vars.len(), trunc, gens, degree);
        let power = spec.ideal.as_ref().map(|c| c.power).unwrap_or(1);
        if power > 1 {
            base.power(power)
        } else {
            base
        }
    });
    let submodule = spec.submodule_generators_at(trunc).map(|gens| {
        Submodule::new(
            nunknowns,
            spec.vars.len(),
            trunc,
            gens.into_iter().map(SeriesVec::new).collect(),
            degree,
        )
    });
    match (submodule, ideal) {
        (Some(v1), Some(j)) => Ok(Some(Filtration::new(v1, j).map_err(|e| anyhow!("{e}"))?)),
        (Some(_), None) => bail!("a submodule clause needs an ideal clause for the filtration"),
        (None, Some(j)) => {
            let v1 = Submodule::ideal_times_full(&j, nunknowns);
            Ok(Some(Filtration::new(v1, j).map_err(|e| anyhow!("{e}"))?))
        }
        (None, None) => Ok(None),
    }
}

fn certificate_verdict(cr: &CertificateReport, names: &[&str]) -> Verdict {
    Verdict {
        kind: cr.kind.name().to_string(),
        pass: cr.pass,
        detail: match (&cr.subcase, cr.pass) {
            (Some(s), _) => s.describe().to_string(),
            (None, true) => String::from("condition holds at the verified degree"),
            (None, false) => String::from("condition fails"),
        },
        subcase: cr.subcase.map(|s| {
            match s {
                BkSubcase::SquareModule => "J2W_in_mJLV",
                BkSubcase::SquareIdealDeepInitial => "J2_in_JaL_v_in_mJV",
                BkSubcase::SquareIdealShallowInitial => "J2_in_JaL_aLW_in_mLV",
            }
            .to_string()
        }),
        failing_membership: cr.failing.as_ref().map(|f| {
            let mut s = f.description.clone();
            if let Some(o) = &f.obstruction {
                s.push_str(&format!(
                    " (first obstructed slice {}: {})",
                    o.degree,
                    vec_str(&o.residual, names)
                ));
            }
            s
        }),
    }
}

fn record_certificate(report: &mut Report, cr: &CertificateReport, names: &[&str]) {
    report.verdicts.push(certificate_verdict(cr, names));
    for (name, ideal) in &cr.ideals {
        report
            .ideals
            .insert(name.clone(), ideal_strings(ideal, names));
    }
    if let Some(f) = &cr.filtration {
        report.filtration = Some(FiltrationOut {
            v1: submodule_strings(f.v1(), names),
            ideal_j: ideal_strings(f.ideal(), names),
        });
    }
    report.notes.extend(cr.notes.iter().cloned());
}

fn run_solve(spec: &ProblemSpec, trunc: u32, seed: Option<u64>) -> Result<Report> {
    let names = names(spec);
    let mut report = Report::new("solve", trunc, spec.vars.clone(), spec.unknowns.clone());
    report.verified_degree = trunc;

    // Measure the Jacobian to choose the margin, then rebuild at the
    // internal truncation.
    let probe = build_system(spec, trunc)?;
    let margin = probe.l().max_entry_degree().clamp(1, MARGIN_CAP);
    let internal = trunc + margin;
    let system = build_system(spec, internal)?;

    let filt = match filtration_from_file(spec, internal, trunc, spec.unknowns.len())? {
        Some(f) => f,
        None => {
            // No filtration supplied: try the strengthened certificate route.
            let cr = check_certificate(
                &system,
                CertificateKind::Bk,
                &CertificateParams::default(),
                trunc,
            )
            .map_err(|e| anyhow!("{e}"))?;
            record_certificate(&mut report, &cr, &names);
            match cr.filtration {
                Some(f) if cr.pass => f,
                _ => {
                    report.notes.push(String::from(
                        "no filtration available: supply ideal/submodule clauses or a passing certificate",
                    ));
                    return Ok(report);
                }
            }
        }
    };
    report.filtration.get_or_insert_with(|| FiltrationOut {
        v1: submodule_strings(filt.v1(), &names),
        ideal_j: ideal_strings(filt.ideal(), &names),
    });
    report
        .ideals
        .entry(String::from("J"))
        .or_insert_with(|| ideal_strings(filt.ideal(), &names));

    let ho = verify_higher_order(&system, &filt, internal).map_err(|e| anyhow!("{e}"))?;
    report.verdicts.push(Verdict {
        kind: String::from("higher_order"),
        pass: ho.pass,
        detail: format!(
            "H(y + V_j) - H(y) in L(V_(j+1)) checked on generator tuples for j = {}..{}",
            ho.anchor_index, ho.max_checked_index
        ),
        subcase: None,
        failing_membership: ho.violation.as_ref().map(|v| {
            format!(
                "polarized term of y-monomial {:?} at index {} (component {}): {}",
                v.y_monomial,
                v.filtration_index,
                v.component + 1,
                vec_str(&v.value, &names)
            )
        }),
    });

    let opts = SolveOptions {
        strategy: match seed {
            None => LiftStrategy::Deterministic,
            Some(s) => LiftStrategy::Seeded(s),
        },
        higher_order_checked: ho.pass,
        ..Default::default()
    };
    let mut outcome =
        solve_order_by_order(&system, &filt, internal, &opts).map_err(|e| anyhow!("{e}"))?;
    if let SolveOutcome::Obstructed(o) = &outcome {
        if o.failed_degree > trunc {
            // Obstructed only inside the margin zone: fall back to the
            // requested degree (top coefficients then default to the
            // graded-lex-minimal choice).
            report.notes.push(format!(
                "margin run obstructed at degree {} > {}; re-solved at the requested degree",
                o.failed_degree, trunc
            ));
            outcome =
                solve_order_by_order(&system, &filt, trunc, &opts).map_err(|e| anyhow!("{e}"))?;
        }
    }
    match outcome {
        SolveOutcome::Solved(trace) => {
            let solution = trace.solution().truncated(trunc);
            report.solution = Some(SolutionOut {
                series: vec_str(&solution, &names),
                residual_order: trunc + 1,
                residual_order_exact: false,
            });
            report.notes.push(format!(
                "order-by-order solve anchored at V_{}, {} lifting steps, quasi-good: {}",
                trace.anchor_index,
                trace.choice_log.len(),
                trace.quasi_good
            ));
        }
        SolveOutcome::Obstructed(o) => {
            report.obstruction = Some(ObstructionOut {
                step: o.step,
                failed_degree: o.failed_degree,
                residual_slice: vec_str(&o.residual_slice, &names),
                reason: match &o.reason {
                    ObstructionReason::LiftFailed => String::from("lift_failed"),
                    ObstructionReason::HigherOrderViolated(_) => {
                        String::from("higher_order_violated")
                    }
                },
                certifies_nonexistence: o.l_injective_on_v1,
            });
        }
    }
    Ok(report)
}

fn run_certify(spec: &ProblemSpec, trunc: u32, kind: CertKind) -> Result<Report> {
    let names = names(spec);
    let task = match kind {
        CertKind::Tougeron => "certify",
        CertKind::Fisher => "certify",
        CertKind::Bk => "certify",
    };
    let mut report = Report::new(task, trunc, spec.vars.clone(), spec.unknowns.clone());
    let system = build_system(spec, trunc)?;
    let params = CertificateParams {
        ideal: spec.ideal_generators_at(trunc).map(|gens| {
            let base = Ideal::new(spec.vars.len(), trunc, gens, trunc);
            let power = spec.ideal.as_ref().map(|c| c.power).unwrap_or(1);
            if power > 1 {
                base.power(power)
            } else {
                base
            }
        }),
        v1: spec.submodule_generators_at(trunc).map(|gens| {
            Submodule::new(
                spec.unknowns.len(),
                spec.vars.len(),
                trunc,
                gens.into_iter().map(SeriesVec::new).collect(),
                trunc,
            )
        }),
    };
    let core_kind = match kind {
        CertKind::Tougeron => CertificateKind::Tougeron,
        CertKind::Fisher => CertificateKind::Fisher,
        CertKind::Bk => CertificateKind::Bk,
    };
    let cr = check_certificate(&system, core_kind, &params, trunc).map_err(|e| anyhow!("{e}"))?;
    record_certificate(&mut report, &cr, &names);
    Ok(report)
}

/// Coefficients `a_0..a_d` of the single equation, grouped by y-degree.
fn family_coefficients(spec: &ProblemSpec, trunc: u32) -> Result<Vec<TruncSeries>> {
    if spec.unknowns.len() != 1 || spec.equations.len() != 1 {
        bail!("deform-root expects exactly one equation in one unknown");
    }
    let nvars = spec.vars.len();
    let f = spec.equations_at(trunc);
    let f = f.entry(0);
    let mut by_deg: BTreeMap<u32, TruncSeries> = BTreeMap::new();
    for (m, c) in f.terms() {
        let exps = m.exponents();
        let ydeg = exps[nvars];
        let alpha = Monomial::new(exps[..nvars].to_vec());
        let term = TruncSeries::monomial(nvars, trunc, alpha, c.clone());
        by_deg
            .entry(ydeg)
            .and_modify(|s| *s = s.add(&term))
            .or_insert(term);
    }
    let degree = *by_deg.keys().max().unwrap_or(&0);
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    for i in 0..=degree {
        coeffs.push(
            by_deg
                .remove(&i)
                .unwrap_or_else(|| TruncSeries::zero(nvars, trunc)),
        );
    }
    Ok(coeffs)
}

fn deformation_out(
    report: &mut Report,
    dr: &germ_core::deform::DeformationReport,
    names: &[&str],
    trunc: u32,
    char_poly: Option<Vec<String>>,
) {
    report.verdicts.push(Verdict {
        kind: String::from("deform_part1"),
        pass: dr.part1,
        detail: String::from("a_0 in (t)*a_1^2"),
        subcase: None,
        failing_membership: None,
    });
    report.verdicts.push(Verdict {
        kind: String::from("deform_part2"),
        pass: dr.part2,
        detail: String::from("a_0 in (t)*a_1 and a_i*a_0^(i-1) in (t)*a_1^i"),
        subcase: None,
        failing_membership: None,
    });
    report.deformation = Some(DeformationOut {
        applicable: dr.applicable,
        part1: dr.part1,
        part2: dr.part2,
        fired: dr.fired.map(|f| {
            match f {
                DeformCertificate::Part1 => "part1",
                DeformCertificate::Part2 => "part2",
            }
            .to_string()
        }),
        root: dr
            .root
            .as_ref()
            .map(|r| series_str(&r.truncated(trunc), names)),
        char_poly,
    });
    if let Some(root) = &dr.root {
        report.solution = Some(SolutionOut {
            series: series_str(&root.truncated(trunc), names),
            residual_order: trunc + 1,
            residual_order_exact: false,
        });
    }
    report.notes.extend(dr.notes.iter().cloned());
}

fn run_deform_root(spec: &ProblemSpec, trunc: u32) -> Result<Report> {
    let names = names(spec);
    let mut report = Report::new(
        "deform-root",
        trunc,
        spec.vars.clone(),
        spec.unknowns.clone(),
    );
    let probe = family_coefficients(spec, trunc)?;
    let margin = probe
        .get(1)
        .and_then(|a1| a1.terms().map(|(m, _)| m.total_degree()).max())
        .unwrap_or(1)
        .clamp(1, MARGIN_CAP);
    let coeffs = family_coefficients(spec, trunc + margin)?;
    let fam = PolyFamily::new(coeffs).map_err(|e| anyhow!("{e}"))?;
    let dr = root_deformation(&fam, trunc + margin).map_err(|e| anyhow!("{e}"))?;
    deformation_out(&mut report, &dr, &names, trunc, None);
    Ok(report)
}

fn run_deform_eig(spec: &ProblemSpec, trunc: u32) -> Result<Report> {
    let names = names(spec);
    let mut report = Report::new(
        "deform-eig",
        trunc,
        spec.vars.clone(),
        spec.unknowns.clone(),
    );
    let n = spec.unknowns.len();
    if n == 0 || spec.equations.len() != n {
        bail!("deform-eig expects the matrix as n linear equations in n unknowns (rows of A*y)");
    }
    let probe = build_system(spec, trunc)?;
    if !probe.u().is_zero() || probe.h().entries().iter().any(|e| !e.is_zero()) {
        bail!("deform-eig equations must be linear in the unknowns with no free part");
    }
    let margin = (probe.l().max_entry_degree() * n as u32).clamp(1, MARGIN_CAP);
    let system = build_system(spec, trunc + margin)?;
    let entries: Vec<Vec<TruncSeries>> = (0..n)
        .map(|i| (0..n).map(|j| system.l().entry(i, j).clone()).collect())
        .collect();
    let fam = MatrixFamily::new(entries).map_err(|e| anyhow!("{e}"))?;
    let (char_poly, dr) = germ_core::deform::eigenvalue_deformation(&fam, trunc + margin)
        .map_err(|e| anyhow!("{e}"))?;
    let char_strings = (0..=char_poly.degree())
        .map(|i| series_str(&char_poly.coeff(i).truncated(trunc), &names))
        .collect();
    deformation_out(&mut report, &dr, &names, trunc, Some(char_strings));
    Ok(report)
}

fn run_determinacy(spec: &ProblemSpec, trunc: u32, flavor: DetFlavor) -> Result<Report> {
    let mut report = Report::new(
        "determinacy",
        trunc,
        spec.vars.clone(),
        spec.unknowns.clone(),
    );
    if !spec.unknowns.is_empty() {
        bail!("determinacy uses ring variables only; drop the unknowns clause");
    }
    let env = spec.ring_env();
    let nvars = spec.vars.len();
    let f = SeriesVec::new(
        spec.equations
            .iter()
            .map(|e| crate::problem::eval(e, &env, nvars, trunc))
            .collect(),
    );
    let group = match flavor {
        DetFlavor::R0 => GroupFlavor::RightEquiv,
        DetFlavor::K0 => GroupFlavor::Contact,
    };
    let q = JetQuotient::new(nvars, f.rank(), trunc);
    let bound = determinacy_bound(&q, group, &f, trunc).map_err(|e| anyhow!("{e}"))?;
    let tangent = tangent_space(&q, group, &f, trunc).map_err(|e| anyhow!("{e}"))?;
    let flavor_name = match flavor {
        DetFlavor::R0 => "r0",
        DetFlavor::K0 => "k0",
    };
    let statement = match bound {
        Some(k) => format!(
            "{}-determined for the unipotent group, up to truncation {}",
            k, trunc
        ),
        None => format!("no k <= {trunc} makes m^k W lie in the tangent space"),
    };
    report.verdicts.push(Verdict {
        kind: String::from("determinacy"),
        pass: bound.is_some(),
        detail: statement.clone(),
        subcase: None,
        failing_membership: None,
    });
    report.determinacy = Some(DeterminacyOut {
        flavor: flavor_name.to_string(),
        bound,
        statement,
        tangent_dims_per_slice: tangent.dims_per_slice().to_vec(),
    });
    Ok(report)
}
