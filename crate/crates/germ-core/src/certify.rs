//! Solvability certificates and the search for maximal ideals `J` with
//! `J^2 <= J * a_L`.
//!
//! Three sufficient conditions are checked, in increasing strength of the
//! conclusion they rest on:
//!
//! * `tougeron`: `F(x,0) in I * (I_max L)^2 * R^p` for a proper ideal `I`;
//! * `fisher`:   `F(x,0) in m * a_L * Im(L)`;
//! * `bk`:       the strengthened route through an ideal `J >= a_L` with
//!   `J^2 <= J * a_L` (three sub-cases with different demands on the initial
//!   lift).
//!
//! Every verdict is modulo `m^(degree+1)` and carries its ideal data; a pass
//! emits the filtration the solver should run with.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::modfilt::{
    ann_coker, graded_image_solve, ideal_membership, maximal_minors, submodule_membership,
    Filtration, Ideal, LiftOutcome, LiftStrategy, Membership, SpanObstruction, Submodule,
};
use crate::series::{Monomial, SeriesVec, TruncSeries};
use crate::solver::EquationSystem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Tougeron,
    Fisher,
    Bk,
}

impl CertificateKind {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateKind::Tougeron => "tougeron",
            CertificateKind::Fisher => "fisher",
            CertificateKind::Bk => "bk",
        }
    }
}

/// Which of the three strengthened sub-cases fired. They differ in what they
/// demand of the initial lift `v`, so conflating them would overstate the
/// certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkSubcase {
    /// `J^2 W <= m J L(V)` with `v in J V`.
    SquareModule,
    /// `J^2 <= J a_L` with `v in m J V`.
    SquareIdealDeepInitial,
    /// `J^2 <= J a_L` and `a_L W <= m L(V)` with `v in J V`.
    SquareIdealShallowInitial,
}

impl BkSubcase {
    pub fn describe(&self) -> &'static str {
        match self {
            BkSubcase::SquareModule => "J^2 W <= m*J*L(V) with v in J*V",
            BkSubcase::SquareIdealDeepInitial => "J^2 <= J*a_L with v in m*J*V",
            BkSubcase::SquareIdealShallowInitial => {
                "J^2 <= J*a_L and a_L*W <= m*L(V) with v in J*V"
            }
        }
    }
}

/// The membership instance that broke a certificate.
#[derive(Debug, Clone)]
pub struct FailedMembership {
    pub description: String,
    pub obstruction: Option<SpanObstruction>,
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub pass: bool,
    pub verified_degree: u32,
    /// Named ideal data that went into the verdict.
    pub ideals: Vec<(String, Ideal)>,
    pub subcase: Option<BkSubcase>,
    /// On pass, the filtration to hand to the solver.
    pub filtration: Option<Filtration>,
    pub failing: Option<FailedMembership>,
    pub notes: Vec<String>,
}

/// Optional parameters: `ideal` is `I` for `tougeron` and the candidate `J`
/// for `bk`; `v1` overrides the emitted filtration's first component.
#[derive(Debug, Clone, Default)]
pub struct CertificateParams {
    pub ideal: Option<Ideal>,
    pub v1: Option<Submodule>,
}

pub fn check_certificate(
    system: &EquationSystem,
    kind: CertificateKind,
    params: &CertificateParams,
    degree: u32,
) -> Result<CertificateReport> {
    match kind {
        CertificateKind::Tougeron => check_tougeron(system, params, degree),
        CertificateKind::Fisher => check_fisher(system, params, degree),
        CertificateKind::Bk => check_bk(system, params, degree),
    }
}

fn image_submodule(system: &EquationSystem, degree: u32) -> Submodule {
    let l = system.l();
    let cols: Vec<SeriesVec> = (0..l.cols()).map(|j| l.column(j)).collect();
    Submodule::new(l.rows(), l.nvars(), l.trunc(), cols, degree)
}

/// Filtration emitted on pass: `V_1 = J * R^n` (deepened by `m` when the
/// sub-case demands `v in m J V`), or the caller-supplied `V_1`, with the
/// m-adic filtration ideal. The certificate's `J` decides where `V_1` sits;
/// the descent itself runs along powers of `m`, which is what the
/// higher-order inclusion of the lifting loop needs (and what makes an
/// emitted pass re-solvable).
fn emit_filtration(
    system: &EquationSystem,
    j: &Ideal,
    deep: bool,
    params: &CertificateParams,
    notes: &mut Vec<String>,
) -> Option<Filtration> {
    let m_ideal = Ideal::maximal(system.nvars(), system.trunc(), j.verified_degree());
    let v1 = match &params.v1 {
        Some(v1) => v1.clone(),
        None => {
            let base = Submodule::ideal_times_full(j, system.nunknowns());
            if deep {
                base.scaled_by(&m_ideal)
            } else {
                base
            }
        }
    };
    if v1.is_zero() {
        notes.push(String::from(
            "certificate ideal vanishes at this truncation; no filtration emitted",
        ));
        return None;
    }
    match Filtration::new(v1, m_ideal) {
        Ok(f) => Some(f),
        Err(_) => {
            notes.push(String::from(
                "certificate ideal is not proper; no filtration emitted (classical IFT regime)",
            ));
            None
        }
    }
}

fn fail_from(membership: &Membership, description: String) -> FailedMembership {
    FailedMembership {
        description,
        obstruction: membership.obstruction.clone(),
    }
}

fn check_tougeron(
    system: &EquationSystem,
    params: &CertificateParams,
    degree: u32,
) -> Result<CertificateReport> {
    let mut notes = Vec::new();
    let mut ideals = Vec::new();
    if system.neqs() > system.nunknowns() {
        return Ok(CertificateReport {
            kind: CertificateKind::Tougeron,
            pass: false,
            verified_degree: degree,
            ideals,
            subcase: None,
            filtration: None,
            failing: Some(FailedMembership {
                description: String::from(
                    "inapplicable shape: more equations than unknowns (p > n)",
                ),
                obstruction: None,
            }),
            notes,
        });
    }
    let i_ideal = params
        .ideal
        .clone()
        .unwrap_or_else(|| Ideal::maximal(system.nvars(), system.trunc(), degree));
    let imax = maximal_minors(system.l())?;
    let target_ideal = i_ideal.product(&imax.power(2));
    ideals.push((String::from("I"), i_ideal));
    ideals.push((String::from("I_max"), imax.clone()));
    ideals.push((String::from("I*(I_max)^2"), target_ideal.clone()));
    for (c, entry) in system.u().entries().iter().enumerate() {
        let m = ideal_membership(entry, &target_ideal, degree);
        if !m.member {
            return Ok(CertificateReport {
                kind: CertificateKind::Tougeron,
                pass: false,
                verified_degree: degree,
                ideals,
                subcase: None,
                filtration: None,
                failing: Some(fail_from(
                    &m,
                    format!("F(x,0) component {} not in I*(I_max)^2", c + 1),
                )),
                notes,
            });
        }
    }
    // Via J = a_L = I_max (p = 1) or its cokernel refinement the solver runs
    // in the deep regime v in m*J*V.
    let a_l = ann_coker(system.l(), degree);
    ideals.push((String::from("a_L"), a_l.clone()));
    let filtration = emit_filtration(system, &a_l, true, params, &mut notes);
    Ok(CertificateReport {
        kind: CertificateKind::Tougeron,
        pass: true,
        verified_degree: degree,
        ideals,
        subcase: None,
        filtration,
        failing: None,
        notes,
    })
}

fn check_fisher(
    system: &EquationSystem,
    params: &CertificateParams,
    degree: u32,
) -> Result<CertificateReport> {
    let mut notes = Vec::new();
    let a_l = ann_coker(system.l(), degree);
    let m_ideal = Ideal::maximal(system.nvars(), system.trunc(), degree);
    let image = image_submodule(system, degree);
    let target = image.scaled_by(&m_ideal.product(&a_l));
    let ideals = vec![
        (String::from("a_L"), a_l.clone()),
        (String::from("m*a_L"), m_ideal.product(&a_l)),
    ];
    let m = submodule_membership(system.u(), &target, degree);
    if !m.member {
        return Ok(CertificateReport {
            kind: CertificateKind::Fisher,
            pass: false,
            verified_degree: degree,
            ideals,
            subcase: None,
            filtration: None,
            failing: Some(fail_from(&m, String::from("F(x,0) not in m*a_L*Im(L)"))),
            notes,
        });
    }
    let filtration = emit_filtration(system, &a_l, true, params, &mut notes);
    Ok(CertificateReport {
        kind: CertificateKind::Fisher,
        pass: true,
        verified_degree: degree,
        ideals,
        subcase: None,
        filtration,
        failing: None,
        notes,
    })
}

fn check_bk(
    system: &EquationSystem,
    params: &CertificateParams,
    degree: u32,
) -> Result<CertificateReport> {
    let mut notes = Vec::new();
    let a_l = ann_coker(system.l(), degree);
    let candidates: Vec<Ideal> = match &params.ideal {
        Some(j) => vec![j.clone()],
        None => {
            let bound = a_l
                .generators()
                .iter()
                .filter_map(|g| g.terms().map(|(m, _)| m.total_degree()).max())
                .max()
                .unwrap_or(1)
                .max(1);
            let search = search_maximal_j(&a_l, bound)?;
            if search.skipped_non_monomial {
                notes.push(String::from(
                    "a_L is not a monomial ideal; search skipped, using J = a_L",
                ));
            }
            search.ideals
        }
    };

    let m_ideal = Ideal::maximal(system.nvars(), system.trunc(), degree);
    let image = image_submodule(system, degree);
    let mut last_failure: Option<FailedMembership> = None;
    let mut ideals = vec![(String::from("a_L"), a_l.clone())];

    for j in &candidates {
        let j2 = j.power(2);
        let record = |name: &str, ideal: &Ideal, ideals: &mut Vec<(String, Ideal)>| {
            ideals.push((String::from(name), ideal.clone()));
        };
        record("J", j, &mut ideals);
        record("J^2", &j2, &mut ideals);

        // Sub-case 1: J^2 W <= m J L(V), v in J V.
        let mj_image = image.scaled_by(&m_ideal.product(j));
        let mut case1 = true;
        for g in j2.generators() {
            for i in 0..system.neqs() {
                let target =
                    SeriesVec::basis(system.neqs(), system.nvars(), system.trunc(), i, g.clone());
                let m = submodule_membership(&target, &mj_image, degree);
                if !m.member {
                    last_failure = Some(fail_from(&m, format!("J^2*e_{} not in m*J*L(V)", i + 1)));
                    case1 = false;
                    break;
                }
            }
            if !case1 {
                break;
            }
        }
        if case1 {
            if let Some(report) = try_initial_lift(
                system,
                j,
                BkSubcase::SquareModule,
                degree,
                params,
                &ideals,
                &mut notes,
                &mut last_failure,
            )? {
                return Ok(report);
            }
        }

        // Sub-cases 2 and 3 share the ideal condition J^2 <= J a_L.
        let j_al = j.product(&a_l);
        let mut square_ideal = true;
        for g in j2.generators() {
            let m = ideal_membership(g, &j_al, degree);
            if !m.member {
                last_failure = Some(fail_from(&m, String::from("J^2 not in J*a_L")));
                square_ideal = false;
                break;
            }
        }
        if square_ideal {
            if let Some(report) = try_initial_lift(
                system,
                j,
                BkSubcase::SquareIdealDeepInitial,
                degree,
                params,
                &ideals,
                &mut notes,
                &mut last_failure,
            )? {
                return Ok(report);
            }
            // Sub-case 3 additionally asks a_L W <= m L(V).
            let m_image = image.scaled_by(&m_ideal);
            let mut al_into = true;
            for g in a_l.generators() {
                for i in 0..system.neqs() {
                    let target = SeriesVec::basis(
                        system.neqs(),
                        system.nvars(),
                        system.trunc(),
                        i,
                        g.clone(),
                    );
                    let m = submodule_membership(&target, &m_image, degree);
                    if !m.member {
                        last_failure =
                            Some(fail_from(&m, format!("a_L*e_{} not in m*L(V)", i + 1)));
                        al_into = false;
                        break;
                    }
                }
                if !al_into {
                    break;
                }
            }
            if al_into {
                if let Some(report) = try_initial_lift(
                    system,
                    j,
                    BkSubcase::SquareIdealShallowInitial,
                    degree,
                    params,
                    &ideals,
                    &mut notes,
                    &mut last_failure,
                )? {
                    return Ok(report);
                }
            }
        }
    }

    Ok(CertificateReport {
        kind: CertificateKind::Bk,
        pass: false,
        verified_degree: degree,
        ideals,
        subcase: None,
        filtration: None,
        failing: last_failure.or(Some(FailedMembership {
            description: String::from("no strengthened sub-case fired"),
            obstruction: None,
        })),
        notes,
    })
}

#[allow(clippy::too_many_arguments)]
fn try_initial_lift(
    system: &EquationSystem,
    j: &Ideal,
    subcase: BkSubcase,
    degree: u32,
    params: &CertificateParams,
    ideals: &[(String, Ideal)],
    notes: &mut Vec<String>,
    last_failure: &mut Option<FailedMembership>,
) -> Result<Option<CertificateReport>> {
    let deep = matches!(subcase, BkSubcase::SquareIdealDeepInitial);
    let jv = Submodule::ideal_times_full(j, system.nunknowns());
    let constraint = if deep {
        jv.scaled_by(&Ideal::maximal(system.nvars(), system.trunc(), degree))
    } else {
        jv
    };
    match graded_image_solve(
        system.l(),
        &system.u().neg(),
        &constraint,
        degree,
        LiftStrategy::Deterministic,
    )? {
        LiftOutcome::Solution(_) => {
            let filtration = emit_filtration(system, j, deep, params, notes);
            Ok(Some(CertificateReport {
                kind: CertificateKind::Bk,
                pass: true,
                verified_degree: degree,
                ideals: ideals.to_vec(),
                subcase: Some(subcase),
                filtration,
                failing: None,
                notes: notes.clone(),
            }))
        }
        LiftOutcome::NoSolution(obs) => {
            *last_failure = Some(FailedMembership {
                description: format!(
                    "initial lift not available in {}",
                    if deep { "m*J*V" } else { "J*V" }
                ),
                obstruction: Some(obs),
            });
            Ok(None)
        }
    }
}

/// Result of the maximal-`J` search over monomial ideals.
#[derive(Debug, Clone)]
pub struct JSearch {
    pub ideals: Vec<Ideal>,
    pub skipped_non_monomial: bool,
    pub verified_degree: u32,
}

type MonoSet = BTreeSet<Monomial>;

fn minimalize(gens: MonoSet) -> MonoSet {
    let mut out = MonoSet::new();
    for g in &gens {
        if gens.iter().any(|h| h != g && h.divides(g)) {
            continue;
        }
        out.insert(g.clone());
    }
    out
}

fn mono_contains(ideal: &MonoSet, m: &Monomial) -> bool {
    ideal.iter().any(|g| g.divides(m))
}

fn mono_product(a: &MonoSet, b: &MonoSet) -> MonoSet {
    let mut out = MonoSet::new();
    for x in a {
        for y in b {
            out.insert(x.mul(y));
        }
    }
    minimalize(out)
}

/// `a <= b` as monomial ideals, modulo `m^(bound+1)`.
fn mono_subset_mod(a: &MonoSet, b: &MonoSet, bound: u32) -> bool {
    a.iter()
        .all(|g| g.total_degree() > bound || mono_contains(b, g))
}

fn mono_subset(a: &MonoSet, b: &MonoSet) -> bool {
    a.iter().all(|g| mono_contains(b, g))
}

/// All maximal elements, among monomial ideals generated in degree
/// `<= degree_bound`, of `{J : a_L <= J, J^2 <= J*a_L mod m^(2*bound+1)}`,
/// found by greedy single-monomial enlargement with backtracking over
/// incomparable branches. Non-monomial `a_L` skips the search and returns
/// `J = a_L` flagged.
pub fn search_maximal_j(a_l: &Ideal, degree_bound: u32) -> Result<JSearch> {
    let verified_degree = 2 * degree_bound;
    let monomial_gens: Option<Vec<Monomial>> = a_l
        .generators()
        .iter()
        .map(|g| {
            let mut it = g.terms();
            match (it.next(), it.next()) {
                (Some((m, _)), None) => Some(m.clone()),
                _ => None,
            }
        })
        .collect();
    let Some(monomial_gens) = monomial_gens else {
        return Ok(JSearch {
            ideals: vec![a_l.clone()],
            skipped_non_monomial: true,
            verified_degree,
        });
    };
    let max_gen_degree = monomial_gens
        .iter()
        .map(|m| m.total_degree())
        .max()
        .unwrap_or(0);
    if max_gen_degree > degree_bound {
        return Err(Error::DegreeBoundTooSmall {
            required: max_gen_degree,
            given: degree_bound,
        });
    }

    let nvars = a_l.nvars();
    let base = minimalize(monomial_gens.into_iter().collect());
    let base_ref = base.clone();
    let holds = move |j: &MonoSet| -> bool {
        mono_subset_mod(
            &mono_product(j, j),
            &mono_product(j, &base_ref),
            verified_degree,
        )
    };
    if !holds(&base) {
        // a_L itself always satisfies J^2 <= J a_L; this is a sanity guard.
        return Ok(JSearch {
            ideals: vec![a_l.clone()],
            skipped_non_monomial: false,
            verified_degree,
        });
    }

    let mut candidates: Vec<Monomial> = Vec::new();
    for d in 1..=degree_bound {
        candidates.extend(crate::quotient::monomials_of_degree(nvars, d));
    }

    let mut visited: BTreeSet<Vec<Monomial>> = BTreeSet::new();
    let mut stack = vec![base];
    let mut maximal: Vec<MonoSet> = Vec::new();
    while let Some(j) = stack.pop() {
        let key: Vec<Monomial> = j.iter().cloned().collect();
        if !visited.insert(key) {
            continue;
        }
        let mut extended = false;
        for c in &candidates {
            if mono_contains(&j, c) {
                continue;
            }
            let mut bigger = j.clone();
            bigger.insert(c.clone());
            let bigger = minimalize(bigger);
            if holds(&bigger) {
                extended = true;
                stack.push(bigger);
            }
        }
        if !extended {
            maximal.push(j);
        }
    }

    // Keep pairwise-incomparable representatives.
    let mut keep: Vec<MonoSet> = Vec::new();
    for j in &maximal {
        if maximal.iter().any(|k| k != j && mono_subset(j, k)) {
            continue;
        }
        if !keep.contains(j) {
            keep.push(j.clone());
        }
    }
    keep.sort_by(|a, b| {
        let av: Vec<&Monomial> = a.iter().collect();
        let bv: Vec<&Monomial> = b.iter().collect();
        av.cmp(&bv)
    });

    let ideals = keep
        .into_iter()
        .map(|j| {
            let gens = j
                .into_iter()
                .map(|m| TruncSeries::monomial(a_l.nvars(), a_l.trunc(), m, One::one()))
                .collect();
            Ideal::new(a_l.nvars(), a_l.trunc(), gens, verified_degree)
        })
        .collect();
    Ok(JSearch {
        ideals,
        skipped_non_monomial: false,
        verified_degree,
    })
}
