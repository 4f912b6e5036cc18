//! The order-by-order lifting engine (module instantiation), the
//! higher-order-term checker, and the uniqueness monitor.
//!
//! Equations are presented as `u + L y + H(y) = 0` with `u = F(x, 0)`,
//! `L = F'_y(x, 0)` and `H` the part of y-degree >= 2. Given a filtration
//! `V_i = J^(i-1) V_1`, the engine anchors the induction at the largest `i`
//! with `v` (the initial lift of `-u`) in `V_i`, then repeatedly lifts the
//! residual through `L` with the constraint sliding down the filtration.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::modfilt::{
    graded_image_solve, Filtration, LiftOutcome, LiftStrategy, PolyMatrix, SpanObstruction,
    SpanSolver, SpanWitness, Submodule,
};
use crate::series::{Monomial, SeriesVec, TruncSeries};
use crate::{Error, Integer, Rational, Result};

/// The decomposition `F = u + L y + H(y)` of a polynomial system in the ring
/// variables `x` (first `nvars` indices) and the unknowns `y` (the rest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    nvars: usize,
    nunknowns: usize,
    neqs: usize,
    trunc: u32,
    f: SeriesVec,
    u: SeriesVec,
    l: PolyMatrix,
    h: SeriesVec,
}

impl EquationSystem {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nunknowns(&self) -> usize {
        self.nunknowns
    }

    pub fn neqs(&self) -> usize {
        self.neqs
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn f(&self) -> &SeriesVec {
        &self.f
    }

    pub fn u(&self) -> &SeriesVec {
        &self.u
    }

    pub fn l(&self) -> &PolyMatrix {
        &self.l
    }

    pub fn h(&self) -> &SeriesVec {
        &self.h
    }

    /// `F(x, y)` for a concrete assignment of the unknowns.
    pub fn residual(&self, y: &SeriesVec) -> Result<SeriesVec> {
        assert_eq!(y.rank(), self.nunknowns, "unknown count mismatch");
        let entries = self
            .f
            .entries()
            .iter()
            .map(|c| c.substitute(self.nvars, y.entries()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesVec::new(entries))
    }

    /// The same `L` and `H` with the inhomogeneity replaced by `u = -L v`,
    /// i.e. the equation `L(y - v) + H(y) = 0`. Used to treat `v` as the
    /// moving parameter in good-solution experiments.
    pub fn with_initial_value(&self, v: &SeriesVec) -> EquationSystem {
        let total = self.nvars + self.nunknowns;
        let u = self.l.mul_vec(v).neg();
        let mut entries = Vec::with_capacity(self.neqs);
        for i in 0..self.neqs {
            let mut row = self.h.entry(i).add(&u.entry(i).extend_vars(total));
            for j in 0..self.nunknowns {
                let yj = TruncSeries::var(total, self.trunc, self.nvars + j);
                row = row.add(&self.l.entry(i, j).extend_vars(total).mul(&yj));
            }
            entries.push(row);
        }
        EquationSystem {
            nvars: self.nvars,
            nunknowns: self.nunknowns,
            neqs: self.neqs,
            trunc: self.trunc,
            f: SeriesVec::new(entries),
            u,
            l: self.l.clone(),
            h: self.h.clone(),
        }
    }

    /// The y-monomials of `H` in one component, grouped as
    /// `(y-exponents, coefficient series in x)`.
    fn h_y_monomials(&self, component: usize) -> Vec<(Vec<u32>, TruncSeries)> {
        let mut buckets: BTreeMap<Vec<u32>, TruncSeries> = BTreeMap::new();
        for (m, c) in self.h.entry(component).terms() {
            let exps = m.exponents();
            let beta = exps[self.nvars..].to_vec();
            let alpha = Monomial::new(exps[..self.nvars].to_vec());
            let term = TruncSeries::monomial(self.nvars, self.trunc, alpha, c.clone());
            buckets
                .entry(beta)
                .and_modify(|s| *s = s.add(&term))
                .or_insert(term);
        }
        buckets.into_iter().collect()
    }
}

/// Split a polynomial system `F(x, y)` (components over `nvars + nunknowns`
/// variables, `x` first) into `u + L y + H(y)`. Fails when `F(0,0) != 0`.
pub fn decompose(f: SeriesVec, nvars: usize, nunknowns: usize) -> Result<EquationSystem> {
    assert_eq!(f.nvars(), nvars + nunknowns, "variable count mismatch");
    let trunc = f.trunc();
    let neqs = f.rank();
    for c in f.entries() {
        if !c.constant_term().is_zero() {
            return Err(Error::NonzeroAtOrigin);
        }
    }
    let mut u_entries = vec![TruncSeries::zero(nvars, trunc); neqs];
    let mut l_rows = vec![vec![TruncSeries::zero(nvars, trunc); nunknowns]; neqs];
    let mut h_entries = vec![TruncSeries::zero(nvars + nunknowns, trunc); neqs];
    for (i, comp) in f.entries().iter().enumerate() {
        for (m, c) in comp.terms() {
            let exps = m.exponents();
            let ydeg: u32 = exps[nvars..].iter().sum();
            let alpha = Monomial::new(exps[..nvars].to_vec());
            match ydeg {
                0 => {
                    let t = TruncSeries::monomial(nvars, trunc, alpha, c.clone());
                    u_entries[i] = u_entries[i].add(&t);
                }
                1 => {
                    let j = exps[nvars..].iter().position(|&e| e == 1).unwrap();
                    let t = TruncSeries::monomial(nvars, trunc, alpha, c.clone());
                    l_rows[i][j] = l_rows[i][j].add(&t);
                }
                _ => {
                    let t = TruncSeries::monomial(nvars + nunknowns, trunc, m.clone(), c.clone());
                    h_entries[i] = h_entries[i].add(&t);
                }
            }
        }
    }
    Ok(EquationSystem {
        nvars,
        nunknowns,
        neqs,
        trunc,
        f,
        u: SeriesVec::new(u_entries),
        l: PolyMatrix::from_rows(l_rows),
        h: SeriesVec::new(h_entries),
    })
}

/// Lazy cache of filtration components and their spans.
pub(crate) struct Tower<'a> {
    filt: &'a Filtration,
    degree: u32,
    cap: u32,
    components: Vec<Option<Submodule>>,
    spans: Vec<Option<SpanSolver>>,
    image_spans: Vec<Option<SpanSolver>>,
}

impl<'a> Tower<'a> {
    pub fn new(filt: &'a Filtration, degree: u32, cap: u32) -> Self {
        let n = cap as usize + 2;
        Tower {
            filt,
            degree,
            cap,
            components: vec![None; n],
            spans: (0..n).map(|_| None).collect(),
            image_spans: (0..n).map(|_| None).collect(),
        }
    }

    pub fn component(&mut self, i: u32) -> &Submodule {
        assert!(i >= 1 && i <= self.cap + 1, "tower index out of range");
        let idx = i as usize;
        if self.components[idx].is_none() {
            self.components[idx] = Some(self.filt.component(i));
        }
        self.components[idx].as_ref().unwrap()
    }

    fn span(&mut self, i: u32) -> &SpanSolver {
        let idx = i as usize;
        if self.spans[idx].is_none() {
            let c = self.component(i).clone();
            self.spans[idx] = Some(SpanSolver::build(
                c.generators(),
                c.rank(),
                c.nvars(),
                self.degree,
            ));
        }
        self.spans[idx].as_ref().unwrap()
    }

    pub fn member(&mut self, v: &SeriesVec, i: u32) -> bool {
        self.span(i).contains(v)
    }

    /// Span of `L(V_i)` modulo `m^(degree+1)`.
    pub fn image_span(&mut self, l: &PolyMatrix, i: u32) -> &SpanSolver {
        let idx = i as usize;
        if self.image_spans[idx].is_none() {
            let gens: Vec<SeriesVec> = self
                .component(i)
                .generators()
                .iter()
                .map(|g| l.mul_vec(g))
                .collect();
            self.image_spans[idx] =
                Some(SpanSolver::build(&gens, l.rows(), l.nvars(), self.degree));
        }
        self.image_spans[idx].as_ref().unwrap()
    }

    /// Largest `i <= cap` with `v` in `V_i`; `cap + 1` for `v = 0`.
    pub fn placement(&mut self, v: &SeriesVec) -> u32 {
        if v.is_zero() {
            return self.cap + 1;
        }
        let mut i = 1;
        while i < self.cap && self.member(v, i + 1) {
            i += 1;
        }
        i
    }

    /// Minimum generator order of `V_i` (`degree + 1` when the component is
    /// zero modulo the truncation).
    pub fn min_order(&mut self, i: u32) -> u32 {
        self.component(i).min_order().unwrap_or(self.degree + 1)
    }
}

/// Report of the higher-order-term check `H(y + V_j) - H(y) in L(V_{j+1})`,
/// verified by full polarization over generator tuples with `y` ranging over
/// `V_i` (the component where the initial lift `v` sits) and `j >= i`.
#[derive(Debug, Clone)]
pub struct HigherOrderReport {
    pub pass: bool,
    /// Index `i` at which the check is anchored (placement of `v`).
    pub anchor_index: u32,
    /// Indices `anchor..=max_checked_index` were checked; beyond that every
    /// polarized term has order above the verified degree.
    pub max_checked_index: u32,
    pub verified_degree: u32,
    /// Set when the initial lift of `-u` in `V_1` does not exist; the check
    /// is then anchored at `i = 1`.
    pub anchor_lift_failed: bool,
    pub violation: Option<HigherOrderViolation>,
}

/// A polarized term outside the allowed image span.
#[derive(Debug, Clone)]
pub struct HigherOrderViolation {
    /// Filtration index `j` of the failed inclusion into `L(V_{j+1})`.
    pub filtration_index: u32,
    /// Equation component of the violating y-monomial.
    pub component: usize,
    /// Exponents of the violating y-monomial.
    pub y_monomial: Vec<u32>,
    /// Generator indices (with multiplicity) into `V_i`.
    pub base_tuple: Vec<usize>,
    /// Generator indices (with multiplicity) into `V_j`.
    pub delta_tuple: Vec<usize>,
    /// The polarized value that failed the membership.
    pub value: SeriesVec,
    pub obstruction: SpanObstruction,
}

/// Sparse polynomial in formal tuple parameters with series coefficients.
struct ParamPoly {
    terms: BTreeMap<Vec<u16>, TruncSeries>,
}

impl ParamPoly {
    fn constant(nparams: usize, s: TruncSeries) -> Self {
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(vec![0u16; nparams], s);
        }
        ParamPoly { terms }
    }

    fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut terms: BTreeMap<Vec<u16>, TruncSeries> = BTreeMap::new();
        for (ea, sa) in &self.terms {
            for (eb, sb) in &other.terms {
                let prod = sa.mul(sb);
                if prod.is_zero() {
                    continue;
                }
                let exp: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                terms
                    .entry(exp)
                    .and_modify(|s| *s = s.add(&prod))
                    .or_insert(prod);
            }
        }
        terms.retain(|_, s| !s.is_zero());
        ParamPoly { terms }
    }

    /// `(sum_k param_k * items[k])^power` by multiset enumeration with exact
    /// multinomial coefficients.
    fn linear_power(items: &[TruncSeries], power: u32, nvars: usize, trunc: u32) -> ParamPoly {
        fn rec(
            items: &[TruncSeries],
            counts: &mut Vec<u16>,
            from: usize,
            remaining: u32,
            nvars: usize,
            trunc: u32,
            terms: &mut BTreeMap<Vec<u16>, TruncSeries>,
        ) {
            if remaining == 0 {
                let mut value = TruncSeries::one(nvars, trunc);
                let mut total = 0u32;
                for (k, &c) in counts.iter().enumerate() {
                    for _ in 0..c {
                        value = value.mul(&items[k]);
                    }
                    total += c as u32;
                }
                let value = value.scale(&multinomial(total, counts));
                if !value.is_zero() {
                    terms
                        .entry(counts.clone())
                        .and_modify(|s| *s = s.add(&value))
                        .or_insert(value);
                }
                return;
            }
            if from >= items.len() {
                return;
            }
            if from + 1 == items.len() {
                counts[from] = remaining as u16;
                rec(items, counts, from + 1, 0, nvars, trunc, terms);
                counts[from] = 0;
                return;
            }
            for take in (0..=remaining).rev() {
                counts[from] = take as u16;
                rec(
                    items,
                    counts,
                    from + 1,
                    remaining - take,
                    nvars,
                    trunc,
                    terms,
                );
                counts[from] = 0;
            }
        }
        let mut terms = BTreeMap::new();
        let mut counts = vec![0u16; items.len()];
        if !items.is_empty() {
            rec(items, &mut counts, 0, power, nvars, trunc, &mut terms);
        }
        terms.retain(|_, s: &mut TruncSeries| !s.is_zero());
        ParamPoly { terms }
    }
}

fn multinomial(total: u32, counts: &[u16]) -> Rational {
    let mut num = Integer::one();
    for k in 1..=total {
        num *= Integer::from(k);
    }
    let mut den = Integer::one();
    for &c in counts {
        for k in 1..=c as u32 {
            den *= Integer::from(k);
        }
    }
    Rational::new(num, den)
}

/// Check that `H` is a higher-order term for `L` along the filtration,
/// anchored where the initial lift sits: for every index `j` the iteration
/// will use, every polarized component of every y-monomial of
/// `H(y + delta) - H(y)` (with `y` over `V_i` generator tuples and `delta`
/// over `V_j` generator tuples) must lie in `L(V_{j+1})` mod `m^(degree+1)`.
pub fn verify_higher_order(
    system: &EquationSystem,
    filt: &Filtration,
    degree: u32,
) -> Result<HigherOrderReport> {
    verify_higher_order_anchored(system, filt, degree, None)
}

pub(crate) fn verify_higher_order_anchored(
    system: &EquationSystem,
    filt: &Filtration,
    degree: u32,
    anchor_override: Option<u32>,
) -> Result<HigherOrderReport> {
    if filt.v1().rank() != system.nunknowns() {
        return Err(Error::ShapeNotSupported(String::from(
            "filtration rank does not match the unknown count",
        )));
    }
    let cap = degree + 2;
    let mut tower = Tower::new(filt, degree, cap);
    let mut anchor_lift_failed = false;
    let anchor = match anchor_override {
        Some(i) => i.max(1),
        None => {
            let lift = graded_image_solve(
                system.l(),
                &system.u().neg(),
                filt.v1(),
                degree,
                LiftStrategy::Deterministic,
            )?;
            match lift {
                LiftOutcome::Solution(l) => tower.placement(&l.z),
                LiftOutcome::NoSolution(_) => {
                    anchor_lift_failed = true;
                    1
                }
            }
        }
    };
    let anchor = anchor.min(cap);

    let mut max_checked = anchor;
    let base_ord = tower.min_order(anchor);
    for j in anchor..=cap {
        // Every polarized difference term has at least one delta slot and one
        // further slot, so its order is at least ord(V_j) + ord(V_i).
        if tower.min_order(j) + base_ord > degree {
            break;
        }
        max_checked = j;
        if let Some(violation) = check_index(system, &mut tower, anchor, j, degree) {
            return Ok(HigherOrderReport {
                pass: false,
                anchor_index: anchor,
                max_checked_index: j,
                verified_degree: degree,
                anchor_lift_failed,
                violation: Some(violation),
            });
        }
    }
    Ok(HigherOrderReport {
        pass: true,
        anchor_index: anchor,
        max_checked_index: max_checked,
        verified_degree: degree,
        anchor_lift_failed,
        violation: None,
    })
}

fn check_index(
    system: &EquationSystem,
    tower: &mut Tower<'_>,
    i: u32,
    j: u32,
    degree: u32,
) -> Option<HigherOrderViolation> {
    let base_gens = tower.component(i).generators().to_vec();
    let delta_gens = tower.component(j).generators().to_vec();
    let nbase = base_gens.len();
    let nparams = nbase + delta_gens.len();
    if nparams == 0 {
        return None;
    }
    let nvars = system.nvars();
    let trunc = system.trunc();
    let l = system.l().clone();
    for component in 0..system.neqs() {
        for (beta, coeff) in system.h_y_monomials(component) {
            let mut expansion = ParamPoly::constant(nparams, TruncSeries::one(nvars, trunc));
            for (t, &bt) in beta.iter().enumerate() {
                if bt == 0 {
                    continue;
                }
                let items: Vec<TruncSeries> = base_gens
                    .iter()
                    .chain(delta_gens.iter())
                    .map(|g| g.entry(t).clone())
                    .collect();
                expansion = expansion.mul(&ParamPoly::linear_power(&items, bt, nvars, trunc));
            }
            for (exp, value) in &expansion.terms {
                let delta_slots: u32 = exp[nbase..].iter().map(|&e| e as u32).sum();
                if delta_slots == 0 {
                    continue;
                }
                let scaled = value.mul(&coeff);
                if scaled.is_zero() || scaled.order_at_least() > degree {
                    continue;
                }
                let target = SeriesVec::basis(system.neqs(), nvars, trunc, component, scaled);
                let span = tower.image_span(&l, j + 1);
                if !span.contains(&target) {
                    let obstruction = match span.solve(&target, LiftStrategy::Deterministic) {
                        Err(obs) => obs,
                        Ok(_) => unreachable!("contains() and solve() disagree"),
                    };
                    let decode = |slice: &[u16]| -> Vec<usize> {
                        let mut out = Vec::new();
                        for (k, &e) in slice.iter().enumerate() {
                            for _ in 0..e {
                                out.push(k);
                            }
                        }
                        out
                    };
                    return Some(HigherOrderViolation {
                        filtration_index: j,
                        component,
                        y_monomial: beta.clone(),
                        base_tuple: decode(&exp[..nbase]),
                        delta_tuple: decode(&exp[nbase..]),
                        value: target,
                        obstruction,
                    });
                }
            }
        }
    }
    None
}

/// Options for the lifting loop.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub strategy: LiftStrategy,
    /// When false, a failed lift is re-examined against the polarized
    /// higher-order inclusion to classify the obstruction.
    pub higher_order_checked: bool,
    /// Force the anchor index instead of the maximal placement of `v`.
    pub anchor_override: Option<u32>,
    /// Start from this initial approximation instead of lifting `-u` in `V_1`.
    pub initial: Option<SeriesVec>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            strategy: LiftStrategy::Deterministic,
            higher_order_checked: true,
            anchor_override: None,
            initial: None,
        }
    }
}

/// A per-step record: the correction was chosen in `V_(constraint_index)`,
/// expressed over that component's generators.
#[derive(Debug, Clone)]
pub struct StepChoice {
    pub step: u32,
    pub constraint_index: u32,
    pub witness: SpanWitness,
}

/// The trace of a successful order-by-order solve.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub filtration: Filtration,
    pub anchor_index: u32,
    pub initial: SeriesVec,
    pub iterates: Vec<SeriesVec>,
    pub residual_orders: Vec<u32>,
    pub choice_log: Vec<StepChoice>,
    pub target_degree: u32,
    /// `y - v` passed membership in `V_(anchor+1)`.
    pub quasi_good: bool,
}

impl SolutionTrace {
    pub fn solution(&self) -> &SeriesVec {
        self.iterates
            .last()
            .expect("trace has at least one iterate")
    }

    pub fn final_residual_order_at_least(&self) -> u32 {
        *self
            .residual_orders
            .last()
            .expect("trace has at least one iterate")
    }
}

#[derive(Debug, Clone)]
pub enum ObstructionReason {
    /// The residual left the image of `L` on the constraint component. This
    /// certifies non-existence only together with `l_injective_on_v1`; the
    /// lifting choices are non-canonical, so a single failed branch does not
    /// refute existence in general.
    LiftFailed,
    /// The polarized higher-order inclusion fails at this index.
    HigherOrderViolated(HigherOrderViolation),
}

#[derive(Debug, Clone)]
pub struct Obstruction {
    pub step: u32,
    pub residual: SeriesVec,
    pub failed_degree: u32,
    pub residual_slice: SeriesVec,
    pub reason: ObstructionReason,
    /// Whether `L` is injective on `V_1` modulo the truncation; only then is
    /// a failed lift a certificate of non-existence.
    pub l_injective_on_v1: bool,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(SolutionTrace),
    Obstructed(Obstruction),
}

/// Iterate the lifting step until the residual order exceeds
/// `target_degree`: at step `n` the residual `w` of the current iterate is
/// lifted through `L` inside `V_(i+n)` and subtracted.
pub fn solve_order_by_order(
    system: &EquationSystem,
    filt: &Filtration,
    target_degree: u32,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    if filt.v1().rank() != system.nunknowns() {
        return Err(Error::ShapeNotSupported(String::from(
            "filtration rank does not match the unknown count",
        )));
    }
    let degree = target_degree.min(system.trunc());
    let cap = degree + 2;
    let mut tower = Tower::new(filt, degree, cap);

    let v = match &opts.initial {
        Some(v) => v.clone(),
        None => match graded_image_solve(
            system.l(),
            &system.u().neg(),
            filt.v1(),
            degree,
            opts.strategy,
        )? {
            LiftOutcome::Solution(lift) => {
                if lift.z.order() == Some(0) && opts.strategy != LiftStrategy::Deterministic {
                    // A seeded perturbation may not introduce a unit term.
                    match graded_image_solve(
                        system.l(),
                        &system.u().neg(),
                        filt.v1(),
                        degree,
                        LiftStrategy::Deterministic,
                    )? {
                        LiftOutcome::Solution(l2) => l2.z,
                        LiftOutcome::NoSolution(_) => unreachable!(),
                    }
                } else {
                    lift.z
                }
            }
            LiftOutcome::NoSolution(obs) => {
                return Ok(SolveOutcome::Obstructed(Obstruction {
                    step: 0,
                    residual: system.u().neg(),
                    failed_degree: obs.degree,
                    residual_slice: obs.residual.clone(),
                    reason: ObstructionReason::LiftFailed,
                    l_injective_on_v1: injective_on(system.l(), filt.v1(), degree),
                }));
            }
        },
    };
    if v.order() == Some(0) {
        return Err(Error::Domain(String::from(
            "initial lift has a unit component; solutions are sought with y(0) = 0",
        )));
    }

    let anchor = match opts.anchor_override {
        Some(i) => i.max(1).min(cap),
        None => tower.placement(&v).min(cap),
    };

    let mut iterates = vec![v.clone()];
    let mut choice_log = Vec::new();
    let mut y = v.clone();
    let mut r = system.residual(&y)?;
    let mut residual_orders = vec![r.order_at_least()];
    let mut step = 1u32;
    loop {
        if r.order_at_least() > degree {
            let dy = y.sub(&v);
            let quasi_good = dy.is_zero() || tower.member(&dy, (anchor + 1).min(cap + 1));
            return Ok(SolveOutcome::Solved(SolutionTrace {
                filtration: filt.clone(),
                anchor_index: anchor,
                initial: v,
                iterates,
                residual_orders,
                choice_log,
                target_degree: degree,
                quasi_good,
            }));
        }
        let constraint_index = anchor + step;
        if constraint_index > cap {
            return Ok(SolveOutcome::Obstructed(obstruction_from(
                system,
                filt,
                step,
                &r,
                r.order_at_least(),
                degree,
                opts.higher_order_checked,
                anchor,
            )?));
        }
        let constraint = tower.component(constraint_index).clone();
        match graded_image_solve(system.l(), &r.neg(), &constraint, degree, opts.strategy)? {
            LiftOutcome::Solution(lift) => {
                y = y.add(&lift.z);
                iterates.push(y.clone());
                choice_log.push(StepChoice {
                    step,
                    constraint_index,
                    witness: lift.witness,
                });
                let r_next = system.residual(&y)?;
                let descended = r_next.order_at_least() > r.order_at_least();
                r = r_next;
                residual_orders.push(r.order_at_least());
                if !descended {
                    return Ok(SolveOutcome::Obstructed(obstruction_from(
                        system,
                        filt,
                        step,
                        &r,
                        r.order_at_least(),
                        degree,
                        opts.higher_order_checked,
                        anchor,
                    )?));
                }
            }
            LiftOutcome::NoSolution(obs) => {
                return Ok(SolveOutcome::Obstructed(obstruction_from(
                    system,
                    filt,
                    step,
                    &r,
                    obs.degree,
                    degree,
                    opts.higher_order_checked,
                    anchor,
                )?));
            }
        }
        step += 1;
        if step > degree + 2 {
            return Err(Error::Domain(String::from(
                "lifting loop failed to descend within the degree budget",
            )));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn obstruction_from(
    system: &EquationSystem,
    filt: &Filtration,
    step: u32,
    residual: &SeriesVec,
    failed_degree: u32,
    degree: u32,
    higher_order_checked: bool,
    anchor: u32,
) -> Result<Obstruction> {
    let reason = if higher_order_checked {
        ObstructionReason::LiftFailed
    } else {
        match verify_higher_order_anchored(system, filt, degree, Some(anchor))? {
            HigherOrderReport {
                violation: Some(v), ..
            } => ObstructionReason::HigherOrderViolated(v),
            _ => ObstructionReason::LiftFailed,
        }
    };
    let slice_deg = failed_degree.min(degree);
    Ok(Obstruction {
        step,
        residual: residual.clone(),
        failed_degree,
        residual_slice: SeriesVec::new(
            residual
                .entries()
                .iter()
                .map(|e| e.slice(slice_deg))
                .collect(),
        ),
        reason,
        l_injective_on_v1: injective_on(system.l(), filt.v1(), degree),
    })
}

/// Exact injectivity of `z -> L z` on the submodule, restricted so products
/// stay faithful below the truncation: multipliers are bounded by
/// `degree - max(deg g, deg L g)`, which makes every kernel relation an exact
/// polynomial identity rather than a truncation artifact.
pub fn injective_on(l: &PolyMatrix, module: &Submodule, degree: u32) -> bool {
    use crate::linalg::{Echelon, Insert};
    use crate::quotient::{monomials_of_degree, QuotientBasis};
    let basis = QuotientBasis::new(l.nvars(), l.rows(), degree);
    let mut echelon = Echelon::new(true);
    let mut tags: Vec<(usize, Monomial)> = Vec::new();
    for (k, g) in module.generators().iter().enumerate() {
        let image = l.mul_vec(g);
        if image.is_zero() {
            if !g.is_zero() {
                return false;
            }
            continue;
        }
        let max_deg = |v: &SeriesVec| -> u32 {
            v.entries()
                .iter()
                .flat_map(|e| e.terms().map(|(m, _)| m.total_degree()))
                .max()
                .unwrap_or(0)
        };
        let bound = degree.saturating_sub(max_deg(g).max(max_deg(&image)));
        for d in 0..=bound {
            for m in monomials_of_degree(l.nvars(), d) {
                let col = basis.to_sparse(&image.mul_monomial(&m, &Rational::one()));
                if col.is_zero() {
                    continue;
                }
                let id = tags.len() as u32;
                tags.push((k, m));
                if let Insert::Dependent(rel) = echelon.insert(id, col) {
                    let mut z = SeriesVec::zero(module.rank(), l.nvars(), l.trunc());
                    for (cid, c) in rel.iter() {
                        let (gk, gm) = &tags[*cid as usize];
                        z = z.add(&module.generators()[*gk].mul_monomial(gm, c));
                    }
                    if !z.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Result of comparing two order-by-order solutions of the same system.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Whether `L` is injective modulo the truncation; uniqueness is only a
    /// theorem in that case, otherwise the comparison is "not applicable".
    pub applicable: bool,
    /// Per common step `n`: does `y1^(n) - y2^(n)` lie in `V_n`?
    pub steps: Vec<(u32, bool)>,
    pub first_violation: Option<u32>,
}

impl UniquenessReport {
    pub fn pass(&self) -> bool {
        self.applicable && self.first_violation.is_none()
    }
}

/// Check that two traces of the same system with the same filtration agree
/// modulo `V_n` at every common step `n`.
pub fn check_uniqueness(
    t1: &SolutionTrace,
    t2: &SolutionTrace,
    system: &EquationSystem,
) -> Result<UniquenessReport> {
    if t1.filtration != t2.filtration {
        return Err(Error::FiltrationMismatch);
    }
    let degree = t1.target_degree.min(t2.target_degree);
    let full = Submodule::full(system.nunknowns(), system.nvars(), system.trunc(), degree);
    let applicable = injective_on(system.l(), &full, degree);
    if !applicable {
        return Ok(UniquenessReport {
            applicable,
            steps: Vec::new(),
            first_violation: None,
        });
    }
    let cap = degree + 2;
    let mut tower = Tower::new(&t1.filtration, degree, cap);
    let mut steps = Vec::new();
    let mut first_violation = None;
    let common = t1.iterates.len().min(t2.iterates.len());
    for n in 1..=common as u32 {
        let diff = t1.iterates[n as usize - 1].sub(&t2.iterates[n as usize - 1]);
        let ok = diff.is_zero() || (n <= cap && tower.member(&diff, n));
        if !ok && first_violation.is_none() {
            first_violation = Some(n);
        }
        steps.push((n, ok));
    }
    Ok(UniquenessReport {
        applicable,
        steps,
        first_violation,
    })
}
