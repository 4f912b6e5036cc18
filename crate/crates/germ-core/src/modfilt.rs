//! Ideals, submodules, filtrations, and the exact graded linear algebra
//! behind every membership test and lifting step.
//!
//! All statements are interpreted in `R/m^(degree+1)`: a positive membership
//! answer means membership in `I + m^(degree+1)` and every result carries the
//! degree up to which it was verified. Per-degree-slice exact rational
//! elimination replaces Groebner bases throughout; this matches the
//! order-by-order structure of the lifting theorems and is all the truncated
//! semantics needs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::linalg::{Echelon, Insert, SparseVec};
use crate::quotient::{monomials_of_degree, QuotientBasis};
use crate::series::{Monomial, SeriesVec, TruncSeries};
use crate::{Error, Rational, Result};

/// Finitely generated ideal of `R`, with the degree up to which statements
/// about it have been verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    generators: Vec<TruncSeries>,
    nvars: usize,
    trunc: u32,
    verified_degree: u32,
}

impl Ideal {
    /// Normalizes: zero generators are dropped, each generator is scaled
    /// monic at its least term, duplicates are removed, and the list is
    /// sorted canonically.
    pub fn new(
        nvars: usize,
        trunc: u32,
        generators: Vec<TruncSeries>,
        verified_degree: u32,
    ) -> Self {
        let mut gens: Vec<TruncSeries> = generators
            .into_iter()
            .filter(|g| !g.is_zero())
            .map(|g| normalize_series(&g))
            .collect();
        for g in &gens {
            assert_eq!(g.nvars(), nvars, "variable count mismatch");
            assert_eq!(g.trunc(), trunc, "truncation mismatch");
        }
        gens.sort_by(|a, b| a.cmp_canonical(b));
        gens.dedup();
        Ideal {
            generators: gens,
            nvars,
            trunc,
            verified_degree,
        }
    }

    pub fn zero(nvars: usize, trunc: u32, verified_degree: u32) -> Self {
        Ideal {
            generators: Vec::new(),
            nvars,
            trunc,
            verified_degree,
        }
    }

    pub fn unit(nvars: usize, trunc: u32, verified_degree: u32) -> Self {
        Self::new(
            nvars,
            trunc,
            vec![TruncSeries::one(nvars, trunc)],
            verified_degree,
        )
    }

    /// The maximal ideal `m = (x_1, ..., x_m)`.
    pub fn maximal(nvars: usize, trunc: u32, verified_degree: u32) -> Self {
        let gens = (0..nvars)
            .map(|i| TruncSeries::var(nvars, trunc, i))
            .collect();
        Self::new(nvars, trunc, gens, verified_degree)
    }

    pub fn generators(&self) -> &[TruncSeries] {
        &self.generators
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn verified_degree(&self) -> u32 {
        self.verified_degree
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Minimum order over the generators; `None` for the zero ideal.
    pub fn min_order(&self) -> Option<u32> {
        self.generators.iter().filter_map(TruncSeries::order).min()
    }

    pub fn is_proper(&self) -> bool {
        self.min_order().is_none_or(|o| o >= 1)
    }

    pub fn sum(&self, other: &Ideal) -> Ideal {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Ideal::new(
            self.nvars,
            self.trunc,
            gens,
            self.verified_degree.min(other.verified_degree),
        )
    }

    /// Pairwise generator products, normalized and deduplicated.
    pub fn product(&self, other: &Ideal) -> Ideal {
        let mut gens = Vec::new();
        for a in &self.generators {
            for b in &other.generators {
                gens.push(a.mul(b));
            }
        }
        Ideal::new(
            self.nvars,
            self.trunc,
            gens,
            self.verified_degree.min(other.verified_degree),
        )
    }

    pub fn power(&self, k: u32) -> Ideal {
        assert!(k >= 1, "ideal power requires k >= 1");
        let mut out = self.clone();
        for _ in 1..k {
            out = out.product(self);
        }
        out
    }
}

/// Finitely generated submodule of `R^p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submodule {
    generators: Vec<SeriesVec>,
    rank: usize,
    nvars: usize,
    trunc: u32,
    verified_degree: u32,
}

impl Submodule {
    pub fn new(
        rank: usize,
        nvars: usize,
        trunc: u32,
        generators: Vec<SeriesVec>,
        verified_degree: u32,
    ) -> Self {
        let mut gens: Vec<SeriesVec> = generators
            .into_iter()
            .filter(|g| !g.is_zero())
            .map(|g| normalize_vec(&g))
            .collect();
        for g in &gens {
            assert_eq!(g.rank(), rank, "rank mismatch");
            assert_eq!(g.nvars(), nvars, "variable count mismatch");
            assert_eq!(g.trunc(), trunc, "truncation mismatch");
        }
        gens.sort_by(|a, b| a.cmp_canonical(b));
        gens.dedup();
        Submodule {
            generators: gens,
            rank,
            nvars,
            trunc,
            verified_degree,
        }
    }

    /// The full module `R^p`, generated by the standard basis.
    pub fn full(rank: usize, nvars: usize, trunc: u32, verified_degree: u32) -> Self {
        let gens = (0..rank)
            .map(|i| SeriesVec::basis(rank, nvars, trunc, i, TruncSeries::one(nvars, trunc)))
            .collect();
        Self::new(rank, nvars, trunc, gens, verified_degree)
    }

    /// `I * R^p` for an ideal `I`.
    pub fn ideal_times_full(ideal: &Ideal, rank: usize) -> Self {
        let mut gens = Vec::new();
        for g in ideal.generators() {
            for i in 0..rank {
                gens.push(SeriesVec::basis(
                    rank,
                    ideal.nvars(),
                    ideal.trunc(),
                    i,
                    g.clone(),
                ));
            }
        }
        Self::new(
            rank,
            ideal.nvars(),
            ideal.trunc(),
            gens,
            ideal.verified_degree(),
        )
    }

    pub fn generators(&self) -> &[SeriesVec] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn verified_degree(&self) -> u32 {
        self.verified_degree
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn min_order(&self) -> Option<u32> {
        self.generators.iter().filter_map(SeriesVec::order).min()
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Submodule::new(
            self.rank,
            self.nvars,
            self.trunc,
            gens,
            self.verified_degree.min(other.verified_degree),
        )
    }

    /// `I * self`: pairwise products of ideal and module generators.
    pub fn scaled_by(&self, ideal: &Ideal) -> Submodule {
        let mut gens = Vec::new();
        for a in ideal.generators() {
            for g in &self.generators {
                gens.push(g.scale_series(a));
            }
        }
        Submodule::new(
            self.rank,
            self.nvars,
            self.trunc,
            gens,
            self.verified_degree.min(ideal.verified_degree()),
        )
    }
}

/// The decreasing filtration `V_i := J^(i-1) * V_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    v1: Submodule,
    j: Ideal,
}

impl Filtration {
    /// `j` must be proper (all generators of order >= 1), otherwise the
    /// filtration does not descend and the Krull topology is trivial.
    pub fn new(v1: Submodule, j: Ideal) -> Result<Self> {
        if !j.is_proper() {
            return Err(Error::Domain(String::from(
                "filtration ideal must be proper (generators of order >= 1)",
            )));
        }
        Ok(Filtration { v1, j })
    }

    pub fn v1(&self) -> &Submodule {
        &self.v1
    }

    pub fn ideal(&self) -> &Ideal {
        &self.j
    }

    /// Generator list of `V_i = J^(i-1) * V_1`, `i >= 1`.
    pub fn component(&self, i: u32) -> Submodule {
        assert!(i >= 1, "filtration components start at 1");
        if i == 1 {
            return self.v1.clone();
        }
        self.v1.scaled_by(&self.j.power(i - 1))
    }
}

/// Rectangular matrix over the truncated ring, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    trunc: u32,
    entries: Vec<TruncSeries>,
}

impl PolyMatrix {
    pub fn from_rows(rows: Vec<Vec<TruncSeries>>) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty(), "empty matrix");
        let cols = rows[0].len();
        let nvars = rows[0][0].nvars();
        let trunc = rows[0][0].trunc();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            for e in r {
                assert_eq!(e.nvars(), nvars, "variable count mismatch");
                assert_eq!(e.trunc(), trunc, "truncation mismatch");
                entries.push(e.clone());
            }
        }
        PolyMatrix {
            rows: rows.len(),
            cols,
            nvars,
            trunc,
            entries,
        }
    }

    pub fn identity(n: usize, nvars: usize, trunc: u32) -> Self {
        let mut rows = vec![vec![TruncSeries::zero(nvars, trunc); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = TruncSeries::one(nvars, trunc);
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> SeriesVec {
        SeriesVec::new((0..self.rows).map(|i| self.entry(i, j).clone()).collect())
    }

    pub fn mul_vec(&self, v: &SeriesVec) -> SeriesVec {
        assert_eq!(v.rank(), self.cols, "shape mismatch");
        let out = (0..self.rows)
            .map(|i| {
                let mut acc = TruncSeries::zero(self.nvars, self.trunc);
                for j in 0..self.cols {
                    acc = acc.add(&self.entry(i, j).mul(v.entry(j)));
                }
                acc
            })
            .collect();
        SeriesVec::new(out)
    }

    /// Largest total degree appearing in any entry (0 for the zero matrix).
    pub fn max_entry_degree(&self) -> u32 {
        self.entries
            .iter()
            .flat_map(|e| e.terms().map(|(m, _)| m.total_degree()))
            .max()
            .unwrap_or(0)
    }

    fn submatrix(&self, row_skip: usize, cols: &[usize]) -> Vec<Vec<TruncSeries>> {
        (row_skip..self.rows)
            .map(|i| cols.iter().map(|&j| self.entry(i, j).clone()).collect())
            .collect()
    }
}

fn normalize_series(s: &TruncSeries) -> TruncSeries {
    match s.terms().next() {
        None => s.clone(),
        Some((_, c)) => {
            let inv = Rational::new(c.denom().clone(), c.numer().clone());
            s.scale(&inv)
        }
    }
}

fn normalize_vec(v: &SeriesVec) -> SeriesVec {
    // Scale so the least (monomial, component) term has coefficient 1.
    let mut lead: Option<(&Monomial, usize, &Rational)> = None;
    for (c, entry) in v.entries().iter().enumerate() {
        if let Some((m, r)) = entry.terms().next() {
            let better = match lead {
                None => true,
                Some((lm, lc, _)) => (m, c) < (lm, lc),
            };
            if better {
                lead = Some((m, c, r));
            }
        }
    }
    match lead {
        None => v.clone(),
        Some((_, _, c)) => {
            let inv = Rational::new(c.denom().clone(), c.numer().clone());
            SeriesVec::new(v.entries().iter().map(|e| e.scale(&inv)).collect())
        }
    }
}

/// Deterministic vs seeded tie-breaking for under-determined lifts. The
/// deterministic mode picks the graded-lex-minimal solution (free columns at
/// zero); the seeded mode perturbs it by a random combination of kernel
/// relations, staying inside the same span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftStrategy {
    Deterministic,
    Seeded(u64),
}

/// A witness expressing the target over span generators:
/// `target = sum of c * x^mult * gen` modulo `m^(degree+1)`.
#[derive(Debug, Clone)]
pub struct SpanWitness {
    pub terms: Vec<(usize, Monomial, Rational)>,
}

impl SpanWitness {
    /// Collects the witness into one multiplier series per generator.
    pub fn multipliers(&self, ngens: usize, nvars: usize, trunc: u32) -> Vec<TruncSeries> {
        let mut out = vec![TruncSeries::zero(nvars, trunc); ngens];
        for (k, m, c) in &self.terms {
            let t = TruncSeries::monomial(nvars, trunc, m.clone(), c.clone());
            out[*k] = out[*k].add(&t);
        }
        out
    }
}

/// First degree slice at which a target cannot be matched, together with the
/// unmatchable homogeneous residual.
#[derive(Debug, Clone)]
pub struct SpanObstruction {
    pub degree: u32,
    pub residual: SeriesVec,
}

pub(crate) struct SpanSolver {
    basis: QuotientBasis,
    tags: Vec<(usize, Monomial)>,
    echelon: Echelon,
    kernel: Vec<SparseVec>,
}

impl SpanSolver {
    /// Columns are `x^mult * gens[k]` ordered by (k, mult) with the canonical
    /// monomial order; this fixes the deterministic tie-break.
    pub fn build(gens: &[SeriesVec], rank: usize, nvars: usize, degree: u32) -> Self {
        Self::build_with_z_orders(gens, rank, nvars, degree, None)
    }

    /// As `build`, but when the columns are images `L(g_k)` of generators of
    /// a constraint module, `z_orders[k]` carries the order of `g_k` itself.
    /// The multiplier window then extends to multiples whose image vanishes
    /// modulo `m^(degree+1)`: those columns are pure kernel directions that
    /// the seeded tie-break may use.
    pub(crate) fn build_with_z_orders(
        gens: &[SeriesVec],
        rank: usize,
        nvars: usize,
        degree: u32,
        z_orders: Option<&[u32]>,
    ) -> Self {
        let basis = QuotientBasis::new(nvars, rank, degree);
        let mut tags = Vec::new();
        let mut echelon = Echelon::new(true);
        let mut kernel = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            let img_ord = g.order();
            let low = match z_orders {
                None => match img_ord {
                    Some(o) => o,
                    None => continue,
                },
                Some(zo) => img_ord.map_or(zo[k], |o| o.min(zo[k])),
            };
            if low > degree {
                continue;
            }
            for d in 0..=(degree - low) {
                for m in monomials_of_degree(nvars, d) {
                    let prod = g.mul_monomial(&m, &Rational::one());
                    let col = basis.to_sparse(&prod);
                    let id = tags.len() as u32;
                    if col.is_zero() {
                        if z_orders.is_some() {
                            tags.push((k, m));
                            kernel.push(SparseVec::unit(id));
                        }
                        continue;
                    }
                    tags.push((k, m));
                    match echelon.insert(id, col) {
                        Insert::Independent => {}
                        Insert::Dependent(rel) => kernel.push(rel),
                    }
                }
            }
        }
        SpanSolver {
            basis,
            tags,
            echelon,
            kernel,
        }
    }

    pub fn basis(&self) -> &QuotientBasis {
        &self.basis
    }

    pub fn contains(&self, target: &SeriesVec) -> bool {
        self.echelon.contains(&self.basis.to_sparse(target))
    }

    pub fn solve(
        &self,
        target: &SeriesVec,
        strategy: LiftStrategy,
    ) -> core::result::Result<SpanWitness, SpanObstruction> {
        let (rem, mut sol) = self.echelon.reduce(&self.basis.to_sparse(target));
        if let Some((slot, _)) = rem.leading() {
            let degree = self.basis.slot_degree(slot);
            let residual_vec = self
                .basis
                .from_sparse(&self.basis.restrict_slice(&rem, degree));
            return Err(SpanObstruction {
                degree,
                residual: residual_vec,
            });
        }
        if let LiftStrategy::Seeded(seed) = strategy {
            let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
            for rel in &self.kernel {
                let r = splitmix64(&mut state) % 5;
                let c = crate::rat_i64(r as i64 - 2);
                sol.axpy(&c, rel);
            }
        }
        let terms = sol
            .iter()
            .map(|(id, c)| {
                let (k, m) = &self.tags[*id as usize];
                (*k, m.clone(), c.clone())
            })
            .collect();
        Ok(SpanWitness { terms })
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A successful constrained lift: `l * z = w` modulo `m^(degree+1)` with `z`
/// expressed through the constraint submodule's generators.
#[derive(Debug, Clone)]
pub struct Lift {
    pub z: SeriesVec,
    pub witness: SpanWitness,
}

#[derive(Debug, Clone)]
pub enum LiftOutcome {
    Solution(Lift),
    NoSolution(SpanObstruction),
}

/// Solve `L(z) = w` modulo `m^(degree+1)` with `z` in the constraint
/// submodule, by exact coefficient matching per total degree. The solution is
/// deterministic (graded-lex tie-break) unless a seeded strategy is given.
pub fn graded_image_solve(
    l: &PolyMatrix,
    w: &SeriesVec,
    constraint: &Submodule,
    degree: u32,
    strategy: LiftStrategy,
) -> Result<LiftOutcome> {
    if l.cols() != constraint.rank() || l.rows() != w.rank() {
        return Err(Error::ShapeNotSupported(String::from(
            "matrix, constraint and target shapes disagree",
        )));
    }
    let image_gens: Vec<SeriesVec> = constraint
        .generators()
        .iter()
        .map(|g| l.mul_vec(g))
        .collect();
    let z_orders: Vec<u32> = constraint
        .generators()
        .iter()
        .map(|g| g.order().unwrap_or(degree + 1))
        .collect();
    let solver =
        SpanSolver::build_with_z_orders(&image_gens, l.rows(), l.nvars(), degree, Some(&z_orders));
    match solver.solve(w, strategy) {
        Err(obs) => Ok(LiftOutcome::NoSolution(obs)),
        Ok(witness) => {
            let mut z = SeriesVec::zero(constraint.rank(), l.nvars(), l.trunc());
            for (k, m, c) in &witness.terms {
                z = z.add(&constraint.generators()[*k].mul_monomial(m, c));
            }
            debug_assert!(
                l.mul_vec(&z)
                    .sub(w)
                    .truncated(degree.min(l.trunc()))
                    .is_zero(),
                "lift witness failed re-expansion"
            );
            Ok(LiftOutcome::Solution(Lift { z, witness }))
        }
    }
}

/// Outcome of a membership test in `I + m^(degree+1)` (or the submodule
/// analogue), with a re-expandable witness on success.
#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    pub verified_degree: u32,
    /// One multiplier series per generator; `target = sum(h_k * g_k)` modulo
    /// `m^(degree+1)` when `member`.
    pub witness: Vec<TruncSeries>,
    pub obstruction: Option<SpanObstruction>,
}

/// `f in I + m^(degree+1)`? Degenerate input `f = 0` is vacuously a member
/// with an empty witness.
pub fn ideal_membership(f: &TruncSeries, ideal: &Ideal, degree: u32) -> Membership {
    let target = SeriesVec::new(vec![f.clone()]);
    let gens: Vec<SeriesVec> = ideal
        .generators()
        .iter()
        .map(|g| SeriesVec::new(vec![g.clone()]))
        .collect();
    membership_in_span(&target, &gens, 1, f.nvars(), f.trunc(), degree)
}

/// `v in S + m^(degree+1) * R^p`?
pub fn submodule_membership(v: &SeriesVec, s: &Submodule, degree: u32) -> Membership {
    membership_in_span(v, s.generators(), s.rank(), s.nvars(), s.trunc(), degree)
}

fn membership_in_span(
    target: &SeriesVec,
    gens: &[SeriesVec],
    rank: usize,
    nvars: usize,
    trunc: u32,
    degree: u32,
) -> Membership {
    let solver = SpanSolver::build(gens, rank, nvars, degree);
    match solver.solve(target, LiftStrategy::Deterministic) {
        Ok(witness) => {
            let multipliers = witness.multipliers(gens.len(), nvars, trunc);
            // Witness soundness: re-expand exactly.
            let mut acc = SeriesVec::zero(rank, nvars, trunc);
            for (h, g) in multipliers.iter().zip(gens) {
                acc = acc.add(&g.scale_series(h));
            }
            assert!(
                acc.sub(target).truncated(degree.min(trunc)).is_zero(),
                "membership witness failed re-expansion"
            );
            Membership {
                member: true,
                verified_degree: degree,
                witness: multipliers,
                obstruction: None,
            }
        }
        Err(obs) => Membership {
            member: false,
            verified_degree: degree,
            witness: Vec::new(),
            obstruction: Some(obs),
        },
    }
}

/// Ideal of all `p x p` minors of a `p x n` matrix, `p <= n`.
pub fn maximal_minors(l: &PolyMatrix) -> Result<Ideal> {
    if l.rows() > l.cols() {
        return Err(Error::ShapeNotSupported(String::from(
            "maximal minors require p <= n; transpose first",
        )));
    }
    let p = l.rows();
    let mut gens = Vec::new();
    let mut subset: Vec<usize> = (0..p).collect();
    loop {
        gens.push(det(&l.submatrix(0, &subset)));
        // next p-subset of {0..n-1} in lexicographic order
        let n = l.cols();
        let mut i = p;
        loop {
            if i == 0 {
                return Ok(Ideal::new(l.nvars(), l.trunc(), gens, l.trunc()));
            }
            i -= 1;
            if subset[i] != i + n - p {
                subset[i] += 1;
                for j in i + 1..p {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn det(m: &[Vec<TruncSeries>]) -> TruncSeries {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let nvars = m[0][0].nvars();
    let trunc = m[0][0].trunc();
    let mut acc = TruncSeries::zero(nvars, trunc);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<TruncSeries>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| k != j)
                    .map(|k| m[i][k].clone())
                    .collect()
            })
            .collect();
        let cofactor = m[0][j].mul(&det(&minor));
        if j % 2 == 0 {
            acc = acc.add(&cofactor);
        } else {
            acc = acc.sub(&cofactor);
        }
    }
    acc
}

/// Generators, up to total degree `degree`, of the annihilator of the
/// cokernel: all `f` with `f * e_i` in the column span of `l` modulo
/// `m^(degree+1)` for every standard basis vector. The generating set is
/// reduced by discarding elements already inside the ideal generated so far.
pub fn ann_coker(l: &PolyMatrix, degree: u32) -> Ideal {
    let p = l.rows();
    let nvars = l.nvars();
    let columns: Vec<SeriesVec> = (0..l.cols()).map(|j| l.column(j)).collect();
    let image = SpanSolver::build(&columns, p, nvars, degree);
    let dim = image.basis().dim() as u32;

    // Stack the reduction remainders of x^mu * e_i over all i; the kernel of
    // the stacked family, processed monomial by monomial, is the annihilator.
    let mut stacked = Echelon::new(true);
    let mut candidates: Vec<Monomial> = Vec::new();
    let mut members: Vec<SparseVec> = Vec::new();
    for d in 0..=degree {
        for m in monomials_of_degree(nvars, d) {
            let mut vec = SparseVec::new();
            for i in 0..p {
                let target = image.basis().to_sparse(&image.basis().basis_vector(&m, i));
                let (rem, _) = image.echelon.reduce(&target);
                let mut shifted: Vec<(u32, Rational)> = rem
                    .iter()
                    .map(|(s, c)| (i as u32 * dim + s, c.clone()))
                    .collect();
                shifted.sort_by_key(|(s, _)| *s);
                vec.axpy(&Rational::one(), &SparseVec::from_sorted(shifted));
            }
            let id = candidates.len() as u32;
            candidates.push(m);
            match stacked.insert(id, vec) {
                Insert::Independent => {}
                Insert::Dependent(rel) => members.push(rel),
            }
        }
    }

    // Greedy generator extraction in ascending leading-monomial order.
    let mut accepted: Vec<TruncSeries> = Vec::new();
    let mut accepted_span = Echelon::new(false);
    let accept_basis = QuotientBasis::new(nvars, 1, degree);
    for rel in members {
        let mut f = TruncSeries::zero(nvars, l.trunc());
        for (id, c) in rel.iter() {
            let m = &candidates[*id as usize];
            f = f.add(&TruncSeries::monomial(
                nvars,
                l.trunc(),
                m.clone(),
                c.clone(),
            ));
        }
        if f.is_zero() {
            continue;
        }
        let fvec = accept_basis.series_to_sparse(&f);
        if accepted_span.contains(&fvec) {
            continue;
        }
        let f = normalize_series(&f);
        // Extend the accepted ideal's span with all multiples of f.
        let ord = f.order().unwrap_or(degree);
        let mut next_id = u32::MAX;
        for d in 0..=degree.saturating_sub(ord) {
            for m in monomials_of_degree(nvars, d) {
                let prod = f.mul_monomial(&m, &Rational::one());
                let col = accept_basis.series_to_sparse(&prod.truncated(degree.min(f.trunc())));
                if !col.is_zero() {
                    accepted_span.insert(next_id, col);
                    next_id -= 1;
                }
            }
        }
        accepted.push(f);
    }
    Ideal::new(nvars, l.trunc(), accepted, degree)
}
