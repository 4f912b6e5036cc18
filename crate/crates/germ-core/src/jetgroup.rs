//! Unipotent jet-automorphism groups acting on truncated quotients, their
//! exponential/logarithm, tangent spaces to orbits, the orbit-lifting loop,
//! and finite-determinacy bounds.
//!
//! The stage is the finite-dimensional rational vector space
//! `W / m^(D+1) W` for `W = R^p`, filtered by `W_j = m^j W`. A group element
//! is unipotent when it acts as the identity on every graded piece
//! `W_(j-1)/W_j`; its logarithm is a nilpotent endomorphism that lowers the
//! filtration by one, and both directions are finite exact sums here.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::linalg::{Echelon, SparseVec};
use crate::quotient::{monomials_of_degree, QuotientBasis};
use crate::series::{Monomial, SeriesVec, TruncSeries};
use crate::{Error, Integer, Rational, Result};

/// The graded model of `W/m^(D+1)W` with its monomial basis.
///
/// The filtration defaults to the m-adic one (`W_j = m^j W`, the level of a
/// basis slot is its total degree). Other descending filtrations can be
/// configured through per-variable weights; only the m-adic case ships with
/// fixtures.
#[derive(Debug, Clone)]
pub struct JetQuotient {
    basis: QuotientBasis,
    /// Filtration level per slot; defaults to the slot's total degree.
    levels: Vec<u32>,
}

impl JetQuotient {
    pub fn new(nvars: usize, rank: usize, trunc: u32) -> Self {
        let basis = QuotientBasis::new(nvars, rank, trunc);
        // Graded-slice dimensions match monomial counts times the rank by
        // construction; keep the check as a cheap structural guard.
        debug_assert!((0..=trunc).all(|d| {
            let (lo, hi) = basis.slice_slots(d);
            (hi - lo) as usize == basis.slice_monomial_count(d) * rank
        }));
        let levels = (0..basis.dim() as u32)
            .map(|s| basis.slot_degree(s))
            .collect();
        JetQuotient { basis, levels }
    }

    /// Filtration by a weighted ideal: the level of `x^a e_c` is the
    /// weighted degree `sum weights[i] * a_i`. Weights must be >= 1.
    pub fn with_weights(nvars: usize, rank: usize, trunc: u32, weights: &[u32]) -> Result<Self> {
        if weights.len() != nvars || weights.contains(&0) {
            return Err(Error::Domain(String::from(
                "one positive weight per variable is required",
            )));
        }
        let basis = QuotientBasis::new(nvars, rank, trunc);
        let levels = (0..basis.dim() as u32)
            .map(|s| {
                let (m, _) = basis.slot_info(s);
                m.exponents().iter().zip(weights).map(|(e, w)| e * w).sum()
            })
            .collect();
        Ok(JetQuotient { basis, levels })
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn trunc(&self) -> u32 {
        self.basis.trunc()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &QuotientBasis {
        &self.basis
    }

    /// Filtration level of a slot (total degree for the m-adic default).
    pub fn level(&self, slot: u32) -> u32 {
        self.levels[slot as usize]
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn to_vec(&self, w: &SeriesVec) -> SparseVec {
        self.basis.to_sparse(w)
    }

    pub fn from_vec(&self, v: &SparseVec) -> SeriesVec {
        self.basis.from_sparse(v)
    }
}

/// A rational-linear endomorphism of the quotient, stored column-sparse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    columns: Vec<SparseVec>,
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        LinearMap {
            columns: (0..dim as u32).map(SparseVec::unit).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        LinearMap {
            columns: vec![SparseVec::new(); dim],
        }
    }

    /// Build from explicit columns: `columns[j]` is the image of basis
    /// vector `j`.
    pub fn from_columns(columns: Vec<SparseVec>) -> Self {
        LinearMap { columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.columns[j]
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (slot, c) in v.iter() {
            out.axpy(c, &self.columns[*slot as usize]);
        }
        out
    }

    /// `self` after `other`: `(self.compose(other))(v) = self(other(v))`.
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        LinearMap {
            columns: other.columns.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        let one = Rational::one();
        LinearMap {
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| {
                    let mut c = a.clone();
                    c.axpy(&one, b);
                    c
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &LinearMap) -> LinearMap {
        let minus_one = -Rational::one();
        LinearMap {
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| {
                    let mut c = a.clone();
                    c.axpy(&minus_one, b);
                    c
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> LinearMap {
        LinearMap {
            columns: self
                .columns
                .iter()
                .map(|col| {
                    let mut v = col.clone();
                    v.scale(c);
                    v
                })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVec::is_zero)
    }
}

/// Is `g` the identity on every graded piece `W_(j-1)/W_j`, i.e. does
/// `g - 1` strictly lower the filtration?
pub fn is_unipotent(q: &JetQuotient, g: &LinearMap) -> bool {
    strictly_lowering(q, g, true)
}

fn strictly_lowering(q: &JetQuotient, map: &LinearMap, subtract_identity: bool) -> bool {
    for slot in 0..q.dim() as u32 {
        let d = q.level(slot);
        let col = map.column(slot as usize);
        let mut n = col.clone();
        if subtract_identity {
            let mut unit = SparseVec::unit(slot);
            unit.scale(&-Rational::one());
            n.axpy(&Rational::one(), &unit);
        }
        if !n.is_zero() {
            // All remaining terms must live strictly deeper.
            let min_level = n.iter().map(|(s, _)| q.level(*s)).min().unwrap();
            if min_level <= d {
                return false;
            }
        }
    }
    true
}

/// A nilpotent endomorphism `xi` with `xi(W_j) <= W_(j+1)`, stored by its
/// action on basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentEndo {
    map: LinearMap,
}

impl NilpotentEndo {
    pub fn new(q: &JetQuotient, map: LinearMap) -> Result<Self> {
        if !strictly_lowering(q, &map, false) {
            return Err(Error::Domain(String::from(
                "endomorphism does not strictly lower the filtration",
            )));
        }
        Ok(NilpotentEndo { map })
    }

    /// The derivation `sum coeffs[i] * d/dx_i` (each coefficient in `m^2`),
    /// acting componentwise on the quotient.
    pub fn from_derivation(q: &JetQuotient, coeffs: &[TruncSeries]) -> Result<Self> {
        assert_eq!(coeffs.len(), q.nvars(), "one coefficient per variable");
        for c in coeffs {
            if c.order_at_least() < 2 {
                return Err(Error::Domain(String::from(
                    "derivation coefficients must lie in m^2",
                )));
            }
        }
        let dim = q.dim();
        let mut columns = Vec::with_capacity(dim);
        for slot in 0..dim as u32 {
            let (m, comp) = q.basis.slot_info(slot);
            let mono = TruncSeries::monomial(q.nvars(), q.trunc(), m.clone(), Rational::one());
            let mut image = TruncSeries::zero(q.nvars(), q.trunc());
            for (i, c) in coeffs.iter().enumerate() {
                image = image.add(&mono.partial_derivative(i)?.mul(c));
            }
            let vec = SeriesVec::basis(q.rank(), q.nvars(), q.trunc(), comp, image);
            columns.push(q.to_vec(&vec));
        }
        NilpotentEndo::new(q, LinearMap { columns })
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        self.map.apply(v)
    }
}

/// Logarithm of a unipotent map: with `N = g - 1` strictly lowering, the sum
/// `sum_k (-1)^(k+1) N^k / k` is finite and exact. Inverse of `jet_exp`.
pub fn jet_ln(q: &JetQuotient, g: &LinearMap) -> Result<NilpotentEndo> {
    if !is_unipotent(q, g) {
        return Err(Error::Domain(String::from(
            "logarithm requires a unipotent map",
        )));
    }
    let dim = q.dim();
    let n = g.sub(&LinearMap::identity(dim));
    let mut acc = LinearMap::zero(dim);
    let mut power = n.clone();
    let mut k = 1u32;
    while !power.is_zero() {
        let sign = if k % 2 == 1 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let coeff = sign / Rational::from_integer(Integer::from(k));
        acc = acc.add(&power.scale(&coeff));
        power = power.compose(&n);
        k += 1;
        if k > q.max_level() + 2 {
            break;
        }
    }
    NilpotentEndo::new(q, acc)
}

/// Exponential of a nilpotent endomorphism: `1 + sum_k xi^k / k!`, finite
/// and exact in the quotient. Whether the result is induced by a stored
/// group flavor can be checked with `map_in_flavor_algebra`.
pub fn jet_exp(q: &JetQuotient, xi: &NilpotentEndo) -> LinearMap {
    let dim = q.dim();
    let mut acc = LinearMap::identity(dim);
    let mut power = xi.map.clone();
    let mut factorial = Integer::one();
    let mut k = 1u32;
    while !power.is_zero() {
        factorial *= Integer::from(k);
        let coeff = Rational::new(Integer::one(), factorial.clone());
        acc = acc.add(&power.scale(&coeff));
        power = power.compose(&xi.map);
        k += 1;
        if k > q.max_level() + 2 {
            break;
        }
    }
    acc
}

/// Does the logarithm of the unipotent map `g` lie in the linear span of the
/// flavor's Lie-algebra generators? This is the working form of the
/// assumption that the image of ln on the unipotent subgroup is a linear
/// subspace: exponentials of arbitrary tangent combinations are accepted as
/// group elements exactly for the flavors where this holds.
pub fn map_in_flavor_algebra(q: &JetQuotient, g: &LinearMap, flavor: GroupFlavor) -> Result<bool> {
    let xi = jet_ln(q, g)?;
    let dim = q.dim() as u32;
    let vectorize = |m: &LinearMap| -> SparseVec {
        let mut terms = Vec::new();
        for (j, col) in m.columns.iter().enumerate() {
            for (s, c) in col.iter() {
                terms.push((j as u32 * dim + s, c.clone()));
            }
        }
        terms.sort_by_key(|(s, _)| *s);
        SparseVec::from_sorted(terms)
    };
    let mut span = Echelon::new(false);
    for (id, gen) in flavor_algebra_generators(q, &flavor)?
        .into_iter()
        .enumerate()
    {
        let endo = gen.to_endo(q, &flavor)?;
        let vec = vectorize(endo.map());
        if !vec.is_zero() {
            span.insert(id as u32, vec);
        }
    }
    Ok(span.contains(&vectorize(xi.map())))
}

/// The flavor's Lie-algebra generators as data, independent of any module
/// element (multipliers bounded by the truncation).
fn flavor_algebra_generators(
    q: &JetQuotient,
    flavor: &GroupFlavor,
) -> Result<Vec<TangentGenerator>> {
    let nvars = q.nvars();
    let trunc = q.trunc();
    let mut gens = Vec::new();
    for var in 0..nvars {
        for d in 2..=trunc {
            for mult in monomials_of_degree(nvars, d) {
                gens.push(TangentGenerator::Derivation { var, mult });
            }
        }
    }
    match flavor {
        GroupFlavor::RightEquiv => {}
        GroupFlavor::Contact => {
            for row in 0..q.rank() {
                for col in 0..q.rank() {
                    for d in 1..=trunc {
                        for mult in monomials_of_degree(nvars, d) {
                            gens.push(TangentGenerator::Scale { row, col, mult });
                        }
                    }
                }
            }
        }
        GroupFlavor::MatrixLr { rows, cols } => {
            if rows * cols != q.rank() {
                return Err(Error::ShapeNotSupported(String::from(
                    "matrix flavor shape does not match the quotient rank",
                )));
            }
            for d in 1..=trunc {
                for mult in monomials_of_degree(nvars, d) {
                    for a in 0..*rows {
                        for b in 0..*rows {
                            gens.push(TangentGenerator::LeftUnit {
                                a,
                                b,
                                mult: mult.clone(),
                            });
                        }
                    }
                    for c in 0..*cols {
                        for dd in 0..*cols {
                            gens.push(TangentGenerator::RightUnit {
                                c,
                                d: dd,
                                mult: mult.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(gens)
}

/// A unipotent group element: a coordinate change `phi` with
/// `phi(x) - x in m^2`, optionally with a unit-matrix part `U = 1 + u`,
/// `u` over `m`, acting by `w(x) -> U(x) w(phi(x))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetAutomorphism {
    phi: Vec<TruncSeries>,
    unit: Option<Vec<Vec<TruncSeries>>>,
    rank: usize,
}

impl JetAutomorphism {
    pub fn new(
        phi: Vec<TruncSeries>,
        unit: Option<Vec<Vec<TruncSeries>>>,
        rank: usize,
    ) -> Result<Self> {
        let nvars = phi.len();
        for (i, p) in phi.iter().enumerate() {
            assert_eq!(
                p.nvars(),
                nvars,
                "coordinate change variable count mismatch"
            );
            if !p.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm);
            }
            let xi = TruncSeries::var(nvars, p.trunc(), i);
            if p.sub(&xi).order_at_least() < 2 {
                return Err(Error::Domain(format!(
                    "phi_{} - x_{} must lie in m^2 for a unipotent change",
                    i + 1,
                    i + 1
                )));
            }
        }
        if let Some(u) = &unit {
            if u.len() != rank || u.iter().any(|r| r.len() != rank) {
                return Err(Error::ShapeNotSupported(String::from(
                    "unit part must be a rank x rank matrix",
                )));
            }
            for (i, row) in u.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    let c = e.constant_term();
                    let expected_one = i == j;
                    if expected_one && !c.is_one() {
                        return Err(Error::Domain(String::from(
                            "unit part must be 1 + (entries over m)",
                        )));
                    }
                    if !expected_one && !c.is_zero() {
                        return Err(Error::Domain(String::from(
                            "unit part must be 1 + (entries over m)",
                        )));
                    }
                }
            }
        }
        Ok(JetAutomorphism { phi, unit, rank })
    }

    pub fn identity(nvars: usize, rank: usize, trunc: u32) -> Self {
        let phi = (0..nvars)
            .map(|i| TruncSeries::var(nvars, trunc, i))
            .collect();
        JetAutomorphism {
            phi,
            unit: None,
            rank,
        }
    }

    pub fn phi(&self) -> &[TruncSeries] {
        &self.phi
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `w(x) -> U(x) w(phi(x))`, exact composition truncated at `D`.
    pub fn act(&self, w: &SeriesVec) -> Result<SeriesVec> {
        assert_eq!(w.rank(), self.rank, "rank mismatch");
        let nvars = self.phi.len();
        assert_eq!(w.nvars(), nvars, "variable count mismatch");
        // w(phi(x)) by substituting all variables at once: embed w into a
        // doubled variable set and substitute x_i -> phi_i.
        let composed: Vec<TruncSeries> = w
            .entries()
            .iter()
            .map(|e| {
                let widened = widen_to_back(e);
                widened.substitute(nvars, &self.phi)
            })
            .collect::<Result<Vec<_>>>()?;
        let composed = SeriesVec::new(composed);
        match &self.unit {
            None => Ok(composed),
            Some(u) => {
                let mut out = Vec::with_capacity(self.rank);
                for row in u {
                    let mut acc = TruncSeries::zero(nvars, w.trunc());
                    for (j, e) in row.iter().enumerate() {
                        acc = acc.add(&e.mul(composed.entry(j)));
                    }
                    out.push(acc);
                }
                Ok(SeriesVec::new(out))
            }
        }
    }

    /// The induced linear map on the quotient, materialized column by column.
    pub fn induced_map(&self, q: &JetQuotient) -> Result<LinearMap> {
        assert_eq!(q.rank(), self.rank, "rank mismatch");
        let mut columns = Vec::with_capacity(q.dim());
        for slot in 0..q.dim() as u32 {
            let (m, comp) = q.basis.slot_info(slot);
            let w = q.basis.basis_vector(m, comp);
            columns.push(q.to_vec(&self.act(&w)?));
        }
        Ok(LinearMap { columns })
    }
}

/// Reinterpret a series in `x` as a series in `(shadow, x)` with the actual
/// variables moved to the back, ready for substitution.
fn widen_to_back(s: &TruncSeries) -> TruncSeries {
    let nvars = s.nvars();
    let mut out = TruncSeries::zero(2 * nvars, s.trunc());
    for (m, c) in s.terms() {
        let mut exps = vec![0u32; 2 * nvars];
        exps[nvars..].copy_from_slice(m.exponents());
        out = out.add(&TruncSeries::monomial(
            2 * nvars,
            s.trunc(),
            Monomial::new(exps),
            c.clone(),
        ));
    }
    out
}

/// Group flavors with explicit tangent generator sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFlavor {
    /// Coordinate changes `x -> x + h`, `h in m^2` (right equivalence).
    RightEquiv,
    /// Right equivalence plus the unit-matrix part `1 + Mat(p, p; m)`.
    Contact,
    /// `A -> U A V^(-1)` on `Mat(rows, cols; R)` flattened row-major, with
    /// the coordinate-change part.
    MatrixLr { rows: usize, cols: usize },
}

/// One tangent generator of a flavor, as data (applied on demand).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TangentGenerator {
    /// `x^mult * d/dx_var`, `|mult| >= 2`.
    Derivation { var: usize, mult: Monomial },
    /// `w_row += x^mult * w_col`, `|mult| >= 1` (contact unit part).
    Scale {
        row: usize,
        col: usize,
        mult: Monomial,
    },
    /// `E_(a,b) * A` over `x^mult`, `|mult| >= 1` (left units).
    LeftUnit { a: usize, b: usize, mult: Monomial },
    /// `A * E_(c,d)` over `x^mult`, `|mult| >= 1` (right units).
    RightUnit { c: usize, d: usize, mult: Monomial },
}

impl TangentGenerator {
    pub fn describe(&self, var_names: &[&str]) -> String {
        let mono = |m: &Monomial| {
            let s = TruncSeries::monomial(
                var_names.len(),
                m.total_degree(),
                m.clone(),
                Rational::one(),
            );
            s.display_with(var_names)
        };
        match self {
            TangentGenerator::Derivation { var, mult } => {
                format!("{} * d/d{}", mono(mult), var_names[*var])
            }
            TangentGenerator::Scale { row, col, mult } => {
                format!("{} * E[{},{}]", mono(mult), row + 1, col + 1)
            }
            TangentGenerator::LeftUnit { a, b, mult } => {
                format!("{} * E[{},{}] * A", mono(mult), a + 1, b + 1)
            }
            TangentGenerator::RightUnit { c, d, mult } => {
                format!("{} * A * E[{},{}]", mono(mult), c + 1, d + 1)
            }
        }
    }

    /// Apply the generator to a module element.
    pub fn apply(&self, w: &SeriesVec, flavor: &GroupFlavor) -> Result<SeriesVec> {
        let nvars = w.nvars();
        let trunc = w.trunc();
        let one = Rational::one();
        match self {
            TangentGenerator::Derivation { var, mult } => {
                let entries = w
                    .entries()
                    .iter()
                    .map(|e| Ok(e.partial_derivative(*var)?.mul_monomial(mult, &one)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SeriesVec::new(entries))
            }
            TangentGenerator::Scale { row, col, mult } => {
                let mut out = SeriesVec::zero(w.rank(), nvars, trunc);
                let val = w.entry(*col).mul_monomial(mult, &one);
                out = replace(out, *row, val);
                Ok(out)
            }
            TangentGenerator::LeftUnit { a, b, mult } => {
                let GroupFlavor::MatrixLr { rows: _, cols } = flavor else {
                    return Err(Error::Domain(String::from(
                        "left units need the matrix flavor",
                    )));
                };
                let mut out = SeriesVec::zero(w.rank(), nvars, trunc);
                for j in 0..*cols {
                    let val = w.entry(b * cols + j).mul_monomial(mult, &one);
                    out = replace(out, a * cols + j, val);
                }
                Ok(out)
            }
            TangentGenerator::RightUnit { c, d, mult } => {
                let GroupFlavor::MatrixLr { rows, cols } = flavor else {
                    return Err(Error::Domain(String::from(
                        "right units need the matrix flavor",
                    )));
                };
                let mut out = SeriesVec::zero(w.rank(), nvars, trunc);
                for i in 0..*rows {
                    let val = w.entry(i * cols + c).mul_monomial(mult, &one);
                    out = replace(out, i * cols + d, val);
                }
                Ok(out)
            }
        }
    }

    /// The generator as a nilpotent endomorphism of the quotient.
    pub fn to_endo(&self, q: &JetQuotient, flavor: &GroupFlavor) -> Result<NilpotentEndo> {
        let mut columns = Vec::with_capacity(q.dim());
        for slot in 0..q.dim() as u32 {
            let (m, comp) = q.basis.slot_info(slot);
            let w = q.basis.basis_vector(m, comp);
            columns.push(q.to_vec(&self.apply(&w, flavor)?));
        }
        NilpotentEndo::new(q, LinearMap { columns })
    }
}

fn replace(v: SeriesVec, i: usize, value: TruncSeries) -> SeriesVec {
    let mut entries = v.entries().to_vec();
    entries[i] = entries[i].add(&value);
    SeriesVec::new(entries)
}

/// The tangent space to the orbit at `w`: the span of the flavor's tangent
/// generators applied to `w`, with an echelon basis per graded slice.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    flavor: GroupFlavor,
    degree: u32,
    basis: QuotientBasis,
    generators: Vec<(TangentGenerator, SparseVec)>,
    echelon: Echelon,
    dims_per_slice: Vec<usize>,
}

impl TangentSpace {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn flavor(&self) -> GroupFlavor {
        self.flavor
    }

    pub fn generators(&self) -> &[(TangentGenerator, SparseVec)] {
        &self.generators
    }

    /// Dimension of the initial-form module per graded slice (number of
    /// echelon pivots of each total degree).
    pub fn dims_per_slice(&self) -> &[usize] {
        &self.dims_per_slice
    }

    pub fn contains(&self, v: &SeriesVec) -> bool {
        self.echelon.contains(&self.basis.to_sparse(v))
    }

    pub fn contains_vec(&self, v: &SparseVec) -> bool {
        self.echelon.contains(v)
    }

    /// Every monomial slot of total degree `k..=degree` lies in the span.
    pub fn contains_all_slices_from(&self, k: u32) -> Option<u32> {
        for slot in 0..self.basis.dim() as u32 {
            let d = self.basis.slot_degree(slot);
            if d < k || d > self.degree {
                continue;
            }
            if !self.echelon.contains(&SparseVec::unit(slot)) {
                return Some(d);
            }
        }
        None
    }
}

fn flavor_generators(
    flavor: &GroupFlavor,
    w: &SeriesVec,
    degree: u32,
) -> Result<Vec<TangentGenerator>> {
    let nvars = w.nvars();
    let mut gens = Vec::new();
    // Derivation part, common to all flavors.
    for var in 0..nvars {
        let mut dmin = u32::MAX;
        for e in w.entries() {
            dmin = dmin.min(e.partial_derivative(var)?.order_at_least());
        }
        if dmin > degree {
            continue;
        }
        for d in 2..=degree.saturating_sub(dmin).max(2) {
            if d + dmin > degree {
                break;
            }
            for mult in monomials_of_degree(nvars, d) {
                gens.push(TangentGenerator::Derivation { var, mult });
            }
        }
    }
    match flavor {
        GroupFlavor::RightEquiv => {}
        GroupFlavor::Contact => {
            for row in 0..w.rank() {
                for col in 0..w.rank() {
                    let ord = w.entry(col).order_at_least();
                    if ord >= degree {
                        continue;
                    }
                    for d in 1..=(degree - ord) {
                        for mult in monomials_of_degree(nvars, d) {
                            gens.push(TangentGenerator::Scale { row, col, mult });
                        }
                    }
                }
            }
        }
        GroupFlavor::MatrixLr { rows, cols } => {
            assert_eq!(w.rank(), rows * cols, "matrix flavor rank mismatch");
            let ord = w.order_at_least();
            if ord < degree {
                for d in 1..=(degree - ord) {
                    for mult in monomials_of_degree(nvars, d) {
                        for a in 0..*rows {
                            for b in 0..*rows {
                                gens.push(TangentGenerator::LeftUnit {
                                    a,
                                    b,
                                    mult: mult.clone(),
                                });
                            }
                        }
                        for c in 0..*cols {
                            for dd in 0..*cols {
                                gens.push(TangentGenerator::RightUnit {
                                    c,
                                    d: dd,
                                    mult: mult.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(gens)
}

/// Span of the flavor's tangent generators applied to `w`, as a graded
/// subspace of the quotient at `degree`.
pub fn tangent_space(
    q: &JetQuotient,
    flavor: GroupFlavor,
    w: &SeriesVec,
    degree: u32,
) -> Result<TangentSpace> {
    let degree = degree.min(q.trunc());
    let basis = QuotientBasis::new(q.nvars(), q.rank(), degree);
    let gens = flavor_generators(&flavor, w, degree)?;
    let mut echelon = Echelon::new(false);
    let mut generators = Vec::new();
    for g in gens {
        let value = g.apply(w, &flavor)?;
        let vec = basis.to_sparse(&value);
        if vec.is_zero() {
            continue;
        }
        echelon.insert(generators.len() as u32, vec.clone());
        generators.push((g, vec));
    }
    let mut dims_per_slice = vec![0usize; degree as usize + 1];
    for pivot in echelon.pivots() {
        dims_per_slice[basis.slot_degree(pivot) as usize] += 1;
    }
    Ok(TangentSpace {
        flavor,
        degree,
        basis,
        generators,
        echelon,
        dims_per_slice,
    })
}

/// Success data of an orbit lift: a unipotent `g` with
/// `g(w) = w + u` modulo `m^(degree+1)`.
#[derive(Debug, Clone)]
pub struct OrbitLift {
    /// Logarithm of the constructed element.
    pub log: NilpotentEndo,
    /// The element as a linear map on the quotient.
    pub map: LinearMap,
    /// For the right-equivalence flavor on rank 1, the recovered coordinate
    /// change `phi` with `w(phi(x)) = w + u`.
    pub phi: Option<Vec<TruncSeries>>,
    /// Whether the automorphism built from `phi` induces exactly `map`.
    pub phi_consistent: Option<bool>,
    /// Slice indices fixed per loop step.
    pub steps: Vec<u32>,
}

#[derive(Debug, Clone)]
pub enum OrbitLiftOutcome {
    Lifted(OrbitLift),
    /// `m^k W` is not inside the tangent span at this slice.
    PreconditionFailed {
        slice: u32,
    },
}

/// Realize `w + u` in the unipotent orbit of `w`: requires `u in m^k W` and
/// `m^k W` inside the tangent span slice-wise up to `degree`. At stage `j`
/// a tangent combination matching the residual's lowest slice is chosen by
/// a graded solve and composed in through the exponential.
pub fn orbit_lift(
    q: &JetQuotient,
    flavor: GroupFlavor,
    w: &SeriesVec,
    u: &SeriesVec,
    k: u32,
    degree: u32,
) -> Result<OrbitLiftOutcome> {
    let degree = degree.min(q.trunc());
    if u.order_at_least() < k {
        return Err(Error::Domain(format!(
            "perturbation must lie in m^{k} W (order {} found)",
            u.order_at_least()
        )));
    }
    let tangent = tangent_space(q, flavor, w, degree)?;
    if let Some(slice) = tangent.contains_all_slices_from(k) {
        return Ok(OrbitLiftOutcome::PreconditionFailed { slice });
    }

    let dim = q.dim();
    let w_vec = q.to_vec(w);
    let mut target = w_vec.clone();
    target.axpy(&Rational::one(), &q.to_vec(u));

    // Tangent generators as endomorphisms, materialized once.
    let endos: Vec<NilpotentEndo> = tangent
        .generators()
        .iter()
        .map(|(g, _)| g.to_endo(q, &flavor))
        .collect::<Result<Vec<_>>>()?;

    let mut g = LinearMap::identity(dim);
    let mut steps = Vec::new();
    loop {
        let mut residual = target.clone();
        residual.axpy(&-Rational::one(), &g.apply(&w_vec));
        let Some((lead, _)) = residual.leading() else {
            break;
        };
        let j = q.level(lead);
        if j > degree {
            break;
        }
        // Match the degree-j slice of the residual over the generators.
        let mut slice_echelon = Echelon::new(true);
        let mut kernel_ids = Vec::new();
        for (id, (_, value)) in tangent.generators().iter().enumerate() {
            let restricted = restrict_to_level(q, value, j);
            if restricted.is_zero() {
                kernel_ids.push(id);
                continue;
            }
            slice_echelon.insert(id as u32, restricted);
        }
        let r_slice = restrict_to_level(q, &residual, j);
        let (rem, combo) = slice_echelon.reduce(&r_slice);
        if !rem.is_zero() {
            // The precondition should have caught this; report the slice.
            return Ok(OrbitLiftOutcome::PreconditionFailed { slice: j });
        }
        let mut lambda = LinearMap::zero(dim);
        for (id, c) in combo.iter() {
            lambda = lambda.add(&endos[*id as usize].map().scale(c));
        }
        let lambda = NilpotentEndo::new(q, lambda)?;
        g = jet_exp(q, &lambda).compose(&g);
        steps.push(j);
        if steps.len() as u32 > degree + 2 {
            return Err(Error::Domain(String::from(
                "orbit lift failed to descend within the degree budget",
            )));
        }
    }

    let log = jet_ln(q, &g)?;
    let (phi, phi_consistent) = if flavor == GroupFlavor::RightEquiv && q.rank() == 1 {
        let mut phi = Vec::with_capacity(q.nvars());
        for i in 0..q.nvars() {
            let xi = q.basis.basis_vector(&Monomial::var(q.nvars(), i), 0);
            phi.push(q.from_vec(&g.apply(&q.to_vec(&xi))).entry(0).clone());
        }
        let consistent = match JetAutomorphism::new(phi.clone(), None, 1) {
            Ok(auto) => match auto.induced_map(q) {
                Ok(induced) => induced == g,
                Err(_) => false,
            },
            Err(_) => false,
        };
        (Some(phi), Some(consistent))
    } else {
        (None, None)
    };
    Ok(OrbitLiftOutcome::Lifted(OrbitLift {
        log,
        map: g,
        phi,
        phi_consistent,
        steps,
    }))
}

fn restrict_to_level(q: &JetQuotient, v: &SparseVec, d: u32) -> SparseVec {
    SparseVec::from_sorted(
        v.iter()
            .filter(|(s, _)| q.level(*s) == d)
            .map(|(s, c)| (*s, c.clone()))
            .collect(),
    )
}

/// The least `k <= degree` with `m^k W` inside the tangent span slice-wise,
/// reported in the group's language: `f` is then `k`-determined for the
/// unipotent group, up to the truncation.
pub fn determinacy_bound(
    q: &JetQuotient,
    flavor: GroupFlavor,
    f: &SeriesVec,
    degree: u32,
) -> Result<Option<u32>> {
    let degree = degree.min(q.trunc());
    let constant = f
        .entries()
        .iter()
        .all(|e| e.terms().all(|(m, _)| m.total_degree() == 0));
    if constant {
        return Err(Error::Domain(String::from(
            "determinacy needs a nonconstant germ",
        )));
    }
    let tangent = tangent_space(q, flavor, f, degree)?;
    // Find the largest failing slice; the bound is one above it.
    let mut worst: Option<u32> = None;
    for slot in 0..tangent.basis.dim() as u32 {
        let d = tangent.basis.slot_degree(slot);
        if d == 0 || d > degree {
            continue;
        }
        if !tangent.echelon.contains(&SparseVec::unit(slot)) {
            worst = Some(worst.map_or(d, |w| w.max(d)));
        }
    }
    let bound = match worst {
        None => 1,
        Some(d) if d >= degree => return Ok(None),
        Some(d) => d + 1,
    };
    Ok(Some(bound))
}
