//! Exact arithmetic in the truncated polynomial ring `Q[x_1..x_m] / m^(D+1)`
//! and its free modules.
//!
//! Values are immutable after construction and all operations are pure, so
//! they can be shared freely across threads. Binary operations assert that
//! both operands use the same variable count and truncation degree.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::{Error, Rational, Result};

/// A monomial `x^a = x_1^(a_1) ... x_m^(a_m)`, stored as its exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial { exponents }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial {
            exponents: vec![0; nvars],
        }
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut exponents = vec![0; nvars];
        exponents[index] = 1;
        Monomial { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.nvars(), other.nvars(), "variable count mismatch");
        Monomial {
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Exact monomial division; `None` when some exponent would go negative.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        assert_eq!(self.nvars(), other.nvars(), "variable count mismatch");
        let mut exponents = Vec::with_capacity(self.exponents.len());
        for (a, b) in self.exponents.iter().zip(&other.exponents) {
            if a < b {
                return None;
            }
            exponents.push(a - b);
        }
        Some(Monomial { exponents })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        other.checked_div(self).is_some()
    }
}

/// Graded order: lower total degree first; within a degree the monomial with
/// the higher power of the earlier variable comes first, so ascending
/// iteration yields e.g. `x1^2, x1*x2, x2^2`. This single order drives term
/// storage, canonical printing and every deterministic tie-break.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.exponents.cmp(&self.exponents))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of `Q[x_1..x_m] / m^(D+1)`: a sparse map from monomials to
/// nonzero rationals plus the truncation degree `D`. No stored monomial has
/// total degree above `D` and no stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    nvars: usize,
    trunc: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl TruncSeries {
    pub fn zero(nvars: usize, trunc: u32) -> Self {
        TruncSeries {
            nvars,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, trunc: u32, value: Rational) -> Self {
        let mut s = Self::zero(nvars, trunc);
        if !value.is_zero() {
            s.terms.insert(Monomial::one(nvars), value);
        }
        s
    }

    pub fn one(nvars: usize, trunc: u32) -> Self {
        Self::constant(nvars, trunc, Rational::one())
    }

    pub fn var(nvars: usize, trunc: u32, index: usize) -> Self {
        Self::monomial(nvars, trunc, Monomial::var(nvars, index), Rational::one())
    }

    pub fn monomial(nvars: usize, trunc: u32, m: Monomial, coeff: Rational) -> Self {
        assert_eq!(m.nvars(), nvars, "variable count mismatch");
        let mut s = Self::zero(nvars, trunc);
        if !coeff.is_zero() && m.total_degree() <= trunc {
            s.terms.insert(m, coeff);
        }
        s
    }

    pub fn from_terms<I>(nvars: usize, trunc: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut s = Self::zero(nvars, trunc);
        for (exps, c) in terms {
            s.add_term(Monomial::new(exps), c);
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Smallest total degree of a stored monomial; `None` is the sentinel
    /// "order >= D+1" (the series is 0 modulo `m^(D+1)`).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.total_degree())
    }

    /// The order with the sentinel collapsed to `D + 1`.
    pub fn order_at_least(&self) -> u32 {
        self.order().unwrap_or(self.trunc + 1)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!(m.nvars(), self.nvars, "variable count mismatch");
        if c.is_zero() || m.total_degree() > self.trunc {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn assert_compatible(&self, other: &TruncSeries) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        assert_eq!(self.trunc, other.trunc, "truncation mismatch");
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> TruncSeries {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.assert_compatible(other);
        let mut out = TruncSeries::zero(self.nvars, self.trunc);
        for (ma, ca) in &self.terms {
            let da = ma.total_degree();
            for (mb, cb) in &other.terms {
                if da + mb.total_degree() > self.trunc {
                    continue;
                }
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> TruncSeries {
        if c.is_zero() {
            return TruncSeries::zero(self.nvars, self.trunc);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> TruncSeries {
        assert_eq!(m.nvars(), self.nvars, "variable count mismatch");
        let mut out = TruncSeries::zero(self.nvars, self.trunc);
        if c.is_zero() {
            return out;
        }
        let dm = m.total_degree();
        for (ma, ca) in &self.terms {
            if ma.total_degree() + dm > self.trunc {
                continue;
            }
            out.terms.insert(ma.mul(m), ca * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> TruncSeries {
        let mut out = TruncSeries::one(self.nvars, self.trunc);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative. The truncation degree is unchanged: the
    /// top-degree slice of the derivative is lost, which is the documented
    /// semantics of differentiating in `R/m^(D+1)`.
    pub fn partial_derivative(&self, var: usize) -> Result<TruncSeries> {
        if var >= self.nvars {
            return Err(Error::VariableOutOfRange {
                index: var,
                nvars: self.nvars,
            });
        }
        let mut out = TruncSeries::zero(self.nvars, self.trunc);
        for (m, c) in &self.terms {
            let e = m.exponents()[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[var] = e - 1;
            out.add_term(Monomial::new(exps), c * rat_u32(e));
        }
        Ok(out)
    }

    /// Re-truncate to a lower degree (dropping terms above `trunc`).
    pub fn truncated(&self, trunc: u32) -> TruncSeries {
        let mut out = TruncSeries::zero(self.nvars, trunc);
        for (m, c) in &self.terms {
            if m.total_degree() <= trunc {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// The homogeneous slice of total degree `d`.
    pub fn slice(&self, d: u32) -> TruncSeries {
        let mut out = TruncSeries::zero(self.nvars, self.trunc);
        for (m, c) in &self.terms {
            if m.total_degree() == d {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Reinterpret over a larger variable set: the first `self.nvars`
    /// variables keep their meaning, new trailing variables get exponent 0.
    pub fn extend_vars(&self, nvars: usize) -> TruncSeries {
        assert!(nvars >= self.nvars);
        let mut out = TruncSeries::zero(nvars, self.trunc);
        for (m, c) in &self.terms {
            let mut exps = m.exponents().to_vec();
            exps.resize(nvars, 0);
            out.terms.insert(Monomial::new(exps), c.clone());
        }
        out
    }

    /// Evaluate `self` (a series in `base + k` variables) by substituting the
    /// trailing `k` variables with series in the first `base` variables. Each
    /// assigned series must have order >= 1 so the composition is well
    /// defined modulo `m^(D+1)`.
    pub fn substitute(&self, base: usize, assignment: &[TruncSeries]) -> Result<TruncSeries> {
        assert_eq!(
            base + assignment.len(),
            self.nvars,
            "variable count mismatch"
        );
        for s in assignment {
            assert_eq!(s.nvars(), base, "assigned series variable count mismatch");
            assert_eq!(s.trunc(), self.trunc, "truncation mismatch");
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm);
            }
        }
        let trunc = self.trunc;
        let mut powers: Vec<Vec<TruncSeries>> = assignment
            .iter()
            .map(|s| vec![TruncSeries::one(base, trunc), s.clone()])
            .collect();
        let power = |j: usize, k: u32, powers: &mut Vec<Vec<TruncSeries>>| -> TruncSeries {
            while powers[j].len() <= k as usize {
                let last = powers[j].last().unwrap().clone();
                let next = last.mul(&assignment[j]);
                powers[j].push(next);
            }
            powers[j][k as usize].clone()
        };
        let mut out = TruncSeries::zero(base, trunc);
        for (m, c) in &self.terms {
            let exps = m.exponents();
            let base_part = Monomial::new(exps[..base].to_vec());
            // Assigned series have order >= 1, so the y-part alone already
            // contributes at least its y-degree; skip terms that vanish.
            let ydeg: u32 = exps[base..].iter().sum();
            if base_part.total_degree() + ydeg > trunc {
                continue;
            }
            let mut term = TruncSeries::monomial(base, trunc, base_part, c.clone());
            for (j, &e) in exps[base..].iter().enumerate() {
                if e > 0 {
                    term = term.mul(&power(j, e, &mut powers));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Canonical rendering with caller-supplied variable names: terms in the
    /// graded order, rationals as `p/q`, explicit `*` and `^`.
    pub fn display_with(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars, "name count mismatch");
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(fmt_rational(&abs));
            }
            for (j, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(String::from(names[j])),
                    _ => {
                        let mut f = String::from(names[j]);
                        let _ = write!(f, "^{e}");
                        factors.push(f);
                    }
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Canonical ordering on whole series, used to deduplicate and sort
    /// generator lists deterministically.
    pub fn cmp_canonical(&self, other: &TruncSeries) -> Ordering {
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca)), Some((mb, cb))) => match ma.cmp(mb).then_with(|| ca.cmp(cb)) {
                    Ordering::Equal => {}
                    ord => return ord,
                },
            }
        }
    }
}

fn rat_u32(n: u32) -> Rational {
    Rational::from_integer(crate::Integer::from(n))
}

fn fmt_rational(r: &Rational) -> String {
    let mut s = String::new();
    if r.denom().is_one() {
        let _ = write!(s, "{}", r.numer());
    } else {
        let _ = write!(s, "{}/{}", r.numer(), r.denom());
    }
    s
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars)
            .map(|i| alloc::format!("x{}", i + 1))
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{}", self.display_with(&refs))
    }
}

impl core::ops::Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::add(self, rhs)
    }
}

impl core::ops::Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::sub(self, rhs)
    }
}

impl core::ops::Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::mul(self, rhs)
    }
}

impl core::ops::Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        TruncSeries::neg(self)
    }
}

/// An element of the free module `R^p` at a fixed truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesVec {
    entries: Vec<TruncSeries>,
}

impl SeriesVec {
    pub fn new(entries: Vec<TruncSeries>) -> Self {
        assert!(!entries.is_empty(), "empty module vector");
        let nvars = entries[0].nvars();
        let trunc = entries[0].trunc();
        for e in &entries {
            assert_eq!(e.nvars(), nvars, "variable count mismatch");
            assert_eq!(e.trunc(), trunc, "truncation mismatch");
        }
        SeriesVec { entries }
    }

    pub fn zero(rank: usize, nvars: usize, trunc: u32) -> Self {
        SeriesVec {
            entries: vec![TruncSeries::zero(nvars, trunc); rank],
        }
    }

    /// `c * e_i` for a standard basis vector.
    pub fn basis(rank: usize, nvars: usize, trunc: u32, i: usize, value: TruncSeries) -> Self {
        let mut v = Self::zero(rank, nvars, trunc);
        v.entries[i] = value;
        v
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn nvars(&self) -> usize {
        self.entries[0].nvars()
    }

    pub fn trunc(&self) -> u32 {
        self.entries[0].trunc()
    }

    pub fn entry(&self, i: usize) -> &TruncSeries {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[TruncSeries] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TruncSeries::is_zero)
    }

    /// Minimum of the entry orders; `None` when the vector is 0 mod `m^(D+1)`.
    pub fn order(&self) -> Option<u32> {
        self.entries.iter().filter_map(TruncSeries::order).min()
    }

    pub fn order_at_least(&self) -> u32 {
        self.order().unwrap_or(self.trunc() + 1)
    }

    pub fn add(&self, other: &SeriesVec) -> SeriesVec {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        SeriesVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &SeriesVec) -> SeriesVec {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        SeriesVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> SeriesVec {
        SeriesVec {
            entries: self.entries.iter().map(TruncSeries::neg).collect(),
        }
    }

    pub fn scale_series(&self, s: &TruncSeries) -> SeriesVec {
        SeriesVec {
            entries: self.entries.iter().map(|e| e.mul(s)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> SeriesVec {
        SeriesVec {
            entries: self.entries.iter().map(|e| e.mul_monomial(m, c)).collect(),
        }
    }

    pub fn truncated(&self, trunc: u32) -> SeriesVec {
        SeriesVec {
            entries: self.entries.iter().map(|e| e.truncated(trunc)).collect(),
        }
    }

    /// Canonical order on module vectors: terms merged across components in
    /// (monomial, component) order, compared lexicographically, so a vector
    /// with an earlier leading term sorts first (`e_1 < e_2`).
    pub fn cmp_canonical(&self, other: &SeriesVec) -> Ordering {
        let collect = |v: &SeriesVec| -> Vec<(Monomial, usize, Rational)> {
            let mut terms: Vec<(Monomial, usize, Rational)> = Vec::new();
            for (c, entry) in v.entries.iter().enumerate() {
                for (m, r) in entry.terms() {
                    terms.push((m.clone(), c, r.clone()));
                }
            }
            terms.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            terms
        };
        let a = collect(self);
        let b = collect(other);
        let mut ia = a.iter();
        let mut ib = b.iter();
        loop {
            match (ia.next(), ib.next()) {
                (None, None) => return self.entries.len().cmp(&other.entries.len()),
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca, ra)), Some((mb, cb, rb))) => {
                    match ma.cmp(mb).then_with(|| ca.cmp(cb)).then_with(|| ra.cmp(rb)) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational;

    fn x(trunc: u32) -> TruncSeries {
        TruncSeries::var(1, trunc, 0)
    }

    #[test]
    fn telescoping_product() {
        // (1+x)(1-x) = 1 - x^2 at D = 5
        let one = TruncSeries::one(1, 5);
        let p = one.add(&x(5));
        let q = one.sub(&x(5));
        let expected = one.sub(&x(5).pow(2));
        assert_eq!(p.mul(&q), expected);
    }

    #[test]
    fn product_beyond_truncation_vanishes() {
        let a = x(5).pow(2);
        let b = x(5).pow(4);
        assert!(a.mul(&b).is_zero());
    }

    #[test]
    fn geometric_series_identity() {
        // (sum_{k<=6} x^k) * (1-x) = 1 at D = 6
        let mut geo = TruncSeries::zero(1, 6);
        for k in 0..=6 {
            geo = geo.add(&x(6).pow(k));
        }
        let one_minus_x = TruncSeries::one(1, 6).sub(&x(6));
        assert_eq!(geo.mul(&one_minus_x), TruncSeries::one(1, 6));
    }

    #[test]
    fn order_examples() {
        // x1^2*x2 + x1^4 has order 3
        let s = TruncSeries::from_terms(
            2,
            9,
            [(vec![2, 1], rational(1, 1)), (vec![4, 0], rational(1, 1))],
        );
        assert_eq!(s.order(), Some(3));
        assert_eq!(TruncSeries::zero(1, 9).order(), None);
        assert_eq!(TruncSeries::zero(1, 9).order_at_least(), 10);
        let t = TruncSeries::from_terms(
            1,
            8,
            [(vec![5], rational(-2, 1)), (vec![6], rational(1, 1))],
        );
        assert_eq!(t.order(), Some(5));
    }

    #[test]
    fn partial_derivatives() {
        // d/dy (y^2 + y*x - x^3) = 2y + x, variables (x, y)
        let f = TruncSeries::from_terms(
            2,
            8,
            [
                (vec![0, 2], rational(1, 1)),
                (vec![1, 1], rational(1, 1)),
                (vec![3, 0], rational(-1, 1)),
            ],
        );
        let df = f.partial_derivative(1).unwrap();
        let expected = TruncSeries::from_terms(
            2,
            8,
            [(vec![0, 1], rational(2, 1)), (vec![1, 0], rational(1, 1))],
        );
        assert_eq!(df, expected);

        let c = TruncSeries::constant(1, 4, rational(7, 2));
        assert!(c.partial_derivative(0).unwrap().is_zero());

        // d/dx1 (x1^3 * x2) = 3 x1^2 x2
        let g = TruncSeries::from_terms(2, 6, [(vec![3, 1], rational(1, 1))]);
        assert_eq!(
            g.partial_derivative(0).unwrap(),
            TruncSeries::from_terms(2, 6, [(vec![2, 1], rational(3, 1))])
        );
        assert!(g.partial_derivative(5).is_err());
    }

    #[test]
    fn substitute_direct_expansion() {
        // F = y^2 + y*x - x^3 with y := x^2 - x^3 at D=8 gives -2x^5 + x^6
        let f = TruncSeries::from_terms(
            2,
            8,
            [
                (vec![0, 2], rational(1, 1)),
                (vec![1, 1], rational(1, 1)),
                (vec![3, 0], rational(-1, 1)),
            ],
        );
        let y = TruncSeries::from_terms(
            1,
            8,
            [(vec![2], rational(1, 1)), (vec![3], rational(-1, 1))],
        );
        let got = f.substitute(1, core::slice::from_ref(&y)).unwrap();
        let expected = TruncSeries::from_terms(
            1,
            8,
            [(vec![5], rational(-2, 1)), (vec![6], rational(1, 1))],
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn substitute_identity() {
        let f = TruncSeries::var(2, 8, 1); // F = y in variables (x, y)
        let s = TruncSeries::from_terms(
            1,
            8,
            [(vec![1], rational(3, 2)), (vec![4], rational(-7, 1))],
        );
        assert_eq!(f.substitute(1, core::slice::from_ref(&s)).unwrap(), s);
    }

    #[test]
    fn substitute_rejects_units() {
        let f = TruncSeries::var(2, 8, 1);
        let s = TruncSeries::one(1, 8);
        assert_eq!(
            f.substitute(1, core::slice::from_ref(&s)),
            Err(Error::NonzeroConstantTerm)
        );
    }

    #[test]
    fn substitute_newton_tail() {
        // y := the Newton iterate of y^2 + y*x = x^3 up to degree 7; the
        // residual must vanish to order >= 8 at D=8.
        let f = TruncSeries::from_terms(
            2,
            8,
            [
                (vec![0, 2], rational(1, 1)),
                (vec![1, 1], rational(1, 1)),
                (vec![3, 0], rational(-1, 1)),
            ],
        );
        let y = TruncSeries::from_terms(
            1,
            8,
            [
                (vec![2], rational(1, 1)),
                (vec![3], rational(-1, 1)),
                (vec![4], rational(2, 1)),
                (vec![5], rational(-5, 1)),
                (vec![6], rational(14, 1)),
                (vec![7], rational(-42, 1)),
            ],
        );
        let r = f.substitute(1, core::slice::from_ref(&y)).unwrap();
        assert!(r.order_at_least() >= 8, "residual order too small: {r}");
    }

    #[test]
    fn display_canonical() {
        let s = TruncSeries::from_terms(
            1,
            8,
            [
                (vec![2], rational(1, 1)),
                (vec![3], rational(-1, 1)),
                (vec![4], rational(2, 1)),
            ],
        );
        assert_eq!(s.display_with(&["x"]), "x^2 - x^3 + 2*x^4");
        let t = TruncSeries::from_terms(
            2,
            4,
            [(vec![0, 0], rational(-3, 2)), (vec![1, 2], rational(1, 3))],
        );
        assert_eq!(t.display_with(&["x1", "x2"]), "-3/2 + 1/3*x1*x2^2");
        assert_eq!(TruncSeries::zero(1, 3).display_with(&["x"]), "0");
    }

    #[test]
    fn monomial_order_is_graded() {
        let m = |e: Vec<u32>| Monomial::new(e);
        assert!(m(vec![1, 0]) < m(vec![2, 0]));
        assert!(m(vec![2, 0]) < m(vec![1, 1]));
        assert!(m(vec![1, 1]) < m(vec![0, 2]));
        assert!(m(vec![0, 2]) < m(vec![3, 0]));
    }
}
