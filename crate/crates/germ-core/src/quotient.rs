//! Finite-dimensional rational vector-space model of `W / m^(D+1) W` for the
//! free module `W = R^p`, with its graded monomial basis.
//!
//! Coordinates ("slots") are ordered by (total degree, monomial, component),
//! which is what makes "first obstructed degree slice" well defined in the
//! elimination engine.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::linalg::SparseVec;
use crate::series::{Monomial, SeriesVec, TruncSeries};
use crate::Rational;

#[derive(Debug, Clone)]
pub struct QuotientBasis {
    nvars: usize,
    rank: usize,
    trunc: u32,
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, u32>,
    degree_offsets: Vec<u32>,
}

/// All monomials in `nvars` variables of total degree exactly `d`, in the
/// canonical graded order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = alloc::vec![0u32; nvars];
    fill(&mut out, &mut exps, 0, d);
    fn fill(out: &mut Vec<Monomial>, exps: &mut Vec<u32>, pos: usize, rem: u32) {
        if pos + 1 == exps.len() {
            exps[pos] = rem;
            out.push(Monomial::new(exps.clone()));
            exps[pos] = 0;
            return;
        }
        // Highest power of the earlier variable first.
        for e in (0..=rem).rev() {
            exps[pos] = e;
            fill(out, exps, pos + 1, rem - e);
            exps[pos] = 0;
        }
    }
    out
}

impl QuotientBasis {
    pub fn new(nvars: usize, rank: usize, trunc: u32) -> Self {
        assert!(nvars >= 1 && rank >= 1);
        let mut monomials = Vec::new();
        let mut degree_offsets = Vec::with_capacity(trunc as usize + 2);
        for d in 0..=trunc {
            degree_offsets.push(monomials.len() as u32);
            monomials.extend(monomials_of_degree(nvars, d));
        }
        degree_offsets.push(monomials.len() as u32);
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        QuotientBasis {
            nvars,
            rank,
            trunc,
            monomials,
            index,
            degree_offsets,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Total number of slots, `#monomials * rank`.
    pub fn dim(&self) -> usize {
        self.monomials.len() * self.rank
    }

    /// Number of monomials of degree exactly `d`.
    pub fn slice_monomial_count(&self, d: u32) -> usize {
        (self.degree_offsets[d as usize + 1] - self.degree_offsets[d as usize]) as usize
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn monomial_rank(&self, m: &Monomial) -> Option<u32> {
        self.index.get(m).copied()
    }

    pub fn slot(&self, m: &Monomial, component: usize) -> u32 {
        debug_assert!(component < self.rank);
        self.index[m] * self.rank as u32 + component as u32
    }

    pub fn slot_info(&self, slot: u32) -> (&Monomial, usize) {
        let m = &self.monomials[(slot / self.rank as u32) as usize];
        (m, (slot % self.rank as u32) as usize)
    }

    /// Total degree of the slot's monomial.
    pub fn slot_degree(&self, slot: u32) -> u32 {
        self.slot_info(slot).0.total_degree()
    }

    /// Slot range `[lo, hi)` of the degree-`d` slice.
    pub fn slice_slots(&self, d: u32) -> (u32, u32) {
        let lo = self.degree_offsets[d as usize] * self.rank as u32;
        let hi = self.degree_offsets[d as usize + 1] * self.rank as u32;
        (lo, hi)
    }

    /// Coordinates of `v`, dropping terms above the basis truncation (the
    /// basis may be coarser than the series ring when solving mod
    /// `m^(degree+1)` for `degree < D`).
    pub fn to_sparse(&self, v: &SeriesVec) -> SparseVec {
        assert_eq!(v.rank(), self.rank, "rank mismatch");
        assert_eq!(v.nvars(), self.nvars, "variable count mismatch");
        let mut terms = Vec::new();
        for (c, entry) in v.entries().iter().enumerate() {
            for (m, coeff) in entry.terms() {
                if m.total_degree() <= self.trunc {
                    terms.push((self.slot(m, c), coeff.clone()));
                }
            }
        }
        terms.sort_by_key(|(s, _)| *s);
        SparseVec::from_sorted(terms)
    }

    pub fn series_to_sparse(&self, s: &TruncSeries) -> SparseVec {
        assert_eq!(self.rank, 1, "series embed only into rank-1 quotients");
        let mut terms = Vec::new();
        for (m, coeff) in s.terms() {
            if m.total_degree() <= self.trunc {
                terms.push((self.slot(m, 0), coeff.clone()));
            }
        }
        terms.sort_by_key(|(s, _)| *s);
        SparseVec::from_sorted(terms)
    }

    pub fn from_sparse(&self, v: &SparseVec) -> SeriesVec {
        let mut entries = alloc::vec![TruncSeries::zero(self.nvars, self.trunc); self.rank];
        for (slot, c) in v.iter() {
            if c.is_zero() {
                continue;
            }
            let (m, comp) = self.slot_info(*slot);
            let term = TruncSeries::monomial(self.nvars, self.trunc, m.clone(), c.clone());
            entries[comp] = entries[comp].add(&term);
        }
        SeriesVec::new(entries)
    }

    /// Basis vector `x^m e_c` as a module element.
    pub fn basis_vector(&self, m: &Monomial, component: usize) -> SeriesVec {
        SeriesVec::basis(
            self.rank,
            self.nvars,
            self.trunc,
            component,
            TruncSeries::monomial(self.nvars, self.trunc, m.clone(), num_traits::One::one()),
        )
    }

    /// Restriction of a coordinate vector to the degree-`d` slice.
    pub fn restrict_slice(&self, v: &SparseVec, d: u32) -> SparseVec {
        let (lo, hi) = self.slice_slots(d);
        SparseVec::from_sorted(
            v.iter()
                .filter(|(s, _)| *s >= lo && *s < hi)
                .map(|(s, c)| (*s, c.clone()))
                .collect(),
        )
    }
}

#[allow(dead_code)]
fn one() -> Rational {
    num_traits::One::one()
}
