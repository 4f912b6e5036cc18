//! Sparse exact Gaussian elimination over the rationals.
//!
//! The engine keeps an echelon basis keyed by leading slot. Columns are
//! inserted in a caller-chosen canonical order; a column that survives
//! reduction becomes a new echelon row, a column that reduces to zero yields
//! a kernel relation. Reducing a target against the echelon either expresses
//! it over the independent columns (with the dependent ones at zero — the
//! deterministic tie-break used everywhere) or stops at the first slot that
//! cannot be matched.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::Rational;

/// Sorted sparse vector over `u32` slots.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseVec {
    terms: Vec<(u32, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { terms: Vec::new() }
    }

    pub fn from_sorted(terms: Vec<(u32, Rational)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        SparseVec { terms }
    }

    pub fn unit(slot: u32) -> Self {
        SparseVec {
            terms: alloc::vec![(slot, num_traits::One::one())],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, Rational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(u32, &Rational)> {
        self.terms.first().map(|(s, c)| (*s, c))
    }

    pub fn get(&self, slot: u32) -> Option<&Rational> {
        self.terms
            .binary_search_by_key(&slot, |(s, _)| *s)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    /// `self += c * other`, merging sorted term lists.
    pub fn axpy(&mut self, c: &Rational, other: &SparseVec) {
        if c.is_zero() || other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        let mut na = a.next();
        let mut nb = b.next();
        loop {
            match (na, nb) {
                (None, None) => break,
                (Some((s, v)), None) => {
                    out.push((*s, v.clone()));
                    na = a.next();
                }
                (None, Some((s, v))) => {
                    out.push((*s, v * c));
                    nb = b.next();
                }
                (Some((sa, va)), Some((sb, vb))) => {
                    if sa < sb {
                        out.push((*sa, va.clone()));
                        na = a.next();
                    } else if sb < sa {
                        out.push((*sb, vb * c));
                        nb = b.next();
                    } else {
                        let sum = va + &(vb * c);
                        if !sum.is_zero() {
                            out.push((*sa, sum));
                        }
                        na = a.next();
                        nb = b.next();
                    }
                }
            }
        }
        self.terms = out;
    }

    pub fn scale(&mut self, c: &Rational) {
        if c.is_zero() {
            self.terms.clear();
            return;
        }
        for (_, v) in &mut self.terms {
            *v = &*v * c;
        }
    }
}

#[derive(Debug, Clone)]
struct EchelonRow {
    /// Monic at its leading slot.
    vec: SparseVec,
    /// Expression of `vec` over the original column ids.
    combo: SparseVec,
}

/// Outcome of inserting a column into the echelon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insert {
    Independent,
    /// The column is a combination of earlier independent columns; the
    /// relation (over column ids, including the inserted one) is a kernel
    /// vector of the column family.
    Dependent(SparseVec),
}

#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: BTreeMap<u32, EchelonRow>,
    track: bool,
}

impl Echelon {
    pub fn new(track_combinations: bool) -> Self {
        Echelon {
            rows: BTreeMap::new(),
            track: track_combinations,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }

    /// Insert column `id`; returns whether it enlarged the span.
    pub fn insert(&mut self, id: u32, vec: SparseVec) -> Insert {
        let mut r = vec;
        let mut combo = if self.track {
            SparseVec::unit(id)
        } else {
            SparseVec::new()
        };
        loop {
            let Some((lead, coeff)) = r.leading() else {
                return Insert::Dependent(combo);
            };
            let Some(row) = self.rows.get(&lead) else {
                // New pivot; normalize to monic.
                let inv = {
                    let c = coeff.clone();
                    Rational::new(c.denom().clone(), c.numer().clone())
                };
                r.scale(&inv);
                combo.scale(&inv);
                self.rows.insert(lead, EchelonRow { vec: r, combo });
                return Insert::Independent;
            };
            let c = -coeff.clone();
            r.axpy(&c, &row.vec);
            if self.track {
                combo.axpy(&c, &row.combo);
            }
        }
    }

    /// Reduce `target` to its canonical normal form against the echelon:
    /// every entry sitting at a pivot slot is eliminated, entries at
    /// non-pivot slots are kept. The normal form is linear in the target
    /// (rows are monic at their pivot with support at or beyond it, so the
    /// elimination is a triangular solve). Returns the remainder and, when
    /// tracking, the combination over original column ids such that
    /// `target = remainder + sum(combination * columns)`.
    pub fn reduce(&self, target: &SparseVec) -> (SparseVec, SparseVec) {
        let mut r = target.clone();
        let mut sol = SparseVec::new();
        // Eliminate the smallest pivot-slot entry each round; subtracting a
        // row only touches slots at or beyond its pivot, so the frontier
        // advances strictly.
        loop {
            let hit = r
                .iter()
                .find(|(s, _)| self.rows.contains_key(s))
                .map(|(s, c)| (*s, c.clone()));
            let Some((slot, coeff)) = hit else {
                return (r, sol);
            };
            let row = &self.rows[&slot];
            let neg = -coeff.clone();
            r.axpy(&neg, &row.vec);
            if self.track {
                sol.axpy(&coeff, &row.combo);
            }
        }
    }

    /// Membership without witness extraction.
    pub fn contains(&self, target: &SparseVec) -> bool {
        let mut r = target.clone();
        loop {
            let Some((lead, coeff)) = r.leading() else {
                return true;
            };
            let Some(row) = self.rows.get(&lead) else {
                return false;
            };
            let neg = -coeff.clone();
            r.axpy(&neg, &row.vec);
        }
    }
}
