//! Non-bifurcation certificates and truncated deformed roots for polynomial
//! families and matrix eigenvalues.
//!
//! A family `p(y) = sum a_i(t) y^i` with `a_0(0) = 0` (the root `y = 0`
//! exists at `t = 0`) deforms when either sufficient condition holds:
//!
//! * part 1 (Tougeron): `a_0 in (t) * (a_1)^2`;
//! * part 2:            `a_0 in (t) * (a_1)` and
//!   `a_i * a_0^(i-1) in (t) * (a_1)^i` for every `i >= 2`.
//!
//! On a pass the filtration `v = a_0/a_1`, `V_j = t^(j-1) (v)` is built and
//! the order-by-order solver produces the truncated root. The conditions are
//! sufficient only; when both fail the report says "no sufficient condition
//! fired" and never claims non-deformation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::modfilt::{
    graded_image_solve, ideal_membership, Filtration, Ideal, LiftOutcome, LiftStrategy, PolyMatrix,
    Submodule,
};
use crate::series::{SeriesVec, TruncSeries};
use crate::solver::{
    decompose, solve_order_by_order, verify_higher_order, EquationSystem, SolveOptions,
    SolveOutcome,
};
use crate::{Error, Result};

/// A polynomial family `p(y) = sum a_i(t) y^i` over the deformation
/// variables `t` (one or more).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFamily {
    coeffs: Vec<TruncSeries>,
}

impl PolyFamily {
    /// `coeffs[i]` is `a_i(t)`; requires `a_0(0) = 0` (shift the root to the
    /// origin first) and degree >= 1.
    pub fn new(coeffs: Vec<TruncSeries>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Domain(String::from("family must have degree >= 1")));
        }
        let nvars = coeffs[0].nvars();
        let trunc = coeffs[0].trunc();
        for c in &coeffs {
            assert_eq!(c.nvars(), nvars, "variable count mismatch");
            assert_eq!(c.trunc(), trunc, "truncation mismatch");
        }
        if !coeffs[0].constant_term().is_zero() {
            return Err(Error::Domain(String::from(
                "a_0(0) != 0: the deformed root must be shifted to y = 0",
            )));
        }
        Ok(PolyFamily { coeffs })
    }

    pub fn coeff(&self, i: usize) -> &TruncSeries {
        &self.coeffs[i]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.coeffs[0].nvars()
    }

    pub fn trunc(&self) -> u32 {
        self.coeffs[0].trunc()
    }

    /// The family as an equation system in one unknown.
    pub fn to_system(&self) -> Result<EquationSystem> {
        let nvars = self.nvars();
        let trunc = self.trunc();
        let total = nvars + 1;
        let y = TruncSeries::var(total, trunc, nvars);
        let mut f = TruncSeries::zero(total, trunc);
        let mut ypow = TruncSeries::one(total, trunc);
        for a in &self.coeffs {
            f = f.add(&a.extend_vars(total).mul(&ypow));
            ypow = ypow.mul(&y);
        }
        decompose(SeriesVec::new(vec![f]), nvars, 1)
    }
}

/// Square matrix family `A_t` with `det(A_0) = 0` (zero is the studied
/// multiple eigenvalue).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFamily {
    entries: Vec<Vec<TruncSeries>>,
    size: usize,
}

/// Compound traces are assembled from explicit exterior-power matrices; the
/// cap keeps the subset bookkeeping at desk scale.
pub const MAX_MATRIX_SIZE: usize = 6;

impl MatrixFamily {
    pub fn new(entries: Vec<Vec<TruncSeries>>) -> Result<Self> {
        let size = entries.len();
        if size == 0 || entries.iter().any(|r| r.len() != size) {
            return Err(Error::Domain(String::from(
                "matrix must be square and nonempty",
            )));
        }
        if size > MAX_MATRIX_SIZE {
            return Err(Error::Domain(format!(
                "matrix size {size} exceeds the supported cap {MAX_MATRIX_SIZE}"
            )));
        }
        let fam = MatrixFamily { entries, size };
        let det0 = fam.det().constant_term();
        if !det0.is_zero() {
            return Err(Error::Domain(String::from(
                "det(A_0) != 0: zero must be an eigenvalue of the initial matrix",
            )));
        }
        Ok(fam)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncSeries {
        &self.entries[i][j]
    }

    pub fn nvars(&self) -> usize {
        self.entries[0][0].nvars()
    }

    pub fn trunc(&self) -> u32 {
        self.entries[0][0].trunc()
    }

    fn det(&self) -> TruncSeries {
        let rows: Vec<usize> = (0..self.size).collect();
        self.minor(&rows, &rows)
    }

    fn minor(&self, rows: &[usize], cols: &[usize]) -> TruncSeries {
        det_of(
            &|i, j| self.entries[rows[i]][cols[j]].clone(),
            rows.len(),
            self.nvars(),
            self.trunc(),
        )
    }

    /// The exterior-power matrix of `A` on `k`-subsets; its trace is the sum
    /// of the principal `k x k` minors.
    fn exterior_matrix(&self, k: usize) -> Vec<Vec<TruncSeries>> {
        let subsets = k_subsets(self.size, k);
        let zero = TruncSeries::zero(self.nvars(), self.trunc());
        let mut out = vec![vec![zero; subsets.len()]; subsets.len()];
        for (a, s) in subsets.iter().enumerate() {
            for (b, t) in subsets.iter().enumerate() {
                out[a][b] = self.minor(s, t);
            }
        }
        out
    }

    fn exterior_trace(&self, k: usize) -> TruncSeries {
        if k == 0 {
            return TruncSeries::one(self.nvars(), self.trunc());
        }
        let m = self.exterior_matrix(k);
        let mut acc = TruncSeries::zero(self.nvars(), self.trunc());
        for (i, row) in m.iter().enumerate() {
            acc = acc.add(&row[i]);
        }
        acc
    }

    /// Characteristic polynomial `det(A_t - y I)` as a family in `y`: the
    /// coefficient of `y^i` is `(-1)^i trace(wedge^(n-i) A)`. In particular
    /// `a_0 = det(A_t)` and `a_1 = -trace(adjugate(A_t))`.
    pub fn char_poly_family(&self) -> Result<PolyFamily> {
        let mut coeffs = Vec::with_capacity(self.size + 1);
        for i in 0..=self.size {
            let tr = self.exterior_trace(self.size - i);
            coeffs.push(if i % 2 == 0 { tr } else { tr.neg() });
        }
        PolyFamily::new(coeffs)
    }
}

pub(crate) fn det_of(
    entry: &dyn Fn(usize, usize) -> TruncSeries,
    n: usize,
    nvars: usize,
    trunc: u32,
) -> TruncSeries {
    if n == 0 {
        return TruncSeries::one(nvars, trunc);
    }
    if n == 1 {
        return entry(0, 0);
    }
    let mut acc = TruncSeries::zero(nvars, trunc);
    for j in 0..n {
        let top = entry(0, j);
        if top.is_zero() {
            continue;
        }
        let sub = move |i: usize, jj: usize| {
            let col = if jj < j { jj } else { jj + 1 };
            entry(i + 1, col)
        };
        let cofactor = top.mul(&det_of(&sub, n - 1, nvars, trunc));
        if j % 2 == 0 {
            acc = acc.add(&cofactor);
        } else {
            acc = acc.sub(&cofactor);
        }
    }
    acc
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Which sufficient condition fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformCertificate {
    /// `a_0 in (t) a_1^2` (Tougeron bullet).
    Part1,
    /// `a_0 in (t) a_1` and `a_i a_0^(i-1) in (t) a_1^i` for `i >= 2`.
    Part2,
}

#[derive(Debug, Clone)]
pub struct DeformationReport {
    /// False when `a_1 = 0`: the conditions cannot be evaluated.
    pub applicable: bool,
    pub part1: bool,
    pub part2: bool,
    pub fired: Option<DeformCertificate>,
    pub root: Option<TruncSeries>,
    pub residual_order_at_least: Option<u32>,
    pub higher_order_pass: Option<bool>,
    pub verified_degree: u32,
    pub notes: Vec<String>,
}

/// Certify and (on a pass) construct the truncated deformed root of the
/// family. A failure of both parts reports "no sufficient condition fired"
/// without claiming non-deformation.
pub fn root_deformation(fam: &PolyFamily, target_degree: u32) -> Result<DeformationReport> {
    let nvars = fam.nvars();
    let trunc = fam.trunc();
    let degree = target_degree.min(trunc);
    let mut notes = Vec::new();

    let a0 = fam.coeff(0).clone();
    let a1 = fam.coeff(1).clone();

    if a0.is_zero() {
        notes.push(String::from("a_0 = 0: the root y = 0 persists identically"));
        return Ok(DeformationReport {
            applicable: true,
            part1: true,
            part2: true,
            fired: Some(DeformCertificate::Part1),
            root: Some(TruncSeries::zero(nvars, trunc)),
            residual_order_at_least: Some(degree + 1),
            higher_order_pass: None,
            verified_degree: degree,
            notes,
        });
    }
    if a1.is_zero() {
        notes.push(String::from(
            "a_1 = 0: conditions inapplicable (no sufficient condition can fire)",
        ));
        return Ok(DeformationReport {
            applicable: false,
            part1: false,
            part2: false,
            fired: None,
            root: None,
            residual_order_at_least: None,
            higher_order_pass: None,
            verified_degree: degree,
            notes,
        });
    }

    let t_ideal = Ideal::maximal(nvars, trunc, degree);
    let a1_ideal = Ideal::new(nvars, trunc, vec![a1.clone()], degree);

    let part1 = ideal_membership(&a0, &t_ideal.product(&a1_ideal.power(2)), degree).member;

    let mut part2 = ideal_membership(&a0, &t_ideal.product(&a1_ideal), degree).member;
    if part2 {
        let mut a0_pow = TruncSeries::one(nvars, trunc);
        for i in 2..=fam.degree() {
            a0_pow = a0_pow.mul(&a0);
            let lhs = fam.coeff(i).mul(&a0_pow);
            if !ideal_membership(&lhs, &t_ideal.product(&a1_ideal.power(i as u32)), degree).member {
                part2 = false;
                break;
            }
        }
    }

    let fired = if part1 {
        Some(DeformCertificate::Part1)
    } else if part2 {
        Some(DeformCertificate::Part2)
    } else {
        None
    };
    if fired.is_none() {
        notes.push(String::from("no sufficient condition fired"));
        return Ok(DeformationReport {
            applicable: true,
            part1,
            part2,
            fired: None,
            root: None,
            residual_order_at_least: None,
            higher_order_pass: None,
            verified_degree: degree,
            notes,
        });
    }

    // v = a_0 / a_1, exact in the truncated ring (granted by a_0 in (a_1)),
    // and the filtration V_j = t^(j-1) (v).
    let l = PolyMatrix::from_rows(vec![vec![a1.clone()]]);
    let v = match graded_image_solve(
        &l,
        &SeriesVec::new(vec![a0.clone()]),
        &Submodule::full(1, nvars, trunc, degree),
        degree,
        LiftStrategy::Deterministic,
    )? {
        LiftOutcome::Solution(lift) => lift.z.entry(0).clone(),
        LiftOutcome::NoSolution(_) => {
            notes.push(String::from(
                "a_0 is not divisible by a_1 within the truncation; no root constructed",
            ));
            return Ok(DeformationReport {
                applicable: true,
                part1,
                part2,
                fired,
                root: None,
                residual_order_at_least: None,
                higher_order_pass: None,
                verified_degree: degree,
                notes,
            });
        }
    };

    let system = fam.to_system()?;
    let v1 = Submodule::new(1, nvars, trunc, vec![SeriesVec::new(vec![v])], degree);
    let filt = Filtration::new(v1, t_ideal)?;
    let ho = verify_higher_order(&system, &filt, degree)?;
    let opts = SolveOptions {
        higher_order_checked: ho.pass,
        ..Default::default()
    };
    match solve_order_by_order(&system, &filt, degree, &opts)? {
        SolveOutcome::Solved(trace) => Ok(DeformationReport {
            applicable: true,
            part1,
            part2,
            fired,
            root: Some(trace.solution().entry(0).clone()),
            residual_order_at_least: Some(trace.final_residual_order_at_least()),
            higher_order_pass: Some(ho.pass),
            verified_degree: degree,
            notes,
        }),
        SolveOutcome::Obstructed(obs) => {
            notes.push(format!(
                "certificate fired but the lifting loop obstructed at step {} (degree {})",
                obs.step, obs.failed_degree
            ));
            Ok(DeformationReport {
                applicable: true,
                part1,
                part2,
                fired,
                root: None,
                residual_order_at_least: None,
                higher_order_pass: Some(ho.pass),
                verified_degree: degree,
                notes,
            })
        }
    }
}

/// Eigenvalue version: expand `det(A_t - y I)` through exterior-power
/// traces, then delegate to `root_deformation`. Which of the two bullets
/// fired is visible in the `fired` field of the report.
pub fn eigenvalue_deformation(
    fam: &MatrixFamily,
    target_degree: u32,
) -> Result<(PolyFamily, DeformationReport)> {
    let family = fam.char_poly_family()?;
    let report = root_deformation(&family, target_degree)?;
    Ok((family, report))
}
