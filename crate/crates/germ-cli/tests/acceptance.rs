//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with
//!
//! ```text
//! cargo test -p germ-cli --test acceptance -- --nocapture
//! ```
//!
//! Criterion 2 contains one deliberately red sub-check: it pins the verdict
//! "Fisher fails" for the input g = x1^7, but x1^7 = x1*(x1^3)^2 lies inside
//! m*a_L*Im(L), so the exact engine (correctly) reports a pass. The check is
//! kept faithful to the pinned expectation and fails; criterion 2b covers
//! the corrected input g = x1^5*x2^2, for which the Fisher certificate
//! genuinely fails while the strengthened one passes.

use std::time::Instant;

use germ_cli::pipeline::{run, RunOptions};
use germ_cli::problem::{parse_problem, parse_series};
use germ_core::certify::{check_certificate, search_maximal_j, CertificateKind, CertificateParams};
use germ_core::deform::{
    eigenvalue_deformation, root_deformation, DeformCertificate, MatrixFamily, PolyFamily,
};
use germ_core::jetgroup::{
    determinacy_bound, is_unipotent, jet_exp, jet_ln, GroupFlavor, JetAutomorphism, JetQuotient,
    NilpotentEndo, OrbitLiftOutcome,
};
use germ_core::modfilt::{
    ann_coker, ideal_membership, submodule_membership, Filtration, Ideal, LiftStrategy, PolyMatrix,
    Submodule,
};
use germ_core::series::{Monomial, SeriesVec, TruncSeries};
use germ_core::solver::{
    check_uniqueness, decompose, solve_order_by_order, verify_higher_order, SolveOptions,
    SolveOutcome,
};
use germ_core::{rational, Rational};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn line(id: &str, ok: bool, what: &str) {
    println!(
        "criterion {id:>3} [{}] {what}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn ts(nvars: usize, trunc: u32, terms: &[(&[u32], i64)]) -> TruncSeries {
    TruncSeries::from_terms(
        nvars,
        trunc,
        terms.iter().map(|(e, c)| (e.to_vec(), rational(*c, 1))),
    )
}

// ---------------------------------------------------------------------------
// Dense univariate series helpers: the independent oracles.

mod oracle {
    use germ_core::{rational, Rational};
    use num_traits::{One, Zero};

    pub type Dense = Vec<Rational>;

    pub fn zero(n: usize) -> Dense {
        vec![Rational::zero(); n + 1]
    }

    pub fn mul(a: &Dense, b: &Dense, n: usize) -> Dense {
        let mut out = zero(n);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if i + j <= n {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    pub fn sub(a: &Dense, b: &Dense) -> Dense {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    /// Multiplicative inverse of a unit series (u[0] != 0).
    pub fn invert(u: &Dense, n: usize) -> Dense {
        let mut out = zero(n);
        let lead = u[0].clone();
        out[0] = Rational::one() / lead.clone();
        for k in 1..=n {
            let mut acc = Rational::zero();
            for i in 1..=k {
                if i < u.len() {
                    acc += &u[i] * &out[k - i];
                }
            }
            out[k] = -acc / lead.clone();
        }
        out
    }

    /// Newton iteration for y^2 + y*x - x^3 = 0 starting at y = x^2:
    /// y <- y - F(y)/F'(y), with the division F(y)/(x + 2y) done as
    /// (F(y)/x) * (1 + 2y/x)^(-1). Fully dense and independent of the
    /// engine's lifting path.
    pub fn newton_intro(n: usize) -> Dense {
        let work = n + 4;
        let mut y = zero(work);
        y[2] = Rational::one();
        for _ in 0..8 {
            // F(y) = y^2 + y*x - x^3
            let y2 = mul(&y, &y, work);
            let mut f = y2.clone();
            for k in 0..work {
                let t = y[k].clone();
                f[k + 1] += t;
            }
            f[3] -= Rational::one();
            // F(y)/x: F has order >= 4 along the iteration
            assert!(f[0].is_zero() && f[1].is_zero());
            let mut fx = zero(work);
            fx[..work].clone_from_slice(&f[1..=work]);
            // unit = 1 + 2y/x
            let mut unit = zero(work);
            unit[0] = Rational::one();
            for k in 1..=work {
                unit[k - 1] += rational(2, 1) * &y[k];
            }
            let step = mul(&fx, &invert(&unit, work), work);
            y = sub(&y, &step);
        }
        y.truncate(n + 1);
        y
    }

    /// sqrt(1 + u) for u with u[0] = 0, by coefficient recursion.
    pub fn sqrt_one_plus(u: &Dense, n: usize) -> Dense {
        let mut s = zero(n);
        s[0] = Rational::one();
        for k in 1..=n {
            let mut acc = if k < u.len() {
                u[k].clone()
            } else {
                Rational::zero()
            };
            for i in 1..k {
                acc -= &s[i] * &s[k - i];
            }
            s[k] = acc / rational(2, 1);
        }
        s
    }
}

fn dense_of(s: &TruncSeries, n: usize) -> oracle::Dense {
    let mut out = oracle::zero(n);
    for (m, c) in s.terms() {
        let d = m.total_degree() as usize;
        if d <= n {
            out[d] = c.clone();
        }
    }
    out
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_intro_equation_matches_newton_oracle() {
    let started = Instant::now();
    let text = "vars x; unknowns y; trunc 10;\n\
                eq y^2 + y*x - x^3;\n\
                ideal J = <x>;\n\
                submodule V1 = [x^2];\n\
                task solve;";
    let spec = parse_problem(text).unwrap();
    let report = run(&spec, &RunOptions::default()).unwrap();
    let elapsed = started.elapsed();

    let sol = report.solution.expect("solved");
    let series = parse_series(&sol.series, &["x"], 10).unwrap();
    let got = dense_of(&series, 10);
    let want = oracle::newton_intro(10);
    let equal = got == want;
    let fast = elapsed.as_secs_f64() < 1.0;
    line(
        "1",
        equal && fast,
        "intro equation equals the Newton oracle coefficient-for-coefficient",
    );
    assert_eq!(got, want, "solution differs from the Newton oracle");
    assert!(fast, "runtime {elapsed:?} exceeds 1 s");
}

#[test]
fn criterion_02_eq2_certificates_and_solve() {
    let started = Instant::now();

    // bk with J = m^3 passes.
    let bk = {
        let spec = parse_problem(
            "vars x1 x2; unknowns y1 y2; trunc 12;\n\
             eq y1^2 - y2^2 + y1*x1^3 + y2*x2^3 + x1^7;\n\
             ideal J = <x1, x2>^3;\n\
             task certify(bk);",
        )
        .unwrap();
        run(&spec, &RunOptions::default()).unwrap()
    };
    let bk_pass = bk.verdicts.iter().find(|v| v.kind == "bk").map(|v| v.pass) == Some(true);

    // The solver reaches residual order >= 13 with V1 = m^3 R^2, J = m.
    let solve = {
        let spec = parse_problem(
            "vars x1 x2; unknowns y1 y2; trunc 12;\n\
             eq y1^2 - y2^2 + y1*x1^3 + y2*x2^3 + x1^7;\n\
             ideal J = <x1, x2>;\n\
             submodule V1 = [x1^3, 0], [x1^2*x2, 0], [x1*x2^2, 0], [x2^3, 0],\n\
                           [0, x1^3], [0, x1^2*x2], [0, x1*x2^2], [0, x2^3];\n\
             task solve;",
        )
        .unwrap();
        run(&spec, &RunOptions::default()).unwrap()
    };
    let residual_ok = solve
        .solution
        .as_ref()
        .map(|s| s.residual_order >= 13)
        .unwrap_or(false);

    // Fisher for g = x1^7: the pinned expectation is "fail".
    let fisher = {
        let spec = parse_problem(
            "vars x1 x2; unknowns y1 y2; trunc 12;\n\
             eq y1^2 - y2^2 + y1*x1^3 + y2*x2^3 + x1^7;\n\
             task certify(fisher);",
        )
        .unwrap();
        run(&spec, &RunOptions::default()).unwrap()
    };
    let fisher_pass = fisher
        .verdicts
        .iter()
        .find(|v| v.kind == "fisher")
        .map(|v| v.pass);

    let elapsed = started.elapsed();
    let fast = elapsed.as_secs_f64() < 10.0;
    println!("  criterion 2 sub-results: bk(J=m^3) pass = {bk_pass}, residual >= 13 = {residual_ok}, runtime = {elapsed:?}, fisher pass = {fisher_pass:?} (pinned expectation: fail)");
    line(
        "2",
        bk_pass && residual_ok && fast && fisher_pass == Some(false),
        "eq-(2) fixture: fisher fails, bk(J=m^3) passes, residual order >= 13, < 10 s",
    );
    assert!(bk_pass, "bk certificate with J = m^3 must pass");
    assert!(residual_ok, "solver must reach residual order >= 13");
    assert!(fast, "runtime {elapsed:?} exceeds 10 s");
    assert_eq!(
        fisher_pass,
        Some(false),
        "pinned expectation: the Fisher certificate fails for g = x1^7. The exact \
         engine finds x1^7 = x1*(x1^3)^2 inside m*a_L*Im(L) with a verified witness, \
         so this expectation is unattainable as stated; criterion 2b covers the \
         corrected input g = x1^5*x2^2, for which Fisher genuinely fails."
    );
}

#[test]
fn criterion_02b_eq2_with_generic_free_term() {
    // The corrected fixture: g = x1^5*x2^2 lies in m^7 but escapes
    // m*a_L*Im(L); the strengthened route still certifies and solves it.
    let started = Instant::now();
    let trunc = 12u32;
    let g: &[(&[u32], i64)] = &[(&[5, 2, 0, 0], 1)];
    let mut terms: Vec<(&[u32], i64)> = vec![
        (&[0, 0, 2, 0], 1),
        (&[0, 0, 0, 2], -1),
        (&[3, 0, 1, 0], 1),
        (&[0, 3, 0, 1], 1),
    ];
    terms.extend_from_slice(g);
    let internal = trunc + 3;
    let sys = decompose(SeriesVec::new(vec![ts(4, internal, &terms)]), 2, 2).unwrap();

    let fisher = check_certificate(
        &sys,
        CertificateKind::Fisher,
        &CertificateParams::default(),
        trunc,
    )
    .unwrap();
    let j = Ideal::maximal(2, internal, trunc).power(3);
    let bk = check_certificate(
        &sys,
        CertificateKind::Bk,
        &CertificateParams {
            ideal: Some(j),
            v1: None,
        },
        trunc,
    )
    .unwrap();
    let filt = bk.filtration.clone().expect("bk emits a filtration");
    let outcome = solve_order_by_order(&sys, &filt, internal, &SolveOptions::default()).unwrap();
    let solved = match &outcome {
        SolveOutcome::Solved(t) => t.final_residual_order_at_least() >= 13,
        SolveOutcome::Obstructed(_) => false,
    };
    let elapsed = started.elapsed();
    let ok = !fisher.pass && bk.pass && solved && elapsed.as_secs_f64() < 10.0;
    line(
        "2b",
        ok,
        "eq-(2) with g = x1^5*x2^2: fisher fails, bk passes, solver reaches 13",
    );
    assert!(!fisher.pass, "fisher must fail for the generic free term");
    assert!(bk.pass, "bk must pass with J = m^3");
    assert!(
        solved,
        "solver must reach residual order >= 13: {outcome:?}"
    );
    assert!(elapsed.as_secs_f64() < 10.0);
}

#[test]
fn criterion_03_split_pair_and_modified_system() {
    let d = 10u32;
    // Part 1: the split system solves with V1 = (x1 e1, x2 e2).
    let f1 = ts(
        4,
        d,
        &[(&[0, 0, 2, 0], 1), (&[1, 0, 1, 0], 1), (&[3, 0, 0, 0], -1)],
    );
    let f2 = ts(
        4,
        d,
        &[(&[0, 0, 0, 2], 1), (&[0, 1, 0, 1], 1), (&[0, 3, 0, 0], -1)],
    );
    let split = decompose(SeriesVec::new(vec![f1, f2]), 2, 2).unwrap();
    let x1 = TruncSeries::var(2, d, 0);
    let x2 = TruncSeries::var(2, d, 1);
    let zero = TruncSeries::zero(2, d);
    let v1 = Submodule::new(
        2,
        2,
        d,
        vec![
            SeriesVec::new(vec![x1.clone(), zero.clone()]),
            SeriesVec::new(vec![zero.clone(), x2.clone()]),
        ],
        d,
    );
    let filt = Filtration::new(v1.clone(), Ideal::maximal(2, d, d)).unwrap();
    let ho = verify_higher_order(&split, &filt, d).unwrap();
    let solved = matches!(
        solve_order_by_order(&split, &filt, d, &SolveOptions::default()).unwrap(),
        SolveOutcome::Solved(_)
    );

    // The ideal route can only offer J = (x1 x2) and fails.
    let a_l = ann_coker(split.l(), d);
    let search = search_maximal_j(&a_l, 2).unwrap();
    let only_principal =
        search.ideals.len() == 1 && search.ideals[0].generators() == [ts(2, d, &[(&[1, 1], 1)])];
    let bk = check_certificate(
        &split,
        CertificateKind::Bk,
        &CertificateParams::default(),
        d,
    )
    .unwrap();

    // Part 2: the modified system shares the quadratic part y1^2 in both
    // equations and is rejected by the higher-order checker for that V1.
    let g1 = ts(
        4,
        d,
        &[(&[0, 0, 2, 0], 1), (&[1, 0, 1, 0], 1), (&[3, 0, 0, 0], -1)],
    );
    let g2 = ts(
        4,
        d,
        &[(&[0, 0, 2, 0], 1), (&[0, 1, 0, 1], 1), (&[0, 3, 0, 0], -1)],
    );
    let modified = decompose(SeriesVec::new(vec![g1, g2]), 2, 2).unwrap();
    let filt2 = Filtration::new(v1, Ideal::maximal(2, d, d)).unwrap();
    let ho2 = verify_higher_order(&modified, &filt2, d).unwrap();
    // The check anchors at V_2 (where the initial lift sits), whose first
    // two canonical generators are the multiples x1*(x1 e1) and x2*(x1 e1)
    // of the x1*e1 generator. The counterexample must be a y1^2 tuple over
    // those, failing in the second equation (its component is not divisible
    // by x2).
    let violation_names_first_gen = ho2
        .violation
        .as_ref()
        .map(|v| {
            v.component == 1
                && v.y_monomial == vec![2, 0]
                && v.base_tuple
                    .iter()
                    .chain(v.delta_tuple.iter())
                    .all(|&g| g <= 1)
                && !v.value.entry(1).is_zero()
        })
        .unwrap_or(false);

    // Part 3: independent brute-force oracle over candidates of degree <= 4.
    let no_solution = modified_system_has_no_truncated_solution();

    let ok = ho.pass
        && solved
        && only_principal
        && !bk.pass
        && !ho2.pass
        && violation_names_first_gen
        && no_solution;
    line(
        "3",
        ok,
        "split pair solves with the component filtration; modified pair is rejected and refuted",
    );
    assert!(ho.pass && solved, "split system must solve");
    assert!(only_principal, "maximal-J search must yield only (x1*x2)");
    assert!(!bk.pass, "the ideal route must fail for the split system");
    assert!(
        !ho2.pass,
        "the modified system must be rejected by the checker"
    );
    assert!(
        violation_names_first_gen,
        "violation should name the x1*e1 generator tuple: {:?}",
        ho2.violation
    );
    assert!(no_solution, "brute-force oracle must confirm non-existence");
}

/// Independent refutation of {y1^2 + y1 x1 = x1^3, y1^2 + y2 x2 = x2^3}:
///
/// 1. The degree-2 slices of both equations force the linear slices of y1
///    and y2 to vanish: with y1 = a1 x1 + a2 x2 + ..., y2 = b1 x1 + b2 x2 +
///    ..., the slice-2 coefficient equations are a1^2 + a1 = 0, 2 a1 a2 +
///    a2 = 0, a2^2 = 0 (first equation) and a1^2 = 0, 2 a1 a2 + b1 = 0,
///    a2^2 + b2 = 0 (second), whose only rational solution is a = b = 0.
///    The quadratic forms are verified below by evaluation on a grid that
///    pins polynomials of degree <= 2 per variable.
/// 2. Given vanishing linear slices, the first equation involves only y1
///    and x1 and determines y1 slice by slice (each new slice enters
///    through x1 * y1 only): y1 is the univariate Newton solution of
///    y^2 + y x1 = x1^3, so y1^2 contains the monomial x1^4 with
///    coefficient 1.
/// 3. In the second equation every other summand (y2 x2 and x2^3) is
///    divisible by x2, so the x1^4 coefficient reads 1 = 0: no solution
///    exists modulo m^6, in particular none of degree <= 4.
fn modified_system_has_no_truncated_solution() -> bool {
    let d = 6u32;
    let g1 = ts(
        4,
        d,
        &[(&[0, 0, 2, 0], 1), (&[1, 0, 1, 0], 1), (&[3, 0, 0, 0], -1)],
    );
    let g2 = ts(
        4,
        d,
        &[(&[0, 0, 2, 0], 1), (&[0, 1, 0, 1], 1), (&[0, 3, 0, 0], -1)],
    );
    let f = SeriesVec::new(vec![g1, g2]);

    // Step 1: verify the claimed slice-2 coefficient forms on a grid.
    // For values (a1, a2, b1, b2), substitute the linear guesses and read
    // off the degree-2 slice coefficients of both components.
    let claimed = |a1: &Rational, a2: &Rational, b1: &Rational, b2: &Rational| -> Vec<Rational> {
        vec![
            a1 * a1 + a1,                  // F1: x1^2
            rational(2, 1) * a1 * a2 + a2, // F1: x1 x2
            a2 * a2,                       // F1: x2^2
            a1 * a1,                       // F2: x1^2
            rational(2, 1) * a1 * a2 + b1, // F2: x1 x2
            a2 * a2 + b2,                  // F2: x2^2
        ]
    };
    let grid: Vec<Rational> = vec![rational(0, 1), rational(1, 1), rational(2, 1)];
    for a1 in &grid {
        for a2 in &grid {
            for b1 in &grid {
                for b2 in &grid {
                    let y1 = ts(2, d, &[])
                        .add(&TruncSeries::var(2, d, 0).scale(a1))
                        .add(&TruncSeries::var(2, d, 1).scale(a2));
                    let y2 = ts(2, d, &[])
                        .add(&TruncSeries::var(2, d, 0).scale(b1))
                        .add(&TruncSeries::var(2, d, 1).scale(b2));
                    let r1 = f.entry(0).substitute(2, &[y1.clone(), y2.clone()]).unwrap();
                    let r2 = f.entry(1).substitute(2, &[y1, y2]).unwrap();
                    let got = vec![
                        r1.coeff(&Monomial::new(vec![2, 0])),
                        r1.coeff(&Monomial::new(vec![1, 1])),
                        r1.coeff(&Monomial::new(vec![0, 2])),
                        r2.coeff(&Monomial::new(vec![2, 0])),
                        r2.coeff(&Monomial::new(vec![1, 1])),
                        r2.coeff(&Monomial::new(vec![0, 2])),
                    ];
                    if got != claimed(a1, a2, b1, b2) {
                        return false;
                    }
                }
            }
        }
    }
    // Over Q: a2^2 = 0 and a1^2 = 0 force a1 = a2 = 0, then b1 = b2 = 0.

    // Step 2: y1 is the univariate solution; its square has x1^4
    // coefficient 1 (leading Catalan coefficient squared).
    let y1 = oracle::newton_intro(6);
    let y1sq = oracle::mul(&y1, &y1, 6);
    if y1sq[4] != rational(1, 1) {
        return false;
    }

    // Step 3: x2 divides y2*x2 and x2^3, so the x1^4 slot of the second
    // equation cannot be matched. (Nothing to compute: the contradiction is
    // the nonzero coefficient from step 2.)
    true
}

#[test]
fn criterion_04_three_squares_maximal_ideals() {
    let trunc = 8u32;
    let a_l = Ideal::new(
        3,
        trunc,
        vec![
            ts(3, trunc, &[(&[2, 0, 0], 1)]),
            ts(3, trunc, &[(&[0, 2, 0], 1)]),
            ts(3, trunc, &[(&[0, 0, 2], 1)]),
        ],
        trunc,
    );
    let search = search_maximal_j(&a_l, 2).unwrap();
    let found = &search.ideals;

    // Pairwise incomparability.
    let subset = |a: &Ideal, b: &Ideal| {
        a.generators()
            .iter()
            .all(|g| ideal_membership(g, b, trunc).member)
    };
    let mut incomparable = true;
    for (i, a) in found.iter().enumerate() {
        for (j, b) in found.iter().enumerate() {
            if i != j && subset(a, b) {
                incomparable = false;
            }
        }
    }

    // The three expected ideals, by exact generator-set membership.
    let expect = |gens: &[&[u32]]| -> Vec<TruncSeries> {
        let mut v: Vec<TruncSeries> = gens.iter().map(|e| ts(3, trunc, &[(e, 1)])).collect();
        v.sort_by(|a, b| a.cmp_canonical(b));
        v
    };
    let expected = [
        expect(&[&[2, 0, 0], &[1, 1, 0], &[0, 2, 0], &[0, 0, 2]]), // ((x,y)^2, z^2)
        expect(&[&[2, 0, 0], &[1, 0, 1], &[0, 0, 2], &[0, 2, 0]]), // ((x,z)^2, y^2)
        expect(&[&[0, 2, 0], &[0, 1, 1], &[0, 0, 2], &[2, 0, 0]]), // ((y,z)^2, x^2)
    ];
    let all_found = expected
        .iter()
        .all(|want| found.iter().any(|j| j.generators() == want.as_slice()));

    // Each returned ideal satisfies J^2 = J a_L up to degree 8.
    let mut equality = true;
    for j in found {
        let j2 = j.power(2);
        let ja = j.product(&a_l);
        let forward = j2
            .generators()
            .iter()
            .all(|g| ideal_membership(g, &ja, trunc).member);
        let backward = ja
            .generators()
            .iter()
            .all(|g| ideal_membership(g, &j2, trunc).member);
        if !(forward && backward) {
            equality = false;
        }
    }

    let ok = found.len() >= 3 && incomparable && all_found && equality;
    line(
        "4",
        ok,
        "maximal-J search on (x^2, y^2, z^2) finds the three incomparable ideals",
    );
    assert!(found.len() >= 3, "found {}", found.len());
    assert!(incomparable);
    assert!(all_found, "expected ideals missing from {:?}", found.len());
    assert!(equality, "J^2 = J a_L must hold to degree 8");
}

#[test]
fn criterion_05_eisenbud_chain_suite() {
    const D: u32 = 6;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut violations = 0usize;
    let mut ran = 0usize;
    while ran < 200 {
        let p = rng.gen_range(1..=3usize);
        let n = rng.gen_range(p..=3usize);
        let mut rows = Vec::with_capacity(p);
        for _ in 0..p {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                let nterms = rng.gen_range(0..=3);
                let mut terms = Vec::new();
                for _ in 0..nterms {
                    let deg = rng.gen_range(0..=2u32);
                    let e1 = rng.gen_range(0..=deg);
                    let c = rng.gen_range(-3i64..=3);
                    if c != 0 {
                        terms.push((vec![e1, deg - e1], rational(c, 1)));
                    }
                }
                row.push(TruncSeries::from_terms(2, D, terms));
            }
            rows.push(row);
        }
        if rows.iter().flatten().all(|e| e.is_zero()) {
            continue;
        }
        ran += 1;
        let l = PolyMatrix::from_rows(rows);
        let imax = germ_core::modfilt::maximal_minors(&l).unwrap();
        let a = ann_coker(&l, D);
        for g in imax.generators() {
            if !ideal_membership(g, &a, D).member {
                violations += 1;
            }
        }
        for g in a.power(p as u32).generators() {
            if !ideal_membership(g, &imax, D).member {
                violations += 1;
            }
        }
    }
    line(
        "5",
        violations == 0,
        "200 random matrices satisfy a_L >= I_max >= a_L^p slice-wise",
    );
    assert_eq!(violations, 0);
}

#[test]
fn criterion_06_uniqueness_under_seeds() {
    const D: u32 = 10;
    // 20 injective-L fixtures: y^2 + y x^a = x^(a+b) in one variable and
    // split two-variable versions, with V1 = (x^b), J = (x).
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut differing = 0usize;

    let mut run_fixture = |sys: germ_core::solver::EquationSystem, filt: Filtration| {
        let solve = |strategy| {
            let opts = SolveOptions {
                strategy,
                ..Default::default()
            };
            match solve_order_by_order(&sys, &filt, D, &opts).unwrap() {
                SolveOutcome::Solved(t) => t,
                SolveOutcome::Obstructed(o) => panic!("fixture obstructed: {o:?}"),
            }
        };
        let t1 = solve(LiftStrategy::Seeded(7));
        let t2 = solve(LiftStrategy::Seeded(99));
        if t1
            .iterates
            .iter()
            .zip(&t2.iterates)
            .any(|(a, b)| !a.sub(b).is_zero())
        {
            differing += 1;
        }
        let report = check_uniqueness(&t1, &t2, &sys).unwrap();
        if !(report.applicable && report.pass()) {
            violations += 1;
        }
        checked += 1;
    };

    // one-variable family
    for a in 1..=2u32 {
        for b in (a + 1)..=(a + 5) {
            let c = a + b;
            let f = ts(2, D, &[(&[0, 2], 1), (&[a, 1], 1), (&[c, 0], -1)]);
            let sys = decompose(SeriesVec::new(vec![f]), 1, 1).unwrap();
            let x = TruncSeries::var(1, D, 0);
            let v1 = Submodule::new(1, 1, D, vec![SeriesVec::new(vec![x.pow(b)])], D);
            let filt = Filtration::new(v1, Ideal::new(1, D, vec![x], D)).unwrap();
            run_fixture(sys, filt);
        }
    }
    // two-variable split family
    for a in 1..=2u32 {
        for b in (a + 1)..=(a + 5) {
            let c = a + b;
            let f1 = ts(
                4,
                D,
                &[(&[0, 0, 2, 0], 1), (&[a, 0, 1, 0], 1), (&[c, 0, 0, 0], -1)],
            );
            let f2 = ts(
                4,
                D,
                &[(&[0, 0, 0, 2], 1), (&[0, a, 0, 1], 1), (&[0, c, 0, 0], -1)],
            );
            let sys = decompose(SeriesVec::new(vec![f1, f2]), 2, 2).unwrap();
            let x1 = TruncSeries::var(2, D, 0);
            let x2 = TruncSeries::var(2, D, 1);
            let zero = TruncSeries::zero(2, D);
            let v1 = Submodule::new(
                2,
                2,
                D,
                vec![
                    SeriesVec::new(vec![x1.pow(b), zero.clone()]),
                    SeriesVec::new(vec![zero.clone(), x2.pow(b)]),
                ],
                D,
            );
            let filt = Filtration::new(v1, Ideal::maximal(2, D, D)).unwrap();
            run_fixture(sys, filt);
        }
    }

    let ok = checked == 20 && violations == 0;
    line(
        "6",
        ok,
        "20 injective fixtures: seeded runs agree modulo V_n at every step",
    );
    println!("  ({differing} of {checked} fixture pairs produced genuinely different traces)");
    assert_eq!(checked, 20);
    assert_eq!(violations, 0);
    assert!(
        differing > 0,
        "the seeded tie-break should vary at least one trace"
    );
}

#[test]
fn criterion_07_good_solution_stability() {
    const D: u32 = 10;
    let mut rng = StdRng::seed_from_u64(0x57ab);

    // (system, filtration, anchor) fixtures; v is sampled at the anchor
    // component, where each fixture's higher-order inclusion holds.
    let intro = {
        let f = ts(2, D, &[(&[0, 2], 1), (&[1, 1], 1), (&[3, 0], -1)]);
        let sys = decompose(SeriesVec::new(vec![f]), 1, 1).unwrap();
        let x = TruncSeries::var(1, D, 0);
        let v1 = Submodule::new(1, 1, D, vec![SeriesVec::new(vec![x.pow(2)])], D);
        let filt = Filtration::new(v1, Ideal::new(1, D, vec![x], D)).unwrap();
        (sys, filt, 1u32)
    };
    let split = {
        let f1 = ts(
            4,
            D,
            &[(&[0, 0, 2, 0], 1), (&[1, 0, 1, 0], 1), (&[3, 0, 0, 0], -1)],
        );
        let f2 = ts(
            4,
            D,
            &[(&[0, 0, 0, 2], 1), (&[0, 1, 0, 1], 1), (&[0, 3, 0, 0], -1)],
        );
        let sys = decompose(SeriesVec::new(vec![f1, f2]), 2, 2).unwrap();
        let x1 = TruncSeries::var(2, D, 0);
        let x2 = TruncSeries::var(2, D, 1);
        let zero = TruncSeries::zero(2, D);
        let v1 = Submodule::new(
            2,
            2,
            D,
            vec![
                SeriesVec::new(vec![x1, zero.clone()]),
                SeriesVec::new(vec![zero, x2]),
            ],
            D,
        );
        let filt = Filtration::new(v1, Ideal::maximal(2, D, D)).unwrap();
        (sys, filt, 2u32)
    };

    let mut total_violations = 0usize;
    for (sys, filt, anchor) in [intro, split] {
        let mut checked = 0usize;
        while checked < 50 {
            let sample = |comp: &Submodule, rng: &mut StdRng| -> SeriesVec {
                let mut acc = SeriesVec::zero(comp.rank(), comp.nvars(), comp.trunc());
                for g in comp.generators() {
                    let c = rng.gen_range(-2i64..=2);
                    if c != 0 {
                        let s = TruncSeries::constant(comp.nvars(), comp.trunc(), rational(c, 1));
                        acc = acc.add(&g.scale_series(&s));
                    }
                }
                acc
            };
            let v = sample(&filt.component(anchor), &mut rng);
            if v.is_zero() {
                continue;
            }
            let j = rng.gen_range(anchor + 1..=anchor + 3);
            let delta = sample(&filt.component(j), &mut rng);
            if delta.is_zero() {
                continue;
            }
            checked += 1;
            let opts = |initial: SeriesVec| SolveOptions {
                anchor_override: Some(anchor),
                initial: Some(initial),
                ..Default::default()
            };
            let base = sys.with_initial_value(&v);
            let moved = sys.with_initial_value(&v.add(&delta));
            let t_base = match solve_order_by_order(&base, &filt, D, &opts(v.clone())).unwrap() {
                SolveOutcome::Solved(t) => t,
                SolveOutcome::Obstructed(o) => panic!("obstruction: {o:?}"),
            };
            let t_moved =
                match solve_order_by_order(&moved, &filt, D, &opts(v.add(&delta))).unwrap() {
                    SolveOutcome::Solved(t) => t,
                    SolveOutcome::Obstructed(o) => panic!("obstruction: {o:?}"),
                };
            let dy = t_moved.solution().sub(t_base.solution()).sub(&delta);
            if !dy.is_zero() && !submodule_membership(&dy, &filt.component(j + 1), D).member {
                total_violations += 1;
            }
        }
    }
    line(
        "7",
        total_violations == 0,
        "good-solution stability: 50 sampled (v, delta) pairs per fixture",
    );
    assert_eq!(total_violations, 0);
}

#[test]
fn criterion_08_jet_group_suite() {
    const D: u32 = 8;
    let mut rng = StdRng::seed_from_u64(0x0e7);

    let random_poly = |rng: &mut StdRng, nvars: usize, min_deg: u32, trunc: u32| -> TruncSeries {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let deg = rng.gen_range(min_deg..=trunc.min(min_deg + 3));
            let e1 = rng.gen_range(0..=deg);
            let exps = if nvars == 1 {
                vec![deg]
            } else {
                vec![e1, deg - e1]
            };
            let num = rng.gen_range(-3i64..=3);
            let den = rng.gen_range(1i64..=2);
            if num != 0 {
                terms.push((exps, rational(num, den)));
            }
        }
        TruncSeries::from_terms(nvars, trunc, terms)
    };

    // 100 randomized unipotent elements from the group flavors.
    let mut roundtrip_failures = 0usize;
    for i in 0..100usize {
        let (nvars, rank) = match i % 5 {
            0..=2 => (1usize, 1usize),
            3 => (2, 1),
            _ => (1, 2),
        };
        let q = JetQuotient::new(nvars, rank, D);
        let phi: Vec<TruncSeries> = (0..nvars)
            .map(|v| TruncSeries::var(nvars, D, v).add(&random_poly(&mut rng, nvars, 2, D)))
            .collect();
        let unit = if rank > 1 {
            let mut u = vec![vec![TruncSeries::zero(nvars, D); rank]; rank];
            for (a, row) in u.iter_mut().enumerate() {
                for (b, e) in row.iter_mut().enumerate() {
                    let mut v = random_poly(&mut rng, nvars, 1, D);
                    if a == b {
                        v = v.add(&TruncSeries::one(nvars, D));
                    }
                    *e = v;
                }
            }
            Some(u)
        } else {
            None
        };
        let g = JetAutomorphism::new(phi, unit, rank)
            .unwrap()
            .induced_map(&q)
            .unwrap();
        if !is_unipotent(&q, &g) {
            roundtrip_failures += 1;
            continue;
        }
        let ln = jet_ln(&q, &g).unwrap();
        if jet_exp(&q, &ln) != g {
            roundtrip_failures += 1;
        }
    }

    // 100 randomized (xi, w, j) triples for the variation lemmas.
    let mut lemma_failures = 0usize;
    let mut triples = 0usize;
    while triples < 100 {
        let q = JetQuotient::new(1, 1, D);
        let xi_coeff = random_poly(&mut rng, 1, 2, D);
        if xi_coeff.is_zero() {
            continue;
        }
        let xi = NilpotentEndo::from_derivation(&q, &[xi_coeff]).unwrap();
        let w = SeriesVec::new(vec![random_poly(&mut rng, 1, 1, D)]);
        if w.is_zero() {
            continue;
        }
        let w_vec = q.to_vec(&w);
        let xiw = q.from_vec(&xi.apply(&w_vec));
        if xiw.is_zero() {
            continue;
        }
        let j = xiw.order_at_least();
        triples += 1;

        // Lemma 6.6: exp(xi) w - w agrees with xi w through degree j.
        let expw = q.from_vec(&jet_exp(&q, &xi).apply(&w_vec));
        if expw.sub(&w).truncated(j) != xiw.truncated(j) {
            lemma_failures += 1;
            continue;
        }
        // Lemma 6.5: variation additivity over the stabilizer element
        // h = exp(xi).
        let g_phi = vec![TruncSeries::var(1, D, 0).add(&random_poly(&mut rng, 1, 2, D))];
        let g = JetAutomorphism::new(g_phi, None, 1)
            .unwrap()
            .induced_map(&q)
            .unwrap();
        let h = jet_exp(&q, &xi);
        let ghw = q.from_vec(&g.compose(&h).apply(&w_vec));
        let gw = q.from_vec(&g.apply(&w_vec));
        let hw = q.from_vec(&h.apply(&w_vec));
        if ghw.sub(&w).truncated(j) != gw.sub(&w).add(&hw.sub(&w)).truncated(j) {
            lemma_failures += 1;
        }
    }

    let ok = roundtrip_failures == 0 && lemma_failures == 0;
    line(
        "8",
        ok,
        "jet-group suite: 100 exact exp/ln roundtrips, 100 variation-lemma triples",
    );
    assert_eq!(roundtrip_failures, 0, "exp/ln roundtrip must be exact");
    assert_eq!(lemma_failures, 0, "variation lemmas must hold exactly");
}

#[test]
fn criterion_09_determinacy_and_orbit_lift() {
    const D: u32 = 10;
    // Determinacy bounds via the engine and via an independent slice-wise
    // enumeration: Der(R, m^2)(x^(k+1)) is spanned by x^a * (k+1) x^k for
    // a >= 2, so the reachable degrees are exactly k+2..D.
    let mut bounds_ok = true;
    for k in [2u32, 3, 4] {
        let q = JetQuotient::new(1, 1, D);
        let f = SeriesVec::new(vec![TruncSeries::var(1, D, 0).pow(k + 1)]);
        let engine = determinacy_bound(&q, GroupFlavor::RightEquiv, &f, D).unwrap();

        let mut reachable = [false; { 10 + 1 }];
        for a in 2..=D {
            let image_deg = a + k;
            if image_deg <= D {
                reachable[image_deg as usize] = true;
            }
        }
        let oracle_bound = (1..=D).find(|&cand| (cand..=D).all(|d| reachable[d as usize]));
        if engine != oracle_bound || engine != Some(k + 2) {
            bounds_ok = false;
        }
    }

    // Orbit lift x^3 -> x^3 + x^4 with phi the binomial series
    // x (1+x)^(1/3) through degree 10. phi's degree-k coefficient enters
    // w(phi) at degree k+2, so the lift runs with margin and the comparison
    // truncates to 10.
    let q = JetQuotient::new(1, 1, 12);
    let w = SeriesVec::new(vec![TruncSeries::var(1, 12, 0).pow(3)]);
    let u = SeriesVec::new(vec![TruncSeries::var(1, 12, 0).pow(4)]);
    let lift = match germ_core::jetgroup::orbit_lift(&q, GroupFlavor::RightEquiv, &w, &u, 4, 12)
        .unwrap()
    {
        OrbitLiftOutcome::Lifted(l) => l,
        OrbitLiftOutcome::PreconditionFailed { slice } => {
            panic!("tangent precondition failed at slice {slice}")
        }
    };
    let realizes = q.from_vec(&lift.map.apply(&q.to_vec(&w))) == w.add(&u);
    let phi = lift.phi.as_ref().unwrap()[0].truncated(10);
    let mut expected = TruncSeries::zero(1, 10);
    let mut coeff = Rational::one();
    for k in 0..10u32 {
        if k > 0 {
            let down = rational(1, 3) - rational(k as i64 - 1, 1);
            coeff = coeff * down / rational(k as i64, 1);
        }
        expected = expected.add(&TruncSeries::monomial(
            1,
            10,
            Monomial::new(vec![k + 1]),
            coeff.clone(),
        ));
    }
    let phi_ok = phi == expected && lift.phi_consistent == Some(true);

    let ok = bounds_ok && realizes && phi_ok;
    line(
        "9",
        ok,
        "determinacy bounds k+2 (cross-checked) and the binomial orbit lift",
    );
    assert!(bounds_ok, "determinacy bounds disagree with the oracle");
    assert!(realizes, "orbit lift must realize w + u exactly");
    assert!(phi_ok, "phi must be the binomial series through degree 10");
}

#[test]
fn criterion_10_deformation_fixtures() {
    let n = 12usize;
    let t = |trunc: u32| TruncSeries::var(1, trunc, 0);
    let c1 = |trunc: u32| TruncSeries::one(1, trunc);

    // Root fixture 1: y^2 - t y - t^6, part 1 fires, root from the
    // quadratic formula (t - t sqrt(1 + 4 t^4)) / 2.
    let fam = PolyFamily::new(vec![t(14).pow(6).neg(), t(14).neg(), c1(14)]).unwrap();
    let r1 = root_deformation(&fam, 14).unwrap();
    let mut u = oracle::zero(n);
    u[4] = rational(4, 1);
    let s = oracle::sqrt_one_plus(&u, n);
    let mut want = oracle::zero(n);
    for k in 0..n {
        let delta = if k == 0 {
            Rational::one()
        } else {
            Rational::zero()
        };
        want[k + 1] = (delta - &s[k]) / rational(2, 1);
    }
    let ok1 = r1.fired == Some(DeformCertificate::Part1)
        && dense_of(&r1.root.clone().unwrap().truncated(n as u32), n) == want;

    // Root fixture 2: t y^2 + t y + t^2, part 2 only, signed-Catalan root
    // (-1 + sqrt(1 - 4t))/2.
    let fam = PolyFamily::new(vec![t(14).pow(2), t(14), t(14)]).unwrap();
    let r2 = root_deformation(&fam, 14).unwrap();
    let mut u = oracle::zero(n);
    u[1] = rational(-4, 1);
    let s = oracle::sqrt_one_plus(&u, n);
    let mut want = oracle::zero(n);
    for (k, e) in want.iter_mut().enumerate().skip(1) {
        *e = &s[k] / rational(2, 1);
    }
    let ok2 = !r2.part1
        && r2.fired == Some(DeformCertificate::Part2)
        && dense_of(&r2.root.clone().unwrap().truncated(n as u32), n) == want;

    // Root fixture 3: a_0 = 0, the root persists identically.
    let fam = PolyFamily::new(vec![TruncSeries::zero(1, 10), t(10), c1(10)]).unwrap();
    let r3 = root_deformation(&fam, 10).unwrap();
    let ok3 = r3.root.as_ref().map(TruncSeries::is_zero) == Some(true);

    // Eigenvalue fixture 1: A = [[0, t^3], [t^3, t]], Tougeron bullet,
    // eigenvalue = root fixture 1.
    let a = MatrixFamily::new(vec![
        vec![TruncSeries::zero(1, 14), t(14).pow(3)],
        vec![t(14).pow(3), t(14)],
    ])
    .unwrap();
    let (family, re1) = eigenvalue_deformation(&a, 14).unwrap();
    let ok4 = re1.fired == Some(DeformCertificate::Part1)
        && family.coeff(0) == &t(14).pow(6).neg()
        && dense_of(&re1.root.clone().unwrap().truncated(n as u32), n)
            == dense_of(&r1.root.clone().unwrap().truncated(n as u32), n);

    // Eigenvalue fixture 2: diag(0, t): zero persists.
    let a = MatrixFamily::new(vec![
        vec![TruncSeries::zero(1, 10), TruncSeries::zero(1, 10)],
        vec![TruncSeries::zero(1, 10), t(10)],
    ])
    .unwrap();
    let (_, re2) = eigenvalue_deformation(&a, 10).unwrap();
    let ok5 = re2.root.as_ref().map(TruncSeries::is_zero) == Some(true);

    // Eigenvalue fixture 3: A = [[0, t], [t, 0]]: both bullets
    // inapplicable, yet the eigenvalue t does deform (sufficiency only).
    let a = MatrixFamily::new(vec![
        vec![TruncSeries::zero(1, 10), t(10)],
        vec![t(10), TruncSeries::zero(1, 10)],
    ])
    .unwrap();
    let (family, re3) = eigenvalue_deformation(&a, 10).unwrap();
    let deforms = family
        .to_system()
        .unwrap()
        .residual(&SeriesVec::new(vec![t(10)]))
        .unwrap()
        .is_zero();
    let ok6 = !re3.applicable
        && re3.root.is_none()
        && deforms
        && re3.notes.iter().any(|m| m.contains("inapplicable"));

    let ok = ok1 && ok2 && ok3 && ok4 && ok5 && ok6;
    line(
        "10",
        ok,
        "deformation fixtures match the oracle series and verdicts",
    );
    assert!(ok1, "tougeron root fixture");
    assert!(ok2, "part-2 root fixture");
    assert!(ok3, "persistent root fixture");
    assert!(ok4, "eigenvalue tougeron fixture");
    assert!(ok5, "diagonal eigenvalue fixture");
    assert!(ok6, "certificate-inapplicable eigenvalue fixture");
}
