//! Exact symbolic engine for implicit function equations `F(x, y) = 0` over
//! truncated formal power-series rings with degenerate Jacobians.
//!
//! Everything is computed in `Q[x_1..x_m] / m^(D+1)` with arbitrary-precision
//! rational coefficients; there is no floating point anywhere. The crate
//! decides order-by-order solvability, constructs truncated solutions,
//! checks solvability certificates (Tougeron / Fisher / the strengthened
//! `J^2 = J*a_L` condition), applies the machinery to root and eigenvalue
//! bifurcation, and drives unipotent jet-group orbit computations for
//! finite-determinacy bounds.
//!
//! The crate is `no_std` (alloc required); IO, parsing and the CLI live in
//! the companion `germ-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod certify;
pub mod deform;
pub mod jetgroup;
pub mod linalg;
pub mod modfilt;
pub mod quotient;
pub mod series;
pub mod solver;

mod error;

pub use error::{Error, Result};

/// Arbitrary-precision rational coefficient type used throughout.
pub type Rational = num_rational::BigRational;

/// Arbitrary-precision integer, used for multinomial bookkeeping.
pub type Integer = num_bigint::BigInt;

pub(crate) fn rat_i64(n: i64) -> Rational {
    Rational::from_integer(Integer::from(n))
}

/// Convenience constructor for `n/d` used heavily in tests and fixtures.
pub fn rational(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(Integer::from(n), Integer::from(d))
}
