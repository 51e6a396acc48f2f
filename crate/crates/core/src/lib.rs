//! Certified computation of the coefficients `p_α(n)` of `η(τ)^{-α}` (up to the
//! `q^{α/24}` shift), i.e. the fractional / colored partition numbers.
//!
//! The crate is organized by the kind of guarantee each part gives:
//!
//! * [`exact`]: exact rational recursion, polynomials in `α`, inequality defects.
//! * [`bounds`]: truncated lower/upper recursions with directed rounding,
//!   windowed memory and checkpoints, used to certify log-concavity over long
//!   ranges.
//! * [`analytic`]: ball-arithmetic evaluation of the Kloosterman/Bessel exact
//!   formula and of the main term controlling `p(n-1)p(ℓ+1) - p(n)p(ℓ)`.
//! * [`verify`]: end-to-end certificates for the colored-partition
//!   inequalities, including the convolution closure argument.
//!
//! [`arith`] holds the number-theoretic primitives shared by all of them.

pub mod analytic;
pub mod arith;
pub mod ball;
pub mod bounds;
pub mod directed;
pub mod error;
pub mod exact;
pub mod par;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};

/// Exact arbitrary-precision rational; partition numbers and defects.
pub type ExactValue = rug::Rational;
