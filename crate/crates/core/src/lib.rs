//! Explicit holomorphic tangential approximants.
//!
//! A smooth `f` on an interval is approximated by an entire function `g`
//! with `|(f - g)^{(n)}(t)| < ε(t)` for `n ≤ ρ(t)`, built as a sum of
//! Weierstrass transforms of hump-windowed residuals. The crate also carries
//! the supporting machinery: exact combinatorics, forward jets, bump
//! functions with derivative bounds, domain transforms and growth envelopes.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod taylor;
pub mod bump;
pub mod weierstrass;
pub mod whitney;
pub mod transforms;
pub mod bounds;
pub mod cli;
