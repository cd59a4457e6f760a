//! Exact permutation-pattern densities and Price-polynomial bounds for layered
//! patterns.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function over immutable values; work that can be split (multi-start
//! optimization, exhaustive enumeration) is routed through an [`Executor`] so a
//! std front end can run it on a thread pool while the results stay
//! bit-identical to the [`Sequential`] executor.
//!
//! Module map:
//!
//! * [`perm`]: permutations, induced subpermutations, occurrence counts,
//!   densities and formal linear combinations of patterns.
//! * [`layered`]: layer, block and quasi-block decompositions, natural
//!   decompositions, blow-ups and the block-wise occurrence count.
//! * [`poly`]: exact sparse polynomials and the (extended) Price polynomials.
//! * [`simplex`]: maximization and minimization over the probability simplex.
//! * [`bounds`]: packing and minimization bounds and closed-form densities.
//! * [`oracle`]: brute-force extremal densities over all permutations or all
//!   layered permutations of a given length.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
mod error;
mod exec;
pub mod layered;
pub mod oracle;
pub mod perm;
pub mod poly;
pub mod simplex;
mod util;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};

/// Exact rational numbers used for every density and coefficient.
pub type Rational = num_rational::BigRational;
