//! Depth functions, intersection growth and lazy-random-walk statistics for
//! explicit finitely generated groups.
//!
//! The depth of a group element is the smallest order of a finite quotient
//! in which it survives. This crate computes depth functions and residual
//! finiteness growth for a fixed set of families (integers, lattices, the
//! discrete Heisenberg group, finite multiplication tables, rank-two free
//! groups and direct products), enumerates normal subgroups and
//! intersection-growth tables, runs exact and Monte Carlo lazy random
//! walks, and verifies spectral mixing bounds on finite quotient Cayley
//! graphs.
//!
//! The central quantity is the expected depth `E[D(X_n)]` of the lazy walk
//! at step `n` and its truncated limit series `2 + Σ_{k≥2} 1/[G:Λ_k]`,
//! where `Λ_k` is the intersection of all normal subgroups of index at
//! most `k`.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes
//! through `libm`. Randomness is counter-based and fully reproducible.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod density;
pub mod depth;
pub mod error;
pub mod expectations;
pub mod groups;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod quotients;
pub mod rational;
pub mod rng;
pub mod spectra;
pub mod walks;

pub use error::{Error, ErrorKind, Result};
