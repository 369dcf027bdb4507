//! Exact small-system verification of Lieb-Robinson bounds for quantum spin
//! lattices with power-law long-range interactions.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: finite metric site sets, balls, neighbourhoods and the
//!   polynomial growth certificate `g(r) = C (1 + r)^D`.
//! - [`model`]: interaction families `{h_Z}`, the tail function `f(R)`, the
//!   pairwise strength `C0` and the short/long split at a cutoff `R`.
//! - [`quantum`]: dense operator algebra, exact Heisenberg evolution from one
//!   eigendecomposition, commutator norms and the interaction-picture unitary.
//! - [`bounds`]: every right-hand side of the bound chain with explicit
//!   constants, plus brute-force oracles for the iterated series.
//! - [`lightcone`]: power-law front exponents, `r_max(t)`, `v_g(t)` and
//!   empirical front extraction.
//! - [`harness`]: JSON run configuration, sweeps, verification campaigns and
//!   CSV/JSON/plot output.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lightcone;
pub mod model;
pub mod quadrature;
pub mod quantum;

pub use error::{Error, Result};
