//! Numerical and combinatorial laboratory for renormalized products of random
//! distributions defined through the operator product expansion.
//!
//! The crate is organised in five layers:
//!
//! * [`corr_core`]: alphabets, OPE structures, pointwise correlation systems,
//!   the multilinear `V_n` calculus and the factorized nearest-neighbor bounds.
//! * [`free_field`]: the fractional massless free field on a periodic lattice,
//!   mollifiers, test functions, covariances and the Wick square.
//! * [`renorm`]: the normalized, channel-subtracted product `M_r(f)`, moment
//!   objects (true moments and integrals of pointwise correlations) and the
//!   telescoping convergence study.
//! * [`combinat`]: fixed-point-free endofunctions, hairy cycles, integration
//!   schedules, block tables, the two-scale `(tau, sigma)` graph and power counting.
//! * [`quad`]: quadrature for power-law singular integrands and the four
//!   elementary integral lemmas with their explicit constants.

pub mod combinat;
pub mod corr_core;
mod error;
pub mod free_field;
pub mod quad;
pub mod renorm;
pub mod stats;

pub use error::{Error, Result};
