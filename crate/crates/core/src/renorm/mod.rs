//! Renormalized products and their moments.
//!
//! [`compute_mr`] evaluates `M_r(f) = ∫ Z_r [O_{A,r} O_{B,r} - Σ_C Õ_{C,r}] f`
//! on lattice samples of the free field, [`compute_ipc`] integrates pointwise
//! correlations by quadrature, [`estimate_tm`] estimates true moments by Monte
//! Carlo and [`telescoping_study`] fits the geometric decay of
//! `‖M_r(f) - M_{r-1}(f)‖_{L^p}` with common random numbers across scales.

mod channel;
mod format;
mod ipc;
mod lattice;
mod moments;
mod study;

pub use channel::{channel_integral, compute_gr, compute_zr, pair_integral, power_law_fourier, GrKernel};
pub use format::{MomentSpec, RenormFormat};
pub use ipc::{compute_ipc, wick_graphs, IpcEstimate, WickGraph};
pub use lattice::{compute_mr, MrPlan};
pub use moments::{estimate_tm, TmEstimate};
pub use study::{mollifier_independence, predicted_nu, telescoping_study, RateParams, RateReport, RateRow};
