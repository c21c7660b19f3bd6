//! The fractional massless free field on a periodic lattice: spectral
//! sampling, the two-point prefactor `κ`, mollifiers, test functions,
//! covariances and the Wick square.
//!
//! The lattice stands in for `R^d`: test functions should sit in the central
//! half of the box and correlations are read at separations below a quarter of
//! the box. The zero mode is removed, which shifts lattice covariances by a
//! constant; comparisons with continuum formulas use offset-insensitive
//! observables.

mod covariance;
mod export;
mod grid;
mod kappa;
mod mollifier;
mod sample;
mod testfn;
mod wick;

pub use covariance::{
    covariance_pairing, fit_two_point_slope, lattice_two_point, lattice_variance, sampled_two_point, SlopeFit,
};
pub use export::{read_binary, write_binary, write_csv, DumpHeader, CSV_MAX_SITES, HEADER_LEN};
pub use grid::{fft_nd, Grid};
pub use kappa::{calibrate_kappa, kappa, kappa_closed_form, KappaCalibration, KappaConvention, KappaMode};
pub use mollifier::{mollify, mollify_with, BumpProfile, Mollifier};
pub use sample::{
    imaginary_residual, map_samples, sample_field, sample_field_indexed, sample_spectral, spectral_variance,
    to_real_space, LatticeField, Sampler,
};
pub use testfn::TestFunction;
pub use wick::{wick_square, wick_square_with};
