use super::covariance::lattice_variance;
use super::mollifier::{mollify_with, Mollifier};
use super::sample::LatticeField;
use super::testfn::TestFunction;
use crate::Result;

/// `∫ ((φ ∗ ρ_r)(x)^2 - E[(φ ∗ ρ_r)(x)^2]) f(x) dx` on the lattice.
///
/// The subtracted expectation is the exact lattice spectral sum, not a Monte
/// Carlo estimate.
pub fn wick_square(field: &LatticeField, m: &Mollifier, f: &TestFunction) -> Result<f64> {
    let w = m.spectral_weights(&field.grid)?;
    let fv = f.lattice_values(&field.grid)?;
    Ok(wick_square_with(field, &w, &fv))
}

/// [`wick_square`] with precomputed spectral weights and test-function values.
pub fn wick_square_with(field: &LatticeField, weights: &[f64], f_values: &[f64]) -> f64 {
    let grid = &field.grid;
    let phi_r = mollify_with(field, weights);
    let v = lattice_variance(grid, field.dim_phi, weights);
    let s: f64 = phi_r.iter().zip(f_values).map(|(p, f)| (p * p - v) * f).sum();
    s * grid.cell_volume()
}
