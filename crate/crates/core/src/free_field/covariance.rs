use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::sample::{spectral_variance, to_real_space, Sampler};
use super::testfn::TestFunction;
use crate::quad::{integrate_singular, Domain, Estimate, Factor, SingularIntegrand};
use crate::stats::linear_fit;
use crate::{Error, Result};

/// `C(f, g) = (2π)^{-d} ∫ conj(f̂(ξ)) ĝ(ξ) |ξ|^{-(d - 2[φ])} dξ` by singular
/// quadrature in Fourier space.
pub fn covariance_pairing(f: &TestFunction, g: &TestFunction, d: usize, dim_phi: f64) -> Result<Estimate> {
    if !(dim_phi > 0.0 && dim_phi < d as f64 / 2.0) {
        return Err(Error::Range(format!("[φ] must lie in (0, d/2), got {dim_phi}")));
    }
    if f.d() != d || g.d() != d {
        return Err(Error::Format("test functions of the wrong dimension".into()));
    }
    let zero = vec![0.0; d];
    f.fourier(&zero)?;
    g.fourier(&zero)?;
    let (f, g) = (f.clone(), g.clone());
    let weight = Arc::new(move |xi: &[f64]| {
        let a = f.fourier(xi).unwrap_or_default();
        let b = g.fourier(xi).unwrap_or_default();
        (a.conj() * b).re
    });
    let intg = SingularIntegrand::new(d)
        .with(Factor::PowerLaw {
            center: zero,
            exponent: d as f64 - 2.0 * dim_phi,
        })
        .with(Factor::Smooth(weight));
    let e = integrate_singular(&intg, &Domain::Whole, 1e-10)?;
    let norm = (2.0 * PI).powi(d as i32);
    Ok(Estimate {
        value: e.value / norm,
        error: e.error / norm,
    })
}

/// Lattice two-point function `G_j = E[φ_j φ_0]` of the sampler, optionally
/// mollified with the spectral multipliers `weights` on both factors:
/// `G_j = l^{-d} Σ_{k≠0} |ξ_k|^{-(d-2[φ])} ŵ_k^2 e^{2πi k·j/n}`.
pub fn lattice_two_point(grid: &Grid, dim_phi: f64, weights: Option<&[f64]>) -> Vec<f64> {
    let var = spectral_variance(grid, dim_phi);
    let vol = grid.box_length.powi(grid.d as i32);
    let spec: Vec<Complex64> = var
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = weights.map_or(1.0, |w| w[k]);
            Complex64::new(v * w * w / vol, 0.0)
        })
        .collect();
    to_real_space(grid, &spec)
}

/// `E[(φ ∗ ρ_r)(x)^2]` on the lattice, the exact spectral sum
/// `l^{-d} Σ_{k≠0} |ξ_k|^{-(d-2[φ])} ŵ_k^2`.
pub fn lattice_variance(grid: &Grid, dim_phi: f64, weights: &[f64]) -> f64 {
    let var = spectral_variance(grid, dim_phi);
    let vol = grid.box_length.powi(grid.d as i32);
    let mut terms: Vec<f64> = var.iter().zip(weights).map(|(v, w)| v * w * w).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>() / (vol * vol)
}

/// Translation-averaged sample two-point function `C_j = N^{-1} Σ_x φ_x φ_{x+j}`,
/// averaged over samples `0..n_samples` of stream `seed`.
pub fn sampled_two_point(sampler: &Sampler, seed: u64, n_samples: usize) -> Result<Vec<f64>> {
    let grid = sampler.grid;
    let vol = grid.box_length.powi(grid.d as i32);
    let per = sampler.map(seed, n_samples, |field| {
        let spec: Vec<Complex64> = field
            .spectral
            .iter()
            .map(|c| Complex64::new(c.norm_sqr() / vol, 0.0))
            .collect();
        Ok(to_real_space(&grid, &spec))
    })?;
    let mut mean = vec![0.0; grid.sites()];
    for c in &per {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    let n = n_samples.max(1) as f64;
    Ok(mean.into_iter().map(|v| v / n).collect())
}

/// Power-law fit of a two-point function along the first axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected: f64,
    pub j_min: usize,
    pub j_max: usize,
}

/// Fits `log(C(r) - C(2r))` against `log r` for lattice separations
/// `j_min..=j_max` along the first axis. The difference cancels the constant
/// offset from the removed zero mode, leaving `κ (1 - 2^{-2[φ]}) r^{-2[φ]}`.
pub fn fit_two_point_slope(grid: &Grid, dim_phi: f64, c: &[f64], j_min: usize, j_max: usize) -> Result<SlopeFit> {
    if j_min == 0 || j_max <= j_min || 2 * j_max > grid.n_per_side / 2 {
        return Err(Error::Range(format!(
            "separations {j_min}..={j_max} must be positive and at most a quarter of the grid"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in j_min..=j_max {
        let diff = c[j] - c[2 * j];
        if diff <= 0.0 {
            continue;
        }
        xs.push((j as f64 * grid.spacing()).ln());
        ys.push(diff.ln());
    }
    if xs.len() < 3 {
        return Err(Error::Range("too few positive differences for a slope fit".into()));
    }
    let fit = linear_fit(&xs, &ys);
    Ok(SlopeFit {
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        expected: -2.0 * dim_phi,
        j_min,
        j_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn gaussian_pairing_is_gamma_quarter() {
        let f = TestFunction::gaussian(vec![0.0], 1.0);
        let e = covariance_pairing(&f, &f, 1, 0.25).unwrap();
        assert!((e.value - gamma(0.25)).abs() < 1e-8, "{}", e.value);
    }
}
