use rustfft::num_complex::Complex64;

use super::channel::power_law_fourier;
use super::format::RenormFormat;
use crate::corr_core::{wick_power, Kernel, OpeStructure, IDENTITY};
use crate::free_field::{fft_nd, mollify_with, to_real_space, Grid, LatticeField, TestFunction};
use crate::{Error, Result};

/// Fields with a lattice realization: the identity and `φ` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Realized {
    Identity,
    Phi,
}

pub(crate) fn realize(id: &str) -> Result<Realized> {
    match wick_power(id) {
        Some(0) if id == IDENTITY => Ok(Realized::Identity),
        Some(1) => Ok(Realized::Phi),
        _ => Err(Error::Format(format!(
            "label `{id}` has no lattice realization (only `1` and `phi`)"
        ))),
    }
}

/// Lattice Fourier multiplier of a kernel, `K̂(ξ_k)`, with the zero mode set
/// to zero for power laws (the infrared convention of the sampler).
pub(crate) fn kernel_multiplier(grid: &Grid, kernel: &Kernel) -> Vec<f64> {
    let n = grid.sites();
    match *kernel {
        Kernel::Zero => vec![0.0; n],
        Kernel::Constant { value } => {
            // The transform of a constant is concentrated on the zero mode.
            let mut v = vec![0.0; n];
            v[0] = value * grid.box_length.powi(grid.d as i32);
            v
        }
        Kernel::PowerLaw { exponent, prefactor } => (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    power_law_fourier(grid.d, exponent, prefactor, grid.wavenumber(k))
                }
            })
            .collect(),
    }
}

/// Lattice version of `∬ ρ_r(x-y) ρ_r(x-z) K(y-z) dy dz`, `l^{-d} Σ_k ŵ_k^2 K̂_k`.
pub(crate) fn lattice_channel_integral(grid: &Grid, weights: &[f64], kernel: &Kernel) -> f64 {
    let vol = grid.box_length.powi(grid.d as i32);
    kernel_multiplier(grid, kernel)
        .iter()
        .zip(weights)
        .map(|(k, w)| k * w * w)
        .sum::<f64>()
        / vol
}

/// Precomputed ingredients of `M_r(f)` for one grid, format, scale and test
/// function.
///
/// On the lattice, `ρ_r` is the sampled mollifier with unit discrete mass and
/// every channel integral `∬ ρ_r ρ_r K` is evaluated as the spectral sum
/// `l^{-d} Σ_k ŵ_k^2 K̂(ξ_k)` with the closed-form continuum transform of the
/// kernel. The `φ` channel `∫ g_r(x,z) φ(z) dz` is a convolution with
/// `g(u) = ρ_r(u) (ρ_r ∗ K)(u)`.
#[derive(Clone, Debug)]
pub struct MrPlan {
    pub grid: Grid,
    /// `Z_r` on the lattice.
    pub z: f64,
    /// Constant subtracted for the identity channel.
    pub identity_subtraction: f64,
    weights: Vec<f64>,
    a: Realized,
    b: Realized,
    phi_filter: Option<Vec<f64>>,
    f_values: Vec<f64>,
}

impl MrPlan {
    pub fn new(grid: &Grid, s: &OpeStructure, fmt: &RenormFormat, r: i32, f: &TestFunction) -> Result<Self> {
        fmt.validate(s)?;
        if s.d != grid.d {
            return Err(Error::Format("structure and grid dimensions differ".into()));
        }
        let a = realize(&fmt.a)?;
        let b = realize(&fmt.b)?;
        let m = fmt.mollifier(r)?;
        let weights = m.spectral_weights(grid)?;
        let target = lattice_channel_integral(grid, &weights, &fmt.target_kernel(s));
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::DegenerateChannel(format!(
                "lattice normalization integral for {} x {} -> {} is {target}",
                fmt.a, fmt.b, fmt.c_star
            )));
        }
        let mut identity_subtraction = 0.0;
        let mut phi_filter = None;
        for (label, kernel) in fmt.subtracted_channels(s)? {
            if kernel.is_zero() {
                continue;
            }
            match realize(&label.id)? {
                Realized::Identity => identity_subtraction += lattice_channel_integral(grid, &weights, &kernel),
                Realized::Phi => phi_filter = Some(phi_channel_filter(grid, &m.lattice_weights(grid)?, &weights, &kernel)),
            }
        }
        Ok(MrPlan {
            grid: *grid,
            z: 1.0 / target,
            identity_subtraction,
            weights,
            a,
            b,
            phi_filter,
            f_values: f.lattice_values(grid)?,
        })
    }

    /// `M_r(f)` for one field sample.
    pub fn eval(&self, field: &LatticeField) -> Result<f64> {
        if field.grid != self.grid {
            return Err(Error::Format("field sampled on a different grid".into()));
        }
        let phi_r = if self.a == Realized::Phi || self.b == Realized::Phi {
            Some(mollify_with(field, &self.weights))
        } else {
            None
        };
        let tilde_phi = self.phi_filter.as_ref().map(|g| {
            let spec: Vec<Complex64> = field.spectral.iter().zip(g).map(|(c, w)| c * w).collect();
            to_real_space(&self.grid, &spec)
        });
        let value = |kind: Realized, j: usize| match kind {
            Realized::Identity => 1.0,
            Realized::Phi => phi_r.as_ref().unwrap()[j],
        };
        let mut s = 0.0;
        for (j, f) in self.f_values.iter().enumerate() {
            if *f == 0.0 {
                continue;
            }
            let mut v = value(self.a, j) * value(self.b, j) - self.identity_subtraction;
            if let Some(t) = &tilde_phi {
                v -= t[j];
            }
            s += v * f;
        }
        Ok(self.z * s * self.grid.cell_volume())
    }
}

// Spectral multiplier of `z ↦ ∫ g(x - z) φ(z) dz` with `g = ρ_r · (ρ_r ∗ K)`.
fn phi_channel_filter(grid: &Grid, w_real: &[f64], w_hat: &[f64], kernel: &Kernel) -> Vec<f64> {
    let k_hat = kernel_multiplier(grid, kernel);
    let spec: Vec<Complex64> = w_hat.iter().zip(&k_hat).map(|(w, k)| Complex64::new(w * k, 0.0)).collect();
    let smeared = to_real_space(grid, &spec);
    let hd = grid.cell_volume();
    let mut g: Vec<Complex64> = w_real
        .iter()
        .zip(&smeared)
        .map(|(w, s)| Complex64::new(w * s * hd, 0.0))
        .collect();
    fft_nd(grid, &mut g, false);
    g.iter().map(|z| z.re).collect()
}

/// `M_r(f) = ∫ Z_r [O_{A,r} O_{B,r} - Σ_C Õ_{C,r}](x) f(x) dx` on one sample.
pub fn compute_mr(
    field: &LatticeField,
    s: &OpeStructure,
    fmt: &RenormFormat,
    r: i32,
    f: &TestFunction,
) -> Result<f64> {
    MrPlan::new(&field.grid, s, fmt, r, f)?.eval(field)
}

/// Smeared spectator `O_A(f)` on the lattice (no mollification).
pub(crate) fn spectator_value(kind: Realized, field: &LatticeField, f_values: &[f64]) -> f64 {
    let hd = field.grid.cell_volume();
    match kind {
        Realized::Identity => f_values.iter().sum::<f64>() * hd,
        Realized::Phi => {
            let phi = if field.real_space.is_empty() {
                to_real_space(&field.grid, &field.spectral)
            } else {
                field.real_space.clone()
            };
            phi.iter().zip(f_values).map(|(p, f)| p * f).sum::<f64>() * hd
        }
    }
}
