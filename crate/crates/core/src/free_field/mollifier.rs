use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{fft_nd, Grid};
use super::sample::{to_real_space, LatticeField};
use crate::quad::{gauss_legendre, sphere_area};
use crate::{Error, Result};

/// Unnormalized bump `exp(-s / (1 - |x|^2 / R^2))` on `|x| < R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub sharpness: f64,
    pub radius: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile {
            sharpness: 1.0,
            radius: 1.0,
        }
    }
}

impl BumpProfile {
    pub fn new(sharpness: f64, radius: f64) -> Result<Self> {
        if !(sharpness > 0.0 && radius > 0.0 && radius <= 1.0) {
            return Err(Error::Range(format!(
                "bump needs sharpness > 0 and radius in (0, 1], got ({sharpness}, {radius})"
            )));
        }
        Ok(BumpProfile { sharpness, radius })
    }

    /// Value at squared distance `t2` from the center.
    pub fn eval_sq(&self, t2: f64) -> f64 {
        let u = t2 / (self.radius * self.radius);
        if u >= 1.0 {
            0.0
        } else {
            (-self.sharpness / (1.0 - u)).exp()
        }
    }

    /// `∫_{R^d}` of the profile (radial Gauss-Legendre; the integrand is flat
    /// to all orders at the boundary).
    pub fn integral(&self, d: usize) -> f64 {
        let rule = gauss_legendre(256);
        let radial = rule.integrate(0.0, self.radius, |t| t.powi(d as i32 - 1) * self.eval_sq(t * t));
        sphere_area(d) * radial
    }
}

/// `ρ_r(x) = L^{-rd} ρ(L^{-r} x)` with `ρ = c · profile`, `∫ρ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub profile: BumpProfile,
    pub r: i32,
    pub base: f64,
}

impl Mollifier {
    pub fn new(profile: BumpProfile, r: i32, base: f64) -> Result<Self> {
        if r > 0 {
            return Err(Error::Range(format!("scale index must be <= 0, got {r}")));
        }
        if !(base > 1.0) {
            return Err(Error::Range(format!("base L must exceed 1, got {base}")));
        }
        Ok(Mollifier { profile, r, base })
    }

    /// The standard bump at scale `r`.
    pub fn standard(r: i32, base: f64) -> Result<Self> {
        Self::new(BumpProfile::default(), r, base)
    }

    /// Same profile at another scale.
    pub fn at_scale(&self, r: i32) -> Result<Self> {
        Self::new(self.profile, r, self.base)
    }

    /// `L^r`.
    pub fn scale(&self) -> f64 {
        self.base.powi(self.r)
    }

    /// Support radius `R L^r`.
    pub fn support(&self) -> f64 {
        self.profile.radius * self.scale()
    }

    /// Continuum value `ρ_r(x)`.
    pub fn eval(&self, d: usize, x: &[f64]) -> f64 {
        let s = self.scale();
        let t2: f64 = x.iter().map(|v| (v / s) * (v / s)).sum();
        self.profile.eval_sq(t2) / (self.profile.integral(d) * s.powi(d as i32))
    }

    /// Fails with [`Error::Resolution`] if the support is below two lattice
    /// spacings, and with [`Error::Range`] if it wraps around the torus.
    pub fn check_resolution(&self, grid: &Grid) -> Result<()> {
        let h = grid.spacing();
        if self.support() < 2.0 * h {
            return Err(Error::Resolution {
                scale: self.support(),
                spacing: h,
            });
        }
        if self.support() >= grid.box_length / 4.0 {
            return Err(Error::Range(format!(
                "mollifier support {} exceeds a quarter of the box {}",
                self.support(),
                grid.box_length
            )));
        }
        Ok(())
    }

    /// `ρ_r` sampled at the periodic displacements of the grid and normalized
    /// to unit discrete integral `h^d Σ w = 1`.
    pub fn lattice_weights(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_resolution(grid)?;
        let s = self.scale();
        let mut w: Vec<f64> = (0..grid.sites())
            .map(|j| {
                let t2: f64 = grid.displacement(j).iter().map(|v| (v / s) * (v / s)).sum();
                self.profile.eval_sq(t2)
            })
            .collect();
        let total: f64 = w.iter().sum::<f64>() * grid.cell_volume();
        for v in &mut w {
            *v /= total;
        }
        Ok(w)
    }

    /// Discrete Fourier multipliers `ŵ_k = h^d Σ_j w_j e^{-2πi k·j/n}`; real
    /// because the sampled profile is even.
    pub fn spectral_weights(&self, grid: &Grid) -> Result<Vec<f64>> {
        let w = self.lattice_weights(grid)?;
        let hd = grid.cell_volume();
        let mut buf: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v * hd, 0.0)).collect();
        fft_nd(grid, &mut buf, false);
        Ok(buf.iter().map(|z| z.re).collect())
    }
}

/// `φ ∗ ρ_r` on the lattice (circular convolution).
pub fn mollify(field: &LatticeField, m: &Mollifier) -> Result<Vec<f64>> {
    let w = m.spectral_weights(&field.grid)?;
    Ok(mollify_with(field, &w))
}

/// `φ ∗ ρ_r` given precomputed [`Mollifier::spectral_weights`].
pub fn mollify_with(field: &LatticeField, weights: &[f64]) -> Vec<f64> {
    let spec: Vec<Complex64> = field.spectral.iter().zip(weights).map(|(c, w)| c * w).collect();
    to_real_space(&field.grid, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuum_normalization() {
        for d in 1..=3 {
            let m = Mollifier::standard(-2, 2.0).unwrap();
            let rule = gauss_legendre(256);
            let s = m.support();
            let radial = rule.integrate(0.0, s, |t| {
                let mut x = vec![0.0; d];
                x[0] = t;
                t.powi(d as i32 - 1) * m.eval(d, &x)
            });
            assert!((sphere_area(d) * radial - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn resolution_and_unit_sum() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let m = Mollifier::standard(-6, 2.0).unwrap();
        assert!(matches!(m.lattice_weights(&g), Err(Error::Resolution { .. })));
        let m = Mollifier::standard(-2, 2.0).unwrap();
        let w = m.spectral_weights(&g).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14);
    }
}
