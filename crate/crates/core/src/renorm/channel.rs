use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::format::RenormFormat;
use crate::corr_core::{Kernel, OpeStructure};
use crate::free_field::{BumpProfile, Mollifier};
use crate::quad::{gauss_legendre, integrate_singular, sphere_area, Domain, Factor, SingularIntegrand};
use crate::{Error, Result};

/// Dyadic shells used for the radial integral of the autocorrelation.
const SHELLS: i32 = 48;

/// Autocorrelation `A(t) = ∫ ρ(u) ρ(u + t e_1) du` of the unit-scale,
/// unit-mass mollifier.
fn autocorrelation(profile: &BumpProfile, d: usize, t: f64) -> f64 {
    let rad = profile.radius;
    let norm = profile.integral(d);
    let rho = |s2: f64| profile.eval_sq(s2);
    let raw = match d {
        1 => {
            let hi = rad - t;
            if hi <= -rad {
                return 0.0;
            }
            gauss_legendre(256).integrate(-rad, hi, |u| rho(u * u) * rho((u + t) * (u + t)))
        }
        2 => {
            let rs = gauss_legendre(96);
            let ra = gauss_legendre(96);
            2.0 * rs.integrate(0.0, rad, |s| {
                s * rho(s * s) * ra.integrate(0.0, PI, |th| rho(s * s + t * t + 2.0 * s * t * th.cos()))
            })
        }
        _ => {
            let rs = gauss_legendre(64);
            let rm = gauss_legendre(64);
            2.0 * PI
                * rs.integrate(0.0, rad, |s| {
                    s * s * rho(s * s) * rm.integrate(-1.0, 1.0, |mu| rho(s * s + t * t + 2.0 * s * t * mu))
                })
        }
    };
    raw / (norm * norm)
}

/// `∬ ρ(u) ρ(v) |u - v|^{-α} du dv` for the unit-scale mollifier, `0 <= α < d`.
///
/// Written as `S_d ∫_0^{2R} t^{d-1-α} A(t) dt` and integrated on dyadic
/// shells toward the origin with an analytic innermost piece.
pub fn pair_integral(profile: &BumpProfile, d: usize, alpha: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::Range(format!("pair integral supports d in 1..=3, got {d}")));
    }
    if !(alpha >= 0.0 && alpha < d as f64) {
        return Err(Error::DegenerateChannel(format!(
            "exponent {alpha} is not locally integrable in d = {d}"
        )));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let rule = gauss_legendre(24);
    let top = 2.0 * profile.radius;
    let p = d as f64 - 1.0 - alpha;
    let mut total = 0.0;
    for k in 0..SHELLS {
        let hi = top * 0.5f64.powi(k);
        let lo = hi * 0.5;
        total += rule.integrate(lo, hi, |t| t.powf(p) * autocorrelation(profile, d, t));
    }
    let inner = top * 0.5f64.powi(SHELLS);
    total += autocorrelation(profile, d, 0.0) * inner.powf(d as f64 - alpha) / (d as f64 - alpha);
    Ok(sphere_area(d) * total)
}

/// `∬ ρ_r(x-y) ρ_r(x-z) K(y-z) dy dz` for a translation-invariant kernel.
pub fn channel_integral(kernel: &Kernel, m: &Mollifier, d: usize) -> Result<f64> {
    match *kernel {
        Kernel::Zero => Ok(0.0),
        Kernel::Constant { value } => Ok(value),
        Kernel::PowerLaw { exponent, prefactor } => {
            let i = pair_integral(&m.profile, d, exponent)?;
            Ok(prefactor * m.scale().powf(-exponent) * i)
        }
    }
}

/// `Z_r(x) = {∬ ρ_r(x-y) ρ_r(x-z) C_AB^{C*}(y,z) dy dz}^{-1}`, independent of
/// `x` for the translation-invariant kernels of an [`OpeStructure`].
pub fn compute_zr(s: &OpeStructure, fmt: &RenormFormat, r: i32, x: &[f64]) -> Result<f64> {
    fmt.validate(s)?;
    if x.len() != s.d {
        return Err(Error::Format(format!("point of dimension {} in d = {}", x.len(), s.d)));
    }
    let m = fmt.mollifier(r)?;
    let v = channel_integral(&fmt.target_kernel(s), &m, s.d)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::DegenerateChannel(format!(
            "normalization integral for {} x {} -> {} is {v}",
            fmt.a, fmt.b, fmt.c_star
        )));
    }
    Ok(1.0 / v)
}

/// Continuum Fourier transform `K̂(ξ) = ∫ K(x) e^{-iξ·x} dx` of a power law
/// `p |x|^{-α}`: `p π^{d/2} 2^{d-α} Γ((d-α)/2) / Γ(α/2) |ξ|^{α-d}`.
pub fn power_law_fourier(d: usize, exponent: f64, prefactor: f64, xi: f64) -> f64 {
    let df = d as f64;
    prefactor * PI.powf(df / 2.0) * 2f64.powf(df - exponent) * gamma((df - exponent) / 2.0) / gamma(exponent / 2.0)
        * xi.powf(exponent - df)
}

/// Evaluator for `g_r(x, z) = ρ_r(x-z) ∫ ρ_r(x-y) C_AB^C(y,z) dy`.
#[derive(Clone, Debug)]
pub struct GrKernel {
    pub kernel: Kernel,
    pub mollifier: Mollifier,
    pub d: usize,
}

impl GrKernel {
    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
        let outer = self.mollifier.eval(self.d, &diff);
        if outer == 0.0 {
            return Ok(0.0);
        }
        let inner = match self.kernel {
            Kernel::Zero => return Ok(0.0),
            Kernel::Constant { value } => value,
            Kernel::PowerLaw { exponent, prefactor } => {
                let m = self.mollifier;
                let d = self.d;
                let xc = x.to_vec();
                let rho = Arc::new(move |y: &[f64]| {
                    let u: Vec<f64> = xc.iter().zip(y).map(|(a, b)| a - b).collect();
                    m.eval(d, &u)
                });
                let intg = SingularIntegrand::new(d)
                    .with(Factor::PowerLaw {
                        center: z.to_vec(),
                        exponent,
                    })
                    .with(Factor::Smooth(rho));
                let dom = Domain::Ball {
                    center: x.to_vec(),
                    radius: m.support(),
                };
                prefactor * integrate_singular(&intg, &dom, 1e-7)?.value
            }
        };
        Ok(outer * inner)
    }

    /// `∫ g_r(x, z) dz`.
    pub fn total(&self) -> Result<f64> {
        channel_integral(&self.kernel, &self.mollifier, self.d)
    }
}

/// `g_r` for channel `C` of the format.
pub fn compute_gr(s: &OpeStructure, fmt: &RenormFormat, r: i32, c: &str) -> Result<GrKernel> {
    fmt.validate(s)?;
    s.label(c)?;
    Ok(GrKernel {
        kernel: s.kernel(&fmt.a, &fmt.b, c),
        mollifier: fmt.mollifier(r)?,
        d: s.d,
    })
}
