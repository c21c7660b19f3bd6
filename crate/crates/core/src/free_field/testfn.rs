use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::corr_core::japanese;
use crate::quad::gauss_legendre;
use crate::{Error, Result};

/// Closed-form rapidly decaying test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `A Π_i H_{k_i}(u_i) e^{-u_i^2/2}` with `u = (x - c)/σ` and physicists'
    /// Hermite polynomials `H_k`. All orders zero gives a Gaussian.
    Hermite {
        center: Vec<f64>,
        sigma: f64,
        orders: Vec<u32>,
        amplitude: f64,
    },
    /// `A exp(-s / (1 - |x - c|^2 / R^2))` on `|x - c| < R`.
    Bump {
        center: Vec<f64>,
        radius: f64,
        sharpness: f64,
        amplitude: f64,
    },
}

/// Coefficients of `H_k` in increasing powers.
fn hermite_coeffs(k: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for n in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= 2.0 * n as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn poly_eval(p: &[f64], u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn poly_mul_add(a: &[f64], b: &[f64], sa: f64, sb: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += sa * c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += sb * c;
    }
    out
}

/// `x · p(x)`.
fn poly_shift(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend_from_slice(p);
    out
}

/// `H_k(u) e^{-u^2/2}` differentiated `n` times in `u`, as `q(u) e^{-u^2/2}`.
fn hermite_derivative_poly(k: u32, n: u32) -> Vec<f64> {
    let mut p = hermite_coeffs(k);
    for _ in 0..n {
        p = poly_mul_add(&poly_deriv(&p), &poly_shift(&p), 1.0, -1.0);
    }
    p
}

/// `exp(-s/(1-u^2))` differentiated `n` times, as `P_n(u)/(1-u^2)^{2n}` times
/// the bump.
fn bump_derivative_poly(s: f64, n: u32) -> Vec<f64> {
    let one_minus = [1.0, 0.0, -1.0];
    let one_minus_sq = [1.0, 0.0, -2.0, 0.0, 1.0];
    let mut p = vec![1.0];
    for m in 0..n {
        let a = poly_product(&poly_deriv(&p), &one_minus_sq);
        let b = poly_product(&poly_shift(&p), &one_minus);
        let c = poly_shift(&p);
        let ab = poly_mul_add(&a, &b, 1.0, 4.0 * m as f64);
        p = poly_mul_add(&ab, &c, 1.0, -2.0 * s);
    }
    p
}

fn poly_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn physicists_hermite(k: u32, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * u);
    if k == 0 {
        return h0;
    }
    for n in 1..k {
        let h2 = 2.0 * u * h1 - 2.0 * n as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl TestFunction {
    pub fn gaussian(center: Vec<f64>, sigma: f64) -> Self {
        let d = center.len();
        TestFunction::Hermite {
            center,
            sigma,
            orders: vec![0; d],
            amplitude: 1.0,
        }
    }

    pub fn hermite(center: Vec<f64>, sigma: f64, orders: Vec<u32>) -> Self {
        TestFunction::Hermite {
            center,
            sigma,
            orders,
            amplitude: 1.0,
        }
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Self {
        TestFunction::Bump {
            center,
            radius,
            sharpness: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TestFunction::Hermite {
                center,
                sigma,
                orders,
                ..
            } => *sigma > 0.0 && orders.len() == center.len() && !center.is_empty(),
            TestFunction::Bump {
                center,
                radius,
                sharpness,
                ..
            } => *radius > 0.0 && *sharpness > 0.0 && !center.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("malformed test function {self:?}")))
        }
    }

    pub fn d(&self) -> usize {
        match self {
            TestFunction::Hermite { center, .. } | TestFunction::Bump { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            TestFunction::Hermite { center, .. } | TestFunction::Bump { center, .. } => center,
        }
    }

    /// `a · f`.
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            TestFunction::Hermite { amplitude, .. } | TestFunction::Bump { amplitude, .. } => *amplitude *= a,
        }
        out
    }

    /// `x ↦ f(x / λ)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            TestFunction::Hermite { center, sigma, .. } => {
                center.iter_mut().for_each(|c| *c *= lambda);
                *sigma *= lambda;
            }
            TestFunction::Bump { center, radius, .. } => {
                center.iter_mut().for_each(|c| *c *= lambda);
                *radius *= lambda;
            }
        }
        out
    }

    /// Radius around the center outside which `|f|` is negligible (exactly
    /// zero for bumps, below `e^{-32}` times a polynomial for Hermite functions).
    pub fn effective_radius(&self) -> f64 {
        match self {
            TestFunction::Hermite { sigma, orders, .. } => {
                let kmax = orders.iter().copied().max().unwrap_or(0) as f64;
                sigma * (8.0 + kmax.sqrt())
            }
            TestFunction::Bump { radius, .. } => *radius,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Hermite {
                center,
                sigma,
                orders,
                amplitude,
            } => {
                let mut v = *amplitude;
                for i in 0..center.len() {
                    let u = (x[i] - center[i]) / sigma;
                    v *= physicists_hermite(orders[i], u) * (-0.5 * u * u).exp();
                }
                v
            }
            TestFunction::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => {
                let t2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                let u = t2 / (radius * radius);
                if u >= 1.0 {
                    0.0
                } else {
                    amplitude * (-sharpness / (1.0 - u)).exp()
                }
            }
        }
    }

    /// `∂^α f(x)`. Bumps support derivatives only in `d = 1`.
    pub fn derivative(&self, alpha: &[u32], x: &[f64]) -> Result<f64> {
        if alpha.len() != self.d() {
            return Err(Error::Format(format!(
                "multi-index of length {} for a function on R^{}",
                alpha.len(),
                self.d()
            )));
        }
        match self {
            TestFunction::Hermite {
                center,
                sigma,
                orders,
                amplitude,
            } => {
                let mut v = *amplitude;
                for i in 0..center.len() {
                    let u = (x[i] - center[i]) / sigma;
                    let q = hermite_derivative_poly(orders[i], alpha[i]);
                    v *= poly_eval(&q, u) * (-0.5 * u * u).exp() / sigma.powi(alpha[i] as i32);
                }
                Ok(v)
            }
            TestFunction::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => {
                if alpha.iter().all(|&a| a == 0) {
                    return Ok(self.eval(x));
                }
                if center.len() != 1 {
                    return Err(Error::Range(
                        "bump derivatives are implemented in d = 1 only".into(),
                    ));
                }
                let n = alpha[0];
                let u = (x[0] - center[0]) / radius;
                if u.abs() >= 1.0 {
                    return Ok(0.0);
                }
                let w = 1.0 - u * u;
                let p = bump_derivative_poly(*sharpness, n);
                let e = (-sharpness / w).exp();
                Ok(amplitude * poly_eval(&p, u) * e / w.powi(2 * n as i32) / radius.powi(n as i32))
            }
        }
    }

    /// `f̂(ξ) = ∫ f(x) e^{-i ξ·x} dx`. Bumps are supported in `d = 1` only.
    pub fn fourier(&self, xi: &[f64]) -> Result<Complex64> {
        match self {
            TestFunction::Hermite {
                center,
                sigma,
                orders,
                amplitude,
            } => {
                let mut v = Complex64::new(*amplitude, 0.0);
                let mi = Complex64::new(0.0, -1.0);
                for i in 0..center.len() {
                    let w = sigma * xi[i];
                    let mag = sigma * (2.0 * PI).sqrt() * physicists_hermite(orders[i], w) * (-0.5 * w * w).exp();
                    v *= Complex64::from_polar(1.0, -xi[i] * center[i]) * mi.powu(orders[i]) * mag;
                }
                Ok(v)
            }
            TestFunction::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => {
                if center.len() != 1 {
                    return Err(Error::Range(
                        "bump Fourier transforms are implemented in d = 1 only".into(),
                    ));
                }
                let k = xi[0] * radius;
                let rule = gauss_legendre(256);
                let re = rule.integrate(-1.0, 1.0, |u| (-sharpness / (1.0 - u * u)).exp() * (k * u).cos());
                Ok(Complex64::from_polar(amplitude * radius * re, -xi[0] * center[0]))
            }
        }
    }

    /// `‖f‖_{α,k} = sup_x <x>^k |∂^α f(x)|` by dense sampling around the
    /// center.
    pub fn seminorm(&self, alpha: &[u32], k: u32) -> Result<f64> {
        let d = self.d();
        let c = self.center().to_vec();
        let reach = match self {
            TestFunction::Hermite { sigma, .. } => self.effective_radius() + sigma * k as f64,
            TestFunction::Bump { radius, .. } => *radius,
        };
        let m: usize = match d {
            1 => 8001,
            2 => 241,
            _ => 61,
        };
        let mut best = 0.0f64;
        let total = m.pow(d as u32);
        let mut x = vec![0.0; d];
        for s in 0..total {
            let mut rem = s;
            for (a, xa) in x.iter_mut().enumerate() {
                let i = rem % m;
                rem /= m;
                *xa = c[a] - reach + 2.0 * reach * i as f64 / (m - 1) as f64;
            }
            let v = japanese(&x).powi(k as i32) * self.derivative(alpha, &x)?.abs();
            best = best.max(v);
        }
        Ok(best)
    }

    /// Values at the grid sites.
    pub fn lattice_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        if self.d() != grid.d {
            return Err(Error::Format(format!(
                "test function on R^{} sampled on a {}-dimensional grid",
                self.d(),
                grid.d
            )));
        }
        Ok((0..grid.sites()).map(|s| self.eval(&grid.position(s))).collect())
    }

    /// Whether the effective support lies in the central half of the box.
    pub fn fits_central_half(&self, grid: &Grid) -> bool {
        let reach = self.effective_radius();
        self.center().iter().all(|c| c.abs() + reach <= grid.box_length / 4.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_derivative_matches_finite_difference() {
        let f = TestFunction::hermite(vec![0.3], 0.7, vec![2]);
        let h = 1e-5;
        for x in [-1.0, 0.1, 0.9] {
            let fd = (f.eval(&[x + h]) - f.eval(&[x - h])) / (2.0 * h);
            assert!((f.derivative(&[1], &[x]).unwrap() - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn bump_derivative_matches_finite_difference() {
        let f = TestFunction::Bump {
            center: vec![0.2],
            radius: 1.5,
            sharpness: 2.0,
            amplitude: 1.0,
        };
        let h = 1e-5;
        for x in [-0.7, 0.1, 1.1] {
            let fd = (f.derivative(&[1], &[x + h]).unwrap() - f.derivative(&[1], &[x - h]).unwrap()) / (2.0 * h);
            assert!((f.derivative(&[2], &[x]).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_fourier_transform() {
        let f = TestFunction::gaussian(vec![0.0], 1.0);
        let v = f.fourier(&[1.0]).unwrap();
        assert!((v.re - (2.0 * PI).sqrt() * (-0.5f64).exp()).abs() < 1e-14);
        let b = TestFunction::bump(vec![0.0], 1.0);
        let b0 = b.fourier(&[0.0]).unwrap().re;
        let direct = gauss_legendre(256).integrate(-1.0, 1.0, |u| b.eval(&[u]));
        assert!((b0 - direct).abs() < 1e-14);
    }
}
