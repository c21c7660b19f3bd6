use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::format::RenormFormat;
use super::lattice::MrPlan;
use super::moments::phi_dim;
use crate::combinat::{nu, PowerParams};
use crate::corr_core::OpeStructure;
use crate::free_field::{Grid, Sampler, TestFunction};
use crate::stats::{jackknife, linear_fit};
use crate::{Error, Result};

/// One scale of a rate study: `‖D_r‖_{L^p}` with its jackknife error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub r: i32,
    pub norm: f64,
    pub stderr: f64,
}

/// Fitted geometric decay `‖D_r‖ ≈ C L^{slope · r}` compared with `ν / p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub kind: String,
    pub p: u32,
    pub base: f64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub nu: f64,
    pub prediction: f64,
}

impl RateReport {
    /// `r,norm,stderr,log_L_norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,norm,stderr,log_l_norm\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.12e},{:.6e},{:.12e}",
                row.r,
                row.norm,
                row.stderr,
                row.norm.ln() / self.base.ln()
            );
        }
        out
    }

    /// `|slope - ν/p|`.
    pub fn deviation(&self) -> f64 {
        (self.slope - self.prediction).abs()
    }
}

/// Exponents `γ` and `ε` fed to the rate `ν` of a study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub gamma: f64,
    pub eps: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        RateParams { gamma: 1.0, eps: 0.0 }
    }
}

fn rational(x: f64) -> Result<Rational64> {
    Rational64::approximate_float(x).ok_or_else(|| Error::Range(format!("{x} has no rational approximation")))
}

/// `ν` for a single renormalized factor without spectators.
pub fn predicted_nu(s: &OpeStructure, fmt: &RenormFormat, params: RateParams) -> Result<f64> {
    let pp = PowerParams::new(s.d as i64, rational(params.gamma)?, rational(params.eps)?);
    let delta = rational(fmt.delta(s)?)?;
    nu(&pp, &[delta], &[])
        .value
        .to_f64()
        .ok_or_else(|| Error::Range("ν is not representable".into()))
}

fn check_range(r_range: &[i32], p: u32) -> Result<()> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Range(format!("p must be even and at least 2, got {p}")));
    }
    if r_range.len() < 2 {
        return Err(Error::Range("a rate fit needs at least two scales".into()));
    }
    if r_range.iter().any(|&r| r > 0) {
        return Err(Error::Range("cut-off indices must be <= 0".into()));
    }
    Ok(())
}

// `‖D_r‖_p = (E D_r^p)^{1/p}` per scale, from per-sample differences.
#[allow(clippy::too_many_arguments)]
fn fit_rows(
    kind: &str,
    diffs: &[Vec<f64>],
    r_range: &[i32],
    p: u32,
    base: f64,
    seed: u64,
    nu: f64,
) -> RateReport {
    let inv = 1.0 / p as f64;
    let rows: Vec<RateRow> = r_range
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let pw: Vec<f64> = diffs.iter().map(|d| d[k].powi(p as i32)).collect();
            let (norm, stderr) = jackknife(&pw, |m| m.max(0.0).powf(inv));
            RateRow { r, norm, stderr }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|row| row.r as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|row| row.norm.ln() / base.ln()).collect();
    let fit = linear_fit(&xs, &ys);
    RateReport {
        kind: kind.into(),
        p,
        base,
        samples: diffs.len(),
        seed,
        rows,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        intercept: fit.intercept,
        nu,
        prediction: nu / p as f64,
    }
}

/// Pathwise telescoping study: for each `r`, `D_r = M_r(f) - M_{r-1}(f)` on
/// the same sample, `‖D_r‖_{L^p}` and the fitted slope of `log_L ‖D_r‖`
/// against `r`, compared with `ν / p`.
///
/// `M_{r-1}` is the same format with scale shift one.
#[allow(clippy::too_many_arguments)]
pub fn telescoping_study(
    grid: &Grid,
    s: &OpeStructure,
    fmt: &RenormFormat,
    f: &TestFunction,
    p: u32,
    r_range: &[i32],
    n_samples: usize,
    seed: u64,
    params: RateParams,
) -> Result<RateReport> {
    check_range(r_range, p)?;
    let fine = fmt.clone().with_shift(fmt.shift + 1);
    let pairs: Vec<(MrPlan, MrPlan)> = r_range
        .iter()
        .map(|&r| Ok((MrPlan::new(grid, s, fmt, r, f)?, MrPlan::new(grid, s, &fine, r, f)?)))
        .collect::<Result<_>>()?;
    let sampler = Sampler::new(grid, phi_dim(s)?)?;
    let diffs = sampler.map(seed, n_samples, |field| {
        pairs
            .iter()
            .map(|(a, b)| Ok(a.eval(field)? - b.eval(field)?))
            .collect::<Result<Vec<f64>>>()
    })?;
    let nu = predicted_nu(s, fmt, params)?;
    Ok(fit_rows("telescoping", &diffs, r_range, p, fmt.base, seed, nu))
}

/// `‖M^{(1)}_r(f) - M^{(2)}_r(f)‖_{L^2}` for two formats differing in the
/// mollifier, on common samples, with its fitted geometric rate.
#[allow(clippy::too_many_arguments)]
pub fn mollifier_independence(
    grid: &Grid,
    s: &OpeStructure,
    first: &RenormFormat,
    second: &RenormFormat,
    f: &TestFunction,
    r_range: &[i32],
    n_samples: usize,
    seed: u64,
    params: RateParams,
) -> Result<RateReport> {
    check_range(r_range, 2)?;
    if first.a != second.a || first.b != second.b || first.c_star != second.c_star || first.base != second.base {
        return Err(Error::Format("formats must share labels and base".into()));
    }
    let pairs: Vec<(MrPlan, MrPlan)> = r_range
        .iter()
        .map(|&r| Ok((MrPlan::new(grid, s, first, r, f)?, MrPlan::new(grid, s, second, r, f)?)))
        .collect::<Result<_>>()?;
    let sampler = Sampler::new(grid, phi_dim(s)?)?;
    let diffs = sampler.map(seed, n_samples, |field| {
        pairs
            .iter()
            .map(|(a, b)| Ok(a.eval(field)? - b.eval(field)?))
            .collect::<Result<Vec<f64>>>()
    })?;
    let nu = predicted_nu(s, first, params)?;
    Ok(fit_rows("mollifier-independence", &diffs, r_range, 2, first.base, seed, nu))
}
