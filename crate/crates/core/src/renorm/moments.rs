use serde::{Deserialize, Serialize};

use super::format::MomentSpec;
use super::lattice::{realize, spectator_value, MrPlan, Realized};
use crate::corr_core::OpeStructure;
use crate::free_field::{Grid, Sampler};
use crate::stats::jackknife_mean;
use crate::{Error, Result};

/// Monte Carlo estimate with its jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Dimension of `φ` in a structure built from the free field.
pub(crate) fn phi_dim(s: &OpeStructure) -> Result<f64> {
    Ok(s.label("phi")?.dim)
}

/// True moment `E[Π M_{i,r_i}(f_i) Π O_{A_j}(f_j)]` over `n_samples` fields of
/// stream `seed`, with jackknife standard error.
///
/// Spectators are realized on the lattice for `1` and `φ` only.
pub fn estimate_tm(grid: &Grid, s: &OpeStructure, spec: &MomentSpec, n_samples: usize, seed: u64) -> Result<TmEstimate> {
    spec.validate(s)?;
    if spec.n() == 0 {
        return Ok(TmEstimate {
            value: 1.0,
            stderr: 0.0,
            samples: n_samples,
        });
    }
    if n_samples < 2 {
        return Err(Error::Range("at least two samples are needed".into()));
    }
    let m = spec.m();
    let plans: Vec<MrPlan> = spec
        .factors
        .iter()
        .zip(&spec.test_functions)
        .map(|(fmt, f)| MrPlan::new(grid, s, fmt, spec.r, f))
        .collect::<Result<_>>()?;
    let spectators: Vec<(Realized, Vec<f64>)> = spec
        .spectators
        .iter()
        .zip(&spec.test_functions[m..])
        .map(|(id, f)| Ok((realize(id)?, f.lattice_values(grid)?)))
        .collect::<Result<_>>()?;
    let sampler = Sampler::new(grid, phi_dim(s)?)?;
    let values = sampler.map(seed, n_samples, |field| {
        let mut prod = 1.0;
        for p in &plans {
            prod *= p.eval(field)?;
        }
        for (kind, fv) in &spectators {
            prod *= spectator_value(*kind, field, fv);
        }
        Ok(prod)
    })?;
    let (value, stderr) = jackknife_mean(&values);
    Ok(TmEstimate {
        value,
        stderr,
        samples: n_samples,
    })
}
