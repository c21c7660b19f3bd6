//! The four elementary integral lemmas behind the pin-and-sum bounds, their
//! explicit proof constants, and numerical verification against quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::singular::{integrate_singular, Domain, Factor, SingularIntegrand};
use crate::corr_core::{BoundEntry, BoundReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// `∫ <y>^{-β} |x-y|^{-α} dy <= K`, `α ∈ [0,d)`, `β > d`.
    GlobalL1,
    /// `∫ <y>^{-γ} |x-y|^{-α} |y-z|^{-β} dy <= K`, `α, β ∈ [0,d/2)`, `γ > d`.
    GlobalBeta,
    /// `∫_{B(0,R)} |x-y|^{-α} dy <= K R^{d-α}`, `α < d`.
    LocalL1,
    /// `∫_{B(0,R)} |x-y|^{-α} |y-z|^{-β} dy <= K R^{d-α-β}`, `α, β < d/2`.
    LocalBeta,
}

impl std::str::FromStr for LemmaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global_l1" | "global_L1" => Ok(LemmaId::GlobalL1),
            "global_beta" => Ok(LemmaId::GlobalBeta),
            "local_l1" | "local_L1" => Ok(LemmaId::LocalL1),
            "local_beta" => Ok(LemmaId::LocalBeta),
            other => Err(Error::Config(format!("unknown lemma `{other}`"))),
        }
    }
}

/// Exponents for one lemma instance. `beta` is the second singular exponent
/// for the beta lemmas and the decay exponent for `GlobalL1`; `gamma` is the
/// decay exponent for `GlobalBeta`; `radius` is `R` for the local lemmas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub lemma: LemmaId,
    pub d: usize,
    pub alpha: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
}

/// Area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

fn global_l1_constant(d: usize, alpha: f64, beta: f64) -> f64 {
    let df = d as f64;
    // ∫_0^∞ r^{d-1} (1+r^2)^{-β/2} dr = Γ(d/2) Γ((β-d)/2) / (2 Γ(β/2))
    let radial = gamma(df / 2.0) * gamma((beta - df) / 2.0) / (2.0 * gamma(beta / 2.0));
    sphere_area(d) * (1.0 / (df - alpha) + radial)
}

fn local_l1_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2f64.powf(df - alpha) / (df - alpha) * sphere_area(d)
}

impl LemmaParams {
    fn need(&self, v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Range(format!("{:?} needs `{name}`", self.lemma)))
    }

    /// Check the exponent ranges of the lemma statement.
    pub fn validate(&self) -> Result<()> {
        let d = self.d as f64;
        if !(1..=3).contains(&self.d) {
            return Err(Error::Range(format!("d = {} outside 1..=3", self.d)));
        }
        let bad = |msg: String| Err(Error::Range(msg));
        match self.lemma {
            LemmaId::GlobalL1 => {
                let b = self.need(self.beta, "beta")?;
                if !(0.0..d).contains(&self.alpha) {
                    return bad(format!("alpha = {} not in [0, d)", self.alpha));
                }
                if b <= d {
                    return bad(format!("decay beta = {b} not in (d, inf)"));
                }
            }
            LemmaId::GlobalBeta => {
                let b = self.need(self.beta, "beta")?;
                let g = self.need(self.gamma, "gamma")?;
                for (n, v) in [("alpha", self.alpha), ("beta", b)] {
                    if !(0.0..d / 2.0).contains(&v) {
                        return bad(format!("{n} = {v} not in [0, d/2)"));
                    }
                }
                if g <= d {
                    return bad(format!("decay gamma = {g} not in (d, inf)"));
                }
            }
            LemmaId::LocalL1 => {
                if self.alpha >= d {
                    return bad(format!("alpha = {} not below d", self.alpha));
                }
            }
            LemmaId::LocalBeta => {
                let b = self.need(self.beta, "beta")?;
                if self.alpha >= d / 2.0 || b >= d / 2.0 {
                    return bad(format!("alpha = {}, beta = {b} must be below d/2", self.alpha));
                }
            }
        }
        if let Some(r) = self.radius {
            if r <= 0.0 {
                return bad(format!("radius {r} must be positive"));
            }
        }
        Ok(())
    }

    /// Power of `R` multiplying the constant in the local lemmas.
    pub fn radius_power(&self) -> f64 {
        let d = self.d as f64;
        match self.lemma {
            LemmaId::LocalL1 => d - self.alpha,
            LemmaId::LocalBeta => d - self.alpha - self.beta.unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

/// The explicit constant `K` produced by each lemma's proof.
///
/// For `LocalBeta` the proof has three branches (`α < 0`, `β < 0`, both
/// nonnegative); the constant returned is the maximum of the three branch
/// constants, each of which is a valid bound on its own branch.
pub fn lemma_constant(p: &LemmaParams) -> Result<f64> {
    p.validate()?;
    Ok(match p.lemma {
        LemmaId::GlobalL1 => global_l1_constant(p.d, p.alpha, p.beta.unwrap()),
        LemmaId::GlobalBeta => 2.0 * global_l1_constant(p.d, p.alpha + p.beta.unwrap(), p.gamma.unwrap()),
        LemmaId::LocalL1 => local_l1_constant(p.d, p.alpha),
        LemmaId::LocalBeta => local_beta_branches(p.d, p.alpha, p.beta.unwrap())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Branch constants of the local beta lemma: `[α<0 branch, β<0 branch, both >= 0 branch]`.
pub fn local_beta_branches(d: usize, alpha: f64, beta: f64) -> [f64; 3] {
    [
        2f64.powf(-alpha) * local_l1_constant(d, beta),
        2f64.powf(-beta) * local_l1_constant(d, alpha),
        2.0 * local_l1_constant(d, alpha + beta),
    ]
}

/// The lemma's left-hand side at anchors `x` (and `z` for the beta lemmas).
pub fn lemma_integral(p: &LemmaParams, x: &[f64], z: Option<&[f64]>, rel_tol: f64) -> Result<f64> {
    p.validate()?;
    let mut intg = SingularIntegrand::new(p.d).with(Factor::PowerLaw {
        center: x.to_vec(),
        exponent: p.alpha,
    });
    let mut domain = Domain::Whole;
    match p.lemma {
        LemmaId::GlobalL1 => {
            intg = intg.with(Factor::InhomDecay {
                exponent: p.beta.unwrap(),
            });
        }
        LemmaId::GlobalBeta => {
            let z = z.ok_or_else(|| Error::Range("global_beta needs z".into()))?;
            intg = intg
                .with(Factor::PowerLaw {
                    center: z.to_vec(),
                    exponent: p.beta.unwrap(),
                })
                .with(Factor::InhomDecay {
                    exponent: p.gamma.unwrap(),
                });
        }
        LemmaId::LocalL1 | LemmaId::LocalBeta => {
            let r = p.need(p.radius, "radius")?;
            domain = Domain::Ball {
                center: vec![0.0; p.d],
                radius: r,
            };
            if p.lemma == LemmaId::LocalBeta {
                let z = z.ok_or_else(|| Error::Range("local_beta needs z".into()))?;
                intg = intg.with(Factor::PowerLaw {
                    center: z.to_vec(),
                    exponent: p.beta.unwrap(),
                });
            }
        }
    }
    Ok(integrate_singular(&intg, &domain, rel_tol)?.value)
}

fn sample_ball<R: Rng>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-radius..=radius)).collect();
        if v.iter().map(|t| t * t).sum::<f64>() <= radius * radius {
            return v;
        }
    }
}

/// Compare the numerical integral with `K` (times `R^{d-α-β}` for local lemmas)
/// at `n_anchors` random anchors. Global anchors are drawn from `[-10,10]^d`,
/// local anchors from the closed ball `B(0,R)`.
pub fn verify_lemma(p: &LemmaParams, n_anchors: usize, rel_tol: f64, seed: u64) -> Result<BoundReport> {
    let k = lemma_constant(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_anchors);
    for _ in 0..n_anchors {
        let (x, z) = match p.lemma {
            LemmaId::GlobalL1 | LemmaId::GlobalBeta => (
                (0..p.d).map(|_| rng.random_range(-10.0..=10.0)).collect::<Vec<f64>>(),
                (0..p.d).map(|_| rng.random_range(-10.0..=10.0)).collect::<Vec<f64>>(),
            ),
            _ => {
                let r = p.need(p.radius, "radius")?;
                (sample_ball(&mut rng, p.d, r), sample_ball(&mut rng, p.d, r))
            }
        };
        let lhs = lemma_integral(p, &x, Some(&z), rel_tol)?;
        let rhs = k * p.radius.unwrap_or(1.0).powf(p.radius_power());
        entries.push(BoundEntry::new(lhs, rhs));
    }
    Ok(BoundReport::from_entries(format!("{:?}", p.lemma), entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(lemma: LemmaId, d: usize, alpha: f64) -> LemmaParams {
        LemmaParams {
            lemma,
            d,
            alpha,
            beta: None,
            gamma: None,
            radius: None,
        }
    }

    #[test]
    fn proof_constants() {
        let k = lemma_constant(&params(LemmaId::LocalL1, 1, 0.0)).unwrap();
        assert_eq!(k, 4.0);
        let mut p = params(LemmaId::GlobalL1, 1, 0.5);
        p.beta = Some(2.0);
        assert!((lemma_constant(&p).unwrap() - (4.0 + PI)).abs() < 1e-12);
        let mut p = params(LemmaId::GlobalBeta, 1, 0.25);
        p.beta = Some(0.25);
        p.gamma = Some(2.0);
        assert!((lemma_constant(&p).unwrap() - 2.0 * (4.0 + PI)).abs() < 1e-12);
    }

    #[test]
    fn range_errors() {
        let mut p = params(LemmaId::GlobalL1, 1, 1.0);
        p.beta = Some(2.0);
        assert!(matches!(lemma_constant(&p), Err(Error::Range(_))));
        let mut p = params(LemmaId::LocalBeta, 2, 1.0);
        p.beta = Some(0.0);
        assert!(matches!(lemma_constant(&p), Err(Error::Range(_))));
    }

    #[test]
    fn global_beta_allows_coincident_anchors() {
        let mut p = params(LemmaId::GlobalBeta, 1, 0.2);
        p.beta = Some(0.3);
        p.gamma = Some(1.5);
        let v = lemma_integral(&p, &[1.5], Some(&[1.5]), 1e-9).unwrap();
        assert!(v > 0.0 && v <= lemma_constant(&p).unwrap());
    }

    #[test]
    fn local_l1_is_homogeneous() {
        let mut p = params(LemmaId::LocalL1, 2, 0.7);
        let u = [0.3, -0.4];
        let mut ratios = Vec::new();
        for r in [0.5, 2.0, 7.0] {
            p.radius = Some(r);
            let x: Vec<f64> = u.iter().map(|t| t * r).collect();
            let v = lemma_integral(&p, &x, None, 1e-11).unwrap();
            ratios.push(v / r.powf(2.0 - 0.7));
        }
        for w in ratios.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 1e-6, "{ratios:?}");
        }
    }
}
