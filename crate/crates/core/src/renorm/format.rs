use serde::{Deserialize, Serialize};

use crate::corr_core::{Kernel, Label, OpeStructure};
use crate::free_field::{BumpProfile, Mollifier, TestFunction};
use crate::{Error, Result};

fn default_base() -> f64 {
    2.0
}

/// One renormalized product `A × B → C*`: the labels, the mollifier profile
/// shared by both factors, the scale shift `Δr ∈ {0, 1}` and the base `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormFormat {
    pub a: String,
    pub b: String,
    pub c_star: String,
    #[serde(default)]
    pub profile: BumpProfile,
    #[serde(default)]
    pub shift: u8,
    #[serde(default = "default_base")]
    pub base: f64,
}

impl RenormFormat {
    /// `A × B → C*` with the standard bump, no shift and `L = 2`.
    pub fn new(a: &str, b: &str, c_star: &str) -> Self {
        RenormFormat {
            a: a.into(),
            b: b.into(),
            c_star: c_star.into(),
            profile: BumpProfile::default(),
            shift: 0,
            base: default_base(),
        }
    }

    pub fn with_profile(mut self, profile: BumpProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_shift(mut self, shift: u8) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_base(mut self, base: f64) -> Self {
        self.base = base;
        self
    }

    /// `r_i = r - Δr_i`.
    pub fn effective_scale(&self, r: i32) -> i32 {
        r - self.shift as i32
    }

    /// Mollifier at the effective scale of cut-off `r`.
    pub fn mollifier(&self, r: i32) -> Result<Mollifier> {
        Mollifier::new(self.profile, self.effective_scale(r), self.base)
    }

    /// `Δ = [C*]`.
    pub fn delta(&self, s: &OpeStructure) -> Result<f64> {
        Ok(s.label(&self.c_star)?.dim)
    }

    /// Kernel of the target channel `C_AB^{C*}`.
    pub fn target_kernel(&self, s: &OpeStructure) -> Kernel {
        s.kernel(&self.a, &self.b, &self.c_star)
    }

    /// Channels `C ∈ A(Δ) \ {C*}` with their kernels, in alphabet order.
    pub fn subtracted_channels<'s>(&self, s: &'s OpeStructure) -> Result<Vec<(&'s Label, Kernel)>> {
        let delta = self.delta(s)?;
        Ok(s.admissible(delta)
            .into_iter()
            .filter(|c| c.id != self.c_star)
            .map(|c| (c, s.kernel(&self.a, &self.b, &c.id)))
            .collect())
    }

    /// Labels exist, the shift is 0 or 1, `L > 1` and `[C*] < d/2`.
    pub fn validate(&self, s: &OpeStructure) -> Result<()> {
        for id in [&self.a, &self.b, &self.c_star] {
            s.label(id)?;
        }
        if self.shift > 1 {
            return Err(Error::Format(format!("shift must be 0 or 1, got {}", self.shift)));
        }
        if !(self.base > 1.0) {
            return Err(Error::Range(format!("base L must exceed 1, got {}", self.base)));
        }
        BumpProfile::new(self.profile.sharpness, self.profile.radius)?;
        let delta = self.delta(s)?;
        if delta >= s.d as f64 / 2.0 {
            return Err(Error::Format(format!(
                "[{}] = {delta} is not below d/2",
                self.c_star
            )));
        }
        Ok(())
    }
}

/// A moment: `m` renormalized factors followed by `n - m` spectator labels,
/// one test function per factor, at cut-off `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    #[serde(default)]
    pub factors: Vec<RenormFormat>,
    #[serde(default)]
    pub spectators: Vec<String>,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
    pub r: i32,
}

impl MomentSpec {
    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn n(&self) -> usize {
        self.factors.len() + self.spectators.len()
    }

    /// Label inserted at position `i`: `C*_i` for a factor, `A_i` for a spectator.
    pub fn label(&self, i: usize) -> &str {
        if i < self.m() {
            &self.factors[i].c_star
        } else {
            &self.spectators[i - self.m()]
        }
    }

    pub fn validate(&self, s: &OpeStructure) -> Result<()> {
        if self.test_functions.len() != self.n() {
            return Err(Error::Format(format!(
                "{} test functions for {} factors",
                self.test_functions.len(),
                self.n()
            )));
        }
        if self.r > 0 {
            return Err(Error::Range(format!("cut-off index must be <= 0, got {}", self.r)));
        }
        for f in &self.factors {
            f.validate(s)?;
        }
        for id in &self.spectators {
            s.label(id)?;
        }
        for f in &self.test_functions {
            f.validate()?;
            if f.d() != s.d {
                return Err(Error::Format("test function of the wrong dimension".into()));
            }
        }
        Ok(())
    }
}
