use serde::{Deserialize, Serialize};

use super::label::{Label, Parity, IDENTITY};
use crate::{Error, Result};

/// Closed-form OPE coefficient kernel `C_AB^C(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Constant { value: f64 },
    /// `prefactor * |x - y|^{-exponent}`
    PowerLaw { exponent: f64, prefactor: f64 },
    Zero,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Constant { value } => value,
            Kernel::PowerLaw { exponent, prefactor } => {
                let r = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                prefactor * r.powf(-exponent)
            }
            Kernel::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Kernel::Zero => true,
            Kernel::Constant { value } => value == 0.0,
            Kernel::PowerLaw { prefactor, .. } => prefactor == 0.0,
        }
    }

    /// Singularity exponent at coincidence (zero for constant kernels).
    pub fn exponent(&self) -> f64 {
        match *self {
            Kernel::PowerLaw { exponent, .. } => exponent,
            _ => 0.0,
        }
    }
}

/// Constants `η, γ, ε, k, K` shared by the factorized bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub eta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub k: u32,
    #[serde(rename = "K")]
    pub big_k: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            eta: 1.0,
            gamma: 1.0,
            epsilon: 0.0,
            k: 0,
            big_k: 1.0,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.gamma > 0.0 && self.big_k > 0.0 && self.epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "bound parameters need eta, gamma, K > 0 and epsilon >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub a: String,
    pub b: String,
    pub c: String,
    #[serde(flatten)]
    pub kernel: Kernel,
}

/// Alphabet, dimensions and OPE structure constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpeStructure {
    pub d: usize,
    #[serde(rename = "labels")]
    pub alphabet: Vec<Label>,
    #[serde(default)]
    pub coeff: Vec<CoeffEntry>,
    #[serde(default)]
    pub bound_params: BoundParams,
}

impl OpeStructure {
    pub fn new(d: usize, alphabet: Vec<Label>, coeff: Vec<CoeffEntry>, bound_params: BoundParams) -> Result<Self> {
        let s = OpeStructure {
            d,
            alphabet,
            coeff,
            bound_params,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        match self.alphabet.iter().find(|l| l.is_identity()) {
            Some(l) if l.dim == 0.0 => {}
            Some(l) => {
                return Err(Error::Config(format!(
                    "identity label must have dimension 0, got {}",
                    l.dim
                )))
            }
            None => return Err(Error::Config("alphabet lacks the identity label".into())),
        }
        for (i, l) in self.alphabet.iter().enumerate() {
            if !(l.dim >= 0.0) {
                return Err(Error::Config(format!("label `{}` has negative dimension", l.id)));
            }
            if self.alphabet[..i].iter().any(|m| m.id == l.id) {
                return Err(Error::Config(format!("duplicate label `{}`", l.id)));
            }
        }
        for e in &self.coeff {
            for id in [&e.a, &e.b, &e.c] {
                self.label(id)?;
            }
        }
        self.bound_params.validate()
    }

    pub fn label(&self, id: &str) -> Result<&Label> {
        self.alphabet
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn identity(&self) -> &Label {
        self.label(IDENTITY).expect("validated structure has identity")
    }

    /// `C_AB^C`; undeclared triples are the zero kernel.
    pub fn kernel(&self, a: &str, b: &str, c: &str) -> Kernel {
        self.coeff
            .iter()
            .find(|e| e.a == a && e.b == b && e.c == c)
            .map(|e| e.kernel)
            .unwrap_or(Kernel::Zero)
    }

    /// `A(Δ) = {A : [A] <= Δ}` in alphabet order. Zero channels are kept.
    pub fn admissible(&self, delta: f64) -> Vec<&Label> {
        self.alphabet
            .iter()
            .filter(|l| l.dim <= delta + 1e-12)
            .collect()
    }

    /// Structure constants of the Wick powers `:φ^j:` of the free field.
    ///
    /// `:φ^j:(x) :φ^k:(y)` contracts `p` pairs into `:φ^{j+k-2p}:(y)` with
    /// coefficient `p! C(j,p) C(k,p) κ^p |x-y|^{-2p[φ]}` (leading term of the
    /// Taylor expansion); every other channel is the zero kernel. In
    /// particular `C_φφ^1 = κ|x-y|^{-2[φ]}`, `C_φφ^φ = 0` and `C_φφ^{φ²} = 1`.
    pub fn free_field(d: usize, dim_phi: f64, kappa: f64, max_power: u32) -> Result<Self> {
        let alphabet: Vec<Label> = (0..=max_power).map(|k| wick_label(k, dim_phi)).collect();
        let mut coeff = Vec::new();
        for j in 0..=max_power {
            for k in 0..=max_power {
                for l in 0..=max_power {
                    let kernel = if (j + k) >= l && (j + k - l) % 2 == 0 && (j + k - l) / 2 <= j.min(k) {
                        let p = (j + k - l) / 2;
                        let mult = factorial(p) * binom(j, p) * binom(k, p);
                        if p == 0 {
                            Kernel::Constant { value: 1.0 }
                        } else {
                            Kernel::PowerLaw {
                                exponent: 2.0 * p as f64 * dim_phi,
                                prefactor: mult * kappa.powi(p as i32),
                            }
                        }
                    } else {
                        Kernel::Zero
                    };
                    coeff.push(CoeffEntry {
                        a: alphabet[j as usize].id.clone(),
                        b: alphabet[k as usize].id.clone(),
                        c: alphabet[l as usize].id.clone(),
                        kernel,
                    });
                }
            }
        }
        OpeStructure::new(d, alphabet, coeff, BoundParams::default())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: OpeStructure = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

/// Label of the Wick power `:φ^k:`: ids `1`, `phi`, `phi^2`, ...
pub fn wick_label(k: u32, dim_phi: f64) -> Label {
    let id = match k {
        0 => IDENTITY.to_string(),
        1 => "phi".to_string(),
        _ => format!("phi^{k}"),
    };
    let parity = if k.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
    Label::new(id, k as f64 * dim_phi, parity)
}

/// Inverse of [`wick_label`] on ids.
pub fn wick_power(id: &str) -> Option<u32> {
    match id {
        IDENTITY => Some(0),
        "phi" => Some(1),
        _ => id.strip_prefix("phi^")?.parse().ok(),
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i) / f64::from(i + 1)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_field_phi_phi_channels() {
        let s = OpeStructure::free_field(1, 0.2, 3.0, 2).unwrap();
        assert_eq!(
            s.kernel("phi", "phi", "1"),
            Kernel::PowerLaw {
                exponent: 0.4,
                prefactor: 3.0
            }
        );
        assert!(s.kernel("phi", "phi", "phi").is_zero());
        assert_eq!(s.kernel("phi", "phi", "phi^2"), Kernel::Constant { value: 1.0 });
        let ids: Vec<&str> = s.admissible(0.4).iter().map(|l| l.id.as_str()).collect();
        assert_eq!(ids, ["1", "phi", "phi^2"]);
        assert_eq!(s.kernel("phi^2", "phi^2", "1"), Kernel::PowerLaw { exponent: 0.8, prefactor: 18.0 });
    }

    #[test]
    fn toml_round_trip() {
        let s = OpeStructure::free_field(2, 0.3, 1.5, 2).unwrap();
        let text = s.to_toml().unwrap();
        assert!(text.contains("power_law"));
        let back = OpeStructure::from_toml(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn integer_literals_are_accepted() {
        let text = r#"
d = 1
[[labels]]
id = "1"
dim = 0
parity = "even"
[[labels]]
id = "phi"
dim = 0.25
parity = "odd"
[[coeff]]
a = "phi"
b = "phi"
c = "1"
kind = "constant"
value = 2
"#;
        let s = OpeStructure::from_toml(text).unwrap();
        assert_eq!(s.kernel("phi", "phi", "1"), Kernel::Constant { value: 2.0 });
        assert_eq!(s.kernel("phi", "phi", "phi"), Kernel::Zero);
    }

    #[test]
    fn missing_identity_is_rejected() {
        let r = OpeStructure::new(1, vec![wick_label(1, 0.2)], vec![], BoundParams::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
