use super::config::PointConfiguration;
use super::label::Label;
use super::structure::{Kernel, OpeStructure};
use super::system::CorrelationSystem;
use crate::Result;

/// One factor of a coefficient function on `Conf_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffFactor {
    Scalar(f64),
    /// Kernel evaluated at points `(i, j)` of the element.
    Kernel { kernel: Kernel, i: usize, j: usize },
}

/// A coefficient function times a tensor product of basis fields.
#[derive(Clone, Debug, PartialEq)]
pub struct VTerm {
    pub factors: Vec<CoeffFactor>,
    pub labels: Vec<Label>,
}

impl VTerm {
    /// Coefficient value; factor values are multiplied in sorted order so the
    /// result does not depend on the order in which factors were collected.
    pub fn coefficient(&self, points: &[Vec<f64>]) -> f64 {
        let mut vals: Vec<f64> = self
            .factors
            .iter()
            .map(|f| match f {
                CoeffFactor::Scalar(c) => *c,
                CoeffFactor::Kernel { kernel, i, j } => kernel.eval(&points[*i], &points[*j]),
            })
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.into_iter().product()
    }

    fn has_zero_kernel(&self) -> bool {
        self.factors.iter().any(|f| match f {
            CoeffFactor::Kernel { kernel, .. } => kernel.is_zero(),
            CoeffFactor::Scalar(c) => *c == 0.0,
        })
    }
}

/// Element of the free module `V_n` over functions on `Conf_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct VElement {
    pub arity: usize,
    pub terms: Vec<VTerm>,
}

impl VElement {
    /// `O_{A_1} ⊗ ... ⊗ O_{A_n}` with unit coefficient.
    pub fn basis(labels: Vec<Label>) -> Self {
        VElement {
            arity: labels.len(),
            terms: vec![VTerm {
                factors: Vec::new(),
                labels,
            }],
        }
    }

    pub fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.factors.push(CoeffFactor::Scalar(c));
        }
        self
    }

    /// Formal sum; arities must agree.
    pub fn add(mut self, other: VElement) -> Self {
        assert_eq!(self.arity, other.arity, "adding elements of different arity");
        self.terms.extend(other.terms);
        self
    }

    pub fn sub(self, other: VElement) -> Self {
        self.add(other.scale(-1.0))
    }

    /// Concatenation `P ⊗ Q` (arity `m + n`).
    pub fn concat(&self, other: &VElement) -> VElement {
        let shift = self.arity;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for p in &self.terms {
            for q in &other.terms {
                let mut factors = p.factors.clone();
                factors.extend(q.factors.iter().map(|f| match f {
                    CoeffFactor::Scalar(c) => CoeffFactor::Scalar(*c),
                    CoeffFactor::Kernel { kernel, i, j } => CoeffFactor::Kernel {
                        kernel: *kernel,
                        i: i + shift,
                        j: j + shift,
                    },
                }));
                let mut labels = p.labels.clone();
                labels.extend(q.labels.iter().cloned());
                terms.push(VTerm { factors, labels });
            }
        }
        VElement {
            arity: self.arity + other.arity,
            terms,
        }
    }

    /// `<P(x_1..x_n) O_{B_1}(z_1) ...>`: the element is evaluated on the first
    /// `arity` points of `config`, spectators sit on the remaining points.
    ///
    /// Terms whose coefficient contains a zero kernel are skipped. Term values
    /// are summed in sorted order.
    pub fn evaluate(
        &self,
        system: &dyn CorrelationSystem,
        config: &PointConfiguration,
        spectators: &[Label],
    ) -> Result<f64> {
        if config.len() != self.arity + spectators.len() {
            return Err(crate::Error::Format(format!(
                "element of arity {} with {} spectators evaluated on {} points",
                self.arity,
                spectators.len(),
                config.len()
            )));
        }
        let mut values = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.has_zero_kernel() {
                continue;
            }
            let mut labels = t.labels.clone();
            labels.extend(spectators.iter().cloned());
            let corr = super::system::eval_correlation(system, &labels, config)?;
            values.push(t.coefficient(config.points()) * corr);
        }
        values.sort_by(f64::total_cmp);
        Ok(values.into_iter().sum())
    }
}

/// `O_A ⊗ O_B - Σ_{C ∈ A(Δ)} C_AB^C · O_1 ⊗ O_C`.
///
/// Evaluated at `(y, x)`, the second point carries the channel fields.
pub fn ope_element(structure: &OpeStructure, a: &str, b: &str, delta: f64) -> Result<VElement> {
    let la = structure.label(a)?.clone();
    let lb = structure.label(b)?.clone();
    let one = structure.identity().clone();
    let mut terms = vec![VTerm {
        factors: Vec::new(),
        labels: vec![la, lb],
    }];
    for c in structure.admissible(delta) {
        terms.push(VTerm {
            factors: vec![
                CoeffFactor::Scalar(-1.0),
                CoeffFactor::Kernel {
                    kernel: structure.kernel(a, b, &c.id),
                    i: 0,
                    j: 1,
                },
            ],
            labels: vec![one.clone(), c.clone()],
        });
    }
    Ok(VElement { arity: 2, terms })
}

/// `O_A ⊗ O_1 - O_1 ⊗ O_A`.
pub fn cz_element(structure: &OpeStructure, a: &str) -> Result<VElement> {
    let la = structure.label(a)?.clone();
    let one = structure.identity().clone();
    Ok(VElement::basis(vec![la.clone(), one.clone()]).sub(VElement::basis(vec![one, la])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr_core::FreeFieldCorrelations;
    use crate::free_field::KappaMode;

    fn setup() -> (FreeFieldCorrelations, OpeStructure) {
        let s = FreeFieldCorrelations::new(1, 0.2, KappaMode::Explicit(1.3), 3).unwrap();
        let o = s.ope_structure().unwrap();
        (s, o)
    }

    #[test]
    fn ope_channels_for_phi_phi() {
        let (_, o) = setup();
        let e = ope_element(&o, "phi", "phi", 0.4).unwrap();
        assert_eq!(e.terms.len(), 4);
        let pts = vec![vec![0.5], vec![0.0]];
        let coeffs: Vec<f64> = e.terms[1..].iter().map(|t| -t.coefficient(&pts)).collect();
        assert!((coeffs[0] - 1.3 * 0.5f64.powf(-0.4)).abs() < 1e-14);
        assert_eq!(coeffs[1], 0.0);
        assert_eq!(coeffs[2], 1.0);
    }

    #[test]
    fn cz_value_with_spectator() {
        let (s, o) = setup();
        let cz = cz_element(&o, "phi").unwrap();
        let (y, x, z) = (0.3, -0.2, 2.0);
        let c = PointConfiguration::from_1d(&[y, x, z]).unwrap();
        let v = cz.evaluate(&s, &c, &[s.phi()]).unwrap();
        let k = |r: f64| 1.3 * r.abs().powf(-0.4);
        assert!((v - (k(y - z) - k(x - z))).abs() < 1e-14);
        let c = PointConfiguration::new_unchecked(vec![vec![x], vec![x], vec![z]]);
        assert_eq!(cz.evaluate(&s, &c, &[s.phi()]).unwrap(), 0.0);
    }
}
