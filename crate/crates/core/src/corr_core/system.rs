use std::collections::HashMap;

use super::config::PointConfiguration;
use super::label::Label;
use super::structure::{wick_label, wick_power, OpeStructure};
use crate::free_field::{kappa, KappaMode};
use crate::{Error, Result};

/// An abstract system of pointwise correlations `<O_{A_1}(x_1) ... O_{A_n}(x_n)>`.
///
/// Implementations must be symmetric under simultaneous permutation of labels
/// and points, satisfy the forgetful property for the identity label, and
/// return 1 on the empty tuple.
pub trait CorrelationSystem: Send + Sync {
    fn d(&self) -> usize;
    fn alphabet(&self) -> &[Label];
    /// Caller guarantees `labels.len() == config.len()`.
    fn correlation(&self, labels: &[Label], config: &PointConfiguration) -> Result<f64>;
}

/// Checked evaluation of a pointwise correlation.
pub fn eval_correlation(
    system: &dyn CorrelationSystem,
    labels: &[Label],
    config: &PointConfiguration,
) -> Result<f64> {
    if labels.len() != config.len() {
        return Err(Error::Format(format!(
            "{} labels for {} points",
            labels.len(),
            config.len()
        )));
    }
    if !config.is_empty() && config.dim() != system.d() {
        return Err(Error::Format(format!(
            "points of dimension {} for a system in dimension {}",
            config.dim(),
            system.d()
        )));
    }
    system.correlation(labels, config)
}

/// Correlations of Wick powers of the fractional massless free field:
/// sums over complete matchings of legs with no matching internal to a vertex,
/// each matched pair contributing `κ |u - v|^{-2[φ]}`.
#[derive(Clone, Debug)]
pub struct FreeFieldCorrelations {
    pub d: usize,
    pub dim_phi: f64,
    pub kappa_mode: KappaMode,
    pub kappa: f64,
    pub max_power: u32,
    alphabet: Vec<Label>,
}

impl FreeFieldCorrelations {
    pub fn new(d: usize, dim_phi: f64, kappa_mode: KappaMode, max_power: u32) -> Result<Self> {
        let kappa = kappa(d, dim_phi, kappa_mode)?;
        Ok(FreeFieldCorrelations {
            d,
            dim_phi,
            kappa_mode,
            kappa,
            max_power,
            alphabet: (0..=max_power).map(|k| wick_label(k, dim_phi)).collect(),
        })
    }

    /// The label `:φ^k:`.
    pub fn label(&self, k: u32) -> Result<Label> {
        if k > self.max_power {
            return Err(Error::UnknownLabel(wick_label(k, self.dim_phi).id));
        }
        Ok(self.alphabet[k as usize].clone())
    }

    pub fn phi(&self) -> Label {
        self.alphabet[1].clone()
    }

    /// The matching OPE structure (`κ` taken from this system).
    pub fn ope_structure(&self) -> Result<OpeStructure> {
        OpeStructure::free_field(self.d, self.dim_phi, self.kappa, self.max_power)
    }

    /// Two-point function `κ r^{-2[φ]}`.
    pub fn propagator(&self, r: f64) -> f64 {
        self.kappa * r.powf(-2.0 * self.dim_phi)
    }

    fn power_of(&self, label: &Label) -> Result<u32> {
        match wick_power(&label.id) {
            Some(k) if k <= self.max_power => Ok(k),
            _ => Err(Error::UnknownLabel(label.id.clone())),
        }
    }
}

impl CorrelationSystem for FreeFieldCorrelations {
    fn d(&self) -> usize {
        self.d
    }

    fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    fn correlation(&self, labels: &[Label], config: &PointConfiguration) -> Result<f64> {
        // Identity insertions are dropped first (forgetful property); the
        // remaining points must be pairwise distinct.
        let mut verts: Vec<(u32, &[f64], usize)> = Vec::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            let k = self.power_of(l)?;
            if k > 0 {
                verts.push((k, config.point(i), i));
            }
        }
        for a in 0..verts.len() {
            for b in a + 1..verts.len() {
                if verts[a].1 == verts[b].1 {
                    return Err(Error::Diagonal(verts[a].2, verts[b].2));
                }
            }
        }
        let legs: u32 = verts.iter().map(|v| v.0).sum();
        if legs % 2 == 1 {
            return Ok(0.0);
        }
        // Canonical order makes the value exactly permutation invariant.
        verts.sort_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| {
                a.1.iter()
                    .zip(b.1)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let n = verts.len();
        let mut prop = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let r = super::config::distance(verts[a].1, verts[b].1);
                prop[a * n + b] = self.propagator(r);
            }
        }
        let mut rem: Vec<u32> = verts.iter().map(|v| v.0).collect();
        let mut memo = HashMap::new();
        let s = match_sum(0, 1, &mut rem, &prop, n, &mut memo);
        let mult: f64 = verts.iter().map(|v| factorial(v.0)).product();
        Ok(mult * s)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Sum over symmetric leg-count matrices `n_ab` (a < b) with row sums `rem`
/// of `Π prop_ab^{n_ab} / n_ab!`, scanning pairs `(a, b)` lexicographically.
fn match_sum(
    a: usize,
    b: usize,
    rem: &mut [u32],
    prop: &[f64],
    n: usize,
    memo: &mut HashMap<(usize, usize, Vec<u32>), f64>,
) -> f64 {
    if a >= n {
        return 1.0;
    }
    if rem[a] == 0 {
        return match_sum(a + 1, a + 2, rem, prop, n, memo);
    }
    if b >= n {
        return 0.0;
    }
    let key = (a, b, rem.to_vec());
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let mut total = 0.0;
    let cmax = rem[a].min(rem[b]);
    let mut term = 1.0;
    for c in 0..=cmax {
        if c > 0 {
            term *= prop[a * n + b] / c as f64;
        }
        rem[a] -= c;
        rem[b] -= c;
        total += term * match_sum(a, b + 1, rem, prop, n, memo);
        rem[a] += c;
        rem[b] += c;
    }
    memo.insert(key, total);
    total
}

/// `<:φ^{k_1}:(x_1) ... >` for the free field; identical to
/// [`eval_correlation`] but named after its diagrammatic content.
pub fn mixed_wick_correlation(
    system: &FreeFieldCorrelations,
    labels: &[Label],
    config: &PointConfiguration,
) -> Result<f64> {
    eval_correlation(system, labels, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(d: usize, dim: f64) -> FreeFieldCorrelations {
        FreeFieldCorrelations::new(d, dim, KappaMode::Explicit(1.0), 4).unwrap()
    }

    #[test]
    fn two_point_at_unit_distance() {
        let s = sys(1, 0.2);
        let c = PointConfiguration::from_1d(&[0.0, 1.0]).unwrap();
        let v = eval_correlation(&s, &[s.phi(), s.phi()], &c).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_four_point() {
        let s = sys(2, 0.5);
        let c = PointConfiguration::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let p = s.phi();
        let v = eval_correlation(&s, &[p.clone(), p.clone(), p.clone(), p], &c).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn mixed_examples() {
        let s = sys(1, 0.2);
        let c = PointConfiguration::from_1d(&[0.0, 1.0, -1.0]).unwrap();
        let v = mixed_wick_correlation(&s, &[s.label(2).unwrap(), s.phi(), s.phi()], &c).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let c2 = PointConfiguration::from_1d(&[0.0, 2.0]).unwrap();
        let v = mixed_wick_correlation(&s, &[s.label(2).unwrap(), s.label(2).unwrap()], &c2).unwrap();
        assert!((v - 2f64.powf(0.2)).abs() < 1e-14);
        let v = mixed_wick_correlation(&s, &[s.label(2).unwrap(), s.phi()], &c2).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn unsupported_power_is_unknown() {
        let s = FreeFieldCorrelations::new(1, 0.2, KappaMode::Explicit(1.0), 2).unwrap();
        let c = PointConfiguration::from_1d(&[0.0, 1.0]).unwrap();
        let l3 = wick_label(3, 0.2);
        assert!(matches!(
            eval_correlation(&s, &[l3, s.phi()], &c),
            Err(Error::UnknownLabel(_))
        ));
    }
}
