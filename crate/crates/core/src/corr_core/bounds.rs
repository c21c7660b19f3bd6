use serde::{Deserialize, Serialize};

use super::config::{distance, japanese, PointConfiguration};
use super::label::Label;
use super::structure::{BoundParams, OpeStructure};
use super::system::{eval_correlation, CorrelationSystem};
use super::velement::{cz_element, ope_element, VElement};
use crate::{Error, Result};

/// One comparison `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl BoundEntry {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        BoundEntry {
            lhs,
            rhs,
            ratio,
            pass: ratio <= 1.0,
        }
    }
}

/// Per-configuration comparisons plus the maximum ratio.
///
/// `empirical_k` is the smallest constant that would have made every entry
/// pass (the configured `K` times the maximum ratio).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub entries: Vec<BoundEntry>,
    pub max_ratio: f64,
    pub empirical_k: Option<f64>,
    pub pass: bool,
}

impl BoundReport {
    pub fn from_entries(name: String, entries: Vec<BoundEntry>) -> Self {
        let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
        let pass = entries.iter().all(|e| e.pass);
        BoundReport {
            name,
            entries,
            max_ratio,
            empirical_k: None,
            pass,
        }
    }

    /// Worst case over a finite family of reports.
    pub fn worst_case(name: String, reports: &[BoundReport]) -> Self {
        let entries: Vec<BoundEntry> = reports.iter().flat_map(|r| r.entries.iter().cloned()).collect();
        let mut out = Self::from_entries(name, entries);
        out.empirical_k = reports
            .iter()
            .filter_map(|r| r.empirical_k)
            .reduce(f64::max);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTemplate {
    /// `|C_AB^C(x,y)| <= K |x-y|^{-([A]+[B]-[C]+ε)} <x>^k <y>^k`
    HardC,
    /// `C_AB^C(x,y) >= K^{-1} |x-y|^{-([A]+[B]-[C]-ε)} <x>^{-k} <y>^{-k}`
    Nondeg,
    /// Basic factorized nearest-neighbor bound.
    Bfnnb,
    /// Enhanced factorized nearest-neighbor bound.
    Efnnb,
}

/// One factor of an enhanced format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormatFactor {
    /// OPE-like element at `(y_i, x_i)`; `y_i` is virtual.
    Ope { a: String, b: String, delta: f64 },
    /// CZ-like element at `(y_i, x_i)`; `y_i` is virtual.
    Cz { label: String },
    /// Plain field at the effective point `x_i`.
    Plain { label: String },
}

impl FormatFactor {
    fn is_two_point(&self) -> bool {
        !matches!(self, FormatFactor::Plain { .. })
    }
}

/// The format of a bound check.
///
/// For `Enhanced`, configurations list the effective points `x_1..x_N` (one per
/// factor, in order) followed by the virtual points `y_i` of the two-point
/// factors, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundFormat {
    Triple { a: String, b: String, c: String },
    Plain { labels: Vec<String> },
    Enhanced { factors: Vec<FormatFactor> },
}

/// Evaluate a bound template on a list of configurations.
pub fn check_bound(
    template: BoundTemplate,
    structure: &OpeStructure,
    system: &dyn CorrelationSystem,
    format: &BoundFormat,
    configs: &[PointConfiguration],
    params: &BoundParams,
) -> Result<BoundReport> {
    params.validate()?;
    let entries: Vec<BoundEntry> = match (template, format) {
        (BoundTemplate::HardC | BoundTemplate::Nondeg, BoundFormat::Triple { a, b, c }) => {
            let kernel = structure.kernel(a, b, c);
            let s = structure.label(a)?.dim + structure.label(b)?.dim - structure.label(c)?.dim;
            configs
                .iter()
                .map(|cfg| {
                    expect_points(cfg, 2)?;
                    let (x, y) = (cfg.point(0), cfg.point(1));
                    let r = distance(x, y);
                    let weight = (japanese(x) * japanese(y)).powi(params.k as i32);
                    let value = kernel.eval(x, y);
                    Ok(if template == BoundTemplate::HardC {
                        BoundEntry::new(value.abs(), params.big_k * r.powf(-(s + params.epsilon)) * weight)
                    } else {
                        let lower = r.powf(-(s - params.epsilon)) / (params.big_k * weight);
                        let mut e = BoundEntry::new(lower, value);
                        if value <= 0.0 {
                            e.ratio = f64::INFINITY;
                            e.pass = false;
                        }
                        e
                    })
                })
                .collect::<Result<_>>()?
        }
        (BoundTemplate::Bfnnb, BoundFormat::Plain { labels }) => {
            let labels: Vec<Label> = labels
                .iter()
                .map(|l| structure.label(l).cloned())
                .collect::<Result<_>>()?;
            configs
                .iter()
                .map(|cfg| {
                    expect_points(cfg, labels.len())?;
                    let lhs = eval_correlation(system, &labels, cfg)?.abs();
                    let mut rhs = params.big_k;
                    for (i, l) in labels.iter().enumerate() {
                        rhs *= japanese(cfg.point(i)).powi(params.k as i32)
                            * nn_power(cfg.nn_distance(i), l.dim + params.epsilon);
                    }
                    Ok(BoundEntry::new(lhs, rhs))
                })
                .collect::<Result<_>>()?
        }
        (BoundTemplate::Bfnnb, BoundFormat::Enhanced { factors }) => {
            if factors.iter().any(FormatFactor::is_two_point) {
                return Err(Error::Format(
                    "basic bound cannot carry OPE-like or CZ-like factors (virtual points would be treated as effective)".into(),
                ));
            }
            let labels = factors
                .iter()
                .map(|f| match f {
                    FormatFactor::Plain { label } => label.clone(),
                    _ => unreachable!(),
                })
                .collect();
            return check_bound(template, structure, system, &BoundFormat::Plain { labels }, configs, params);
        }
        (BoundTemplate::Efnnb, BoundFormat::Enhanced { factors }) => {
            efnnb_entries(structure, system, factors, configs, params)?
        }
        (BoundTemplate::Efnnb, BoundFormat::Plain { labels }) => {
            let factors: Vec<FormatFactor> = labels
                .iter()
                .map(|l| FormatFactor::Plain { label: l.clone() })
                .collect();
            efnnb_entries(structure, system, &factors, configs, params)?
        }
        (t, f) => {
            return Err(Error::Format(format!(
                "template {t:?} does not accept format {f:?}"
            )))
        }
    };
    let mut report = BoundReport::from_entries(format!("{template:?}"), entries);
    report.empirical_k = Some(params.big_k * report.max_ratio);
    Ok(report)
}

fn expect_points(cfg: &PointConfiguration, n: usize) -> Result<()> {
    if cfg.len() != n {
        return Err(Error::Format(format!(
            "configuration has {} points, format needs {n}",
            cfg.len()
        )));
    }
    Ok(())
}

/// `nn^{-e}` with the convention `∞^{-e} = 0` for `e > 0` and `1` for `e = 0`.
fn nn_power(nn: f64, e: f64) -> f64 {
    if nn.is_infinite() {
        if e > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        nn.powf(-e)
    }
}

fn efnnb_entries(
    structure: &OpeStructure,
    system: &dyn CorrelationSystem,
    factors: &[FormatFactor],
    configs: &[PointConfiguration],
    params: &BoundParams,
) -> Result<Vec<BoundEntry>> {
    let n_eff = factors.len();
    let two_point: Vec<usize> = (0..n_eff).filter(|&i| factors[i].is_two_point()).collect();
    // Build the product element; its point order is (y_i, x_i) per two-point
    // factor and x_i per plain factor.
    let mut element = VElement::basis(Vec::new());
    let mut order: Vec<usize> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let piece = match f {
            FormatFactor::Ope { a, b, delta } => ope_element(structure, a, b, *delta)?,
            FormatFactor::Cz { label } => cz_element(structure, label)?,
            FormatFactor::Plain { label } => VElement::basis(vec![structure.label(label)?.clone()]),
        };
        if f.is_two_point() {
            let slot = two_point.iter().position(|&t| t == i).unwrap();
            order.push(n_eff + slot);
        }
        order.push(i);
        element = element.concat(&piece);
    }
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        expect_points(cfg, n_eff + two_point.len())?;
        let xs = PointConfiguration::new_unchecked(cfg.points()[..n_eff].to_vec());
        let nn: Vec<f64> = (0..n_eff).map(|i| xs.nn_distance(i)).collect();
        let mut indicator = true;
        let mut rhs = params.big_k;
        for (i, f) in factors.iter().enumerate() {
            let x = cfg.point(i);
            rhs *= japanese(x).powi(params.k as i32);
            let eps = params.epsilon;
            let g = params.gamma;
            match f {
                FormatFactor::Plain { label } => {
                    rhs *= nn_power(nn[i], structure.label(label)?.dim + eps);
                }
                _ => {
                    let slot = two_point.iter().position(|&t| t == i).unwrap();
                    let y = cfg.point(n_eff + slot);
                    let h = distance(x, y);
                    rhs *= japanese(y).powi(params.k as i32);
                    if h > params.eta * nn[i] {
                        indicator = false;
                    }
                    match f {
                        FormatFactor::Ope { a, b, delta } => {
                            let ab = structure.label(a)?.dim + structure.label(b)?.dim;
                            rhs *= h.powf(delta + g - ab) * nn_power(nn[i], delta + g + eps);
                        }
                        FormatFactor::Cz { label } => {
                            rhs *= h.powf(g) * nn_power(nn[i], structure.label(label)?.dim + g + eps);
                        }
                        FormatFactor::Plain { .. } => unreachable!(),
                    }
                }
            }
        }
        let lhs = if indicator {
            let pts: Vec<Vec<f64>> = order.iter().map(|&k| cfg.point(k).to_vec()).collect();
            let pc = PointConfiguration::new(pts)?;
            element.evaluate(system, &pc, &[])?.abs()
        } else {
            0.0
        };
        out.push(BoundEntry::new(lhs, rhs));
    }
    Ok(out)
}
