use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::blocks::{BlockTable, FactorClass, FactorDims, TermShape, Q};
use super::decomp::{enumerate_decompositions, nontrivial_triples};
use crate::{Error, Result};

/// Dimension `d`, OPE-remainder gain `γ` and slack `ε`, all exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub d: Q,
    pub gamma: Q,
    pub eps: Q,
}

impl PowerParams {
    pub fn new(d: i64, gamma: Q, eps: Q) -> Self {
        PowerParams {
            d: Q::from_integer(d),
            gamma,
            eps,
        }
    }
}

/// Rate `ν` with a flag for nonpositive values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuResult {
    pub value: Q,
    pub positive: bool,
}

/// `ν = min{γ - 2ε, min_i (d/2 - Δ_i - 3ε), min_spectators (d/2 - [A_i] - ε)}`.
pub fn nu(params: &PowerParams, deltas: &[Q], spectators: &[Q]) -> NuResult {
    let half = params.d / Q::from_integer(2);
    let three = Q::from_integer(3);
    let two = Q::from_integer(2);
    let mut v = params.gamma - two * params.eps;
    for &dl in deltas {
        v = v.min(half - dl - three * params.eps);
    }
    for &a in spectators {
        v = v.min(half - a - params.eps);
    }
    NuResult {
        value: v,
        positive: v.is_positive(),
    }
}

fn check_q(shape: &TermShape, q: usize) -> Result<()> {
    let bad = shape.bad();
    if 2 * q > bad {
        return Err(Error::Ledger(format!(
            "2q = {} exceeds |I_B| = {bad}: every bad component holds two bad X vertices",
            2 * q
        )));
    }
    if bad > 0 && q == 0 {
        return Err(Error::Ledger("a nonempty bad set has at least one component".into()));
    }
    Ok(())
}

/// `α_Total = -dq + (γ-ε)|I_1G| + (γ-2ε)|I_2G| + Σ_{I_1B ∪ I_2B} (d - Δ_i - 3ε)
/// + Σ_{I_34 ∩ I_B} (d - [D_i] - ε)`.
pub fn alpha_total(shape: &TermShape, q: usize, params: &PowerParams) -> Result<Q> {
    shape.validate()?;
    check_q(shape, q)?;
    let PowerParams { d, gamma, eps } = *params;
    let three = Q::from_integer(3);
    let mut total = -d * Q::from_integer(q as i64);
    for (i, &c) in shape.classes.iter().enumerate() {
        total += match c {
            FactorClass::Good1 => gamma - eps,
            FactorClass::Good2 => gamma - eps - eps,
            FactorClass::BadOpeOpe1 | FactorClass::BadCzOpe1 | FactorClass::BadY2 | FactorClass::BadX2 => {
                d - shape.factors[i].delta - three * eps
            }
            FactorClass::Bad34 => d - shape.d_dim(i) - eps,
            FactorClass::Good34 => Q::zero(),
        };
    }
    Ok(total)
}

/// Exponent of `L^r` in the prefactor at one stage of the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    /// Per-factor contributions (zero for factors not yet affected).
    pub per_factor: Vec<Q>,
    pub total: Q,
}

impl Stage {
    fn new(name: &str, per_factor: Vec<Q>) -> Self {
        let total = per_factor.iter().copied().sum();
        Stage {
            name: name.into(),
            per_factor,
            total,
        }
    }
}

/// Prefactor exponents through the stages of the bound for one term, the final
/// two-scale integration step and `α_Total`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCountLedger {
    pub params: PowerParams,
    pub shape: TermShape,
    pub q: usize,
    /// Stages II, III (= IV) and V (= VI = VII).
    pub stages: Vec<Stage>,
    /// `-dq`.
    pub root_increment: Q,
    /// `d - β_a` for each bad vertex, in vertex order.
    pub vertex_increments: Vec<Q>,
    /// Stage VIII: stage VII plus the recorded increments.
    pub final_total: Q,
    /// The closed-form `α_Total`.
    pub alpha_total: Q,
    /// `final_total == alpha_total`.
    pub reconciled: bool,
}

impl PowerCountLedger {
    pub fn build(shape: &TermShape, q: usize, params: &PowerParams) -> Result<Self> {
        let alpha = alpha_total(shape, q, params)?;
        let PowerParams { d, gamma, eps } = *params;
        let two = Q::from_integer(2);
        let n = shape.n;
        let dims = |i: usize| shape.factors[i];
        let stage2: Vec<Q> = (0..n)
            .map(|i| {
                let c = shape.classes[i];
                if c.in_i1() || c.in_i2() {
                    let f = dims(i);
                    f.a + f.b - f.delta - two * d - eps
                } else {
                    Q::zero()
                }
            })
            .collect();
        let stage3: Vec<Q> = (0..n)
            .map(|i| {
                let c = shape.classes[i];
                if c.in_i1() {
                    let f = dims(i);
                    f.a + f.b - f.delta - d - eps
                } else if c.in_i2() {
                    -d - two * eps
                } else {
                    Q::zero()
                }
            })
            .collect();
        let stage5: Vec<Q> = (0..n)
            .map(|i| match shape.classes[i] {
                FactorClass::Good1 => gamma - eps,
                FactorClass::BadOpeOpe1 => {
                    let f = dims(i);
                    f.a + f.b - f.delta - d - eps
                }
                FactorClass::BadCzOpe1 => {
                    let f = dims(i);
                    f.channel.unwrap() - f.delta - two * eps
                }
                FactorClass::Good2 => gamma - two * eps,
                FactorClass::BadY2 => -d - two * eps,
                FactorClass::BadX2 => -two * eps,
                FactorClass::Good34 | FactorClass::Bad34 => Q::zero(),
            })
            .collect();
        let stages = vec![
            Stage::new("II", stage2),
            Stage::new("III", stage3),
            Stage::new("V", stage5),
        ];
        let table = BlockTable::build(shape, gamma, eps)?;
        let vertex_increments: Vec<Q> = table.v_bad().iter().map(|&a| d - table.vertices[a].beta).collect();
        let root_increment = -d * Q::from_integer(q as i64);
        let final_total = stages[2].total + root_increment + vertex_increments.iter().copied().sum::<Q>();
        Ok(PowerCountLedger {
            params: *params,
            shape: shape.clone(),
            q,
            stages,
            root_increment,
            vertex_increments,
            final_total,
            alpha_total: alpha,
            reconciled: final_total == alpha,
        })
    }
}

/// Outcome for one term of the exhaustive check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub classes: Vec<FactorClass>,
    pub factors: Vec<FactorDims>,
    pub spectators: Vec<Q>,
    pub q: usize,
    pub alpha_total: Q,
    pub nu: Q,
    /// `ν (|I_1| + |I_2|)`.
    pub bound: Q,
    pub reconciled: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub params: PowerParams,
    pub max_m: usize,
    pub max_n: usize,
    pub terms: usize,
    /// Smallest `α_Total - ν (|I_1| + |I_2|)` over all terms.
    pub min_margin: Option<Q>,
    /// Terms with a nonpositive rate `ν` (the inequality is then not
    /// informative) are counted here and still checked.
    pub nonpositive_nu: usize,
    pub failures: Vec<TermReport>,
    pub pass: bool,
}

fn product<T: Clone>(choices: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                choices.iter().map(move |c| {
                    let mut w = v.clone();
                    w.push(c.clone());
                    w
                })
            })
            .collect();
    }
    out
}

/// Check `α_Total >= ν (|I_1| + |I_2|)` in exact arithmetic over every term
/// with `m <= max_m` renormalized factors and `n <= max_n` total factors:
/// all factor and spectator dimension choices, all decompositions other than
/// `(∅, ∅, [m])`, all good/bad splits, all channels `[C_i] <= Δ_i` drawn from
/// `channel_dims` for factors in `I_1BCO`, and all admissible component counts
/// `q`. Every ledger is also reconciled against the closed form.
pub fn exhaustive_power_count(
    params: &PowerParams,
    factor_choices: &[FactorDims],
    spectator_choices: &[Q],
    channel_dims: &[Q],
    max_m: usize,
    max_n: usize,
) -> Result<ExhaustiveReport> {
    let mut terms = 0;
    let mut failures = Vec::new();
    let mut min_margin: Option<Q> = None;
    let mut nonpositive_nu = 0;
    for m in 0..=max_m {
        for n in m.max(1)..=max_n {
            for factors in product(factor_choices, m) {
                for spectators in product(spectator_choices, n - m) {
                    let deltas: Vec<Q> = factors.iter().map(|f| f.delta).collect();
                    let rate = nu(params, &deltas, &spectators);
                    for triple in nontrivial_triples(m)? {
                        let split1s = enumerate_decompositions(&triple.parts[0], 3)?;
                        let split2s = enumerate_decompositions(&triple.parts[1], 3)?;
                        let i34: Vec<usize> = triple.parts[2].iter().copied().chain(m..n).collect();
                        let bad_splits = enumerate_decompositions(&i34, 2)?;
                        for s1 in &split1s {
                            for s2 in &split2s {
                                for bs in &bad_splits {
                                    let bco = &s1.parts[2];
                                    let channel_sets: Vec<Vec<Q>> = bco
                                        .iter()
                                        .map(|&i| channel_dims.iter().copied().filter(|&c| c <= factors[i].delta).collect())
                                        .collect();
                                    for channels in cartesian(&channel_sets) {
                                        let mut fs = factors.clone();
                                        for (&i, &c) in bco.iter().zip(&channels) {
                                            fs[i] = fs[i].with_channel(c);
                                        }
                                        let shape = TermShape::from_decompositions(
                                            &triple,
                                            s1,
                                            s2,
                                            &bs.parts[1],
                                            fs,
                                            spectators.clone(),
                                        )?;
                                        let nb = shape.bad();
                                        let q_lo = usize::from(nb > 0);
                                        for q in q_lo..=nb / 2 {
                                            let ledger = PowerCountLedger::build(&shape, q, params)?;
                                            let bound = rate.value * Q::from_integer(shape.expanded() as i64);
                                            let margin = ledger.alpha_total - bound;
                                            let pass = margin >= Q::zero() && ledger.reconciled;
                                            terms += 1;
                                            if !rate.positive {
                                                nonpositive_nu += 1;
                                            }
                                            min_margin = Some(min_margin.map_or(margin, |m| m.min(margin)));
                                            if !pass {
                                                failures.push(TermReport {
                                                    classes: shape.classes.clone(),
                                                    factors: shape.factors.clone(),
                                                    spectators: shape.spectators.clone(),
                                                    q,
                                                    alpha_total: ledger.alpha_total,
                                                    nu: rate.value,
                                                    bound,
                                                    reconciled: ledger.reconciled,
                                                    pass,
                                                });
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(ExhaustiveReport {
        params: *params,
        max_m,
        max_n,
        terms,
        min_margin,
        nonpositive_nu,
        pass: failures.is_empty(),
        failures,
    })
}

fn cartesian(sets: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut out = vec![Vec::new()];
    for s in sets {
        out = out
            .into_iter()
            .flat_map(|v| {
                s.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn documented_values() {
        let p = PowerParams::new(1, q(3, 10), q(1, 100));
        let r = nu(&p, &[q(2, 5)], &[]);
        assert_eq!(r.value, q(7, 100));
        assert!(r.positive);
        assert!(!nu(&p, &[], &[q(1, 2) - q(1, 100)]).positive);

        let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
        let shape = TermShape::new(vec![FactorClass::Good1], vec![f], vec![]).unwrap();
        let p = PowerParams::new(1, q(1, 2), q(1, 20));
        assert_eq!(alpha_total(&shape, 0, &p).unwrap(), q(9, 20));

        let shape = TermShape::new(vec![FactorClass::BadOpeOpe1], vec![f], vec![]).unwrap();
        assert!(matches!(alpha_total(&shape, 1, &p), Err(Error::Ledger(_))));
    }
}
