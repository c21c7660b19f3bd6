//! Quadrature for products of power-law singularities, inhomogeneous decay
//! factors, ball indicators and smooth weights in dimension `d <= 3`.
//!
//! The integrand is split by a smooth partition of unity attached to its
//! singular centers. Each piece is integrated in polar coordinates around its
//! own center: dyadic radial shells with Gauss-Legendre nodes, an analytic
//! power-law piece at the innermost radius and an analytic tail at infinity.
//! Ball boundaries are handled by exact ray/sphere intersection.

use std::sync::Arc;

use super::gauss::{gauss_legendre, GaussRule};
use crate::{Error, Result};

pub type SmoothFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One multiplicative factor of a [`SingularIntegrand`].
#[derive(Clone)]
pub enum Factor {
    /// `|y - center|^{-exponent}`; an exponent of zero is a pure resolution hint.
    PowerLaw { center: Vec<f64>, exponent: f64 },
    /// `<y>^{-exponent}` with `<y> = sqrt(1 + |y|^2)`.
    InhomDecay { exponent: f64 },
    /// Sharp indicator of the closed ball.
    IndicatorBall { center: Vec<f64>, radius: f64 },
    /// Any smooth bounded weight.
    Smooth(SmoothFn),
}

impl std::fmt::Debug for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factor::PowerLaw { center, exponent } => {
                write!(f, "PowerLaw({center:?}, {exponent})")
            }
            Factor::InhomDecay { exponent } => write!(f, "InhomDecay({exponent})"),
            Factor::IndicatorBall { center, radius } => {
                write!(f, "IndicatorBall({center:?}, {radius})")
            }
            Factor::Smooth(_) => write!(f, "Smooth(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SingularIntegrand {
    pub d: usize,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Whole,
    Ball { center: Vec<f64>, radius: f64 },
}

/// Integral value with an error estimate from successive refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const MAX_INNER_OCTAVES: i32 = 50;
const OUTER_OCTAVES: i32 = 64;

/// Truncation depths of the radial integrals for a target relative tolerance.
#[derive(Clone, Copy, Debug)]
struct Cutoffs {
    /// Octaves below the local scale integrated numerically; the rest uses the
    /// leading power law, whose relative error is about `2^{-inner}`.
    inner: i32,
    /// Relative size of an outer panel below which the tail is extrapolated.
    quiet: f64,
}

impl Cutoffs {
    fn for_tolerance(rel_tol: f64) -> Self {
        let bits = (-rel_tol.max(1e-15).log2()).ceil() as i32;
        Cutoffs {
            inner: (bits + 12).clamp(20, MAX_INNER_OCTAVES),
            quiet: (rel_tol * 1e-6).max(1e-17),
        }
    }
}
const PARTITION_POWER: i32 = 8;
const MAX_LEVEL: usize = 4;

impl SingularIntegrand {
    pub fn new(d: usize) -> Self {
        SingularIntegrand {
            d,
            factors: Vec::new(),
        }
    }

    pub fn with(mut self, f: Factor) -> Self {
        self.factors.push(f);
        self
    }

    /// Pointwise value; zero at a singular center.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut v = 1.0;
        for f in &self.factors {
            match f {
                Factor::PowerLaw { center, exponent } => {
                    if *exponent != 0.0 {
                        let r = dist(y, center);
                        if r == 0.0 {
                            return 0.0;
                        }
                        v *= r.powf(-exponent);
                    }
                }
                Factor::InhomDecay { exponent } => {
                    let n2: f64 = y.iter().map(|t| t * t).sum();
                    v *= (1.0 + n2).powf(-0.5 * exponent);
                }
                Factor::IndicatorBall { center, radius } => {
                    if dist(y, center) > *radius {
                        return 0.0;
                    }
                }
                Factor::Smooth(g) => v *= g(y),
            }
        }
        v
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Center {
    point: Vec<f64>,
    exponent: f64,
}

fn collect_centers(intg: &SingularIntegrand, domain: &Domain) -> Vec<Center> {
    fn add(centers: &mut Vec<Center>, p: &[f64], e: f64) {
        if let Some(c) = centers.iter_mut().find(|c| c.point == p) {
            c.exponent += e;
        } else {
            centers.push(Center {
                point: p.to_vec(),
                exponent: e,
            });
        }
    }
    let mut centers: Vec<Center> = Vec::new();
    for f in &intg.factors {
        if let Factor::PowerLaw { center, exponent } = f {
            add(&mut centers, center, *exponent);
        }
    }
    let origin = vec![0.0; intg.d];
    if intg
        .factors
        .iter()
        .any(|f| matches!(f, Factor::InhomDecay { .. }))
    {
        add(&mut centers, &origin, 0.0);
    }
    if centers.is_empty() {
        match domain {
            Domain::Ball { center, .. } => add(&mut centers, center, 0.0),
            Domain::Whole => add(&mut centers, &origin, 0.0),
        }
    }
    centers
}

/// Unit directions with solid-angle weights summing to `|S^{d-1}|`.
fn directions(d: usize, level: usize) -> Vec<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let n = 24 << level;
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                    (vec![th.cos(), th.sin()], 2.0 * PI / n as f64)
                })
                .collect()
        }
        3 => {
            let nc = 8 << level;
            let nphi = 2 * nc;
            let g = gauss_legendre(nc);
            let mut out = Vec::with_capacity(nc * nphi);
            for (c, wc) in g.nodes.iter().zip(&g.weights) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..nphi {
                    let ph = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                    out.push((
                        vec![s * ph.cos(), s * ph.sin(), *c],
                        wc * 2.0 * PI / nphi as f64,
                    ));
                }
            }
            out
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// Parameter interval `[lo, hi]` of the ray `c + t*theta`, `t >= 0`, inside all balls.
fn ray_interval(c: &[f64], theta: &[f64], balls: &[(&[f64], f64)]) -> Option<(f64, f64)> {
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for (b, r) in balls {
        let e: Vec<f64> = c.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        let te: f64 = theta.iter().zip(&e).map(|(x, y)| x * y).sum();
        let ee: f64 = e.iter().map(|x| x * x).sum();
        let disc = te * te - (ee - r * r);
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        lo = lo.max(-te - sq);
        hi = hi.min(-te + sq);
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}

/// `∫_lo^hi g(t) dt` with `g(t) ~ t^{-s}` as `t -> 0` when `lo == 0`.
///
/// Returns `(integral, integral of |g|)`.
fn radial<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    s_local: f64,
    scale: f64,
    rule: &GaussRule,
    cut: Cutoffs,
) -> Result<(f64, f64)> {
    let eps = scale.min(hi) * 2f64.powi(-cut.inner);
    let mut total = 0.0;
    let mut total_abs = 0.0;
    let mut a;
    if lo == 0.0 {
        if s_local >= 1.0 {
            return Err(Error::Integration {
                msg: format!("non-integrable local exponent {s_local}"),
                estimate: f64::INFINITY,
            });
        }
        let inner = g(eps) * eps / (1.0 - s_local);
        total += inner;
        total_abs += inner.abs();
        a = eps;
    } else {
        a = lo;
    }
    let cap = scale * 2f64.powi(OUTER_OCTAVES);
    let mut quiet = 0;
    loop {
        let b = (a + a.max(eps)).min(hi);
        let mut s = 0.0;
        let mut sa = 0.0;
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = g(m + h * x);
            s += w * v;
            sa += w * v.abs();
        }
        total += s * h;
        total_abs += sa * h;
        if b >= hi {
            break;
        }
        a = b;
        if hi.is_infinite() {
            let small = (sa * h).abs() <= cut.quiet * total_abs;
            quiet = if small && a > 1e3 * scale { quiet + 1 } else { 0 };
            if quiet >= 3 || a >= cap {
                let ga = g(a);
                if ga == 0.0 {
                    break;
                }
                let gh = g(0.5 * a);
                let slope = (gh / ga).abs().log2();
                if !(slope > 1.0) {
                    return Err(Error::Integration {
                        msg: format!("integrand decays too slowly at infinity (local exponent {slope})"),
                        estimate: f64::INFINITY,
                    });
                }
                let tail = ga * a / (slope - 1.0);
                total += tail;
                total_abs += tail.abs();
                break;
            }
        }
    }
    Ok((total, total_abs))
}

fn integrate_level(
    intg: &SingularIntegrand,
    domain: &Domain,
    centers: &[Center],
    level: usize,
    cut: Cutoffs,
) -> Result<(f64, f64)> {
    let d = intg.d;
    let rule = gauss_legendre([8, 12, 16, 24, 32][level]);
    let mut balls: Vec<(&[f64], f64)> = Vec::new();
    if let Domain::Ball { center, radius } = domain {
        balls.push((center.as_slice(), *radius));
    }
    for f in &intg.factors {
        if let Factor::IndicatorBall { center, radius } = f {
            balls.push((center.as_slice(), *radius));
        }
    }
    let dirs = directions(d, level);
    let mut total = 0.0;
    let mut total_abs = 0.0;
    for (j, cj) in centers.iter().enumerate() {
        let scale = centers
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, c)| dist(&c.point, &cj.point))
            .fold(f64::INFINITY, f64::min);
        let scale = if scale.is_finite() {
            scale
        } else if let Domain::Ball { radius, .. } = domain {
            *radius
        } else {
            1.0
        };
        let s_local = cj.exponent - (d as f64 - 1.0);
        let mut y = vec![0.0; d];
        for (theta, wt) in &dirs {
            let Some((lo, hi)) = ray_interval(&cj.point, theta, &balls) else {
                continue;
            };
            let g = |t: f64| {
                for k in 0..d {
                    y[k] = cj.point[k] + t * theta[k];
                }
                let w = partition_weight(&y, j, centers);
                if w == 0.0 {
                    return 0.0;
                }
                t.powi(d as i32 - 1) * w * intg.eval(&y)
            };
            let (v, va) = radial(g, lo, hi, s_local, scale, rule, cut)?;
            total += wt * v;
            total_abs += wt * va;
        }
    }
    Ok((total, total_abs))
}

fn partition_weight(y: &[f64], j: usize, centers: &[Center]) -> f64 {
    if centers.len() == 1 {
        return 1.0;
    }
    let rj = dist(y, &centers[j].point);
    if rj == 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for c in centers {
        let rk = dist(y, &c.point);
        if rk == 0.0 {
            return 0.0;
        }
        s += (rj / rk).powi(PARTITION_POWER);
    }
    1.0 / s
}

/// Integrate `intg` over `domain` to relative tolerance `rel_tol`.
///
/// The tolerance is measured against the integral of the absolute value so that
/// integrals with cancellations still terminate.
pub fn integrate_singular(
    intg: &SingularIntegrand,
    domain: &Domain,
    rel_tol: f64,
) -> Result<Estimate> {
    if !(1..=3).contains(&intg.d) {
        return Err(Error::Range(format!(
            "quadrature supports d in 1..=3, got {}",
            intg.d
        )));
    }
    let centers = collect_centers(intg, domain);
    for c in &centers {
        if c.exponent >= intg.d as f64 {
            return Err(Error::Integration {
                msg: format!("exponent {} at {:?} is not locally integrable", c.exponent, c.point),
                estimate: f64::INFINITY,
            });
        }
    }
    let cut = Cutoffs::for_tolerance(rel_tol);
    let (mut prev, _) = integrate_level(intg, domain, &centers, 0, cut)?;
    let mut last_err = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        let (v, va) = integrate_level(intg, domain, &centers, level, cut)?;
        let err = (v - prev).abs();
        if err <= rel_tol * va || va == 0.0 {
            return Ok(Estimate {
                value: v,
                error: err,
            });
        }
        prev = v;
        last_err = err;
    }
    Err(Error::Integration {
        msg: "refinement stalled".into(),
        estimate: last_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_closed_form() {
        let intg = SingularIntegrand::new(1)
            .with(Factor::PowerLaw {
                center: vec![0.0],
                exponent: 0.5,
            })
            .with(Factor::InhomDecay { exponent: 2.0 });
        let e = integrate_singular(&intg, &Domain::Whole, 1e-10).unwrap();
        assert!((e.value - PI * 2f64.sqrt()).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn interval_length() {
        let intg = SingularIntegrand::new(1).with(Factor::PowerLaw {
            center: vec![0.0],
            exponent: 0.0,
        });
        let e = integrate_singular(
            &intg,
            &Domain::Ball {
                center: vec![0.0],
                radius: 1.7,
            },
            1e-12,
        )
        .unwrap();
        assert!((e.value - 3.4).abs() < 1e-12);
    }

    #[test]
    fn disc_with_inverse_distance() {
        let intg = SingularIntegrand::new(2).with(Factor::PowerLaw {
            center: vec![0.0, 0.0],
            exponent: 1.0,
        });
        let e = integrate_singular(
            &intg,
            &Domain::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
            1e-10,
        )
        .unwrap();
        assert!((e.value - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn off_center_ball_volume_in_three_dimensions() {
        let intg = SingularIntegrand::new(3).with(Factor::PowerLaw {
            center: vec![0.3, -0.2, 0.1],
            exponent: 0.0,
        });
        let e = integrate_singular(
            &intg,
            &Domain::Ball {
                center: vec![0.0; 3],
                radius: 1.0,
            },
            1e-10,
        )
        .unwrap();
        assert!((e.value - 4.0 * PI / 3.0).abs() < 1e-8, "{}", e.value);
    }

    #[test]
    fn two_centers_beta_integral_in_one_dimension() {
        // ∫ |y|^{-1/2} |y-1|^{-1/2} over [0,1] is B(1/2,1/2) = π.
        let intg = SingularIntegrand::new(1)
            .with(Factor::PowerLaw {
                center: vec![0.0],
                exponent: 0.5,
            })
            .with(Factor::PowerLaw {
                center: vec![1.0],
                exponent: 0.5,
            })
            .with(Factor::IndicatorBall {
                center: vec![0.5],
                radius: 0.5,
            });
        let e = integrate_singular(&intg, &Domain::Whole, 1e-10).unwrap();
        assert!((e.value - PI).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn gaussian_with_smooth_factor_in_two_dimensions() {
        let g: SmoothFn = Arc::new(|y: &[f64]| (-(y[0] - 2.0).powi(2) - y[1].powi(2)).exp());
        let intg = SingularIntegrand::new(2).with(Factor::Smooth(g)).with(Factor::PowerLaw {
            center: vec![2.0, 0.0],
            exponent: 0.0,
        });
        let e = integrate_singular(&intg, &Domain::Whole, 1e-10).unwrap();
        assert!((e.value - PI).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn slowly_decaying_tail_is_captured() {
        // ∫_R <y>^{-1.1} dy = sqrt(pi) Γ(0.05)/Γ(0.55)
        let intg = SingularIntegrand::new(1).with(Factor::InhomDecay { exponent: 1.1 });
        let e = integrate_singular(&intg, &Domain::Whole, 1e-9).unwrap();
        let g = statrs::function::gamma::gamma;
        let exact = PI.sqrt() * g(0.05) / g(0.55);
        assert!((e.value / exact - 1.0).abs() < 1e-6, "{} vs {}", e.value, exact);
    }
}
