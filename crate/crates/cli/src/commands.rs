//! One function per subcommand. Each returns a pass flag; artifacts are
//! written through [`Artifacts`].

use clap::Args;
use num_stats::{mean_stderr, Summary};
use opelab::combinat::{
    check_component_schedule, check_schedule, enumerate_ffe, exhaustive_power_count, full_schedule, hairy_decompose,
    integration_schedule, nn_endofunction, nn_indicator, nu, pin_and_sum_count, FactorDims, PowerParams, Q,
};
use opelab::corr_core::{OpeStructure, PointConfiguration};
use opelab::free_field::{
    calibrate_kappa, fit_two_point_slope, kappa, lattice_two_point, wick_square_with, write_binary, write_csv,
    BumpProfile, DumpHeader, Grid, KappaMode, Mollifier, Sampler, TestFunction, CSV_MAX_SITES,
};
use opelab::quad::{lemma_constant, verify_lemma, LemmaId, LemmaParams};
use opelab::renorm::{
    compute_ipc, estimate_tm, mollifier_independence, telescoping_study, MomentSpec, RateParams, RenormFormat,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Global;
use crate::error::CliError;
use crate::output::Artifacts;

mod num_stats {
    use serde::Serialize;

    #[derive(Clone, Copy, Debug, Serialize)]
    pub struct Summary {
        pub mean: f64,
        pub stderr: f64,
        pub variance: f64,
    }

    pub fn mean_stderr(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Summary {
            mean,
            stderr: (variance / n).sqrt(),
            variance,
        }
    }
}

fn grid(g: &Global) -> Result<Grid, CliError> {
    Ok(Grid::new(g.d, g.n_per_side, g.box_length)?)
}

fn free_structure(g: &Global, max_power: u32) -> Result<OpeStructure, CliError> {
    let k = kappa(g.d, g.dim_phi, KappaMode::OracleCalibrated)?;
    Ok(OpeStructure::free_field(g.d, g.dim_phi, k, max_power)?)
}

fn centered_gaussian(d: usize, sigma: f64) -> TestFunction {
    TestFunction::gaussian(vec![0.0; d], sigma)
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `sample`: binary (and, for small grids, CSV) dumps of field samples.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleArgs {
    /// Number of samples to dump.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Serialize)]
struct SampleRow {
    index: u64,
    mean: f64,
    variance: f64,
}

pub fn sample(g: &Global, a: &SampleArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let grid = grid(g)?;
    let sampler = Sampler::new(&grid, g.dim_phi)?;
    let count = a.count.unwrap_or(1);
    let mut rows = Vec::new();
    for i in 0..count as u64 {
        let field = sampler.field(seed, i);
        let v = &field.real_space;
        let s = mean_stderr(v);
        rows.push(SampleRow {
            index: i,
            mean: s.mean,
            variance: s.variance,
        });
        let mut bin = Vec::new();
        let header = DumpHeader {
            grid,
            dim_phi: g.dim_phi,
            seed,
        };
        write_binary(&mut bin, &header, v)?;
        out.binary(&format!(".{i}.bin"), &bin)?;
        if grid.sites() <= CSV_MAX_SITES {
            let mut csv = Vec::new();
            write_csv(&mut csv, &grid, v)?;
            out.csv(&format!(".{i}"), &String::from_utf8_lossy(&csv))?;
        }
    }
    out.json(true, &rows)?;
    Ok(true)
}

/// `covariance`: power-law fit of the sampled two-point function.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceArgs {
    /// Monte Carlo samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Smallest lattice separation in the fit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_min: Option<usize>,
    /// Largest lattice separation in the fit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    /// Allowed deviation of the slope from `-2[φ]`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

pub fn covariance(g: &Global, a: &CovarianceArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let grid = grid(g)?;
    if grid.d != 1 {
        return Err(config_err("covariance fits are run in d = 1"));
    }
    let sampler = Sampler::new(&grid, g.dim_phi)?;
    let c = opelab::free_field::sampled_two_point(&sampler, seed, a.samples.unwrap_or(1000))?;
    let (j_min, j_max) = (a.j_min.unwrap_or(4), a.j_max.unwrap_or(128));
    let fit = fit_two_point_slope(&grid, g.dim_phi, &c, j_min, j_max)?;
    let exact = lattice_two_point(&grid, g.dim_phi, None);
    let mut csv = String::from("separation,sampled,lattice_exact\n");
    for j in 0..=2 * j_max {
        csv.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", j as f64 * grid.spacing(), c[j], exact[j]));
    }
    out.csv("", &csv)?;
    let pass = (fit.slope - fit.expected).abs() <= a.tolerance.unwrap_or(0.02);
    out.json(pass, &fit)?;
    Ok(pass)
}

/// `kappa-calibrate`: which closed form of `κ` the lattice Green function matches.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaArgs {}

pub fn kappa_calibrate(g: &Global, _a: &KappaArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let cal = calibrate_kappa(g.d, g.dim_phi)?;
    let pass = cal.relative_error < 1e-3;
    out.json(pass, &cal)?;
    Ok(pass)
}

/// `wick2`: statistics of the Wick square `∫ :(φ∗ρ_r)^2: f`.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wick2Args {
    /// Monte Carlo samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Cut-off indices, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<i32>>,
    /// Width of the Gaussian test function.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Serialize)]
struct Wick2Row {
    r: i32,
    summary: Summary,
}

pub fn wick2(g: &Global, a: &Wick2Args, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let grid = grid(g)?;
    let f = centered_gaussian(g.d, a.sigma.unwrap_or(0.4));
    let fv = f.lattice_values(&grid)?;
    let sampler = Sampler::new(&grid, g.dim_phi)?;
    let rs = a.r.clone().unwrap_or_else(|| vec![-2, -3, -4]);
    let n = a.samples.unwrap_or(1000);
    let mut rows = Vec::new();
    let mut csv = String::from("r,index,value\n");
    let mut pass = true;
    for &r in &rs {
        let w = Mollifier::standard(r, g.base)?.spectral_weights(&grid)?;
        let vals = sampler.map(seed, n, |field| Ok(wick_square_with(field, &w, &fv)))?;
        for (i, v) in vals.iter().enumerate() {
            csv.push_str(&format!("{r},{i},{v:.12e}\n"));
        }
        let s = mean_stderr(&vals);
        pass &= s.mean.abs() <= 3.0 * s.stderr;
        rows.push(Wick2Row { r, summary: s });
    }
    out.csv("", &csv)?;
    out.json(pass, &rows)?;
    Ok(pass)
}

/// `renorm-converge`: telescoping study of `:φ²:` and the mollifier check.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeArgs {
    /// Monte Carlo samples per scale.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Even moment order `p`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    /// Cut-off indices, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<i32>>,
    /// Width of the Gaussian test function.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Exponent `γ` entering `ν`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Exponent `ε` entering `ν`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Allowed `|slope - ν/p|`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Also compare two mollifier profiles.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mollifier_check: Option<bool>,
}

pub fn renorm_converge(g: &Global, a: &ConvergeArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let grid = grid(g)?;
    let s = free_structure(g, 2)?;
    let fmt = RenormFormat::new("phi", "phi", "phi^2").with_base(g.base);
    let f = centered_gaussian(g.d, a.sigma.unwrap_or(0.4));
    let rs = a.r.clone().unwrap_or_else(|| (-6..=-1).rev().collect());
    let params = RateParams {
        gamma: a.gamma.unwrap_or(1.0),
        eps: a.eps.unwrap_or(0.0),
    };
    let n = a.samples.unwrap_or(10_000);
    let rep = telescoping_study(&grid, &s, &fmt, &f, a.p.unwrap_or(2), &rs, n, seed, params)?;
    let mut pass = rep.deviation() <= a.tolerance.unwrap_or(0.15);
    out.csv("", &rep.to_csv())?;
    let mut reports = vec![rep];
    if a.mollifier_check.unwrap_or(false) {
        let second = fmt.clone().with_profile(BumpProfile::new(2.0, 0.8)?);
        let m = mollifier_independence(&grid, &s, &fmt, &second, &f, &rs, n, seed, params)?;
        pass &= m.slope > 0.0;
        out.csv(".mollifier", &m.to_csv())?;
        reports.push(m);
    }
    out.json(pass, &reports)?;
    Ok(pass)
}

/// `moment-check`: true moment against the integral of pointwise correlations.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentArgs {
    /// Monte Carlo samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Cut-off index of the default spec.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<i32>,
    /// Full moment spec; only settable from the config file.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MomentSpec>,
}

#[derive(Serialize)]
struct MomentReport {
    spec: MomentSpec,
    tm: opelab::renorm::TmEstimate,
    ipc: opelab::renorm::IpcEstimate,
    deviation_in_stderr: f64,
}

pub fn moment_check(g: &Global, a: &MomentArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let grid = grid(g)?;
    let s = free_structure(g, 4)?;
    let spec = a.spec.clone().unwrap_or_else(|| MomentSpec {
        factors: vec![RenormFormat::new("phi", "phi", "phi^2").with_base(g.base)],
        spectators: vec!["phi".into(), "phi".into()],
        test_functions: vec![
            TestFunction::gaussian(vec![0.0], 0.4),
            TestFunction::hermite(vec![-0.3], 0.4, vec![1]),
            TestFunction::hermite(vec![0.3], 0.4, vec![1]),
        ],
        r: a.r.unwrap_or(-5),
    });
    let tm = estimate_tm(&grid, &s, &spec, a.samples.unwrap_or(20_000), seed)?;
    let ipc = compute_ipc(&s, &spec)?;
    let dev = if tm.stderr > 0.0 {
        (tm.value - ipc.value).abs() / tm.stderr
    } else if tm.value == ipc.value {
        0.0
    } else {
        f64::INFINITY
    };
    let pass = dev <= 3.0;
    out.json(
        pass,
        &MomentReport {
            spec,
            tm,
            ipc,
            deviation_in_stderr: dev,
        },
    )?;
    Ok(pass)
}

/// `lemma-check`: numeric integrals against the closed-form lemma constants.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaArgs {
    /// One of global_l1, global_beta, local_l1, local_beta.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    /// Exponent `α`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Exponent `β`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Decay exponent `γ` of the global β lemma.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Radius of the local lemmas.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Random anchor points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<usize>,
}

#[derive(Serialize)]
struct LemmaReport {
    params: LemmaParams,
    constant: f64,
    bound: opelab::corr_core::BoundReport,
}

pub fn lemma_check(g: &Global, a: &LemmaArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed.unwrap_or(0);
    let lemma: LemmaId = a
        .lemma
        .as_deref()
        .ok_or_else(|| config_err("missing required key `lemma-check.lemma` (or --lemma)"))?
        .parse()
        .map_err(|e: opelab::Error| config_err(e.to_string()))?;
    let local = matches!(lemma, LemmaId::LocalL1 | LemmaId::LocalBeta);
    let params = LemmaParams {
        lemma,
        d: g.d,
        alpha: a.alpha.unwrap_or(0.0),
        beta: a.beta.or(match lemma {
            LemmaId::GlobalL1 => Some(g.d as f64 + 1.0),
            LemmaId::GlobalBeta | LemmaId::LocalBeta => Some(0.0),
            LemmaId::LocalL1 => None,
        }),
        gamma: a.gamma.or(if lemma == LemmaId::GlobalBeta { Some(g.d as f64 + 1.0) } else { None }),
        radius: a.radius.or(if local { Some(1.0) } else { None }),
    };
    let constant = lemma_constant(&params)?;
    let bound = verify_lemma(&params, a.anchors.unwrap_or(100), 1e-4, seed)?;
    let pass = bound.pass;
    out.json(
        pass,
        &LemmaReport {
            params,
            constant,
            bound,
        },
    )?;
    Ok(pass)
}

/// `pinsum`: endofunction counts, nearest-neighbor certificates and
/// integration schedules on random configurations.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinsumArgs {
    /// Largest `p` for the `(p-1)^p` count check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_p: Option<usize>,
    /// Random configurations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configs: Option<usize>,
    /// Largest configuration size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
}

#[derive(Serialize)]
struct PinsumReport {
    counts: Vec<(usize, usize, usize)>,
    configs: usize,
    certified: usize,
    schedules_valid: usize,
}

pub fn pinsum(g: &Global, a: &PinsumArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let seed = g.seed()?;
    let max_p = a.max_p.unwrap_or(6);
    let counts: Vec<(usize, usize, usize)> = (2..=max_p)
        .map(|p| Ok((p, enumerate_ffe(p)?.len(), (p - 1).pow(p as u32))))
        .collect::<Result<_, opelab::Error>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs = a.configs.unwrap_or(1000);
    let max_n = a.max_n.unwrap_or(5).clamp(2, 8);
    let (mut certified, mut valid) = (0, 0);
    for _ in 0..configs {
        let n = rng.random_range(2..=max_n);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..g.d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let c = PointConfiguration::new(pts)?;
        let t = nn_endofunction(&c)?;
        if nn_indicator(&c, &t) && pin_and_sum_count(&c)? >= 1 {
            certified += 1;
        }
        let dec = hairy_decompose(&t);
        let every_root = (0..n).all(|root| {
            integration_schedule(&dec, root, true)
                .and_then(|s| check_component_schedule(&dec, root, &s))
                .is_ok()
        });
        let roots: Vec<usize> = dec.components.iter().map(|c| *c.cycle.iter().min().unwrap()).collect();
        let full = full_schedule(&dec)
            .and_then(|s| check_schedule(&(0..n).collect::<Vec<_>>(), &t.edges(), &roots, &s))
            .is_ok();
        if every_root && full {
            valid += 1;
        }
    }
    let pass = counts.iter().all(|(_, a, b)| a == b) && certified == configs && valid == configs;
    out.json(
        pass,
        &PinsumReport {
            counts,
            configs,
            certified,
            schedules_valid: valid,
        },
    )?;
    Ok(pass)
}

/// `power-count`: exhaustive exact power counting.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerArgs {
    /// Largest number of good vertices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_m: Option<usize>,
    /// Largest number of bad vertices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    /// `γ` as a fraction, e.g. `3/10`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    /// `ε` as a fraction, e.g. `1/100`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    /// `[φ]` as an exact fraction; defaults to the global `dim_phi`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_phi_exact: Option<String>,
}

fn fraction(text: &str, key: &str) -> Result<Q, CliError> {
    text.trim()
        .parse::<Q>()
        .map_err(|_| config_err(format!("`{key}` must be a fraction like 3/10, got `{text}`")))
}

#[derive(Serialize)]
struct PowerReport {
    nu_single_factor: String,
    report: opelab::combinat::ExhaustiveReport,
}

pub fn power_count(g: &Global, a: &PowerArgs, out: &mut Artifacts) -> Result<bool, CliError> {
    let phi = match &a.dim_phi_exact {
        Some(t) => fraction(t, "dim_phi_exact")?,
        None => Q::approximate_float(g.dim_phi).ok_or_else(|| config_err("dim_phi is not rational"))?,
    };
    let gamma = fraction(a.gamma.as_deref().unwrap_or("3/10"), "gamma")?;
    let eps = fraction(a.eps.as_deref().unwrap_or("1/100"), "eps")?;
    let params = PowerParams::new(g.d as i64, gamma, eps);
    let two = Q::from_integer(2);
    let f = FactorDims::new(phi, phi, two * phi);
    let dims = [Q::from_integer(0), phi, two * phi];
    let report = exhaustive_power_count(&params, &[f], &dims, &dims, a.max_m.unwrap_or(2), a.max_n.unwrap_or(2))?;
    let pass = report.pass;
    let single = nu(&params, &[two * phi], &[]).value;
    out.json(
        pass,
        &PowerReport {
            nu_single_factor: single.to_string(),
            report,
        },
    )?;
    Ok(pass)
}
