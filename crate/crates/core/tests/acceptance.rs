//! Acceptance criteria 1 to 9, run sequentially by a plain `main` so that
//! `cargo test` always shows one `PASS`/`FAIL` line per criterion together
//! with the measured quantities. Positional arguments select criteria by
//! substring; the process exits with status 1 if any selected criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use opelab::combinat::*;
use opelab::corr_core::{OpeStructure, PointConfiguration};
use opelab::free_field::{
    calibrate_kappa, covariance_pairing, fit_two_point_slope, kappa, sampled_two_point, wick_square_with,
    BumpProfile, Grid, KappaConvention, KappaMode, Mollifier, Sampler, TestFunction,
};
use opelab::quad::{lemma_constant, verify_lemma, LemmaId, LemmaParams};
use opelab::renorm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A: f64 = 0.2;

fn report(n: u32, name: &str, pass: bool, detail: String, start: Instant) {
    println!(
        "criterion {n} [{name}]: {} ({detail}; {:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
}

fn structure() -> OpeStructure {
    OpeStructure::free_field(1, A, kappa(1, A, KappaMode::OracleCalibrated).unwrap(), 4).unwrap()
}

fn square() -> RenormFormat {
    RenormFormat::new("phi", "phi", "phi^2")
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn criterion_1_wick_square_identity() -> bool {
    let start = Instant::now();
    let grid = Grid::new(1, 4096, 2.0).unwrap();
    let s = structure();
    let r = -4;
    let f = TestFunction::gaussian(vec![0.0], 0.2);
    let plan = MrPlan::new(&grid, &s, &square(), r, &f).unwrap();
    let w = Mollifier::standard(r, 2.0).unwrap().spectral_weights(&grid).unwrap();
    let fv = f.lattice_values(&grid).unwrap();
    let sampler = Sampler::new(&grid, A).unwrap();
    let errs = sampler
        .map(2024, 100, |field| {
            let m = plan.eval(field)?;
            let ws = wick_square_with(field, &w, &fv);
            // Relative to the scale of the summands, which bounds cancellation.
            let phi_r = opelab::free_field::mollify_with(field, &w);
            let scale: f64 = phi_r.iter().zip(&fv).map(|(p, f)| (p * p * f).abs()).sum::<f64>() * grid.cell_volume();
            Ok((m - ws).abs() / ws.abs().max(scale))
        })
        .unwrap();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let pass = worst <= 1e-12;
    report(1, "Wick-square identity", pass, format!("max relative error {worst:.2e} over 100 samples"), start);
    pass
}

fn criterion_2_convergence_rate() -> bool {
    let start = Instant::now();
    let grid = Grid::new(1, 1 << 15, 8.0).unwrap();
    let f = TestFunction::gaussian(vec![0.0], 0.4);
    let r_range: Vec<i32> = (-6..=-1).rev().collect();
    let rep = telescoping_study(&grid, &structure(), &square(), &f, 2, &r_range, 10_000, 77, RateParams::default())
        .unwrap();
    for row in &rep.rows {
        println!("  r = {:>2}: ||M_r - M_r-1||_2 = {:.6e} +- {:.1e}", row.r, row.norm, row.stderr);
    }
    let pass = rep.deviation() <= 0.15;
    report(
        2,
        "convergence rate",
        pass,
        format!(
            "slope {:.4} +- {:.4}, nu/p = {:.4}, |difference| {:.4}",
            rep.slope,
            rep.slope_stderr,
            rep.prediction,
            rep.deviation()
        ),
        start,
    );
    pass
}

fn criterion_3_mollifier_independence() -> bool {
    let start = Instant::now();
    let grid = Grid::new(1, 1 << 15, 8.0).unwrap();
    let f = TestFunction::gaussian(vec![0.0], 0.4);
    let second = square().with_profile(BumpProfile::new(2.0, 0.8).unwrap());
    let r_range: Vec<i32> = (-6..=-1).rev().collect();
    let rep = mollifier_independence(
        &grid,
        &structure(),
        &square(),
        &second,
        &f,
        &r_range,
        10_000,
        78,
        RateParams::default(),
    )
    .unwrap();
    for row in &rep.rows {
        println!("  r = {:>2}: ||M1_r - M2_r||_2 = {:.6e} +- {:.1e}", row.r, row.norm, row.stderr);
    }
    let pass = rep.slope > 0.0;
    report(
        3,
        "mollifier independence",
        pass,
        format!("slope {:.4} +- {:.4}", rep.slope, rep.slope_stderr),
        start,
    );
    pass
}

fn criterion_4_moment_consistency() -> bool {
    let start = Instant::now();
    let s = structure();
    // (a) four φ spectators against the Isserlis sum of continuum pairings.
    // Odd test functions have zero mean, which removes the infrared offset of
    // the lattice covariance.
    let grid = Grid::new(1, 4096, 16.0).unwrap();
    let fs = vec![
        TestFunction::hermite(vec![-0.6], 0.4, vec![1]),
        TestFunction::hermite(vec![0.1], 0.5, vec![1]),
        TestFunction::hermite(vec![0.5], 0.4, vec![1]),
        TestFunction::hermite(vec![-0.2], 0.6, vec![1]),
    ];
    let spec_a = MomentSpec {
        factors: vec![],
        spectators: vec!["phi".into(); 4],
        test_functions: fs.clone(),
        r: 0,
    };
    let tm_a = estimate_tm(&grid, &s, &spec_a, 40_000, 41).unwrap();
    let c = |i: usize, j: usize| covariance_pairing(&fs[i], &fs[j], 1, A).unwrap().value;
    let isserlis = c(0, 1) * c(2, 3) + c(0, 2) * c(1, 3) + c(0, 3) * c(1, 2);
    let ipc_a = compute_ipc(&s, &spec_a).unwrap();
    let dev_a = (tm_a.value - isserlis).abs() / tm_a.stderr;
    let quad_a = (ipc_a.value - isserlis).abs() / isserlis.abs();
    // (b) one :φ²: factor at r = -5 with a pair of φ spectators.
    let grid_b = Grid::new(1, 1 << 14, 16.0).unwrap();
    let spec_b = MomentSpec {
        factors: vec![square()],
        spectators: vec!["phi".into(), "phi".into()],
        test_functions: vec![
            TestFunction::gaussian(vec![0.0], 0.4),
            TestFunction::hermite(vec![-0.3], 0.4, vec![1]),
            TestFunction::hermite(vec![0.3], 0.4, vec![1]),
        ],
        r: -5,
    };
    let tm_b = estimate_tm(&grid_b, &s, &spec_b, 40_000, 42).unwrap();
    let ipc_b = compute_ipc(&s, &spec_b).unwrap();
    let dev_b = (tm_b.value - ipc_b.value).abs() / tm_b.stderr;
    let pass = dev_a <= 3.0 && quad_a <= 1e-4 && dev_b <= 3.0;
    report(
        4,
        "moment consistency",
        pass,
        format!(
            "(a) TM {:.5e} +- {:.1e} vs Isserlis {isserlis:.5e} ({dev_a:.2} stderr; IPC rel. diff {quad_a:.1e}); \
             (b) TM {:.5e} +- {:.1e} vs IPC {:.5e} ({dev_b:.2} stderr)",
            tm_a.value, tm_a.stderr, tm_b.value, tm_b.stderr, ipc_b.value
        ),
        start,
    );
    pass
}

fn criterion_5_lemma_suite() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut all = true;
    for lemma in [LemmaId::GlobalL1, LemmaId::GlobalBeta, LemmaId::LocalL1, LemmaId::LocalBeta] {
        for draw in 0..20 {
            let d = rng.random_range(1..=3usize);
            let df = d as f64;
            let p = match lemma {
                LemmaId::GlobalL1 => LemmaParams {
                    lemma,
                    d,
                    alpha: rng.random_range(0.0..0.95 * df),
                    beta: Some(df + rng.random_range(0.1..2.0)),
                    gamma: None,
                    radius: None,
                },
                LemmaId::GlobalBeta => LemmaParams {
                    lemma,
                    d,
                    alpha: rng.random_range(0.0..0.45 * df),
                    beta: Some(rng.random_range(0.0..0.45 * df)),
                    gamma: Some(df + rng.random_range(0.1..2.0)),
                    radius: None,
                },
                LemmaId::LocalL1 => LemmaParams {
                    lemma,
                    d,
                    alpha: rng.random_range(0.0..0.95 * df),
                    beta: None,
                    gamma: None,
                    radius: Some(rng.random_range(0.1..3.0)),
                },
                LemmaId::LocalBeta => LemmaParams {
                    lemma,
                    d,
                    alpha: rng.random_range(0.0..0.45 * df),
                    beta: Some(rng.random_range(0.0..0.45 * df)),
                    gamma: None,
                    radius: Some(rng.random_range(0.1..3.0)),
                },
            };
            let rep = verify_lemma(&p, 100, 1e-3, 1000 + draw).unwrap();
            worst = worst.max(rep.max_ratio);
            all &= rep.pass;
        }
    }
    let k_local = lemma_constant(&LemmaParams {
        lemma: LemmaId::LocalL1,
        d: 1,
        alpha: 0.0,
        beta: None,
        gamma: None,
        radius: None,
    })
    .unwrap();
    let k_global = lemma_constant(&LemmaParams {
        lemma: LemmaId::GlobalL1,
        d: 1,
        alpha: 0.5,
        beta: Some(2.0),
        gamma: None,
        radius: None,
    })
    .unwrap();
    let exact = k_local == 4.0 && (k_global - (4.0 + std::f64::consts::PI)).abs() <= 4.0 * f64::EPSILON;
    let pass = all && exact;
    report(
        5,
        "lemma suite",
        pass,
        format!("max ratio {worst:.4}; K(local L1) = {k_local}, K(global L1) = {k_global}"),
        start,
    );
    pass
}

fn criterion_6_pin_and_sum() -> bool {
    let start = Instant::now();
    let counts_ok = (2..=6).all(|p| enumerate_ffe(p).unwrap().len() == (p - 1).pow(p as u32));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=5usize);
        let d = rng.random_range(1..=3usize);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let c = PointConfiguration::new(pts).unwrap();
        let t = nn_endofunction(&c).unwrap();
        let certificate = nn_indicator(&c, &t) && pin_and_sum_count(&c).unwrap() >= 1;
        let dec = hairy_decompose(&t);
        let schedules = (0..n).all(|root| {
            integration_schedule(&dec, root, true)
                .and_then(|s| check_component_schedule(&dec, root, &s))
                .is_ok()
        });
        let roots: Vec<usize> = dec.components.iter().map(|c| *c.cycle.iter().min().unwrap()).collect();
        let full = full_schedule(&dec)
            .and_then(|s| check_schedule(&(0..n).collect::<Vec<_>>(), &t.edges(), &roots, &s))
            .is_ok();
        if certificate && schedules && full {
            ok += 1;
        }
    }
    let pass = counts_ok && ok == 1000;
    report(
        6,
        "pin-and-sum",
        pass,
        format!("(p-1)^p counts {}; {ok}/1000 configurations certified", if counts_ok { "match" } else { "differ" }),
        start,
    );
    pass
}

/// Every block-table shape with `m, n <= 2`.
fn small_shapes() -> Vec<TermShape> {
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let fc = f.with_channel(q(1, 5));
    let factor_classes = [
        FactorClass::Good1,
        FactorClass::BadOpeOpe1,
        FactorClass::BadCzOpe1,
        FactorClass::Good2,
        FactorClass::BadY2,
        FactorClass::BadX2,
        FactorClass::Good34,
        FactorClass::Bad34,
    ];
    let spectator_classes = [FactorClass::Good34, FactorClass::Bad34];
    let mut shapes = Vec::new();
    for m in 0..=2usize {
        for n in m.max(1)..=2usize {
            let mut idx = vec![0usize; n];
            loop {
                let classes: Vec<FactorClass> = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| if i < m { factor_classes[k] } else { spectator_classes[k] })
                    .collect();
                let factors = classes[..m]
                    .iter()
                    .map(|c| if *c == FactorClass::BadCzOpe1 { fc } else { f })
                    .collect();
                shapes.push(TermShape::new(classes, factors, vec![q(1, 5); n - m]).unwrap());
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    let base = if i < m { factor_classes.len() } else { spectator_classes.len() };
                    idx[i] += 1;
                    if idx[i] < base {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    shapes
}

fn criterion_7_two_scale_claim() -> bool {
    let start = Instant::now();
    let shapes = small_shapes();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (r, base, delta) = (-3, 2.0, 4.0);
    let scale = 2f64.powi(r);
    let (mut empty, mut built, mut failed, mut single) = (0usize, 0usize, 0usize, 0usize);
    for shape in &shapes {
        let table = BlockTable::build(shape, q(3, 10), q(1, 100)).unwrap();
        // A single vertex has no nearest neighbor and no graph to build.
        if table.len() < 2 {
            single += 1;
            continue;
        }
        for _ in 0..1000 {
            let d = rng.random_range(1..=3usize);
            let spread = scale * [0.3, 1.0, 4.0, 30.0][rng.random_range(0..4)];
            let pts: Vec<Vec<f64>> = (0..table.len())
                .map(|_| (0..d).map(|_| rng.random_range(-spread..spread)).collect())
                .collect();
            let Ok(c) = PointConfiguration::new(pts) else { continue };
            match construct_tau_sigma(&c, &table, delta, base, r) {
                Err(opelab::Error::EmptyTerm(_)) => empty += 1,
                Ok(g) => {
                    let closed = (0..g.bad.len()).filter(|&a| g.bad[a]).all(|a| g.bad[g.tau.apply(a)]);
                    if verify_claim(&c, &g).all() && closed {
                        built += 1;
                    } else {
                        failed += 1;
                    }
                }
                Err(e) => {
                    if failed == 0 {
                        println!("  first failure: {:?}: {e}", shape.classes);
                    }
                    failed += 1
                }
            }
        }
    }
    let pass = failed == 0;
    report(
        7,
        "two-scale claim",
        pass,
        format!(
            "{} shapes ({single} with a single vertex skipped): {built} constructed, {empty} empty terms, {failed} failures",
            shapes.len()
        ),
        start,
    );
    pass
}

fn criterion_8_power_counting() -> bool {
    let start = Instant::now();
    let p = PowerParams::new(1, q(3, 10), q(1, 100));
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let dims = [q(0, 1), q(1, 5), q(2, 5)];
    let rep = exhaustive_power_count(&p, &[f], &dims, &dims, 3, 3).unwrap();
    let single = nu(&p, &[q(2, 5)], &[]);
    let pass = rep.pass && single.value == q(7, 100);
    report(
        8,
        "power counting",
        pass,
        format!(
            "{} terms, {} failures, min margin {}; single-factor nu = {}",
            rep.terms,
            rep.failures.len(),
            rep.min_margin.map_or("n/a".to_string(), |m| m.to_string()),
            single.value
        ),
        start,
    );
    pass
}

fn criterion_9_covariance_law() -> bool {
    let start = Instant::now();
    let grid = Grid::new(1, 1 << 16, 256.0).unwrap();
    let sampler = Sampler::new(&grid, A).unwrap();
    let c = sampled_two_point(&sampler, 9, 4000).unwrap();
    let fit = fit_two_point_slope(&grid, A, &c, 4, 128).unwrap();
    let slope_ok = (fit.slope - fit.expected).abs() <= 0.02;
    let cal = calibrate_kappa(1, A).unwrap();
    let convention_ok = cal.selected == KappaConvention::FormulaOverTwoPiD && cal.relative_error < 1e-3;
    // MC against continuum with the calibrated κ: an odd-function pairing.
    let f = TestFunction::hermite(vec![-0.3], 0.4, vec![1]);
    let g = TestFunction::hermite(vec![0.4], 0.5, vec![1]);
    let spec = MomentSpec {
        factors: vec![],
        spectators: vec!["phi".into(), "phi".into()],
        test_functions: vec![f.clone(), g.clone()],
        r: 0,
    };
    let mc_grid = Grid::new(1, 4096, 16.0).unwrap();
    let tm = estimate_tm(&mc_grid, &structure(), &spec, 20_000, 19).unwrap();
    let exact = covariance_pairing(&f, &g, 1, A).unwrap().value;
    let mc_ok = (tm.value - exact).abs() <= 3.0 * tm.stderr;
    let pass = slope_ok && convention_ok && mc_ok;
    report(
        9,
        "covariance law",
        pass,
        format!(
            "slope {:.4} (expected {:.2}); kappa convention {:?} fitted {:.6} (rel. err {:.1e}); \
             MC pairing {:.5} +- {:.1e} vs {exact:.5}",
            fit.slope, fit.expected, cal.selected, cal.fitted, cal.relative_error, tm.value, tm.stderr
        ),
        start,
    );
    pass
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> bool); 9] = [
        ("criterion_1_wick_square_identity", criterion_1_wick_square_identity),
        ("criterion_2_convergence_rate", criterion_2_convergence_rate),
        ("criterion_3_mollifier_independence", criterion_3_mollifier_independence),
        ("criterion_4_moment_consistency", criterion_4_moment_consistency),
        ("criterion_5_lemma_suite", criterion_5_lemma_suite),
        ("criterion_6_pin_and_sum", criterion_6_pin_and_sum),
        ("criterion_7_two_scale_claim", criterion_7_two_scale_claim),
        ("criterion_8_power_counting", criterion_8_power_counting),
        ("criterion_9_covariance_law", criterion_9_covariance_law),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let pass = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| {
            println!("{name}: FAIL (panicked)");
            false
        });
        if !pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
