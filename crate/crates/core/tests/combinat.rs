use num_traits::Zero;
use opelab::combinat::*;
use opelab::corr_core::PointConfiguration;
use opelab::quad::LemmaId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Brute-force cycle detection by iterating `τ` `p` times.
fn cycle_vertices_by_iteration(t: &Endofunction) -> Vec<usize> {
    let p = t.p();
    let mut out: Vec<usize> = (0..p)
        .map(|mut v| {
            for _ in 0..p {
                v = t.apply(v);
            }
            v
        })
        .collect();
    // Images after p steps are cycle vertices; close under τ.
    let mut k = 0;
    while k < out.len() {
        let w = t.apply(out[k]);
        if !out.contains(&w) {
            out.push(w);
        }
        k += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn random_ffe(rng: &mut ChaCha8Rng, p: usize) -> Endofunction {
    let map = (0..p)
        .map(|i| {
            let mut t = rng.random_range(0..p - 1);
            if t >= i {
                t += 1;
            }
            t
        })
        .collect();
    Endofunction::new(map).unwrap()
}

#[test]
fn counts_match_formula() {
    for p in 2..=6 {
        assert_eq!(enumerate_ffe(p).unwrap().len(), (p - 1).pow(p as u32));
    }
}

#[test]
fn brute_force_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let d = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = PointConfiguration::new(pts).unwrap();
        let t = nn_endofunction(&c).unwrap();
        assert!(nn_indicator(&c, &t));
        assert!(pin_and_sum_count(&c).unwrap() >= 1);
    }
}

proptest! {
    #[test]
    fn decomposition_covers_and_cycles_match(seed in any::<u64>(), p in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_ffe(&mut rng, p);
        let d = hairy_decompose(&t);
        let mut all: Vec<usize> = d.components.iter().flat_map(|c| c.vertices.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..p).collect::<Vec<_>>());
        let mut cycles: Vec<usize> = d.components.iter().flat_map(|c| c.cycle.clone()).collect();
        cycles.sort_unstable();
        prop_assert_eq!(cycles, cycle_vertices_by_iteration(&t));
        for c in &d.components {
            prop_assert!(c.cycle.len() >= 2);
        }
    }

    #[test]
    fn every_root_gives_a_valid_schedule(seed in any::<u64>(), p in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_ffe(&mut rng, p);
        let d = hairy_decompose(&t);
        for root in 0..p {
            let s = integration_schedule(&d, root, true).unwrap();
            prop_assert!(check_component_schedule(&d, root, &s).is_ok());
            let on_cycle = d.components.iter().any(|c| c.on_cycle(root));
            prop_assert_eq!(integration_schedule(&d, root, false).is_ok(), on_cycle);
        }
        let full = full_schedule(&d).unwrap();
        let roots: Vec<usize> = d.components.iter().map(|c| *c.cycle.iter().min().unwrap()).collect();
        prop_assert!(check_schedule(&(0..p).collect::<Vec<_>>(), &t.edges(), &roots, &full).is_ok());
    }

    #[test]
    fn decomposition_count(n in 0usize..6, parts in 1usize..4) {
        let ground: Vec<usize> = (0..n).collect();
        let all = enumerate_decompositions(&ground, parts).unwrap();
        prop_assert_eq!(all.len(), parts.pow(n as u32));
        for dcmp in &all {
            prop_assert_eq!(dcmp.ground(), ground.clone());
        }
    }
}

#[test]
fn single_two_cycle() {
    let t = Endofunction::from_one_based(&[2, 1]).unwrap();
    let d = hairy_decompose(&t);
    let s = integration_schedule(&d, 0, false).unwrap();
    assert_eq!(s, vec![ScheduleStep::beta(1), ScheduleStep::l1(0)]);
}

fn worked_example() -> TauSigmaGraph {
    let tau = [
        2, 3, 2, 3, 3, 7, 20, 9, 10, 24, 12, 13, 14, 26, // good
        16, 17, 16, 19, 18, 21, 22, 20, 20, 23, 23, 27, 26, // bad
    ];
    let tau = Endofunction::from_one_based(&tau).unwrap();
    let sigma_bad = [16, 17, 16, 19, 16, 21, 22, 19, 20, 23, 23, 27, 26];
    let mut sigma = vec![None; 14];
    sigma.extend(sigma_bad.iter().map(|&s| Some(s - 1)));
    let bad: Vec<bool> = (0..27).map(|a| a >= 14).collect();
    TauSigmaGraph::new(tau, sigma, bad, vec![true; 27]).unwrap()
}

#[test]
fn worked_two_scale_example() {
    let g = worked_example();
    let plan = two_scale_schedule(&g).unwrap();
    check_two_scale_plan(&g, &plan).unwrap();
    assert_eq!(plan.q(), 2);
    assert_eq!(plan.roots, vec![14, 25]);
    assert_eq!(plan.subcomponents[0].len(), 3);
    let order: Vec<usize> = plan.steps.iter().map(|s| s.vertex + 1).collect();
    assert_eq!(&order[..14], &[1, 4, 5, 3, 2, 6, 7, 8, 9, 10, 11, 12, 13, 14]);
    assert_eq!(&order[14..], &[24, 25, 23, 20, 21, 22, 18, 19, 17, 16, 15, 27, 26]);
    let bad_steps: Vec<&PlanStep> = plan.steps.iter().filter(|s| s.vertex >= 14).collect();
    let count = |l| bad_steps.iter().filter(|s| s.lemma == l).count();
    assert_eq!(count(LemmaId::GlobalL1), 2);
    assert_eq!(count(LemmaId::LocalBeta), 4);
    assert_eq!(count(LemmaId::LocalL1), 7);
    assert_eq!(plan.steps[3].lemma, LemmaId::GlobalBeta);

    // The published order, with W_2 integrated first, passes the same checker.
    let published = [27, 26, 24, 25, 23, 20, 21, 22, 18, 19, 17, 16, 15];
    let lemma = |v: usize| match v {
        15 | 26 => LemmaId::GlobalL1,
        27 | 20 | 18 | 17 => LemmaId::LocalBeta,
        _ => LemmaId::LocalL1,
    };
    let mut alt = plan.clone();
    alt.steps.truncate(14);
    alt.steps.extend(published.iter().map(|&v| PlanStep {
        vertex: v - 1,
        lemma: lemma(v),
    }));
    check_two_scale_plan(&g, &alt).unwrap();
    // Swapping a beta for an L1 breaks it.
    alt.steps[19].lemma = LemmaId::LocalL1;
    assert!(check_two_scale_plan(&g, &alt).is_err());
    assert!(g.to_dot(None).contains("kind=sigma"));
}

#[test]
fn all_good_and_single_bad_pair() {
    let tau = Endofunction::from_one_based(&[2, 1, 2]).unwrap();
    let g = TauSigmaGraph::new(tau.clone(), vec![None; 3], vec![false; 3], vec![true; 3]).unwrap();
    let plan = two_scale_schedule(&g).unwrap();
    check_two_scale_plan(&g, &plan).unwrap();
    assert_eq!(plan.q(), 0);
    let g = TauSigmaGraph::new(
        tau,
        vec![Some(1), Some(0), None],
        vec![true, true, false],
        vec![true; 3],
    )
    .unwrap();
    let plan = two_scale_schedule(&g).unwrap();
    check_two_scale_plan(&g, &plan).unwrap();
    assert_eq!(plan.q(), 1);
    let tail: Vec<(usize, LemmaId)> = plan.steps[1..].iter().map(|s| (s.vertex, s.lemma)).collect();
    assert_eq!(tail, vec![(1, LemmaId::LocalBeta), (0, LemmaId::GlobalL1)]);
}

#[test]
fn two_bad_x_vertices_are_swapped_by_sigma() {
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let shape = TermShape::new(vec![FactorClass::BadX2, FactorClass::Bad34], vec![f], vec![q(1, 5)]).unwrap();
    let table = BlockTable::build(&shape, q(3, 10), q(1, 100)).unwrap();
    let scale = 2f64.powi(-3);
    let c = PointConfiguration::new(vec![vec![0.0], vec![0.1 * scale]]).unwrap();
    let g = construct_tau_sigma(&c, &table, 4.0, 2.0, -3).unwrap();
    assert_eq!(g.sigma, vec![Some(1), Some(0)]);
    assert!(verify_claim(&c, &g).all());
    let far = PointConfiguration::new(vec![vec![0.0], vec![10.0]]).unwrap();
    assert!(matches!(
        construct_tau_sigma(&far, &table, 4.0, 2.0, -3),
        Err(opelab::Error::EmptyTerm(_))
    ));
}

#[test]
fn block_table_partner_rows() {
    let f = FactorDims::new(q(1, 5), q(3, 10), q(2, 5));
    let shape = TermShape::new(vec![FactorClass::BadOpeOpe1], vec![f], vec![]).unwrap();
    let t = BlockTable::build(&shape, q(1, 2), q(1, 100)).unwrap();
    assert_eq!(t.vertices[0].beta, q(3, 10) + q(1, 100));
    assert_eq!(t.vertices[1].beta, q(1, 5) + q(1, 100));
    assert!(t.vertices.iter().all(|v| v.effective));
    let shape = TermShape::new(vec![FactorClass::Good34; 3], vec![], vec![q(1, 5); 3]).unwrap();
    let t = BlockTable::build(&shape, q(1, 2), q(1, 100)).unwrap();
    assert_eq!(t.len(), 3);
    assert!(t.vertices.iter().all(|v| v.effective && v.side == Side::X));
}

#[test]
fn inconsistent_decompositions_rejected() {
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let triple = Decomposition {
        parts: vec![vec![0], vec![], vec![]],
    };
    let wrong = Decomposition {
        parts: vec![vec![], vec![], vec![]],
    };
    let empty = wrong.clone();
    let r = TermShape::from_decompositions(&triple, &wrong, &empty, &[], vec![f], vec![]);
    assert!(matches!(r, Err(opelab::Error::Format(_))));
}

#[test]
fn ledger_reconciles() {
    let p = PowerParams::new(1, q(3, 10), q(1, 100));
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let shape = TermShape::new(
        vec![FactorClass::BadOpeOpe1, FactorClass::BadCzOpe1, FactorClass::Bad34],
        vec![f, f.with_channel(q(1, 5))],
        vec![q(0, 1)],
    )
    .unwrap();
    let l = PowerCountLedger::build(&shape, 1, &p).unwrap();
    assert!(l.reconciled);
    assert!(!l.alpha_total.is_zero());
}

#[test]
fn exhaustive_power_count_small() {
    let p = PowerParams::new(1, q(3, 10), q(1, 100));
    let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
    let r = exhaustive_power_count(&p, &[f], &[q(0, 1), q(1, 5), q(2, 5)], &[q(0, 1), q(1, 5), q(2, 5)], 2, 2).unwrap();
    assert!(r.pass, "{:?}", r.failures.first());
    assert!(r.terms > 0);
    assert_eq!(r.nonpositive_nu, 0);
}
