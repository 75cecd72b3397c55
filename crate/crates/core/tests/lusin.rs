use lusin_core::check::{lipschitz_check, match_check, modulus_check, supnorm_check, PairPlan};
use lusin_core::domain::Grid;
use lusin_core::lusin::{multi_stage_build, tail_pinch, BuildConfig};
use lusin_core::{BoxDomain, CatalogField, Error, FieldCollection, Modulus, MultiIndex};
use rand::{Rng, SeedableRng};

fn pairs(cert: &lusin_core::lusin::BuildCertificate) -> Vec<(Vec<f64>, Vec<f64>)> {
    cert.covered_boxes().map(|b| b.as_pair()).collect()
}

#[test]
fn zero_field_builds_the_zero_function() {
    let f = FieldCollection::catalog(CatalogField::Zero { dim: 2, order: 1 }).unwrap();
    let dom = BoxDomain::unit(2);
    let (g, cert) = multi_stage_build(&f, &dom, &BuildConfig::default()).unwrap();
    assert!(g.terms().is_empty());
    assert_eq!(cert.residual_measure, 0.0);
    assert_eq!(cert.stages.len(), 1);
    assert!((cert.stages[0].covered_measure - 1.0).abs() < 1e-12);
    assert!(cert.within_budget && !cert.partial);
    assert_eq!(cert.modulus_check.as_ref().unwrap().margin_factor, None);
}

#[test]
fn constant_derivative_is_exact_on_plateaus() {
    let f = FieldCollection::catalog(CatalogField::Constant {
        dim: 1,
        order: 1,
        values: vec![0.7],
    })
    .unwrap();
    let dom = BoxDomain::unit(1);
    let cfg = BuildConfig {
        theta: 0.5,
        tau: 0.0,
        resolution: 8,
        max_stages: 1,
        ..Default::default()
    };
    let (g, cert) = multi_stage_build(&f, &dom, &cfg).unwrap();
    assert!(!g.terms().is_empty());
    let report = match_check(&g, &f, &pairs(&cert), 0.0, 2000, 3);
    assert!(report.passed, "{report:?}");
    // θ = 1/2 leaves half of every accepted cell as plateau
    assert!((cert.stages[0].covered_measure - 0.5).abs() < 1e-9);
    assert!(cert.within_budget);
    assert!(cert.modulus_check.as_ref().unwrap().passed);
}

#[test]
fn heisenberg_single_stage_covers_most_cells() {
    let f = FieldCollection::heisenberg();
    let dom = BoxDomain::unit(2);
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 1.0 },
        theta: 0.02,
        tau: 1e-3,
        epsilon: 0.05,
        max_stages: 1,
        certify_pairs: 0,
        ..Default::default()
    };
    let (g, cert) = multi_stage_build(&f, &dom, &cfg).unwrap();
    assert!(cert.residual_measure <= 0.05, "residual {}", cert.residual_measure);
    // 10⁴ random points of K, exact derivatives against the field
    let boxes = pairs(&cert);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let b = &boxes[rng.gen_range(0..boxes.len())];
        let x: Vec<f64> = (0..2).map(|a| rng.gen_range(b.0[a]..=b.1[a])).collect();
        let gx = g.deriv(&x, &MultiIndex::new(vec![1, 0])).unwrap();
        let gy = g.deriv(&x, &MultiIndex::new(vec![0, 1])).unwrap();
        assert!((gx - 2.0 * x[1]).abs() <= 1e-3 + 1e-12, "{x:?}");
        assert!((gy + 2.0 * x[0]).abs() <= 1e-3 + 1e-12, "{x:?}");
    }
    assert!(cert.sup_ledger[0] < cfg.sigma);
}

#[test]
fn second_order_build_matches_and_stays_in_budget() {
    let f: FieldCollection = FieldCollection::catalog("quadratic-x".parse().unwrap()).unwrap();
    let dom = BoxDomain::unit(2);
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 0.75 },
        theta: 0.5,
        max_stages: 1,
        resolution: 8,
        certify_pairs: 0,
        ..Default::default()
    };
    let (g, cert) = multi_stage_build(&f, &dom, &cfg).unwrap();
    assert!(cert.within_budget);
    assert!(match_check(&g, &f, &pairs(&cert), cfg.tau, 2000, 1).passed);
    assert!(supnorm_check(&g, cfg.sigma, &dom, 2000, 1).passed);
    let plan = PairPlan::for_domain(&dom, 5000);
    assert!(lipschitz_check(&g, cfg.sigma, &dom, &plan, 2).passed);
    assert!(modulus_check(&g, &cfg.modulus, &dom, &plan, 2).passed);
}

#[test]
fn log_modulus_heisenberg_build_reports_the_binding_constraint() {
    let f = FieldCollection::heisenberg();
    let cfg = BuildConfig {
        theta: 0.9,
        resolution: 8,
        max_cells: 1 << 14,
        ..Default::default()
    };
    match multi_stage_build(&f, &BoxDomain::unit(2), &cfg) {
        Err(Error::StageInfeasible {
            stage, needed, allowed, ..
        }) => {
            assert_eq!(stage, 1);
            assert!(needed > allowed);
        }
        other => panic!("expected stage infeasibility, got {other:?}"),
    }
}

/// 1-D field: `0.5` on the left half, a fine staircase of small values on the right half.
/// Stage 1 stops at the coarse level, stage 2 picks up the right half.
fn two_stage_setup() -> (FieldCollection, BoxDomain, BuildConfig) {
    let dom = BoxDomain::unit(1);
    let grid = Grid::new(&dom, vec![64]);
    let values: Vec<f64> = (0..64)
        .map(|i| if i < 32 { 0.5 } else { 0.01 * (i - 32) as f64 / 32.0 })
        .collect();
    let f = FieldCollection::sampled(1, grid, vec![values]).unwrap();
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 1.0 },
        epsilon: 0.9,
        theta: 0.5,
        tau: 1e-6,
        resolution: 4,
        max_cells: 4096,
        max_stages: 3,
        certify_pairs: 2000,
        ..Default::default()
    };
    (f, dom, cfg)
}

#[test]
fn later_stages_cover_what_earlier_ones_left() {
    let (f, dom, cfg) = two_stage_setup();
    let (g, cert) = multi_stage_build(&f, &dom, &cfg).unwrap();
    assert!(cert.stages.len() >= 2, "{}", cert.stop_reason);
    assert!(cert.stages[1].terms > 0);
    assert_eq!(g.stage_count(), 2);
    // residual never increases and stages are disjoint
    let residuals: Vec<f64> = cert.stages.iter().map(|s| s.residual_after).collect();
    assert!(residuals.windows(2).all(|w| w[1] <= w[0]));
    assert!(cert.stages_disjoint());
    assert!(cert.within_budget);
    let m = match_check(&g, &f, &pairs(&cert), cfg.tau, 2000, 5);
    assert!(m.passed, "{m:?} {:?}", cert.stages.iter().map(|s| (s.level, s.terms, s.zero_cells, s.covered_measure)).collect::<Vec<_>>());

    // per-stage derivatives sum to the total
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let gamma = MultiIndex::new(vec![1]);
    for _ in 0..1000 {
        let x = [rng.gen_range(0.0..1.0)];
        let total = g.deriv(&x, &gamma).unwrap();
        let parts: f64 = g.deriv_by_stage(&x, &gamma).iter().sum();
        assert!((total - parts).abs() <= 1e-12 * total.abs().max(1.0));
    }

    let pinch = tail_pinch(&g, &cert, 10_000, 9);
    assert!(pinch.passed, "{pinch:?}");
    assert!(pinch.worst_ratio > 0.0, "some samples must reach stage 2: {pinch:?} {:?}", cert.stages.iter().map(|s| (s.level, s.terms, s.zero_cells, &s.covered)).collect::<Vec<_>>());
}

#[test]
fn stage_two_terms_are_pinched_near_stage_one_covers() {
    let (f, dom, cfg) = two_stage_setup();
    let (g, cert) = multi_stage_build(&f, &dom, &cfg).unwrap();
    let k1 = &cert.stages[0].covered;
    let x = k1.iter().map(|b| b.hi[0]).fold(0.0, f64::max);
    let order0 = MultiIndex::new(vec![0]);
    for h in [0.07, 0.08, 0.09, 0.1] {
        let stage2 = g.deriv_by_stage(&[x + h], &order0)[1].abs();
        assert!(stage2 <= 0.25 * cfg.sigma * h * h, "h={h}: {stage2}");
    }
}

#[test]
fn identical_configs_give_identical_certificates() {
    let (f, dom, cfg) = two_stage_setup();
    let (g1, c1) = multi_stage_build(&f, &dom, &cfg).unwrap();
    let (g2, c2) = multi_stage_build(&f, &dom, &cfg).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(g1.terms(), g2.terms());
}

#[test]
fn invalid_configs_are_rejected() {
    let f = FieldCollection::heisenberg();
    let dom = BoxDomain::unit(2);
    for cfg in [
        BuildConfig { epsilon: 0.0, ..Default::default() },
        BuildConfig { sigma: -1.0, ..Default::default() },
        BuildConfig { theta: 1.0, ..Default::default() },
        BuildConfig { quantile: Some(1.0), ..Default::default() },
        BuildConfig { max_stages: 0, ..Default::default() },
    ] {
        assert!(matches!(multi_stage_build(&f, &dom, &cfg), Err(Error::InvalidArgument(_))));
    }
    assert!(multi_stage_build(&f, &BoxDomain::unit(3), &BuildConfig::default()).is_err());
}
