use lusin_core::heisenberg::*;
use lusin_core::lusin::BuildConfig;
use lusin_core::{BoxDomain, Modulus};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

fn point() -> impl Strategy<Value = HPoint> {
    (coord(), coord(), coord()).prop_map(|(x, y, t)| HPoint::new(x, y, t))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn group_axioms(p in point(), q in point(), r in point()) {
        let (a, b) = (p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        prop_assert!(a.euclidean_dist(&b) <= 1e-12 * (1.0 + a.t.abs()));
        prop_assert!(p.mul(&p.inv()).euclidean_dist(&HPoint::IDENTITY) == 0.0);
    }

    #[test]
    fn koranyi_is_a_left_invariant_metric(p in point(), q in point(), r in point()) {
        let d = koranyi_dist(&p, &q);
        prop_assert!(close(d, koranyi_dist(&q, &p), 1e-12));
        prop_assert!(d <= koranyi_dist(&p, &r) + koranyi_dist(&r, &q) + 1e-10);
        if p != q {
            prop_assert!(d > 0.0);
        }
        prop_assert!(close(koranyi_dist(&r.mul(&p), &r.mul(&q)), d, 1e-10));
    }

    #[test]
    fn dilation_scales_the_gauge(p in point(), lambda in 1e-3..10.0f64) {
        prop_assert!(close(p.dilate(lambda).koranyi_norm(), lambda * p.koranyi_norm(), 1e-10));
    }

    #[test]
    fn gauge_sits_between_the_comparison_sums(p in point(), q in point()) {
        let (a, b) = koranyi_parts(&p, &q);
        let d = koranyi_dist(&p, &q);
        prop_assert!(0.5 * (a + b) <= d * (1.0 + 1e-12));
        prop_assert!(d <= 2f64.powf(0.25) * (a + b) * (1.0 + 1e-12));
    }

    #[test]
    fn lifted_length_is_translation_invariant(r in point(), pts in prop::collection::vec((coord(), coord()), 1..12)) {
        let rest: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let path = HorizontalPath::through(HPoint::IDENTITY, &rest);
        let moved = path.left_translate(&r);
        prop_assert!(close(moved.length(), path.length(), 1e-10));
        prop_assert!(moved.end().euclidean_dist(&r.mul(&path.end())) <= 1e-9 * (1.0 + r.t.abs() + path.end().t.abs()));
    }
}

#[test]
fn comparison_constants_on_the_unit_cube() {
    let c = euclidean_comparison(100_000, 0);
    assert!(c.c1 > 0.0 && c.c1 <= 1.0, "{c:?}");
    assert!(c.c2.is_finite() && c.c2 >= 1.0, "{c:?}");
}

#[test]
fn cc_bracket_on_random_pairs() {
    let cfg = CcConfig {
        segments: 48,
        iterations: 100,
        seed: 5,
    };
    let mut worst_ratio: f64 = 1.0;
    for i in 0..200u32 {
        let f = |k: u32| ((i * 7 + k * 13) % 97) as f64 / 48.5 - 1.0;
        let (p, q) = (HPoint::new(f(0), f(1), f(2)), HPoint::new(f(3), f(4), f(5)));
        let b = cc_dist_bounds(&p, &q, &cfg);
        assert!(b.lower <= b.upper, "{p} {q}: {b:?}");
        worst_ratio = worst_ratio.max(b.upper / b.lower.max(1e-300));
    }
    // the lower bound is within a bounded factor of the path length found
    assert!(worst_ratio < 3.0, "{worst_ratio}");
}

#[test]
fn horizontal_graph_pipeline() {
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 1.0 },
        epsilon: 0.05,
        theta: 0.02,
        resolution: 32,
        max_stages: 1,
        certify_pairs: 2000,
        ..BuildConfig::default()
    };
    let (graph, cert) = build_horizontal_graph(&BoxDomain::unit(2), &cfg).unwrap();
    assert!(cert.residual_measure <= 0.05);
    let frac = characteristic_fraction(&graph, 1e-3, 97).unwrap();
    assert!(frac.fraction >= 0.95, "{frac:?}");
    let t = holder_transfer_check(&graph, &HolderConfig::for_graph(&graph, 0)).unwrap();
    assert!(t.alpha_u.exponent >= 0.9, "{:?}", t.alpha_u);
    assert!(t.passed, "gap {}", t.gap);
}
