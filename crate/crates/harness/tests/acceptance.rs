//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so every criterion reports even when an earlier one
//! fails; the process exits non-zero if any criterion fails.

use lusin_core::check::{lipschitz_check, match_check, modulus_check, supnorm_check, tail_pinch_check, PairPlan};
use lusin_core::heisenberg::*;
use lusin_core::lusin::{multi_stage_build, BuildCertificate, BuildConfig};
use lusin_core::rng::stream;
use lusin_core::{BoxDomain, CatalogField, FieldCollection, Modulus};
use lusin_harness::FunctionFile;
use rand::Rng;
use std::cmp::Ordering;
use std::f64::consts::{E, PI};
use std::process::Command;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn lusin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lusin"))
        .args(args)
        .env_remove("LUSIN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn csv_value(out: &std::process::Output, key: &str) -> Option<f64> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")).and_then(|v| v.parse().ok()))
}

/// 1. `heis counterexample` gives −2 and +2 to 1e−10 in under a second.
fn counterexample() -> Outcome {
    let t = Instant::now();
    let out = lusin(&["heis", "counterexample"]);
    let elapsed = t.elapsed();
    let (a, b) = (csv_value(&out, "path_a"), csv_value(&out, "path_b"));
    let (Some(a), Some(b)) = (a, b) else {
        return outcome(false, "missing values in CLI output");
    };
    let ok = out.status.success() && (a + 2.0).abs() <= 1e-10 && (b - 2.0).abs() <= 1e-10 && elapsed < Duration::from_secs(1);
    outcome(ok, format!("path A {a}, path B {b}, difference {}, {elapsed:.2?}", b - a))
}

/// 2. Both branches of the log preset meet at `e⁻¹` with value 1.
fn log_preset() -> Outcome {
    let mu = Modulus::LogPreset;
    let joint = 1.0 / E;
    let left = 1.0 / joint.ln().abs();
    let right = E * joint;
    let at = mu.eval(joint).unwrap();
    let below = mu.eval(joint * (1.0 - 1e-13)).unwrap();
    let above = mu.eval(joint * (1.0 + 1e-13)).unwrap();
    let checks = [
        mu.eval(0.0).unwrap() == 0.0,
        (left - 1.0).abs() <= 1e-12,
        (right - 1.0).abs() <= 1e-12,
        (at - 1.0).abs() <= 1e-12,
        (mu.eval(1.0).unwrap() - E).abs() <= 1e-12,
        (below - above).abs() <= 1e-12,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "μ(0)={}, branches at e⁻¹: {left} / {right}, μ(1)={}, jump across e⁻¹ {:e}",
            mu.eval(0.0).unwrap(),
            mu.eval(1.0).unwrap(),
            (below - above).abs()
        ),
    )
}

fn graph_config() -> BuildConfig {
    BuildConfig {
        epsilon: 0.05,
        sigma: 0.5,
        modulus: Modulus::LogPreset,
        tau: 1e-3,
        max_stages: 6,
        certify_pairs: 100_000,
        ..BuildConfig::default()
    }
}

/// 3. The horizontal graph build with the log modulus.
fn graph_outcome(build: &Result<(GraphMap, BuildCertificate), lusin_core::Error>, elapsed: Duration) -> Outcome {
    let (graph, cert) = match build {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("build failed after {elapsed:.1?}: {e}")),
    };
    let GraphSource::Bump(g) = graph.source() else {
        unreachable!("the pipeline returns a bump sum")
    };
    let dom = graph.domain();
    let a = cert.residual_measure <= 0.05 * dom.measure();
    let frac = characteristic_fraction(graph, 1e-3, 257).unwrap();
    let b = frac.fraction >= 0.95;
    let c = cert.sup_ledger.iter().all(|&v| v < 0.5);
    let modulus = modulus_check(g, &Modulus::LogPreset, dom, &PairPlan::for_domain(dom, 100_000), 0);
    let pinch = tail_pinch_check(g, &cert.stage_boxes(), 0.5, 10_000, 0);
    let e = pinch.worst_ratio <= 1.0;
    outcome(
        a && b && c && modulus.passed && e,
        format!(
            "residual {:.4}, characteristic fraction {:.4}, sup ledger {:?}, modulus worst ratio {:.3e}, pinch worst ratio {:.3e}, {elapsed:.1?}",
            cert.residual_measure, frac.fraction, cert.sup_ledger, modulus.worst_ratio, pinch.worst_ratio
        ),
    )
}

/// 4. Second-order build for `f_{(2,0)} = 2`, other components 0.
fn second_order() -> Outcome {
    let t = Instant::now();
    let field = FieldCollection::catalog(CatalogField::Constant {
        dim: 2,
        order: 2,
        values: vec![0.0, 0.0, 2.0],
    })
    .unwrap();
    let dom = BoxDomain::unit(2);
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 0.75 },
        theta: 0.5,
        resolution: 8,
        certify_pairs: 0,
        ..BuildConfig::default()
    };
    let (g, cert) = match multi_stage_build(&field, &dom, &cfg) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let boxes: Vec<_> = cert.covered_boxes().map(|b| b.as_pair()).collect();
    let matched = match_check(&g, &field, &boxes, cfg.tau, 10_000, 1);
    let plan = PairPlan::for_domain(&dom, 20_000);
    let lipschitz = lipschitz_check(&g, cfg.sigma, &dom, &plan, 2);
    let modulus = modulus_check(&g, &cfg.modulus, &dom, &plan, 3);
    let sup = supnorm_check(&g, cfg.sigma, &dom, 10_000, 4);
    let elapsed = t.elapsed();
    outcome(
        matched.passed && lipschitz.passed && modulus.passed && elapsed < Duration::from_secs(300),
        format!(
            "{} terms, residual {:.4}; match worst ratio {:.3}, order-0 Lipschitz worst ratio {:.3e} (σ = {}), first-derivative modulus worst ratio {:.3e}, sup worst ratio {:.3e}, {elapsed:.1?}",
            g.terms().len(),
            cert.residual_measure,
            matched.worst_ratio,
            lipschitz.worst_ratio,
            cfg.sigma,
            modulus.worst_ratio,
            sup.worst_ratio
        ),
    )
}

fn random_point(rng: &mut impl Rng) -> HPoint {
    HPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))
}

/// 5. Metric axioms, left invariance, dilations and the (A+B) comparison.
fn koranyi_suite() -> Outcome {
    let t = Instant::now();
    let mut rng = stream(0, "acceptance-koranyi");
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
    let (mut sym, mut tri, mut inv, mut dil): (f64, f64, f64, f64) = (0.0, f64::INFINITY, 0.0, 0.0);
    for _ in 0..10_000 {
        let (p, q, r) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let d = koranyi_dist(&p, &q);
        sym = sym.max(rel(d, koranyi_dist(&q, &p)));
        tri = tri.min(koranyi_dist(&p, &r) + koranyi_dist(&r, &q) - d);
        inv = inv.max(rel(koranyi_dist(&r.mul(&p), &r.mul(&q)), d));
        let lambda = rng.gen_range(1e-6..10.0);
        dil = dil.max(rel(p.dilate(lambda).koranyi_norm(), lambda * p.koranyi_norm()));
    }
    let mut kor_worst: f64 = 0.0;
    let upper = 2f64.powf(0.25);
    for _ in 0..100_000 {
        let (p, q) = (random_point(&mut rng), random_point(&mut rng));
        let (a, b) = koranyi_parts(&p, &q);
        let d = koranyi_dist(&p, &q);
        // ratios above 1 violate one of the two comparisons
        kor_worst = kor_worst.max(0.5 * (a + b) / d).max(d / (upper * (a + b)));
    }
    let elapsed = t.elapsed();
    let ok = sym <= 1e-10 && tri >= -1e-10 && inv <= 1e-10 && dil <= 1e-10 && kor_worst <= 1.0 + 1e-12 && elapsed < Duration::from_secs(30);
    outcome(
        ok,
        format!(
            "symmetry {sym:.1e}, triangle slack min {tri:.3e}, left invariance {inv:.1e}, dilation {dil:.1e}, Korányi comparison worst ratio {kor_worst:.4}, {elapsed:.1?}"
        ),
    )
}

/// 6. CC brackets: horizontal segment, vertical target against a circle oracle,
///    ordering on random pairs.
fn cc_bounds() -> Outcome {
    let t = Instant::now();
    // oracle first: scan circular loops through the origin by radius until the
    // enclosed area reaches |t|/4 = 1/4
    let mut oracle = f64::INFINITY;
    for k in 1..2_000_000u32 {
        let r = f64::from(k) * 1e-6;
        if PI * r * r >= 0.25 {
            oracle = 2.0 * PI * r;
            break;
        }
    }
    let cfg = CcConfig::default();
    let o = HPoint::IDENTITY;
    let seg = cc_dist_bounds(&o, &HPoint::new(1.0, 0.0, 0.0), &cfg);
    let vert = cc_dist_bounds(&o, &HPoint::new(0.0, 0.0, 1.0), &cfg);
    let mut rng = stream(0, "acceptance-cc");
    let mut violations = 0;
    let mut loose = 0;
    for _ in 0..1000 {
        let mut pt = || HPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (p, q) = (pt(), pt());
        let b = cc_dist_bounds(&p, &q, &cfg);
        violations += usize::from(!matches!(b.lower.partial_cmp(&b.upper), Some(Ordering::Less | Ordering::Equal)));
        loose += usize::from(b.loose);
    }
    let elapsed = t.elapsed();
    let ok = seg.lower == 1.0
        && seg.upper <= 1.001
        && (vert.upper - oracle).abs() <= 0.02 * oracle
        && violations == 0
        && elapsed < Duration::from_secs(120);
    outcome(
        ok,
        format!(
            "segment [{}, {}], vertical [{:.5}, {:.5}] vs oracle {oracle:.5} (√π = {:.5}), {violations} ordering violations and {loose} loose brackets in 1000 pairs, {elapsed:.1?}",
            seg.lower,
            seg.upper,
            vert.lower,
            vert.upper,
            PI.sqrt()
        ),
    )
}

/// 7. Exponent halving for `u = x` and for the horizontal graph build.
fn holder(build: &Result<(GraphMap, BuildCertificate), lusin_core::Error>) -> Outcome {
    let t = Instant::now();
    let square = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let plane = GraphMap::surface(square, Surface::PlaneX).unwrap();
    let p = holder_transfer_check(&plane, &HolderConfig::default()).unwrap();
    let plane_ok = (0.95..=1.05).contains(&p.alpha_u.exponent) && (0.45..=0.55).contains(&p.alpha_phi.exponent);
    let plane_msg = format!("u = x: α_u {:.4}, α_Φ {:.4}", p.alpha_u.exponent, p.alpha_phi.exponent);
    let (built_ok, built_msg) = match build {
        Ok((graph, _)) => {
            let r = holder_transfer_check(graph, &HolderConfig::for_graph(graph, 0)).unwrap();
            (
                r.alpha_u.exponent >= 0.9 && r.passed,
                format!(
                    "horizontal graph: α_u {:.4}, α_Φ {:.4}, gap {:.4}",
                    r.alpha_u.exponent, r.alpha_phi.exponent, r.gap
                ),
            )
        }
        Err(e) => (false, format!("horizontal graph unavailable ({e})")),
    };
    let elapsed = t.elapsed();
    outcome(
        plane_ok && built_ok && elapsed < Duration::from_secs(120),
        format!("{plane_msg}; {built_msg}; {elapsed:.1?}"),
    )
}

/// 8. A manifest rerun reproduces the certificate byte for byte, and a saved
///    function evaluates bit-identically after loading.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let first = lusin(&[
        "construct", "--field", "heisenberg", "--modulus", "power:1", "--resolution", "16", "--theta", "0.05",
        "--stages", "2", "--certify-pairs", "5000", "--out", out, "--name", "first",
    ]);
    if first.status.code() != Some(0) && first.status.code() != Some(4) {
        return outcome(false, format!("construct failed: {}", String::from_utf8_lossy(&first.stderr)));
    }
    let manifest = dir.path().join("first.manifest.json");
    let again = lusin(&["rerun", manifest.to_str().unwrap(), "--out", out, "--name", "second"]);
    if again.status.code() != first.status.code() {
        return outcome(false, "rerun exit code differs");
    }
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    let cert_same = read("first.cert.json") == read("second.cert.json");
    let fn_same = read("first.lfn") == read("second.lfn");

    let loaded = FunctionFile::load(&dir.path().join("first.lfn")).unwrap();
    let field = FieldCollection::heisenberg();
    let cfg = BuildConfig {
        modulus: Modulus::Power { beta: 1.0 },
        resolution: 16,
        theta: 0.05,
        max_stages: 2,
        certify_pairs: 5000,
        ..BuildConfig::default()
    };
    let (g, _) = multi_stage_build(&field, &BoxDomain::unit(2), &cfg).unwrap();
    let mut rng = stream(0, "acceptance-roundtrip");
    let dx = lusin_core::MultiIndex::unit(2, 0);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        mismatches += usize::from(g.value(&x).to_bits() != loaded.function.value(&x).to_bits());
        mismatches += usize::from(g.deriv(&x, &dx).unwrap().to_bits() != loaded.function.deriv(&x, &dx).unwrap().to_bits());
    }
    outcome(
        cert_same && fn_same && mismatches == 0,
        format!(
            "certificate identical: {cert_same}, function file identical: {fn_same}, bit mismatches at 1000 points: {mismatches}"
        ),
    )
}

fn main() {
    let t = Instant::now();
    let build = build_horizontal_graph(&BoxDomain::unit(2), &graph_config());
    let build_time = t.elapsed();
    let results = [
        ("1 counterexample", counterexample()),
        ("2 log modulus preset", log_preset()),
        ("3 horizontal graph end to end", graph_outcome(&build, build_time)),
        ("4 second-order build", second_order()),
        ("5 Korányi metric suite", koranyi_suite()),
        ("6 CC bounds", cc_bounds()),
        ("7 Hölder transfer", holder(&build)),
        ("8 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
