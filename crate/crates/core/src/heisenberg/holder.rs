//! Empirical Hölder exponents by log–log regression of per-bin maxima, and
//! the exponent-halving transfer between `u` and its graph map `Φ`.

use super::graph::GraphMap;
use super::group::koranyi_dist;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderConfig {
    pub bins: usize,
    pub pairs_per_bin: usize,
    /// Smallest and largest separations, as fractions of the domain diameter.
    pub min_scale: f64,
    pub max_scale: f64,
    pub seed: u64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            bins: 10,
            pairs_per_bin: 2000,
            min_scale: 1e-3,
            max_scale: 1e-1,
            seed: 0,
        }
    }
}

impl HolderConfig {
    /// Default bins, moved below the graph's feature scale when it has one:
    /// the largest separation becomes a tenth of the smallest cell side and
    /// the range spans two decades.
    pub fn for_graph(g: &GraphMap, seed: u64) -> Self {
        let base = HolderConfig {
            seed,
            ..HolderConfig::default()
        };
        match g.feature_scale() {
            Some(h) => {
                let max_scale = (0.1 * h / g.domain().diameter()).min(base.max_scale);
                HolderConfig {
                    max_scale,
                    min_scale: 1e-2 * max_scale,
                    ..base
                }
            }
            None => base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderBin {
    pub lo: f64,
    pub hi: f64,
    /// Pairs the sampler actually produced.
    pub pairs: usize,
    pub max_displacement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Regression slope; `+∞` when the displacements vanish.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub bins: Vec<HolderBin>,
    pub degenerate: bool,
    pub note: String,
}

/// Fits `log max|Δ| ≈ α log r + c` over log-spaced separation bins.
///
/// `sample` receives a bin-private RNG and a target separation `r` and
/// returns `(separation, displacement)` for one pair, or `None` when it could
/// not place a pair at that scale. Bin edges are absolute: `diameter` times
/// the configured scales.
pub fn holder_exponent<F>(sample: F, diameter: f64, cfg: &HolderConfig) -> Result<HolderFit>
where
    F: Fn(&mut ChaCha8Rng, f64) -> Option<(f64, f64)> + Sync + Send,
{
    if cfg.bins < 8 || cfg.pairs_per_bin < 100 {
        return Err(Error::InvalidArgument(format!(
            "need ≥ 8 bins of ≥ 100 pairs, got {} × {}",
            cfg.bins, cfg.pairs_per_bin
        )));
    }
    if !(diameter > 0.0 && cfg.min_scale > 0.0 && cfg.min_scale < cfg.max_scale) {
        return Err(Error::InvalidArgument(format!(
            "bad scale range [{}, {}] × {diameter}",
            cfg.min_scale, cfg.max_scale
        )));
    }
    let (l0, l1) = ((cfg.min_scale * diameter).ln(), (cfg.max_scale * diameter).ln());
    let step = (l1 - l0) / cfg.bins as f64;
    let bins = par::map_range(cfg.bins, |b| {
        let (lo, hi) = ((l0 + b as f64 * step).exp(), (l0 + (b + 1) as f64 * step).exp());
        let mut rng = substream(cfg.seed, "holder", b as u64);
        let mut pairs = 0;
        let mut max_displacement: f64 = 0.0;
        for _ in 0..cfg.pairs_per_bin {
            let r = rng.gen_range(lo.ln()..hi.ln()).exp();
            if let Some((_, d)) = sample(&mut rng, r) {
                pairs += 1;
                max_displacement = max_displacement.max(d);
            }
        }
        HolderBin {
            lo,
            hi,
            pairs,
            max_displacement,
        }
    });
    if let Some(b) = bins.iter().find(|b| b.pairs == 0) {
        return Err(Error::InvalidArgument(format!(
            "sampler produced no pairs at separations [{:e}, {:e}]",
            b.lo, b.hi
        )));
    }
    let zero_bins = bins.iter().filter(|b| b.max_displacement <= 0.0).count();
    if zero_bins > 0 {
        return Ok(HolderFit {
            exponent: f64::INFINITY,
            intercept: f64::NAN,
            r_squared: f64::NAN,
            bins,
            degenerate: true,
            note: format!("{zero_bins} bin(s) with zero displacement; the sampled map is locally constant"),
        });
    }
    let xs: Vec<f64> = bins.iter().map(|b| (b.lo * b.hi).sqrt().ln()).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.max_displacement.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(HolderFit {
        exponent: slope,
        intercept,
        r_squared,
        bins,
        degenerate: false,
        note: String::new(),
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Uniform point of the graph's domain and a partner at distance `r` in a
/// uniform direction; `None` after repeated exits from the domain.
fn planar_pair(g: &GraphMap, rng: &mut ChaCha8Rng, r: f64) -> Option<([f64; 2], [f64; 2])> {
    let (lo, hi) = (g.domain().lower(), g.domain().upper());
    for _ in 0..32 {
        let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let q = [p[0] + r * a.cos(), p[1] + r * a.sin()];
        if g.domain().contains(&p) && g.domain().contains(&q) {
            return Some((p, q));
        }
    }
    None
}

/// Exponent of `u` against the Euclidean metric of the plane.
pub fn graph_exponent(g: &GraphMap, cfg: &HolderConfig) -> Result<HolderFit> {
    holder_exponent(
        |rng, r| {
            let (p, q) = planar_pair(g, rng, r)?;
            Some((r, (g.value(p) - g.value(q)).abs()))
        },
        g.domain().diameter(),
        cfg,
    )
}

/// Exponent of `Φ` from the Euclidean plane into `(ℍ₁, d_K)`.
pub fn lift_exponent(g: &GraphMap, cfg: &HolderConfig) -> Result<HolderFit> {
    holder_exponent(
        |rng, r| {
            let (p, q) = planar_pair(g, rng, r)?;
            Some((r, koranyi_dist(&g.lift(p), &g.lift(q))))
        },
        g.domain().diameter(),
        cfg,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderTransferReport {
    pub alpha_u: HolderFit,
    pub alpha_phi: HolderFit,
    /// `|α_Φ − α_u/2|`; `NaN` when either fit is degenerate.
    pub gap: f64,
    pub tolerance: f64,
    pub degenerate: bool,
    pub passed: bool,
}

/// Estimates `α_u` and `α_Φ` and checks `|α_Φ − α_u/2| ≤ 0.1`.
///
/// Both fits share the configuration but draw from different seeds.
pub fn holder_transfer_check(g: &GraphMap, cfg: &HolderConfig) -> Result<HolderTransferReport> {
    const TOLERANCE: f64 = 0.1;
    let alpha_u = graph_exponent(g, cfg)?;
    let lifted = HolderConfig {
        seed: cfg.seed ^ 0x9e37_79b9_7f4a_7c15,
        ..cfg.clone()
    };
    let alpha_phi = lift_exponent(g, &lifted)?;
    let degenerate = alpha_u.degenerate || alpha_phi.degenerate;
    let gap = if degenerate {
        f64::NAN
    } else {
        (alpha_phi.exponent - 0.5 * alpha_u.exponent).abs()
    };
    Ok(HolderTransferReport {
        passed: !degenerate && gap <= TOLERANCE,
        alpha_u,
        alpha_phi,
        gap,
        tolerance: TOLERANCE,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::super::graph::Surface;
    use super::*;
    use crate::domain::BoxDomain;

    fn square() -> BoxDomain {
        BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn power_laws_are_recovered() {
        for alpha in [0.3, 0.5, 1.0] {
            let fit = holder_exponent(|_, r| Some((r, 3.0 * r.powf(alpha))), 1.0, &HolderConfig::default()).unwrap();
            assert!((fit.exponent - alpha).abs() < 1e-3, "{alpha}: {}", fit.exponent);
            assert!(fit.r_squared > 0.9999);
        }
    }

    #[test]
    fn plane_and_root() {
        let cfg = HolderConfig::default();
        let plane = GraphMap::surface(square(), Surface::PlaneX).unwrap();
        let t = holder_transfer_check(&plane, &cfg).unwrap();
        assert!((0.95..=1.05).contains(&t.alpha_u.exponent), "{}", t.alpha_u.exponent);
        assert!((0.45..=0.55).contains(&t.alpha_phi.exponent), "{}", t.alpha_phi.exponent);
        assert!(t.passed);
        let root = GraphMap::surface(square(), Surface::SqrtAbsX).unwrap();
        // the worst pairs straddle x = 0, so the thin strip needs more samples
        let dense = HolderConfig { pairs_per_bin: 20_000, ..cfg };
        let a = graph_exponent(&root, &dense).unwrap().exponent;
        assert!((0.45..=0.55).contains(&a), "root α_u = {a}");
    }

    #[test]
    fn flat_graph_lift_is_half_holder() {
        let zero = GraphMap::surface(square(), Surface::Constant { value: 0.0 }).unwrap();
        let a = lift_exponent(&zero, &HolderConfig::default()).unwrap().exponent;
        assert!((0.45..=0.55).contains(&a), "{a}");
    }

    #[test]
    fn constant_graph_is_degenerate() {
        let c = GraphMap::surface(square(), Surface::Constant { value: 2.0 }).unwrap();
        let t = holder_transfer_check(&c, &HolderConfig::default()).unwrap();
        assert!(t.alpha_u.degenerate && t.alpha_u.exponent == f64::INFINITY);
        assert!(t.degenerate && !t.passed);
    }

    #[test]
    fn rejects_thin_configurations() {
        let cfg = HolderConfig { bins: 4, ..HolderConfig::default() };
        assert!(holder_exponent(|_, r| Some((r, r)), 1.0, &cfg).is_err());
    }
}
