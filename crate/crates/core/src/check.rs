//! Sampling-based certification of a constructed [`BumpPolySum`].
//!
//! Every check draws its points from a labeled random stream (see
//! [`crate::rng`]) in fixed-size chunks, so reports are identical for a given
//! seed no matter how many threads evaluate them. A check passes when its
//! worst observed ratio `lhs / rhs` is at most one.

use crate::bumpsum::BumpPolySum;
use crate::domain::BoxDomain;
use crate::field::FieldCollection;
use crate::modulus::Modulus;
use crate::multiindex::{enumerate_multiindices, MultiIndex};
use crate::par;
use crate::rng::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const CHUNK: usize = 512;

/// Slack for float rounding when comparing computed values against a tolerance.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub derivative: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub evaluated: usize,
    /// Largest `lhs / rhs` seen (0 when every lhs vanished).
    pub worst_ratio: f64,
    /// `1 − worst_ratio`; non-negative iff the check passed.
    pub margin: f64,
    /// `1 / worst_ratio`; `None` means unbounded (no nonzero lhs).
    pub margin_factor: Option<f64>,
    pub witness: Option<Witness>,
    /// Separation of the worst pair, for pair-based checks.
    pub worst_separation: Option<f64>,
    pub note: String,
}

impl CheckReport {
    fn from_worst(name: &str, evaluated: usize, worst: Option<(f64, Witness)>, note: String) -> Self {
        let (ratio, witness) = match worst {
            Some((r, w)) if r > 0.0 => (r, Some(w)),
            _ => (0.0, None),
        };
        let worst_separation = witness
            .as_ref()
            .and_then(|w| w.y.as_ref().map(|y| dist(&w.x, y)));
        CheckReport {
            name: name.to_string(),
            passed: ratio <= 1.0,
            evaluated,
            worst_ratio: ratio,
            margin: 1.0 - ratio,
            margin_factor: if ratio > 0.0 { Some(1.0 / ratio) } else { None },
            witness,
            worst_separation,
            note,
        }
    }

    fn vacuous(name: &str, note: &str) -> Self {
        CheckReport::from_worst(name, 0, None, note.to_string())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Pair sampling stratified over log-spaced separation bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPlan {
    pub pairs: usize,
    pub bins: usize,
    pub min_separation: f64,
    pub max_separation: f64,
}

impl PairPlan {
    pub fn for_domain(domain: &BoxDomain, pairs: usize) -> Self {
        let d = domain.diameter();
        PairPlan {
            pairs,
            bins: 12,
            min_separation: 1e-7 * d,
            max_separation: d,
        }
    }

    /// Pair `i`: bin `i mod bins`, separation log-uniform inside the bin.
    fn sample(&self, rng: &mut ChaCha8Rng, i: usize, domain: &BoxDomain) -> (Vec<f64>, Vec<f64>) {
        let (la, lb) = (self.min_separation.ln(), self.max_separation.ln());
        let w = (lb - la) / self.bins as f64;
        let b = (i % self.bins) as f64;
        let t = (la + w * (b + rng.gen::<f64>())).exp();
        let x = uniform_in(rng, domain.lower(), domain.upper());
        let u = unit_vector(rng, domain.dim());
        let y = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
        (x, y)
    }
}

fn worst_of(items: Vec<Option<(f64, Witness)>>) -> Option<(f64, Witness)> {
    let mut best: Option<(f64, Witness)> = None;
    for (r, w) in items.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, w));
        }
    }
    best
}

fn pair_check(
    name: &str,
    g: &BumpPolySum,
    domain: &BoxDomain,
    plan: &PairPlan,
    seed: u64,
    orders: &[MultiIndex],
    rhs: impl Fn(f64) -> f64 + Sync,
) -> CheckReport {
    if orders.is_empty() {
        return CheckReport::vacuous(name, "no derivative orders to check");
    }
    let chunks = par::map_chunks(plan.pairs, CHUNK, |c, range| {
        let mut rng = substream(seed, name, c as u64);
        let mut local: Option<(f64, Witness)> = None;
        for i in range {
            let (x, y) = plan.sample(&mut rng, i, domain);
            let t = dist(&x, &y);
            let bound = rhs(t);
            for gamma in orders {
                let lhs = (g.deriv_unchecked(&x, gamma) - g.deriv_unchecked(&y, gamma)).abs();
                if lhs == 0.0 {
                    continue;
                }
                let ratio = lhs / bound;
                if local.as_ref().is_none_or(|(b, _)| ratio > *b) {
                    local = Some((
                        ratio,
                        Witness {
                            x: x.clone(),
                            y: Some(y.clone()),
                            derivative: gamma.to_string(),
                            lhs,
                            rhs: bound,
                        },
                    ));
                }
            }
        }
        local
    });
    let note = format!(
        "{} pairs in {} log bins over [{:e}, {:e}]",
        plan.pairs, plan.bins, plan.min_separation, plan.max_separation
    );
    CheckReport::from_worst(name, plan.pairs, worst_of(chunks), note)
}

/// `|D^γ g(x) − D^γ g(y)| · μ(|x−y|) ≤ |x−y|` for `|γ| = m − 1`.
pub fn modulus_check(g: &BumpPolySum, mu: &Modulus, domain: &BoxDomain, plan: &PairPlan, seed: u64) -> CheckReport {
    let m = g.order();
    let orders = if m >= 1 { enumerate_multiindices(g.dim(), m - 1) } else { Vec::new() };
    // lhs ≤ t/μ(t)  ⇔  lhs·μ(t)/t ≤ 1
    pair_check("modulus", g, domain, plan, seed, &orders, |t| t / mu.value(t))
}

/// `|D^γ g(x) − D^γ g(y)| ≤ σ |x−y|` for `|γ| ≤ m − 2`.
pub fn lipschitz_check(g: &BumpPolySum, sigma: f64, domain: &BoxDomain, plan: &PairPlan, seed: u64) -> CheckReport {
    let m = g.order();
    let orders: Vec<MultiIndex> = if m >= 2 {
        (0..=m - 2).flat_map(|k| enumerate_multiindices(g.dim(), k)).collect()
    } else {
        Vec::new()
    };
    pair_check("lipschitz", g, domain, plan, seed, &orders, |t| sigma * t)
}

/// `|D^γ g(x)| < σ` for `|γ| < m` at uniform points of the domain and at every term center.
pub fn supnorm_check(g: &BumpPolySum, sigma: f64, domain: &BoxDomain, samples: usize, seed: u64) -> CheckReport {
    let m = g.order();
    let orders: Vec<MultiIndex> = (0..m).flat_map(|k| enumerate_multiindices(g.dim(), k)).collect();
    if orders.is_empty() {
        return CheckReport::vacuous("supnorm", "order 0 has no lower derivatives");
    }
    let terms = g.terms();
    let total = samples + terms.len();
    let chunks = par::map_chunks(total, CHUNK, |c, range| {
        let mut rng = substream(seed, "supnorm", c as u64);
        let mut local: Option<(f64, Witness)> = None;
        for i in range {
            let x = if i < terms.len() {
                terms[i].center()
            } else {
                uniform_in(&mut rng, domain.lower(), domain.upper())
            };
            for gamma in &orders {
                let v = g.deriv_unchecked(&x, gamma).abs();
                let ratio = v / sigma;
                if v > 0.0 && local.as_ref().is_none_or(|(b, _)| ratio > *b) {
                    local = Some((
                        ratio,
                        Witness {
                            x: x.clone(),
                            y: None,
                            derivative: gamma.to_string(),
                            lhs: v,
                            rhs: sigma,
                        },
                    ));
                }
            }
        }
        local
    });
    let mut report = CheckReport::from_worst(
        "supnorm",
        total,
        worst_of(chunks),
        format!("{samples} uniform points plus {} term centers", terms.len()),
    );
    // the bound is strict
    report.passed = report.worst_ratio < 1.0;
    report
}

/// `|D^α g − f_α| ≤ τ` on the covered boxes, `|α| = m`: every box center plus
/// `samples` uniform points inside randomly chosen boxes.
pub fn match_check(
    g: &BumpPolySum,
    field: &FieldCollection,
    boxes: &[(Vec<f64>, Vec<f64>)],
    tau: f64,
    samples: usize,
    seed: u64,
) -> CheckReport {
    if boxes.is_empty() {
        return CheckReport::vacuous("match", "no covered boxes");
    }
    let total = boxes.len() + samples;
    let chunks = par::map_chunks(total, CHUNK, |c, range| {
        let mut rng = substream(seed, "match", c as u64);
        let mut local: Option<(f64, Witness)> = None;
        for i in range {
            let x = if i < boxes.len() {
                boxes[i].0.iter().zip(&boxes[i].1).map(|(l, h)| 0.5 * (l + h)).collect()
            } else {
                let b = &boxes[rng.gen_range(0..boxes.len())];
                uniform_in(&mut rng, &b.0, &b.1)
            };
            for (k, alpha) in field.indices().iter().enumerate() {
                let err = (g.deriv_unchecked(&x, alpha) - field.eval(k, &x)).abs();
                let ratio = err / (tau + ROUNDING_SLACK);
                if err > 0.0 && local.as_ref().is_none_or(|(b, _)| ratio > *b) {
                    local = Some((
                        ratio,
                        Witness {
                            x: x.clone(),
                            y: None,
                            derivative: alpha.to_string(),
                            lhs: err,
                            rhs: tau,
                        },
                    ));
                }
            }
        }
        local
    });
    CheckReport::from_worst(
        "match",
        total,
        worst_of(chunks),
        format!("{} box centers plus {samples} interior points", boxes.len()),
    )
}

/// For `x ∈ K_k` and `|h| ∈ [1e−4, 1e−1]`: `Σ_{j>k} |D^γ g_j(x+h)| ≤ σ |h|²`, `|γ| = m−1`.
///
/// `stage_boxes[k]` lists the covered boxes of stage `k` (0-based, matching
/// [`crate::bumpsum::CellTerm::stage`]).
pub fn tail_pinch_check(
    g: &BumpPolySum,
    stage_boxes: &[Vec<(Vec<f64>, Vec<f64>)>],
    sigma: f64,
    samples: usize,
    seed: u64,
) -> CheckReport {
    let m = g.order();
    if m == 0 {
        return CheckReport::vacuous("pinch", "order 0 has no lower derivatives");
    }
    let orders = enumerate_multiindices(g.dim(), m - 1);
    let stages = g.stage_count() as usize;
    // only stages followed by later terms have a tail to measure
    let eligible: Vec<usize> = (0..stages.saturating_sub(1))
        .filter(|&k| stage_boxes.get(k).is_some_and(|b| !b.is_empty()))
        .collect();
    if eligible.is_empty() {
        return CheckReport::vacuous("pinch", "no later stages: tail is empty");
    }
    let n = g.dim();
    let (lh_lo, lh_hi) = (1e-4f64.ln(), 1e-1f64.ln());
    let chunks = par::map_chunks(samples, CHUNK, |c, range| {
        let mut rng = substream(seed, "pinch", c as u64);
        let mut local: Option<(f64, Witness)> = None;
        for _ in range {
            // stage first, then a box of that stage, so small stages are not drowned out
            let k = eligible[rng.gen_range(0..eligible.len())];
            let b = &stage_boxes[k][rng.gen_range(0..stage_boxes[k].len())];
            let x = uniform_in(&mut rng, &b.0, &b.1);
            let len = rng.gen_range(lh_lo..lh_hi).exp();
            let u = unit_vector(&mut rng, n);
            let xh: Vec<f64> = x.iter().zip(&u).map(|(a, d)| a + len * d).collect();
            let bound = sigma * len * len;
            for gamma in &orders {
                let per_stage = g.deriv_by_stage(&xh, gamma);
                let tail: f64 = per_stage.iter().skip(k + 1).map(|v| v.abs()).sum();
                let ratio = tail / bound;
                if tail > 0.0 && local.as_ref().is_none_or(|(b, _)| ratio > *b) {
                    local = Some((
                        ratio,
                        Witness {
                            x: x.clone(),
                            y: Some(xh.clone()),
                            derivative: gamma.to_string(),
                            lhs: tail,
                            rhs: bound,
                        },
                    ));
                }
            }
        }
        local
    });
    CheckReport::from_worst(
        "pinch",
        samples,
        worst_of(chunks),
        format!("{samples} samples over stages {eligible:?}, |h| in [1e-4, 1e-1]"),
    )
}
