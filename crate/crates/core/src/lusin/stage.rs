//! One stage of the construction: cell terms on a refined grid, accepted
//! against the stage's sup-norm, pinching and modulus budgets.

use super::build::BuildConfig;
use super::certificate::{CoveredBox, StageRecord};
use super::cover::BoxIndex;
use super::params::{choose_lemma_params, LemmaParams};
use crate::bumpsum::{term_bounds, BumpPolySum, CellTerm};
use crate::cutoff::{plateau_box, Smoothstep};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::field::FieldCollection;
use crate::multiindex::{enumerate_up_to, MultiIndex};
use crate::par;

/// Finest level tried, its sup and pinch rejection counts, and its tightest margin.
type FinestLevel = (u32, usize, usize, Option<(f64, f64)>);

/// Deepest refinement a stage will consider, whatever the cell budget.
const MAX_LEVEL: u32 = 24;

pub struct StageInput<'a> {
    /// Target field after truncation.
    pub field: &'a FieldCollection,
    pub base_grid: &'a Grid,
    /// Flat indices of base cells inside `K′`.
    pub available: &'a [usize],
    /// `Σ_{j<k} g_j`.
    pub prior: &'a BumpPolySum,
    /// Boxes covered by earlier stages.
    pub covered: &'a [CoveredBox],
    /// 1-based stage index `k`.
    pub stage: u32,
    pub cfg: &'a BuildConfig,
    pub field_bound: f64,
    /// Measure still uncovered before this stage.
    pub uncovered_before: f64,
    /// Uncovered measure the stage should get down to.
    pub target_uncovered: f64,
    /// Pairs further apart than this never occur.
    pub t_cap: f64,
}

pub struct StageOutcome {
    pub terms: Vec<CellTerm>,
    pub record: StageRecord,
}

struct Candidate {
    term: CellTerm,
    bounds: Vec<f64>,
    osc: f64,
}

#[derive(Default)]
struct BaseResult {
    zero: Vec<(CoveredBox, f64)>,
    candidates: Vec<Candidate>,
    unavailable: usize,
    rejected_osc: usize,
}

struct LevelResult {
    level: u32,
    side: Vec<f64>,
    params: Option<LemmaParams>,
    terms: Vec<CellTerm>,
    covered: Vec<CoveredBox>,
    covered_measure: f64,
    zero_cells: usize,
    unavailable: usize,
    rejected_osc: usize,
    rejected_sup: usize,
    rejected_pinch: usize,
    achieved_tau: f64,
    sup_by_order: Vec<f64>,
    modulus_factor: f64,
    /// Smallest violating lower-order bound and the cap it exceeded.
    tightest: Option<(f64, f64)>,
}

/// Iterates the `3^n` points of a per-axis three-value lattice.
fn lattice(axes: &[[f64; 3]], mut visit: impl FnMut(&[f64])) {
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut p: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&p);
        let mut a = n;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            if idx[a] < 2 {
                idx[a] += 1;
                p[a] = axes[a][idx[a]];
                break;
            }
            idx[a] = 0;
            p[a] = axes[a][0];
        }
    }
}

struct Ctx<'a> {
    input: &'a StageInput<'a>,
    n: usize,
    m: usize,
    step: Smoothstep,
    basis: Vec<MultiIndex>,
    top: Vec<usize>,
    covered: BoxIndex,
    tol: f64,
}

impl Ctx<'_> {
    /// `F_α(x) = f_α(x) − Σ_{j<k} D^α g_j(x)` for every `|α| = m`.
    fn target(&self, x: &[f64], out: &mut [f64]) {
        let f = self.input.field;
        for (k, alpha) in f.indices().iter().enumerate() {
            let prior = if self.input.prior.terms().is_empty() {
                0.0
            } else {
                self.input.prior.deriv_unchecked(x, alpha)
            };
            out[k] = f.eval(k, x) - prior;
        }
    }

    /// Largest `|F_α(p) − F_α(c)|` over a `3^n` lattice spanning `[lo, hi]`.
    fn oscillation(&self, lo: &[f64], hi: &[f64], at_center: &[f64]) -> f64 {
        let axes: Vec<[f64; 3]> = (0..self.n).map(|a| [lo[a], 0.5 * (lo[a] + hi[a]), hi[a]]).collect();
        let mut buf = vec![0.0; at_center.len()];
        let mut osc: f64 = 0.0;
        lattice(&axes, |p| {
            self.target(p, &mut buf);
            for (v, c) in buf.iter().zip(at_center) {
                let d = (v - c).abs();
                osc = if d.is_nan() { f64::INFINITY } else { osc.max(d) };
            }
        });
        osc
    }

    fn base_cell(&self, base: usize, level: u32) -> BaseResult {
        let grid = self.input.base_grid;
        let cfg = self.input.cfg;
        let n = self.n;
        let per_axis = 1usize << level;
        let bidx = grid.unflatten(base);
        let h: Vec<f64> = (0..n).map(|a| grid.cell_side(a) / per_axis as f64).collect();
        let mut out = BaseResult::default();
        let mut sub = vec![0usize; n];
        let mut fc = vec![0.0; self.input.field.indices().len()];
        loop {
            let lo: Vec<f64> = (0..n)
                .map(|a| grid.lower[a] + (bidx[a] * per_axis + sub[a]) as f64 * h[a])
                .collect();
            let hi: Vec<f64> = (0..n)
                .map(|a| grid.lower[a] + (bidx[a] * per_axis + sub[a] + 1) as f64 * h[a])
                .collect();
            if self.covered.overlaps(&lo, &hi, self.tol) {
                out.unavailable += 1;
            } else {
                let c: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (l + u)).collect();
                self.target(&c, &mut fc);
                let (plo, phi) = plateau_box(cfg.theta, &lo, &hi);
                let osc = self.oscillation(&plo, &phi, &fc);
                if !(osc <= cfg.tau) {
                    out.rejected_osc += 1;
                } else if fc.iter().all(|&v| v == 0.0) {
                    // nothing to add; the whole cell is covered if the target stays small
                    let osc_full = self.oscillation(&lo, &hi, &fc);
                    if osc_full <= cfg.tau {
                        out.zero.push((CoveredBox { lo, hi }, osc_full));
                    } else {
                        out.rejected_osc += 1;
                    }
                } else {
                    let mut coeffs = vec![0.0; self.basis.len()];
                    for (k, &slot) in self.top.iter().enumerate() {
                        coeffs[slot] = fc[k] / self.basis[slot].factorial();
                    }
                    let term = CellTerm {
                        stage: self.input.stage - 1,
                        lo,
                        hi,
                        coeffs,
                        theta: cfg.theta,
                        weight: 1.0,
                    };
                    let bounds = term_bounds(&self.step, &self.basis, n, self.m, &term);
                    out.candidates.push(Candidate { term, bounds, osc });
                }
            }
            let mut a = n;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                if sub[a] + 1 < per_axis {
                    sub[a] += 1;
                    break;
                }
                sub[a] = 0;
            }
        }
    }

    fn level(&self, level: u32) -> Result<LevelResult> {
        let input = self.input;
        let (n, m) = (self.n, self.m);
        let bases = par::map_slice(input.available, |&b| self.base_cell(b, level));
        let side: Vec<f64> = (0..n)
            .map(|a| input.base_grid.cell_side(a) / (1u64 << level) as f64)
            .collect();
        let mut res = LevelResult {
            level,
            side,
            params: None,
            terms: Vec::new(),
            covered: Vec::new(),
            covered_measure: 0.0,
            zero_cells: 0,
            unavailable: 0,
            rejected_osc: 0,
            rejected_sup: 0,
            rejected_pinch: 0,
            achieved_tau: 0.0,
            sup_by_order: vec![0.0; m + 1],
            modulus_factor: 0.0,
            tightest: None,
        };
        let lipschitz = bases
            .iter()
            .flat_map(|b| b.candidates.iter())
            .map(|c| c.bounds[m])
            .fold(0.0, f64::max);
        let budget = input.cfg.sigma * 0.5f64.powi(input.stage as i32);
        let modulus_budget = 0.5f64.powi(input.stage as i32);
        if lipschitz > 0.0 {
            res.params = Some(choose_lemma_params(
                &input.cfg.modulus,
                input.field_bound,
                lipschitz,
                n,
                budget,
                modulus_budget,
                input.t_cap,
            )?);
        }
        let mut accepted_lip: f64 = 0.0;
        for b in bases {
            res.unavailable += b.unavailable;
            res.rejected_osc += b.rejected_osc;
            for (bx, osc) in b.zero {
                res.covered_measure += bx.volume();
                res.covered.push(bx);
                res.zero_cells += 1;
                res.achieved_tau = res.achieved_tau.max(osc);
            }
            let Some(p) = res.params.as_ref() else { continue };
            let cap = 0.5 * p.sup_cap;
            for c in b.candidates {
                let lower = c.bounds[..m].iter().copied().fold(0.0, f64::max);
                if lower > cap {
                    res.rejected_sup += 1;
                    let t = res.tightest.get_or_insert((lower, cap));
                    if lower < t.0 {
                        *t = (lower, cap);
                    }
                    continue;
                }
                // |D^β g_k| ≤ (budget/2)·min(d², 1) with d the distance to earlier covers
                let need = 2.0 * lower / p.budget;
                if need > 1.0 || self.covered.within(&c.term.lo, &c.term.hi, need.sqrt()) {
                    res.rejected_pinch += 1;
                    continue;
                }
                for (s, b) in res.sup_by_order.iter_mut().zip(&c.bounds) {
                    *s = s.max(*b);
                }
                accepted_lip = accepted_lip.max(c.bounds[m]);
                res.achieved_tau = res.achieved_tau.max(c.osc);
                let (plo, phi) = plateau_box(c.term.theta, &c.term.lo, &c.term.hi);
                let plateau = CoveredBox { lo: plo, hi: phi };
                res.covered_measure += plateau.volume();
                res.covered.push(plateau);
                res.terms.push(c.term);
            }
        }
        if let (Some(p), false) = (res.params.as_ref(), res.terms.is_empty()) {
            let rn = (n as f64).sqrt();
            let below = rn * accepted_lip * p.modulus_bound;
            let above = 2.0 * p.ratio_sup * res.sup_by_order[m - 1];
            res.modulus_factor = below.max(above);
        }
        Ok(res)
    }
}

/// Build stage `k` on the first refinement level that reaches the stage's
/// coverage target, or on the level with the largest cover if none does.
///
/// Levels halve the base grid until the cell count would exceed
/// `cfg.max_cells`. Every accepted term keeps its lower-order derivatives at
/// half of both caps (sup-norm and `dist²` pinching), so the ledgers hold with
/// a factor-2 margin.
pub fn single_stage_build(input: &StageInput) -> Result<StageOutcome> {
    let n = input.base_grid.dim();
    let m = input.field.order();
    if input.available.is_empty() {
        return Err(Error::InvalidArgument("stage has no active cells".into()));
    }
    let basis = enumerate_up_to(n, m);
    let top: Vec<usize> = input
        .field
        .indices()
        .iter()
        .map(|a| basis.iter().position(|b| b == a).expect("top index in basis"))
        .collect();
    let domain_lo = input.base_grid.lower.clone();
    let domain_hi = input.base_grid.upper.clone();
    let ctx = Ctx {
        input,
        n,
        m,
        step: Smoothstep::new(m),
        basis,
        top,
        covered: BoxIndex::new(&domain_lo, &domain_hi, input.covered.iter().map(CoveredBox::as_pair).collect()),
        tol: 1e-12 * input.t_cap,
    };
    let mut best: Option<LevelResult> = None;
    let mut finest: Option<FinestLevel> = None;
    let mut last_err = None;
    for level in 0..=MAX_LEVEL {
        let cells = input.available.len().saturating_mul(1usize << (level as usize * n).min(60));
        if level > 0 && cells > input.cfg.max_cells {
            break;
        }
        let lr = match ctx.level(level) {
            Ok(lr) => lr,
            // Λ, and with it δ and M, does not depend on the level
            Err(e @ Error::LemmaInfeasible { .. }) => {
                last_err = Some(e);
                break;
            }
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        finest = Some((lr.level, lr.rejected_sup, lr.rejected_pinch, lr.tightest));
        let uncovered = input.uncovered_before - lr.covered_measure;
        let saturated = lr.rejected_osc + lr.rejected_sup + lr.rejected_pinch + lr.unavailable == 0;
        let done = uncovered <= input.target_uncovered || saturated;
        // finer levels must gain more than rounding noise to displace a coarser one
        if best.as_ref().is_none_or(|b| lr.covered_measure > b.covered_measure * (1.0 + 1e-9)) {
            best = Some(lr);
        }
        if done {
            break;
        }
    }
    let Some(best) = best else {
        return Err(last_err.unwrap_or_else(|| Error::InvalidArgument("no refinement level evaluated".into())));
    };
    if best.covered_measure == 0.0 {
        if let Some((finest_level, sup, pinch, tightest)) = finest {
            if sup + pinch > 0 {
                let (constraint, (needed, allowed)) = if sup >= pinch {
                    (
                        "lower-order sup norm ≤ min(2^{-k}σ/√n, 2^{-k}/(2M))/2",
                        tightest.unwrap_or((f64::NAN, f64::NAN)),
                    )
                } else {
                    ("dist² pinching against earlier covers", (f64::NAN, f64::NAN))
                };
                return Err(Error::StageInfeasible {
                    stage: input.stage as usize,
                    level: finest_level,
                    constraint: constraint.into(),
                    needed,
                    allowed,
                });
            }
        }
        if let Some(e) = last_err {
            return Err(e);
        }
    }
    let mut record = StageRecord {
        stage: input.stage,
        level: best.level,
        grid_lower: input.base_grid.lower.clone(),
        grid_resolution: input.base_grid.resolution.iter().map(|r| r << best.level).collect(),
        cell_side: best.side,
        theta: input.cfg.theta,
        lemma: best.params,
        terms: best.terms.len(),
        zero_cells: best.zero_cells,
        unavailable_cells: best.unavailable,
        rejected_oscillation: best.rejected_osc,
        rejected_supnorm: best.rejected_sup,
        rejected_pinch: best.rejected_pinch,
        achieved_tau: best.achieved_tau,
        sup_by_order: best.sup_by_order,
        modulus_factor: best.modulus_factor,
        covered_measure: best.covered_measure,
        residual_after: input.uncovered_before - best.covered_measure,
        covered: best.covered,
    };
    record.canonicalize();
    Ok(StageOutcome {
        terms: best.terms,
        record,
    })
}
