//! The multi-stage scheme: stage `k` prescribes what the earlier stages left
//! over, with budgets halving at every stage.

use super::certificate::{BuildCertificate, CoveredBox};
use super::params::lipschitz_bound;
use super::stage::{single_stage_build, StageInput};
use super::truncate::{keep_finite, lusin_truncate};
use crate::bumpsum::{BumpPolySum, CellTerm};
use crate::check::{modulus_check, PairPlan};
use crate::cutoff::Smoothstep;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::field::FieldCollection;
use crate::modulus::Modulus;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// Measure budget for `|Ω \ K|`.
    pub epsilon: f64,
    /// Sup-norm and Lipschitz budget.
    pub sigma: f64,
    pub modulus: Modulus,
    /// Base grid cells per axis.
    pub resolution: usize,
    /// Plateau fraction of every cell term.
    pub theta: f64,
    /// Match tolerance for `|D^α g − f_α|` on the cover.
    pub tau: f64,
    /// Lusin truncation quantile; `None` keeps every cell with finite values.
    pub quantile: Option<f64>,
    pub max_stages: u32,
    pub seed: u64,
    /// Largest cell count a single refinement level may examine.
    pub max_cells: usize,
    /// Pairs for the modulus statistic stored in the certificate (0 skips it).
    pub certify_pairs: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            epsilon: 0.05,
            sigma: 0.5,
            modulus: Modulus::LogPreset,
            resolution: 32,
            theta: 0.02,
            tau: 1e-3,
            quantile: None,
            max_stages: 6,
            seed: 0,
            max_cells: 1 << 20,
            certify_pairs: 10_000,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("ε must be positive, got {}", self.epsilon));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("σ must be positive, got {}", self.sigma));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("τ must be non-negative, got {}", self.tau));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("θ must lie in (0,1), got {}", self.theta));
        }
        if let Some(q) = self.quantile {
            if !(q > 0.0 && q < 1.0) {
                return bad(format!("quantile must lie in (0,1), got {q}"));
            }
        }
        if self.max_stages == 0 {
            return bad("stage count N must be at least 1".into());
        }
        if self.resolution == 0 {
            return bad("resolution must be at least 1".into());
        }
        self.modulus.validate()
    }
}

/// Run up to `N` stages and certify the result.
///
/// Stage 1 failures are returned as errors. A later stage that is infeasible
/// or covers nothing ends the build; the reason is recorded in
/// `stop_reason` and a residual above ε sets `partial`.
pub fn multi_stage_build(
    f: &FieldCollection,
    dom: &BoxDomain,
    cfg: &BuildConfig,
) -> Result<(BumpPolySum, BuildCertificate)> {
    cfg.validate()?;
    let (n, m) = (f.dim(), f.order());
    if n != dom.dim() {
        return Err(Error::Dimension {
            expected: dom.dim(),
            found: n,
        });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("order m must be at least 1".into()));
    }
    let truncated = match cfg.quantile {
        Some(q) => lusin_truncate(f, dom, cfg.resolution, q)?,
        None => keep_finite(f, dom, cfg.resolution)?,
    };
    let available: Vec<usize> = (0..truncated.grid.cell_count()).filter(|&c| truncated.keep[c]).collect();
    let field_bound = truncated.summary.threshold;
    let domain_measure = dom.measure();
    let step = Smoothstep::new(m);
    let cutoff_constants: Vec<f64> = (0..=m).map(|j| step.sup(j)).collect();

    let mut terms: Vec<CellTerm> = Vec::new();
    let mut prior = BumpPolySum::zero(n, m);
    let mut covered: Vec<CoveredBox> = Vec::new();
    let mut stages = Vec::new();
    let mut uncovered = domain_measure;
    let mut stop_reason = format!("completed {} stages", cfg.max_stages);
    for k in 1..=cfg.max_stages {
        if available.is_empty() {
            stop_reason = "no cells survive the truncation".into();
            break;
        }
        let input = StageInput {
            field: &truncated.field,
            base_grid: &truncated.grid,
            available: &available,
            prior: &prior,
            covered: &covered,
            stage: k,
            cfg,
            field_bound,
            uncovered_before: uncovered,
            // stage k aims for ε·2^{1−k}, so later stages keep shrinking the gap
            target_uncovered: cfg.epsilon * 0.5f64.powi(k as i32 - 1),
            t_cap: dom.diameter(),
        };
        let outcome = match single_stage_build(&input) {
            Ok(o) => o,
            Err(e) if k == 1 => return Err(e),
            Err(e) => {
                stop_reason = format!("stage {k}: {e}");
                break;
            }
        };
        let added = outcome.record.covered_measure;
        uncovered = outcome.record.residual_after.max(0.0);
        covered.extend(outcome.record.covered.iter().cloned());
        let new_terms = !outcome.terms.is_empty();
        terms.extend(outcome.terms);
        stages.push(outcome.record);
        if new_terms {
            prior = BumpPolySum::new(n, m, terms.clone())?;
        }
        if added == 0.0 {
            stop_reason = format!("stage {k} covered nothing new");
            break;
        }
        if uncovered <= truncated.summary.excluded_measure * (1.0 + 1e-12) {
            stop_reason = format!("every kept cell covered after stage {k}");
            break;
        }
    }
    let g = prior;

    let rn = (n as f64).sqrt();
    let sup_ledger: Vec<f64> = (0..m).map(|j| stages.iter().map(|s| s.sup_by_order[j]).sum()).collect();
    let lipschitz_ledger: Vec<f64> = (0..m.saturating_sub(1))
        .map(|j| stages.iter().map(|s| rn * s.sup_by_order[j + 1]).sum())
        .collect();
    let modulus_ledger: f64 = stages.iter().map(|s| s.modulus_factor).sum();
    let within_budget = sup_ledger.iter().all(|&v| v < cfg.sigma)
        && lipschitz_ledger.iter().all(|&v| v <= cfg.sigma)
        && modulus_ledger <= 1.0;
    let residual_measure = (domain_measure - stages.iter().map(|s| s.covered_measure).sum::<f64>()).max(0.0);
    let modulus_report = (cfg.certify_pairs > 0)
        .then(|| modulus_check(&g, &cfg.modulus, dom, &PairPlan::for_domain(dom, cfg.certify_pairs), cfg.seed));
    let cert = BuildCertificate {
        dim: n,
        order: m,
        field: f.label(),
        modulus: cfg.modulus.clone(),
        modulus_growth: cfg.modulus.growth(),
        epsilon: cfg.epsilon,
        sigma: cfg.sigma,
        tau: cfg.tau,
        theta: cfg.theta,
        resolution: cfg.resolution,
        seed: cfg.seed,
        domain_measure,
        derivative_constant: lipschitz_bound(field_bound, n, m, cfg.theta, &cutoff_constants),
        truncation: truncated.summary,
        cutoff_constants,
        stages,
        residual_measure,
        sup_ledger,
        lipschitz_ledger,
        modulus_ledger,
        within_budget,
        partial: residual_measure > cfg.epsilon,
        stop_reason,
        modulus_check: modulus_report,
    };
    Ok((g, cert))
}
