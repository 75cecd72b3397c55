//! The record a build leaves behind: covers, tolerances, and budget ledgers.

use super::cover::BoxIndex;
use super::params::LemmaParams;
use super::truncate::TruncationSummary;
use crate::check::CheckReport;
use crate::cutoff::plateau_box;
use crate::modulus::Modulus;
use serde::{Deserialize, Serialize};

/// A closed axis-aligned box of the cover `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveredBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoveredBox {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn as_pair(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StageRecordWire", from = "StageRecordWire")]
pub struct StageRecord {
    /// 1-based stage index `k`.
    pub stage: u32,
    /// Halvings of the base grid used for this stage.
    pub level: u32,
    /// Origin and cells per axis of the stage's grid.
    pub grid_lower: Vec<f64>,
    pub grid_resolution: Vec<usize>,
    pub cell_side: Vec<f64>,
    /// Plateau fraction of the stage's terms.
    pub theta: f64,
    pub lemma: Option<LemmaParams>,
    pub terms: usize,
    /// Cells covered without a term (target already within τ of zero).
    pub zero_cells: usize,
    pub unavailable_cells: usize,
    pub rejected_oscillation: usize,
    pub rejected_supnorm: usize,
    pub rejected_pinch: usize,
    /// Largest plateau oscillation among covered cells: the achieved match tolerance.
    pub achieved_tau: f64,
    /// `max sup |D^β g_k|` over `|β| = j`, for `j = 0..=m`.
    pub sup_by_order: Vec<f64>,
    /// Bound on `|D^γ g_k(x) − D^γ g_k(y)|·μ(|x−y|)/|x−y|` for `|γ| = m−1`.
    pub modulus_factor: f64,
    pub covered: Vec<CoveredBox>,
    pub covered_measure: f64,
    pub residual_after: f64,
}

/// Serialized form of the cover: most boxes are either the plateau of a
/// stage-grid cell or a whole cell, so they are stored as runs of flat cell
/// indices. Anything else is listed explicitly. Decoding regenerates the
/// boxes with the stage's own arithmetic, so the round trip is bit-exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CoverWire {
    plateau_runs: Vec<(u64, u64)>,
    cell_runs: Vec<(u64, u64)>,
    explicit: Vec<CoveredBox>,
}

struct StageGrid<'a> {
    lower: &'a [f64],
    resolution: &'a [usize],
    side: &'a [f64],
    theta: f64,
}

impl StageGrid<'_> {
    fn cell(&self, flat: u64) -> CoveredBox {
        let n = self.lower.len();
        let mut idx = vec![0u64; n];
        let mut rest = flat;
        for a in (0..n).rev() {
            idx[a] = rest % self.resolution[a] as u64;
            rest /= self.resolution[a] as u64;
        }
        CoveredBox {
            lo: (0..n).map(|a| self.lower[a] + idx[a] as f64 * self.side[a]).collect(),
            hi: (0..n).map(|a| self.lower[a] + (idx[a] + 1) as f64 * self.side[a]).collect(),
        }
    }

    fn plateau(&self, flat: u64) -> CoveredBox {
        let c = self.cell(flat);
        let (lo, hi) = plateau_box(self.theta, &c.lo, &c.hi);
        CoveredBox { lo, hi }
    }

    /// Flat index of the cell containing `x`, if inside the grid.
    fn locate(&self, x: impl Iterator<Item = f64>) -> Option<u64> {
        let mut flat = 0u64;
        for (a, v) in x.enumerate() {
            let k = ((v - self.lower[a]) / self.side[a]).floor();
            if !(k >= 0.0 && k < self.resolution[a] as f64) {
                return None;
            }
            flat = flat * self.resolution[a] as u64 + k as u64;
        }
        Some(flat)
    }

    fn encode(&self, boxes: &[CoveredBox]) -> CoverWire {
        let (mut plateau, mut cells, mut explicit) = (Vec::new(), Vec::new(), Vec::new());
        for b in boxes {
            let center = b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (l + h));
            match self.locate(center) {
                Some(f) if self.plateau(f) == *b => plateau.push(f),
                Some(f) if self.cell(f) == *b => cells.push(f),
                _ => explicit.push(b.clone()),
            }
        }
        CoverWire {
            plateau_runs: runs(plateau),
            cell_runs: runs(cells),
            explicit,
        }
    }

    fn decode(&self, w: &CoverWire) -> Vec<CoveredBox> {
        let expand = |r: &[(u64, u64)]| -> Vec<u64> { r.iter().flat_map(|&(s, len)| s..s + len).collect() };
        let (p, c) = (expand(&w.plateau_runs), expand(&w.cell_runs));
        let mut tagged: Vec<(u64, CoveredBox)> = p.into_iter().map(|f| (f, self.plateau(f))).collect();
        tagged.extend(c.into_iter().map(|f| (f, self.cell(f))));
        tagged.sort_by_key(|(f, _)| *f);
        let mut out: Vec<CoveredBox> = tagged.into_iter().map(|(_, b)| b).collect();
        out.extend(w.explicit.iter().cloned());
        out
    }
}

fn runs(mut v: Vec<u64>) -> Vec<(u64, u64)> {
    v.sort_unstable();
    v.dedup();
    let mut out: Vec<(u64, u64)> = Vec::new();
    for f in v {
        match out.last_mut() {
            Some((s, len)) if *s + *len == f => *len += 1,
            _ => out.push((f, 1)),
        }
    }
    out
}

impl StageRecord {
    fn grid(&self) -> StageGrid<'_> {
        StageGrid {
            lower: &self.grid_lower,
            resolution: &self.grid_resolution,
            side: &self.cell_side,
            theta: self.theta,
        }
    }

    /// Puts `covered` in the order decoding produces, so a record read back
    /// from disk matches the one that was written.
    pub(crate) fn canonicalize(&mut self) {
        let wire = self.grid().encode(&self.covered);
        self.covered = self.grid().decode(&wire);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StageRecordWire {
    stage: u32,
    level: u32,
    grid_lower: Vec<f64>,
    grid_resolution: Vec<usize>,
    cell_side: Vec<f64>,
    theta: f64,
    lemma: Option<LemmaParams>,
    terms: usize,
    zero_cells: usize,
    unavailable_cells: usize,
    rejected_oscillation: usize,
    rejected_supnorm: usize,
    rejected_pinch: usize,
    achieved_tau: f64,
    sup_by_order: Vec<f64>,
    modulus_factor: f64,
    covered: CoverWire,
    covered_measure: f64,
    residual_after: f64,
}

impl From<StageRecord> for StageRecordWire {
    fn from(r: StageRecord) -> Self {
        let covered = r.grid().encode(&r.covered);
        StageRecordWire {
            stage: r.stage,
            level: r.level,
            grid_lower: r.grid_lower,
            grid_resolution: r.grid_resolution,
            cell_side: r.cell_side,
            theta: r.theta,
            lemma: r.lemma,
            terms: r.terms,
            zero_cells: r.zero_cells,
            unavailable_cells: r.unavailable_cells,
            rejected_oscillation: r.rejected_oscillation,
            rejected_supnorm: r.rejected_supnorm,
            rejected_pinch: r.rejected_pinch,
            achieved_tau: r.achieved_tau,
            sup_by_order: r.sup_by_order,
            modulus_factor: r.modulus_factor,
            covered,
            covered_measure: r.covered_measure,
            residual_after: r.residual_after,
        }
    }
}

impl From<StageRecordWire> for StageRecord {
    fn from(w: StageRecordWire) -> Self {
        let grid = StageGrid {
            lower: &w.grid_lower,
            resolution: &w.grid_resolution,
            side: &w.cell_side,
            theta: w.theta,
        };
        let covered = grid.decode(&w.covered);
        StageRecord {
            stage: w.stage,
            level: w.level,
            grid_lower: w.grid_lower,
            grid_resolution: w.grid_resolution,
            cell_side: w.cell_side,
            theta: w.theta,
            lemma: w.lemma,
            terms: w.terms,
            zero_cells: w.zero_cells,
            unavailable_cells: w.unavailable_cells,
            rejected_oscillation: w.rejected_oscillation,
            rejected_supnorm: w.rejected_supnorm,
            rejected_pinch: w.rejected_pinch,
            achieved_tau: w.achieved_tau,
            sup_by_order: w.sup_by_order,
            modulus_factor: w.modulus_factor,
            covered,
            covered_measure: w.covered_measure,
            residual_after: w.residual_after,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildCertificate {
    pub dim: usize,
    pub order: usize,
    pub field: String,
    pub modulus: Modulus,
    /// `(C, t₀)` with `μ(t) ≤ C t` beyond `t₀`.
    pub modulus_growth: (f64, f64),
    pub epsilon: f64,
    pub sigma: f64,
    pub tau: f64,
    pub theta: f64,
    pub resolution: usize,
    pub seed: u64,
    pub domain_measure: f64,
    pub truncation: TruncationSummary,
    /// `sup |S^{(j)}|` of the smoothstep, `j = 0..=m`.
    pub cutoff_constants: Vec<f64>,
    /// A priori scale of order-m derivatives from the truncation bound.
    pub derivative_constant: f64,
    pub stages: Vec<StageRecord>,
    pub residual_measure: f64,
    /// `Σ_k sup |D^β g_k|` per order `j < m`; each must stay below σ.
    pub sup_ledger: Vec<f64>,
    /// `Σ_k √n · sup |D^{β} g_k|` over `|β| = j+1`, for `j ≤ m−2`; each must stay ≤ σ.
    pub lipschitz_ledger: Vec<f64>,
    /// `Σ_k modulus_factor_k`; must stay ≤ 1.
    pub modulus_ledger: f64,
    pub within_budget: bool,
    /// Residual above ε: the cover is incomplete.
    pub partial: bool,
    pub stop_reason: String,
    pub modulus_check: Option<CheckReport>,
}

impl BuildCertificate {
    pub fn covered_boxes(&self) -> impl Iterator<Item = &CoveredBox> {
        self.stages.iter().flat_map(|s| s.covered.iter())
    }

    /// Covered boxes grouped by 0-based stage, as the checks expect them.
    pub fn stage_boxes(&self) -> Vec<Vec<(Vec<f64>, Vec<f64>)>> {
        self.stages
            .iter()
            .map(|s| s.covered.iter().map(CoveredBox::as_pair).collect())
            .collect()
    }

    pub fn covered_measure(&self) -> f64 {
        self.stages.iter().map(|s| s.covered_measure).sum()
    }

    /// Whether covered boxes of distinct stages have disjoint interiors.
    pub fn stages_disjoint(&self) -> bool {
        let all: Vec<&CoveredBox> = self.covered_boxes().collect();
        let Some(first) = all.first() else {
            return true;
        };
        let n = first.lo.len();
        let lower: Vec<f64> = (0..n).map(|a| all.iter().map(|b| b.lo[a]).fold(f64::INFINITY, f64::min)).collect();
        let upper: Vec<f64> = (0..n)
            .map(|a| all.iter().map(|b| b.hi[a]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let mut earlier: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for s in &self.stages {
            let index = BoxIndex::new(&lower, &upper, earlier.clone());
            if s.covered.iter().any(|b| index.overlaps(&b.lo, &b.hi, 0.0)) {
                return false;
            }
            earlier.extend(s.covered.iter().map(CoveredBox::as_pair));
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_codec_round_trips_bit_exactly() {
        let lower = [0.1, -0.3];
        let resolution = [12, 7];
        let side = [0.9 / 12.0, 1.3 / 7.0];
        let grid = StageGrid {
            lower: &lower,
            resolution: &resolution,
            side: &side,
            theta: 0.37,
        };
        let odd = CoveredBox {
            lo: vec![0.2, 0.2],
            hi: vec![0.25, 0.3],
        };
        let boxes = vec![grid.plateau(5), grid.cell(7), grid.plateau(6), odd.clone(), grid.plateau(83), grid.cell(8)];
        let wire = grid.encode(&boxes);
        assert_eq!(wire.plateau_runs, vec![(5, 2), (83, 1)]);
        assert_eq!(wire.cell_runs, vec![(7, 2)]);
        assert_eq!(wire.explicit, vec![odd]);
        let back = grid.decode(&wire);
        let mut want = boxes.clone();
        want.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let mut got = back.clone();
        got.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        assert_eq!(got, want);
        // decoding is a fixed point of encoding
        assert_eq!(grid.decode(&grid.encode(&back)), back);
    }
}
