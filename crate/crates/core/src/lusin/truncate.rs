//! The Lusin step: zero the field outside a large set where it is bounded.

use crate::domain::{BoxDomain, Grid};
use crate::error::{Error, Result};
use crate::field::{FieldCollection, Truncation};
use crate::par;
use serde::{Deserialize, Serialize};

/// Summary of a truncation, recorded in certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSummary {
    pub quantile: f64,
    /// The bound `T` on `max_α |f_α|` over the kept cells.
    pub threshold: f64,
    pub kept_cells: usize,
    pub active_cells: usize,
    pub excluded_measure: f64,
}

#[derive(Clone, Debug)]
pub struct Truncated {
    pub field: FieldCollection,
    pub grid: Grid,
    /// Per grid cell: active in the domain and inside `K′`.
    pub keep: Vec<bool>,
    pub summary: TruncationSummary,
}

/// `max_α |f_α|` at every cell center; inactive cells get `None`.
fn cell_maxima(f: &FieldCollection, dom: &BoxDomain, grid: &Grid) -> Vec<Option<f64>> {
    par::map_range(grid.cell_count(), |c| {
        if !dom.cell_active(grid, c) {
            return None;
        }
        let x = grid.cell_center(c);
        let v = (0..f.indices().len())
            .map(|k| f.eval_raw(k, &x).abs())
            .fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
        // NaN samples count as unbounded
        Some(if v.is_nan() { f64::INFINITY } else { v })
    })
}

/// Keep the cells whose `max_α |f_α|` is at most the `q`-quantile `T`.
///
/// At least a fraction `q` of active cells survives. When the quantile lands
/// in a block of equal values every tied cell is kept, which is how a constant
/// field ends up fully covered.
pub fn lusin_truncate(f: &FieldCollection, dom: &BoxDomain, resolution: usize, q: f64) -> Result<Truncated> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("quantile q must lie in (0,1), got {q}")));
    }
    if f.dim() != dom.dim() {
        return Err(Error::Dimension {
            expected: dom.dim(),
            found: f.dim(),
        });
    }
    let grid = dom.grid(resolution);
    let maxima = cell_maxima(f, dom, &grid);
    let mut values: Vec<f64> = maxima.iter().flatten().copied().collect();
    if values.is_empty() {
        return Err(Error::InvalidArgument("domain has no active cells".into()));
    }
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let threshold = values[rank - 1];
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "field is non-finite on more than a fraction {} of the cells",
            1.0 - q
        )));
    }
    Ok(finish(f, grid, &maxima, threshold, q))
}

/// The identity truncation: every active cell with finite field values is kept.
pub fn keep_finite(f: &FieldCollection, dom: &BoxDomain, resolution: usize) -> Result<Truncated> {
    if f.dim() != dom.dim() {
        return Err(Error::Dimension {
            expected: dom.dim(),
            found: f.dim(),
        });
    }
    let grid = dom.grid(resolution);
    let maxima = cell_maxima(f, dom, &grid);
    let threshold = maxima
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(0.0, |a: f64, &b| a.max(b));
    if maxima.iter().all(Option::is_none) {
        return Err(Error::InvalidArgument("domain has no active cells".into()));
    }
    Ok(finish(f, grid, &maxima, threshold, 1.0))
}

fn finish(f: &FieldCollection, grid: Grid, maxima: &[Option<f64>], threshold: f64, q: f64) -> Truncated {
    let keep: Vec<bool> = maxima.iter().map(|v| v.is_some_and(|v| v <= threshold)).collect();
    let active_cells = maxima.iter().filter(|v| v.is_some()).count();
    let kept_cells = keep.iter().filter(|&&k| k).count();
    let excluded_measure = (active_cells - kept_cells) as f64 * grid.cell_volume();
    Truncated {
        field: f.clone().with_truncation(Truncation {
            grid: grid.clone(),
            keep: keep.clone(),
        }),
        grid,
        keep,
        summary: TruncationSummary {
            quantile: q,
            threshold,
            kept_cells,
            active_cells,
            excluded_measure,
        },
    }
}
