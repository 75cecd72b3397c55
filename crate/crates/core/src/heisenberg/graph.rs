//! Graphs `Φ(x, y) = (x, y, u(x, y))` over planar boxes and their
//! horizontality.

use super::group::HPoint;
use crate::bumpsum::BumpPolySum;
use crate::domain::{BoxDomain, Grid};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::par;
use serde::{Deserialize, Serialize};

/// Closed-form test surfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Surface {
    Constant { value: f64 },
    /// `u = x`.
    PlaneX,
    /// `u = |x|^{1/2}`, not differentiable on `x = 0`.
    SqrtAbsX,
    /// `u = 2xy`.
    Saddle,
}

#[derive(Clone, Debug)]
pub enum GraphSource {
    Surface(Surface),
    Bump(BumpPolySum),
    /// Values at cell centers; interpolated bilinearly, differentiated by
    /// central differences.
    Sampled { grid: Grid, values: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct GraphMap {
    domain: BoxDomain,
    source: GraphSource,
}

impl GraphMap {
    pub fn new(domain: BoxDomain, source: GraphSource) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: domain.dim(),
            });
        }
        match &source {
            GraphSource::Bump(g) if g.dim() != 2 || g.order() < 1 => {
                return Err(Error::InvalidArgument(format!(
                    "graph needs a planar sum of order ≥ 1, got n={} m={}",
                    g.dim(),
                    g.order()
                )))
            }
            GraphSource::Sampled { grid, values } => {
                if grid.dim() != 2 || values.len() != grid.cell_count() {
                    return Err(Error::InvalidArgument(format!(
                        "sampled graph: {} values for a {}-D grid of {} cells",
                        values.len(),
                        grid.dim(),
                        grid.cell_count()
                    )));
                }
                if grid.resolution.iter().any(|&r| r < 2) {
                    return Err(Error::InvalidArgument("sampled graph needs ≥ 2 cells per axis".into()));
                }
            }
            _ => {}
        }
        Ok(GraphMap { domain, source })
    }

    pub fn surface(domain: BoxDomain, s: Surface) -> Result<Self> {
        GraphMap::new(domain, GraphSource::Surface(s))
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn source(&self) -> &GraphSource {
        &self.source
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        match &self.source {
            GraphSource::Surface(s) => match s {
                Surface::Constant { value } => *value,
                Surface::PlaneX => x,
                Surface::SqrtAbsX => x.abs().sqrt(),
                Surface::Saddle => 2.0 * x * y,
            },
            GraphSource::Bump(g) => g.value(&p),
            GraphSource::Sampled { grid, values } => bilinear(grid, values, p),
        }
    }

    /// `∇u(p)`, or `None` where `u` is not (known to be) differentiable.
    pub fn gradient(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let [x, y] = p;
        match &self.source {
            GraphSource::Surface(s) => match s {
                Surface::Constant { .. } => Some([0.0, 0.0]),
                Surface::PlaneX => Some([1.0, 0.0]),
                Surface::SqrtAbsX if x == 0.0 => None,
                Surface::SqrtAbsX => Some([0.5 * x.signum() / x.abs().sqrt(), 0.0]),
                Surface::Saddle => Some([2.0 * y, 2.0 * x]),
            },
            GraphSource::Bump(g) => Some([
                g.deriv_unchecked(&p, &MultiIndex::unit(2, 0)),
                g.deriv_unchecked(&p, &MultiIndex::unit(2, 1)),
            ]),
            GraphSource::Sampled { grid, values } => {
                let c = grid.locate(&p)?;
                let idx = grid.unflatten(c);
                if (0..2).any(|a| idx[a] == 0 || idx[a] + 1 == grid.resolution[a]) {
                    return None;
                }
                let mut g = [0.0; 2];
                for a in 0..2 {
                    let (mut lo, mut hi) = (idx.clone(), idx.clone());
                    lo[a] -= 1;
                    hi[a] += 1;
                    g[a] = (values[grid.flatten(&hi)] - values[grid.flatten(&lo)]) / (2.0 * grid.cell_side(a));
                }
                Some(g)
            }
        }
    }

    /// Smallest length over which `u` can change character: the width of
    /// the cutoff transition layer (`θ` times the cell side) for a bump sum,
    /// the cell side for samples. Regularity is a property of scales below
    /// this one.
    pub fn feature_scale(&self) -> Option<f64> {
        match &self.source {
            GraphSource::Surface(_) => None,
            GraphSource::Bump(g) => g
                .terms()
                .iter()
                .flat_map(|t| t.lo.iter().zip(&t.hi).map(move |(l, h)| t.theta * (h - l)))
                .reduce(f64::min),
            GraphSource::Sampled { grid, .. } => Some(grid.cell_side(0).min(grid.cell_side(1))),
        }
    }

    /// `Φ(p) = (x, y, u(x, y))`.
    pub fn lift(&self, p: [f64; 2]) -> HPoint {
        HPoint::new(p[0], p[1], self.value(p))
    }
}

fn bilinear(grid: &Grid, values: &[f64], p: [f64; 2]) -> f64 {
    let mut i0 = [0usize; 2];
    let mut w = [0.0; 2];
    for a in 0..2 {
        let h = grid.cell_side(a);
        let s = ((p[a] - grid.lower[a]) / h - 0.5).clamp(0.0, (grid.resolution[a] - 1) as f64);
        let k = (s.floor() as usize).min(grid.resolution[a] - 2);
        i0[a] = k;
        w[a] = s - k as f64;
    }
    let at = |dx: usize, dy: usize| values[grid.flatten(&[i0[0] + dx, i0[1] + dy])];
    (1.0 - w[0]) * ((1.0 - w[1]) * at(0, 0) + w[1] * at(0, 1)) + w[0] * ((1.0 - w[1]) * at(1, 0) + w[1] * at(1, 1))
}

/// `(∂u/∂x − 2y, ∂u/∂y + 2x)`; zero exactly where the tangent plane of the
/// graph is horizontal. `None` where `u` is not differentiable.
pub fn horizontality_residual(g: &GraphMap, at: [f64; 2]) -> Option<[f64; 2]> {
    let [ux, uy] = g.gradient(at)?;
    Some([ux - 2.0 * at[1], uy + 2.0 * at[0]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    /// Cells whose center residual is at most `tau` in the max norm (the norm
    /// the constructor matches derivatives in), over all cells.
    pub fraction: f64,
    pub tau: f64,
    pub resolution: usize,
    pub cells: usize,
    pub horizontal: usize,
    /// Cells whose center is not a differentiability point; counted as not
    /// horizontal.
    pub excluded: usize,
    pub worst_residual: f64,
}

/// Fraction of cells of a `resolution²` grid whose center residual is `≤ τ`
/// componentwise.
///
/// Constructor outputs are built on dyadic cells whose boundaries carry no
/// term; an odd `resolution` keeps the sample centers off those lines.
pub fn characteristic_fraction(g: &GraphMap, tau: f64, resolution: usize) -> Result<CharacteristicReport> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tau}")));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be ≥ 1".into()));
    }
    let grid = g.domain.grid(resolution);
    let norms = par::map_range(grid.cell_count(), |c| {
        let x = grid.cell_center(c);
        horizontality_residual(g, [x[0], x[1]]).map(|r| r[0].abs().max(r[1].abs()))
    });
    let excluded = norms.iter().filter(|r| r.is_none()).count();
    let horizontal = norms.iter().flatten().filter(|&&r| r <= tau).count();
    let worst_residual = norms.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
    Ok(CharacteristicReport {
        fraction: horizontal as f64 / norms.len() as f64,
        tau,
        resolution,
        cells: norms.len(),
        horizontal,
        excluded,
        worst_residual,
    })
}
