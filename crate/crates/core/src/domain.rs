//! Bounded boxes in ℝⁿ, optional cell masks, and the uniform cell grids laid
//! over them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-cell activity flags over a uniform grid of the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMask {
    pub resolution: Vec<usize>,
    pub active: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    mask: Option<CellMask>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "box corners must be non-empty and equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidArgument(format!(
                    "axis {i}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(BoxDomain {
            lower,
            upper,
            mask: None,
        })
    }

    pub fn unit(n: usize) -> Self {
        BoxDomain::new(vec![0.0; n], vec![1.0; n]).expect("unit box is valid")
    }

    pub fn with_mask(mut self, mask: CellMask) -> Result<Self> {
        if mask.resolution.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: mask.resolution.len(),
            });
        }
        let cells: usize = mask.resolution.iter().product();
        if cells == 0 || mask.active.len() != cells {
            return Err(Error::InvalidArgument(format!(
                "mask has {} flags for {} cells",
                mask.active.len(),
                cells
            )));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn mask(&self) -> Option<&CellMask> {
        self.mask.as_ref()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Volume of the bounding box, ignoring any mask.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    /// Lebesgue measure of the (possibly masked) region.
    pub fn measure(&self) -> f64 {
        match &self.mask {
            None => self.volume(),
            Some(mask) => {
                let cells: usize = mask.resolution.iter().product();
                let active = mask.active.iter().filter(|&&a| a).count();
                self.volume() / cells as f64 * active as f64
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&l, &u))| xi >= l && xi <= u)
    }

    /// Uniform grid with `resolution` cells per axis.
    pub fn grid(&self, resolution: usize) -> Grid {
        Grid::new(self, vec![resolution.max(1); self.dim()])
    }

    /// Whether grid cell `flat` (of a grid with the mask's resolution) is active.
    pub fn cell_active(&self, grid: &Grid, flat: usize) -> bool {
        match &self.mask {
            None => true,
            Some(mask) if mask.resolution == grid.resolution => mask.active[flat],
            Some(mask) => {
                let c = grid.cell_center(flat);
                let mgrid = Grid::new(self, mask.resolution.clone());
                mgrid.locate(&c).map(|f| mask.active[f]).unwrap_or(false)
            }
        }
    }
}

/// Uniform tensor grid of closed cells over a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl Grid {
    pub fn new(domain: &BoxDomain, resolution: Vec<usize>) -> Self {
        Grid {
            lower: domain.lower.clone(),
            upper: domain.upper.clone(),
            resolution,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn cell_side(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.cell_side(i)).product()
    }

    /// Row-major flattening with axis 0 slowest.
    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.resolution)
            .fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.resolution[axis];
            flat /= self.resolution[axis];
        }
        idx
    }

    pub fn cell_lower(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.lower[a] + idx[a] as f64 * self.cell_side(a))
            .collect()
    }

    pub fn cell_upper(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.lower[a] + (idx[a] + 1) as f64 * self.cell_side(a))
            .collect()
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        (0..self.dim())
            .map(|a| self.lower[a] + (idx[a] as f64 + 0.5) * self.cell_side(a))
            .collect()
    }

    /// Cell containing `x`, clamping points on the upper faces inward.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            if !(x[a] >= self.lower[a] && x[a] <= self.upper[a]) {
                return None;
            }
            let k = ((x[a] - self.lower[a]) / self.cell_side(a)).floor() as usize;
            idx.push(k.min(self.resolution[a] - 1));
        }
        Some(self.flatten(&idx))
    }
}

/// Euclidean distance between two closed boxes (0 if they intersect).
pub fn box_distance(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..alo.len() {
        let gap = (blo[a] - ahi[a]).max(alo[a] - bhi[a]).max(0.0);
        s += gap * gap;
    }
    s.sqrt()
}

/// Distance from box `inner` to the complement of box `outer` (`inner ⊂ outer`).
pub fn distance_to_complement(ilo: &[f64], ihi: &[f64], olo: &[f64], ohi: &[f64]) -> f64 {
    (0..ilo.len())
        .map(|a| (ilo[a] - olo[a]).min(ohi[a] - ihi[a]))
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}
