//! Polygonal horizontal paths and their lifts.
//!
//! Along a straight planar segment the form `2y dx − 2x dy` is integrated
//! exactly by the midpoint rule, so a polygon lifts to an exactly horizontal
//! curve and its endpoint is known in closed form.

use super::group::HPoint;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPath {
    pub start: HPoint,
    /// Planar waypoints, the first one being the start's `z`.
    pub waypoints: Vec<[f64; 2]>,
}

/// `Δt = 2ȳΔx − 2x̄Δy` for the segment `a → b`.
#[inline]
pub fn segment_dt(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (mx, my) = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
    2.0 * my * (b[0] - a[0]) - 2.0 * mx * (b[1] - a[1])
}

impl HorizontalPath {
    /// Path from `start` through the given planar points.
    pub fn through(start: HPoint, rest: &[[f64; 2]]) -> Self {
        let mut waypoints = vec![[start.x, start.y]];
        waypoints.extend_from_slice(rest);
        HorizontalPath { start, waypoints }
    }

    pub fn segments(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }

    pub fn lift(&self) -> Vec<HPoint> {
        let mut t = self.start.t;
        let mut out = vec![self.start];
        for w in self.waypoints.windows(2) {
            t += segment_dt(w[0], w[1]);
            out.push(HPoint::new(w[1][0], w[1][1], t));
        }
        out
    }

    pub fn end(&self) -> HPoint {
        *self.lift().last().expect("a path has a start")
    }

    /// Total planar length, which is the sub-Riemannian length of the lift.
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }

    /// The path `r * γ`.
    pub fn left_translate(&self, r: &HPoint) -> Self {
        HorizontalPath {
            start: r.mul(&self.start),
            waypoints: self.waypoints.iter().map(|w| [w[0] + r.x, w[1] + r.y]).collect(),
        }
    }
}
