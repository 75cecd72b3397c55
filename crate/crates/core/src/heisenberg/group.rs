//! Points of ℍ₁, the group law, dilations and the Korányi gauge.

use crate::rng::stream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A point `(z, t) = (x, y, t)` of the first Heisenberg group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    /// `(z + z′, t + t′ + 2 Im(z z̄′))`.
    pub fn mul(&self, q: &HPoint) -> HPoint {
        HPoint {
            x: self.x + q.x,
            y: self.y + q.y,
            t: self.t + q.t + 2.0 * (self.y * q.x - self.x * q.y),
        }
    }

    pub fn inv(&self) -> HPoint {
        HPoint {
            x: -self.x,
            y: -self.y,
            t: -self.t,
        }
    }

    /// `δ_λ(z, t) = (λz, λ²t)`.
    pub fn dilate(&self, lambda: f64) -> HPoint {
        HPoint {
            x: lambda * self.x,
            y: lambda * self.y,
            t: lambda * lambda * self.t,
        }
    }

    pub fn planar_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// `‖(z, t)‖_K = (|z|⁴ + t²)^{1/4}`.
    pub fn koranyi_norm(&self) -> f64 {
        let r2 = self.x * self.x + self.y * self.y;
        (r2 * r2 + self.t * self.t).sqrt().sqrt()
    }

    /// Euclidean distance in ℝ³.
    pub fn euclidean_dist(&self, q: &HPoint) -> f64 {
        ((self.x - q.x).powi(2) + (self.y - q.y).powi(2) + (self.t - q.t).powi(2)).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }
}

/// `d_K(p, q) = ‖q⁻¹ * p‖_K`.
pub fn koranyi_dist(p: &HPoint, q: &HPoint) -> f64 {
    q.inv().mul(p).koranyi_norm()
}

/// The two quantities compared against `d_K`: `A = |z − z′|` and
/// `B = |t − t′ + 2(x′y − xy′)|^{1/2}`, with `(A + B)/2 ≤ d_K ≤ 2^{1/4}(A + B)`.
pub fn koranyi_parts(p: &HPoint, q: &HPoint) -> (f64, f64) {
    let a = (p.x - q.x).hypot(p.y - q.y);
    let b = (p.t - q.t + 2.0 * (q.x * p.y - p.x * q.y)).abs().sqrt();
    (a, b)
}

/// Data-driven constants for `c₁|p − q| ≤ d_K(p, q) ≤ c₂|p − q|^{1/2}` on
/// the cube `[−1, 1]³`: the smallest and largest observed ratios over
/// `pairs` uniform pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanComparison {
    pub c1: f64,
    pub c2: f64,
    pub pairs: usize,
}

pub fn euclidean_comparison(pairs: usize, seed: u64) -> EuclideanComparison {
    let mut rng = stream(seed, "euclidean-comparison");
    let mut point = || HPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (mut c1, mut c2) = (f64::INFINITY, 0.0_f64);
    for _ in 0..pairs {
        let (p, q) = (point(), point());
        let e = p.euclidean_dist(&q);
        if e == 0.0 {
            continue;
        }
        let d = koranyi_dist(&p, &q);
        c1 = c1.min(d / e);
        c2 = c2.max(d / e.sqrt());
    }
    EuclideanComparison { c1, c2, pairs }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.t)
    }
}

impl FromStr for HPoint {
    type Err = crate::error::Error;

    /// `x,y,t`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || crate::error::Error::InvalidArgument(format!("expected a point 'x,y,t', got '{s}'"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let p = HPoint::new(v[0], v[1], v[2]);
        if !p.is_finite() {
            return Err(bad());
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_examples() {
        let p = HPoint::new(0.3, -1.2, 4.0);
        assert_eq!(p.mul(&HPoint::IDENTITY), p);
        assert_eq!(HPoint::new(1.0, 0.0, 0.0).mul(&HPoint::new(0.0, 1.0, 0.0)), HPoint::new(1.0, 1.0, -2.0));
        let q = HPoint::new(1.0, 1.0, 5.0);
        assert_eq!(q.inv(), HPoint::new(-1.0, -1.0, -5.0));
        assert_eq!(q.mul(&q.inv()), HPoint::IDENTITY);
        assert_eq!(q.inv().inv(), q);
    }

    #[test]
    fn gauge_examples() {
        let o = HPoint::IDENTITY;
        assert_eq!(koranyi_dist(&o, &HPoint::new(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(koranyi_dist(&o, &HPoint::new(0.0, 0.0, 4.0)), 2.0);
    }

    #[test]
    fn parses_points() {
        assert_eq!("1, 0,-2".parse::<HPoint>().unwrap(), HPoint::new(1.0, 0.0, -2.0));
        assert!("1,0".parse::<HPoint>().is_err());
        assert!("a,b,c".parse::<HPoint>().is_err());
        assert!("nan,0,0".parse::<HPoint>().is_err());
    }
}
