//! The planar field `(2y, −2x)` has no potential: its line integrals along
//! two monotone paths from `(0,0)` to `(1,1)` disagree.

use serde::{Deserialize, Serialize};

/// Five-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circulation {
    /// Along `(0,0) → (1,0) → (1,1)`.
    pub path_a: f64,
    /// Along `(0,0) → (0,1) → (1,1)`.
    pub path_b: f64,
    pub difference: f64,
    /// `−curl · area` from Green's theorem on the unit square.
    pub green: f64,
}

fn field(p: [f64; 2]) -> [f64; 2] {
    [2.0 * p[1], -2.0 * p[0]]
}

/// `∫ F · dr` along the segment `a → b`.
pub fn segment_integral(f: impl Fn([f64; 2]) -> [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(&s, w)| {
            let v = f([mid[0] + 0.5 * s * d[0], mid[1] + 0.5 * s * d[1]]);
            w * 0.5 * (v[0] * d[0] + v[1] * d[1])
        })
        .sum()
}

fn polyline_integral(pts: &[[f64; 2]]) -> f64 {
    pts.windows(2).map(|w| segment_integral(field, w[0], w[1])).sum()
}

/// Integrates `(2y, −2x)` along both paths; a Lipschitz `g` with this
/// gradient would make them equal.
pub fn circulation_counterexample() -> Circulation {
    let path_a = polyline_integral(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
    let path_b = polyline_integral(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
    // curl = ∂(−2x)/∂x − ∂(2y)/∂y = −4
    let curl = -4.0;
    Circulation {
        path_a,
        path_b,
        difference: path_b - path_a,
        green: -curl * 1.0,
    }
}
