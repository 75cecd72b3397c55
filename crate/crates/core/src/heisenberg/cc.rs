//! Certified brackets for the Carnot–Carathéodory distance.
//!
//! Lower bounds come from inequalities every horizontal curve obeys; upper
//! bounds are lengths of explicit polygonal horizontal paths, so the bracket
//! is rigorous up to floating-point rounding.

use super::group::{koranyi_dist, HPoint};
use super::path::{segment_dt, HorizontalPath};
use crate::rng::stream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcConfig {
    /// Segments per candidate path.
    pub segments: usize,
    /// Descent iterations per restart.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for CcConfig {
    fn default() -> Self {
        CcConfig {
            segments: 128,
            iterations: 400,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcBounds {
    pub lower: f64,
    pub upper: f64,
    /// True when no optimized restart closed the t-gap and `upper` comes from
    /// the segment-plus-loop fallback.
    pub loose: bool,
    /// Length reached by each restart (`None` when it failed to close the gap).
    pub restarts: Vec<(String, Option<f64>)>,
    pub path: HorizontalPath,
}

/// `max(|z|, √(π|t|) − |z|, 2^{-1/4}‖(z,t)‖_K)` for `(z, t) = p⁻¹ q`.
///
/// A horizontal curve of length `L` from the origin has `|z| ≤ L` and
/// `|t| ≤ L²`; closing it with the chord (which adds nothing to `t`) gives a
/// loop of length `L + |z|` whose signed area is `−t/4`, so the isoperimetric
/// inequality yields `|t| ≤ (L + |z|)²/π`.
pub fn cc_lower_bound(p: &HPoint, q: &HPoint) -> f64 {
    let w = p.inv().mul(q);
    let r = w.planar_norm();
    let iso = (PI * w.t.abs()).sqrt() - r;
    let gauge = koranyi_dist(q, p) * 2f64.powf(-0.25);
    r.max(iso).max(gauge)
}

/// Lift endpoint of the polygon `0 → pts[1] → … → z`.
fn lift_t(pts: &[[f64; 2]]) -> f64 {
    pts.windows(2).map(|w| segment_dt(w[0], w[1])).sum()
}

fn poly_length(pts: &[[f64; 2]]) -> f64 {
    pts.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Rescale the deviation from the chord so the lift ends at height `target`.
///
/// The lift is quadratic in the scale `s` (the chord itself contributes 0), so
/// the root nearest 1 is found in closed form.
fn project(pts: &mut [[f64; 2]], target: f64) -> bool {
    let n = pts.len() - 1;
    let z = pts[n];
    let chord: Vec<[f64; 2]> = (0..=n).map(|i| [z[0] * i as f64 / n as f64, z[1] * i as f64 / n as f64]).collect();
    let with = |s: f64| -> Vec<[f64; 2]> {
        pts.iter()
            .zip(&chord)
            .map(|(p, c)| [c[0] + s * (p[0] - c[0]), c[1] + s * (p[1] - c[1])])
            .collect()
    };
    let (tp, tm) = (lift_t(&with(1.0)), lift_t(&with(-1.0)));
    let (a, b) = (0.5 * (tp + tm), 0.5 * (tp - tm));
    // a s² + b s − target = 0
    let s = if a.abs() < 1e-300 {
        if b == 0.0 {
            return target == 0.0;
        }
        target / b
    } else {
        let disc = b * b + 4.0 * a * target;
        if disc < 0.0 {
            return false;
        }
        let r = disc.sqrt();
        // numerically stable pair of roots
        let q = -0.5 * (b + b.signum() * r);
        let roots = if q != 0.0 { [q / a, -target / q] } else { [0.0, 0.0] };
        if (roots[0] - 1.0).abs() <= (roots[1] - 1.0).abs() {
            roots[0]
        } else {
            roots[1]
        }
    };
    if !s.is_finite() {
        return false;
    }
    let moved = with(s);
    pts.copy_from_slice(&moved);
    (lift_t(pts) - target).abs() <= 1e-10 * target.abs().max(1.0)
}

/// Circular arc from the origin to `z` enclosing area `|t|/4` with the chord,
/// on the side that makes the lift end at `t`. Returns the polygon and the
/// exact arc length.
pub fn arc_ansatz(z: [f64; 2], t: f64, segments: usize) -> (Vec<[f64; 2]>, f64) {
    let c = z[0].hypot(z[1]);
    let area = 0.25 * t.abs();
    let n = segments.max(2);
    let (mut pts, len): (Vec<[f64; 2]>, f64) = if area == 0.0 {
        ((0..=n).map(|i| [z[0] * i as f64 / n as f64, z[1] * i as f64 / n as f64]).collect(), c)
    } else if c == 0.0 {
        let r = (area / PI).sqrt();
        let pts = (0..=n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                [r * a.sin(), r * (1.0 - a.cos())]
            })
            .collect();
        (pts, 2.0 * PI * r)
    } else {
        // segment area over chord² is increasing in the central angle φ ∈ (0, 2π)
        let ratio = |phi: f64| (phi - phi.sin()) / (8.0 * (0.5 * phi).sin().powi(2));
        let goal = area / (c * c);
        let (mut lo, mut hi) = (1e-9, 2.0 * PI - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) < goal {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let phi = 0.5 * (lo + hi);
        let r = c / (2.0 * (0.5 * phi).sin());
        let e = [z[0] / c, z[1] / c];
        let nrm = [-e[1], e[0]];
        let mid = [0.5 * z[0], 0.5 * z[1]];
        let cy = -r * (0.5 * phi).cos();
        let pts = (0..=n)
            .map(|i| {
                let th = 0.5 * PI + 0.5 * phi - phi * i as f64 / n as f64;
                let (u, v) = (r * th.cos(), cy + r * th.sin());
                [mid[0] + u * e[0] + v * nrm[0], mid[1] + u * e[1] + v * nrm[1]]
            })
            .collect();
        (pts, r * phi)
    };
    pts[0] = [0.0, 0.0];
    pts[n] = z;
    if lift_t(&pts) * t < 0.0 {
        // reflect across the chord
        let cc = if c > 0.0 { [z[0] / c, z[1] / c] } else { [1.0, 0.0] };
        for p in pts.iter_mut() {
            let along = p[0] * cc[0] + p[1] * cc[1];
            let refl = [2.0 * along * cc[0] - p[0], 2.0 * along * cc[1] - p[1]];
            *p = refl;
        }
    }
    (pts, len)
}

/// Gradient descent on `length + λ(t_end − t)²` over interior waypoints,
/// projecting onto the constraint after every accepted step.
fn descend(pts: &mut Vec<[f64; 2]>, target: f64, iterations: usize) -> Option<f64> {
    let n = pts.len() - 1;
    if !project(pts, target) {
        return None;
    }
    let scale = poly_length(pts).max(1e-12);
    let lambda = 10.0 / scale;
    let objective = |p: &[[f64; 2]]| poly_length(p) + lambda * (lift_t(p) - target).powi(2);
    let mut best = poly_length(pts);
    let mut step = 0.1 * scale / n as f64;
    for _ in 0..iterations {
        let gap = lift_t(pts) - target;
        let mut grad = vec![[0.0; 2]; n + 1];
        for i in 1..n {
            let (a, p, b) = (pts[i - 1], pts[i], pts[i + 1]);
            let la = (p[0] - a[0]).hypot(p[1] - a[1]).max(1e-300);
            let lb = (b[0] - p[0]).hypot(b[1] - p[1]).max(1e-300);
            grad[i][0] = (p[0] - a[0]) / la - (b[0] - p[0]) / lb + 2.0 * lambda * gap * 2.0 * (a[1] - b[1]);
            grad[i][1] = (p[1] - a[1]) / la - (b[1] - p[1]) / lb + 2.0 * lambda * gap * 2.0 * (b[0] - a[0]);
        }
        let f0 = objective(pts);
        let mut accepted = false;
        while step > 1e-14 * scale {
            let mut trial = pts.clone();
            for i in 1..n {
                trial[i][0] -= step * grad[i][0];
                trial[i][1] -= step * grad[i][1];
            }
            if objective(&trial) < f0 && project(&mut trial, target) {
                *pts = trial;
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let len = poly_length(pts);
        if best - len <= 1e-13 * scale {
            best = best.min(len);
            break;
        }
        best = len;
    }
    Some(best.min(poly_length(pts)))
}

/// Bracket `d_cc(p, q)` between certified lower and upper bounds.
///
/// Restarts: the circular-arc ansatz (the known geodesic shape) and a
/// seeded perturbation of the chord. The segment-plus-loop path (length
/// `|z| + √(π|t|)`) is always available as a feasible fallback.
pub fn cc_dist_bounds(p: &HPoint, q: &HPoint, cfg: &CcConfig) -> CcBounds {
    let w = p.inv().mul(q);
    let z = [w.x, w.y];
    let lower = cc_lower_bound(p, q);
    let n = cfg.segments.max(4);
    let mut restarts = Vec::new();
    let mut best: Option<(f64, Vec<[f64; 2]>)> = None;
    let mut consider = |name: &str, mut pts: Vec<[f64; 2]>| {
        let got = descend(&mut pts, w.t, cfg.iterations);
        restarts.push((name.to_string(), got));
        if let Some(len) = got {
            if best.as_ref().is_none_or(|(b, _)| len < *b) {
                best = Some((len, pts));
            }
        }
    };
    if w == HPoint::IDENTITY {
        return CcBounds {
            lower: 0.0,
            upper: 0.0,
            loose: false,
            restarts,
            path: HorizontalPath::through(*p, &[]),
        };
    }
    let (arc, _) = arc_ansatz(z, w.t, n);
    consider("arc", arc);
    let mut rng = stream(cfg.seed, "cc-restart");
    let amp = rng.gen_range(0.2..0.6) * z[0].hypot(z[1]).max(w.t.abs().sqrt());
    let bump: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let b = amp * (PI * s).sin();
            let (ex, ey) = if z == [0.0, 0.0] { (0.0, 1.0) } else { (z[0], z[1]) };
            let norm = ex.hypot(ey);
            if z == [0.0, 0.0] {
                // a loop through the origin
                let a = 2.0 * PI * s;
                [amp * a.sin(), amp * (1.0 - a.cos())]
            } else {
                [s * z[0] - b * ey / norm, s * z[1] + b * ex / norm]
            }
        })
        .collect();
    consider("perturbed-chord", bump);

    let loose = best.is_none();
    let (upper, pts) = match best {
        Some((len, pts)) => (len, pts),
        None => {
            // straight to z, then a circular loop at z fixing the height
            let (mut loop_pts, len) = arc_ansatz([0.0, 0.0], w.t, n);
            for q in loop_pts.iter_mut() {
                q[0] += z[0];
                q[1] += z[1];
            }
            let mut pts = vec![[0.0, 0.0]];
            pts.extend(loop_pts);
            (z[0].hypot(z[1]) + len, pts)
        }
    };
    let upper = upper.max(lower);
    let planar: Vec<[f64; 2]> = pts.iter().skip(1).copied().collect();
    let path = HorizontalPath::through(HPoint::IDENTITY, &planar).left_translate(p);
    CcBounds {
        lower,
        upper,
        loose,
        restarts,
        path,
    }
}
