//! Moduli `μ: [0,∞) → [0,∞)` with `μ(0) = 0`, continuity, and `μ(t) = O(t)`
//! at infinity. A function is controlled by `μ` when
//! `|g(x) − g(y)| ≤ |x − y| / μ(|x − y|)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `0` at `0`, `|log t|⁻¹` on `(0, e⁻¹]`, `e·t` beyond.
    LogPreset,
    /// `t^β`, `0 < β ≤ 1`.
    Power { beta: f64 },
    /// Linear interpolation through sorted knots starting at `(0, 0)`,
    /// extended linearly past the last knot.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl Modulus {
    pub fn power(beta: f64) -> Result<Self> {
        let m = Modulus::Power { beta };
        m.validate()?;
        Ok(m)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        let m = Modulus::PiecewiseLinear { knots };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Modulus::LogPreset => Ok(()),
            Modulus::Power { beta } => {
                if *beta > 0.0 && *beta <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidModulus(format!("power exponent {beta} not in (0, 1]")))
                }
            }
            Modulus::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidModulus("need at least two knots".into()));
                }
                if knots[0] != (0.0, 0.0) {
                    return Err(Error::InvalidModulus(format!(
                        "first knot must be (0, 0), got ({}, {})",
                        knots[0].0, knots[0].1
                    )));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::InvalidModulus(format!(
                            "knot abscissae must increase strictly ({} then {})",
                            w[0].0, w[1].0
                        )));
                    }
                }
                if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite() || v < 0.0) {
                    return Err(Error::InvalidModulus("knot values must be finite and non-negative".into()));
                }
                let (s, _) = self.tail_slope();
                if s < 0.0 {
                    return Err(Error::InvalidModulus(format!(
                        "last segment slope {s} would make μ negative"
                    )));
                }
                if knots.last().map(|k| k.1) == Some(0.0) && s == 0.0 {
                    return Err(Error::InvalidModulus("μ vanishes identically past the last knot".into()));
                }
                Ok(())
            }
        }
    }

    fn tail_slope(&self) -> (f64, usize) {
        match self {
            Modulus::PiecewiseLinear { knots } => {
                let k = knots.len();
                let (a, b) = (knots[k - 2], knots[k - 1]);
                ((b.1 - a.1) / (b.0 - a.0), k - 1)
            }
            _ => (0.0, 0),
        }
    }

    /// `μ(t)`; negative arguments are rejected.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("modulus argument must be ≥ 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `μ(t)` for `t ≥ 0` without the argument check.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Modulus::LogPreset => {
                if t == 0.0 {
                    0.0
                } else if t <= 1.0 / E {
                    1.0 / t.ln().abs()
                } else {
                    E * t
                }
            }
            Modulus::Power { beta } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*beta)
                }
            }
            Modulus::PiecewiseLinear { knots } => {
                let k = knots.len();
                let seg = match knots.iter().position(|&(kt, _)| kt >= t) {
                    Some(0) => return knots[0].1,
                    Some(i) => i,
                    None => k - 1,
                };
                let (a, b) = (knots[seg - 1], knots[seg]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    /// Constants `(C, t₀)` with `μ(t) ≤ C·t` for all `t ≥ t₀`.
    pub fn growth(&self) -> (f64, f64) {
        match self {
            Modulus::LogPreset => (E, 1.0 / E),
            Modulus::Power { .. } => (1.0, 1.0),
            Modulus::PiecewiseLinear { knots } => {
                let (s, last) = self.tail_slope();
                let (t0, v0) = knots[last];
                // μ(t)/t = s + (v0 − s·t0)/t is monotone on [t0, ∞)
                (s.max(v0 / t0), t0)
            }
        }
    }

    /// Largest `δ ≤ t_cap` with `μ ≤ bound` on `[0, δ]`.
    pub fn delta_for_bound(&self, bound: f64, t_cap: f64) -> Result<f64> {
        if !(bound > 0.0) {
            return Err(Error::LemmaInfeasible {
                constraint: "μ(t) ≤ B needs B > 0".into(),
                value: bound,
                limit: 0.0,
            });
        }
        let delta = match self {
            Modulus::LogPreset => {
                if bound < 1.0 {
                    (-1.0 / bound).exp()
                } else {
                    bound / E
                }
            }
            Modulus::Power { beta } => bound.powf(1.0 / beta),
            Modulus::PiecewiseLinear { knots } => {
                let mut out = f64::INFINITY;
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if b.1 > bound {
                        out = a.0 + (bound - a.1) / (b.1 - a.1) * (b.0 - a.0);
                        break;
                    }
                }
                if out.is_infinite() {
                    let (s, last) = self.tail_slope();
                    if s > 0.0 {
                        out = knots[last].0 + (bound - knots[last].1) / s;
                    }
                }
                out
            }
        };
        Ok(delta.min(t_cap))
    }

    /// Upper bound for `sup { μ(t)/t : t ≥ δ }`: log-grid samples on
    /// `[δ, t₀]` (including δ, t₀ and any knots) and the growth constant past t₀.
    pub fn sup_ratio_beyond(&self, delta: f64) -> f64 {
        let (c, t0) = self.growth();
        let mut best = c;
        if delta < t0 {
            let mut samples = vec![delta, t0];
            if let Modulus::PiecewiseLinear { knots } = self {
                samples.extend(knots.iter().map(|k| k.0).filter(|&t| t > delta && t < t0));
            }
            let (la, lb) = (delta.ln(), t0.ln());
            const STEPS: usize = 4096;
            samples.extend((1..STEPS).map(|i| (la + (lb - la) * i as f64 / STEPS as f64).exp()));
            for t in samples {
                best = best.max(self.value(t) / t);
            }
        } else {
            best = best.max(self.value(delta) / delta);
        }
        best
    }

    pub fn label(&self) -> String {
        match self {
            Modulus::LogPreset => "log".into(),
            Modulus::Power { beta } => format!("power:{beta}"),
            Modulus::PiecewiseLinear { knots } => {
                let parts: Vec<String> = knots.iter().map(|(t, v)| format!("{t},{v}")).collect();
                format!("pl:{}", parts.join(";"))
            }
        }
    }
}

impl FromStr for Modulus {
    type Err = Error;

    /// `log`, `power:<β>`, or `pl:<t>,<μ>;<t>,<μ>;…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "log" {
            return Ok(Modulus::LogPreset);
        }
        if let Some(rest) = s.strip_prefix("power:") {
            let beta: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidModulus(format!("bad exponent '{rest}'")))?;
            return Modulus::power(beta);
        }
        if let Some(rest) = s.strip_prefix("pl:") {
            let mut knots = Vec::new();
            for pair in rest.split(';').filter(|p| !p.is_empty()) {
                let mut it = pair.split(',');
                let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                    return Err(Error::InvalidModulus(format!("bad knot '{pair}'")));
                };
                let t: f64 = a.trim().parse().map_err(|_| Error::InvalidModulus(format!("bad knot '{pair}'")))?;
                let v: f64 = b.trim().parse().map_err(|_| Error::InvalidModulus(format!("bad knot '{pair}'")))?;
                knots.push((t, v));
            }
            return Modulus::piecewise_linear(knots);
        }
        Err(Error::InvalidModulus(format!("unknown modulus '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_preset_branches() {
        let mu = Modulus::LogPreset;
        assert_eq!(mu.eval(0.0).unwrap(), 0.0);
        let joint = 1.0 / E;
        let left = 1.0 / joint.ln().abs();
        let right = E * joint;
        assert!((left - 1.0).abs() < 1e-12);
        assert!((right - 1.0).abs() < 1e-12);
        assert!((mu.value(joint) - 1.0).abs() < 1e-12);
        assert!((mu.value(1.0) - E).abs() < 1e-15);
        assert!(mu.eval(-1e-3).is_err());
    }

    #[test]
    fn log_delta_inverts_branch() {
        let mu = Modulus::LogPreset;
        let d = mu.delta_for_bound(0.5, 10.0).unwrap();
        assert!((d - (-2.0f64).exp()).abs() < 1e-15);
        assert!((mu.value(d) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn power_one_delta_is_bound_or_cap() {
        let mu = Modulus::power(1.0).unwrap();
        assert!((mu.delta_for_bound(0.3, 10.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(mu.delta_for_bound(5.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn m_dominates_samples_at_delta() {
        let mu = Modulus::LogPreset;
        for b in [0.05, 0.2, 0.5, 0.9, 2.0] {
            let d = mu.delta_for_bound(b, 100.0).unwrap();
            let m = mu.sup_ratio_beyond(d);
            assert!(m >= mu.value(d) / d);
        }
    }

    #[test]
    fn piecewise_linear_validation() {
        assert!(Modulus::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.5)]).is_ok());
        assert!(Modulus::piecewise_linear(vec![(0.1, 0.0), (1.0, 0.5)]).is_err());
        assert!(Modulus::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.5), (0.5, 1.0)]).is_err());
        assert!(Modulus::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!("pl:0.1,0;1,1".parse::<Modulus>().is_err());
        assert_eq!("log".parse::<Modulus>().unwrap(), Modulus::LogPreset);
        assert_eq!("power:0.5".parse::<Modulus>().unwrap(), Modulus::Power { beta: 0.5 });
    }

    #[test]
    fn piecewise_linear_interpolates_and_extrapolates() {
        let mu: Modulus = "pl:0,0;0.5,0.25;1,1".parse().unwrap();
        assert!((mu.value(0.25) - 0.125).abs() < 1e-15);
        assert!((mu.value(0.75) - 0.625).abs() < 1e-15);
        assert!((mu.value(2.0) - 2.5).abs() < 1e-15);
        let d = mu.delta_for_bound(0.625, 10.0).unwrap();
        assert!((d - 0.75).abs() < 1e-12);
        let (c, t0) = mu.growth();
        assert!(mu.value(5.0) <= c * 5.0 && t0 == 1.0);
    }

    fn presets() -> Vec<Modulus> {
        vec![
            Modulus::LogPreset,
            Modulus::Power { beta: 0.5 },
            Modulus::Power { beta: 1.0 },
            "pl:0,0;0.1,0.3;0.4,0.5;2,3".parse().unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn presets_are_continuous_and_linearly_bounded(t in 0.0f64..20.0, eps in 1e-12f64..1e-9) {
            for mu in presets() {
                let a = mu.value(t);
                let b = mu.value(t + eps);
                prop_assert!(a >= 0.0);
                // log branch has slope 1/(t log² t), unbounded near 0, so compare loosely there
                let slope_cap = if t < 1e-3 { 1e6 } else { 1e3 };
                prop_assert!((a - b).abs() <= slope_cap * eps + 1e-12, "{:?} jumps at {}", mu, t);
                let (c, t0) = mu.growth();
                if t >= t0 {
                    prop_assert!(a <= c * t * (1.0 + 1e-12));
                }
            }
        }

        #[test]
        fn delta_and_m_invariants(b in 0.01f64..3.0, s in 0.0f64..1.0) {
            for mu in presets() {
                let d = mu.delta_for_bound(b, 50.0).unwrap();
                prop_assert!(d > 0.0);
                let t = d * s.max(1e-9);
                prop_assert!(mu.value(t) <= b * (1.0 + 1e-12));
                let m = mu.sup_ratio_beyond(d);
                let t_far = d * (1.0 + 100.0 * s);
                prop_assert!(m >= mu.value(t_far) / t_far * (1.0 - 1e-12));
            }
        }
    }
}
