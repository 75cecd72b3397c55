//! Scale selection from the modulus: the cut `δ` and the ratio bound `M`.

use crate::error::{Error, Result};
use crate::modulus::Modulus;
use serde::{Deserialize, Serialize};

/// Smallest `δ` a stage will accept, relative to the domain diameter.
///
/// Below this, differences of `f64` coordinates no longer resolve `δ`.
pub const DELTA_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    /// Bound `T` on the target field after truncation.
    pub field_bound: f64,
    /// Bound `Λ` on every order-m partial derivative of the stage's terms.
    pub lipschitz: f64,
    /// `B`: `μ ≤ B` on `[0, δ]`.
    pub modulus_bound: f64,
    pub delta: f64,
    /// `M ≥ sup { μ(t)/t : t ≥ δ }`.
    pub ratio_sup: f64,
    /// Cap on the sup norm of every derivative of order `< m`.
    pub sup_cap: f64,
    /// Lipschitz/sup-norm budget `2^{-k} σ`.
    pub budget: f64,
    /// Modulus budget `2^{-k}`.
    pub modulus_budget: f64,
}

/// A priori scale of the order-m derivatives of a stage built from a field
/// bounded by `field_bound`, given the smoothstep constants `c_j = sup |S^{(j)}|`
/// and plateau fraction `θ`.
///
/// Each term is `η·P` with `P` homogeneous of degree `m`; Leibniz with the
/// one-axis cutoff bounds gives roughly `Σ_j C(m,j) (c_j/θ)^j m!/(m−j)!`
/// times the coefficient mass. This is the constant reported in certificates;
/// the builder itself uses the measured per-term bounds.
pub fn lipschitz_bound(field_bound: f64, n: usize, m: usize, theta: f64, cutoff: &[f64]) -> f64 {
    let n_alpha = crate::multiindex::binomial((n + m - 1) as u32, m as u32);
    let mut s = 0.0;
    for j in 0..=m {
        let falling: f64 = ((m - j + 1)..=m).map(|v| v as f64).product();
        let lead = crate::multiindex::binomial(m as u32, j as u32) * (cutoff[j] / theta).powi(j as i32);
        s += lead * falling;
    }
    // coefficient mass Σ|f_α|/α! ≤ n_alpha·T
    s * n_alpha * field_bound
}

/// Derive `δ`, `M` and the sup-norm cap for stage budgets `budget = 2^{-k}σ`
/// and `modulus_budget = 2^{-k}`.
///
/// `δ` is the largest value `≤ t_cap` with `μ ≤ B` on `[0, δ]` where
/// `B = modulus_budget / (√n·Λ)`; then increments of an order-(m−1)
/// derivative satisfy `|Δ|·μ(t) ≤ √nΛt·B = modulus_budget·t` below `δ`, and
/// `|Δ|·μ(t) ≤ 2·sup·M·t` above it, which the cap `modulus_budget/(2M)` keeps
/// within budget.
pub fn choose_lemma_params(
    mu: &Modulus,
    field_bound: f64,
    lipschitz: f64,
    n: usize,
    budget: f64,
    modulus_budget: f64,
    t_cap: f64,
) -> Result<LemmaParams> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidArgument(format!("Λ must be positive and finite, got {lipschitz}")));
    }
    if !(budget > 0.0 && modulus_budget > 0.0) {
        return Err(Error::InvalidArgument("stage budgets must be positive".into()));
    }
    let rn = (n as f64).sqrt();
    let bound = modulus_budget / (rn * lipschitz);
    let delta = mu.delta_for_bound(bound, t_cap)?;
    let floor = DELTA_FLOOR * t_cap;
    if !(delta > floor) {
        return Err(Error::LemmaInfeasible {
            constraint: format!("δ with μ ≤ {bound:e} on [0, δ] is below coordinate resolution"),
            value: delta,
            limit: floor,
        });
    }
    let ratio_sup = mu.sup_ratio_beyond(delta);
    if !ratio_sup.is_finite() {
        return Err(Error::LemmaInfeasible {
            constraint: "sup μ(t)/t beyond δ is not finite".into(),
            value: ratio_sup,
            limit: f64::MAX,
        });
    }
    let sup_cap = (budget / rn).min(modulus_budget / (2.0 * ratio_sup));
    Ok(LemmaParams {
        field_bound,
        lipschitz,
        modulus_bound: bound,
        delta,
        ratio_sup,
        sup_cap,
        budget,
        modulus_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn log_preset_half_bound_gives_e_minus_two() {
        // B = 1/2 with n = 1: modulus_budget / Λ = 1/2
        let p = choose_lemma_params(&Modulus::LogPreset, 1.0, 2.0, 1, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(p.modulus_bound, 0.5);
        assert!((p.delta - E.powi(-2)).abs() < 1e-15);
        assert!(p.ratio_sup >= Modulus::LogPreset.value(p.delta) / p.delta);
    }

    #[test]
    fn identity_modulus_gives_delta_equal_bound_or_cap() {
        let mu = Modulus::Power { beta: 1.0 };
        let p = choose_lemma_params(&mu, 1.0, 4.0, 1, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(p.delta, 0.25);
        let p = choose_lemma_params(&mu, 1.0, 0.01, 1, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(p.delta, 10.0);
        assert_eq!(p.ratio_sup, 1.0);
    }

    #[test]
    fn ratio_sup_dominates_sampled_ratios() {
        for mu in [Modulus::LogPreset, Modulus::Power { beta: 0.3 }] {
            let p = choose_lemma_params(&mu, 1.0, 3.0, 2, 0.5, 0.5, 2.0).unwrap();
            let mut rng = crate::rng::stream(4, "ratio");
            use rand::Rng;
            for _ in 0..1000 {
                let t = p.delta * (rng.gen_range(0.0..12.0f64)).exp();
                assert!(p.ratio_sup >= mu.value(t) / t * (1.0 - 1e-12), "{mu:?} t={t}");
            }
            // μ ≤ B below δ
            for i in 1..=1000 {
                let t = p.delta * i as f64 / 1000.0;
                assert!(mu.value(t) <= p.modulus_bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn tiny_log_bound_is_infeasible() {
        // B = 1/100 needs δ = e^{-100}
        let err = choose_lemma_params(&Modulus::LogPreset, 1.0, 100.0, 1, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::LemmaInfeasible { .. }), "{err}");
    }

    #[test]
    fn a_priori_bound_dominates_unit_coefficients() {
        let step = crate::cutoff::Smoothstep::new(1);
        let c: Vec<f64> = (0..=1).map(|j| step.sup(j)).collect();
        // |F| = 1, θ = 1/2, n = 1: 1 + 1.5·2 = 4
        assert!((lipschitz_bound(1.0, 1, 1, 0.5, &c) - (1.0 + c[1] / 0.5)).abs() < 1e-9);
    }
}
