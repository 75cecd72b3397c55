//! Tensor-product cutoff built from a one-dimensional Hermite smoothstep.
//!
//! Along each axis the profile is `1` on the inner `(1−θ)`-scaled part of the
//! cell, `0` outside the cell, and `1 − S(u)` on the transition, where `S` is
//! the degree `2m+1` smoothstep with `S(0)=0`, `S(1)=1` and vanishing
//! derivatives of orders `1..=m` at both ends. The result is `C^m`.

use crate::error::{Error, Result};
use crate::multiindex::{binomial, MultiIndex};

/// The smoothstep polynomial of order `m` and its derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothstep {
    order: usize,
    /// `derivs[j]` holds monomial coefficients of `S^{(j)}`, `j = 0..=m+1`.
    derivs: Vec<Vec<f64>>,
    /// `sup_{[0,1]} |S^{(j)}|`, rigorous upper bounds.
    sup: Vec<f64>,
}

impl Smoothstep {
    pub fn new(order: usize) -> Self {
        let m = order as u32;
        // S(u) = u^{m+1} Σ_k binom(m+k, k) (1−u)^k
        let mut coeffs = vec![0.0; 2 * order + 2];
        for k in 0..=m {
            let c = binomial(m + k, k);
            for i in 0..=k {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                coeffs[(m + 1 + i) as usize] += c * binomial(k, i) * sign;
            }
        }
        let mut derivs = vec![coeffs];
        for _ in 0..=order {
            let last = derivs.last().unwrap();
            let d: Vec<f64> = last.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect();
            derivs.push(if d.is_empty() { vec![0.0] } else { d });
        }
        let mut s = Smoothstep {
            order,
            derivs,
            sup: Vec::new(),
        };
        s.sup = (0..=order).map(|j| s.sup_bound(j)).collect();
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `S^{(j)}(u)`, `j ≤ m + 1`.
    pub fn eval(&self, j: usize, u: f64) -> f64 {
        self.derivs[j].iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// `sup_{[0,1]} |S^{(j)}|` for `j ≤ m`.
    pub fn sup(&self, j: usize) -> f64 {
        self.sup[j]
    }

    fn sup_bound(&self, j: usize) -> f64 {
        const N: usize = 1 << 14;
        let lip: f64 = self.derivs[j + 1].iter().map(|c| c.abs()).sum();
        let sampled = (0..=N)
            .map(|i| self.eval(j, i as f64 / N as f64).abs())
            .fold(0.0, f64::max);
        sampled + 0.5 / N as f64 * lip
    }
}

/// Cutoff of smoothness order `m` with plateau fraction `1 − θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffProfile {
    theta: f64,
    step: Smoothstep,
}

impl CutoffProfile {
    pub fn new(order: usize, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("plateau fraction θ={theta} not in (0,1)")));
        }
        Ok(CutoffProfile {
            theta,
            step: Smoothstep::new(order),
        })
    }

    pub fn order(&self) -> usize {
        self.step.order
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn smoothstep(&self) -> &Smoothstep {
        &self.step
    }

    /// Inner plateau box of a cell.
    pub fn plateau(&self, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        plateau_box(self.theta, lo, hi)
    }

    /// Value or exact partial derivative of the cutoff of `cell` at `x`.
    pub fn eval(&self, lo: &[f64], hi: &[f64], x: &[f64], deriv: &MultiIndex) -> Result<f64> {
        if deriv.order() > self.order() {
            return Err(Error::DerivativeOrder {
                order: deriv.order(),
                max: self.order(),
            });
        }
        if deriv.dim() != x.len() || lo.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: deriv.dim(),
            });
        }
        Ok((0..x.len())
            .map(|a| axis_derivative(&self.step, self.theta, lo[a], hi[a], x[a], deriv.get(a) as usize))
            .product())
    }

    /// Upper bound for `sup |∂^j η|` along an axis whose cell side is `side`.
    pub fn axis_bound(&self, j: usize, side: f64) -> f64 {
        axis_bound(&self.step, self.theta, j, side)
    }
}

pub fn plateau_box(theta: f64, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut plo = Vec::with_capacity(lo.len());
    let mut phi = Vec::with_capacity(lo.len());
    for a in 0..lo.len() {
        let c = 0.5 * (lo[a] + hi[a]);
        let hw = 0.5 * (hi[a] - lo[a]) * (1.0 - theta);
        plo.push(c - hw);
        phi.push(c + hw);
    }
    (plo, phi)
}

/// `sup |∂^j η|` bound for one axis.
pub fn axis_bound(step: &Smoothstep, theta: f64, j: usize, side: f64) -> f64 {
    if j == 0 {
        1.0
    } else {
        step.sup(j) * (2.0 / (theta * side)).powi(j as i32)
    }
}

/// `∂^j η(x)` for the one-dimensional profile on `[lo, hi]`.
#[inline]
pub fn axis_derivative(step: &Smoothstep, theta: f64, lo: f64, hi: f64, x: f64, j: usize) -> f64 {
    let c = 0.5 * (lo + hi);
    let hw = 0.5 * (hi - lo);
    let d = x - c;
    let r = d.abs() / hw;
    if r >= 1.0 {
        return 0.0;
    }
    if r <= 1.0 - theta {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let u = (r - (1.0 - theta)) / theta;
    if j == 0 {
        return 1.0 - step.eval(0, u);
    }
    let scale = d.signum() / (theta * hw);
    -step.eval(j, u) * scale.powi(j as i32)
}
