//! Multi-indices `α ∈ ℕⁿ` labelling mixed partial derivatives `D^α`.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "multi-index needs at least one axis");
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex::new(vec![0; n])
    }

    /// Unit index `e_axis`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = vec![0; n];
        e[axis] = 1;
        MultiIndex::new(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|α|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    /// `α!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `Π binom(self_i, nu_i)`.
    pub fn binomial(&self, nu: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&nu.0)
            .map(|(&a, &b)| binomial(a, b))
            .product()
    }

    /// All `ν ≤ self`, lexicographically.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &e in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=e).map(move |k| {
                        let mut p = prefix.clone();
                        p.push(k);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// `x^α` for a displacement vector.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// All `α` with `|α| = m` in `n` variables, lexicographically sorted.
pub fn enumerate_multiindices(n: usize, m: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill(&mut cur, 0, m as u32, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, axis: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if axis == n - 1 {
        cur[axis] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in 0..=remaining {
        cur[axis] = e;
        fill(cur, axis + 1, remaining - e, out);
    }
}

/// All `α` with `|α| ≤ m`, graded by order then lexicographic.
pub fn enumerate_up_to(n: usize, m: usize) -> Vec<MultiIndex> {
    (0..=m).flat_map(|k| enumerate_multiindices(n, k)).collect()
}
