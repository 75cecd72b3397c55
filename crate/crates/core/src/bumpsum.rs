//! Finite sums of cutoff-times-polynomial cell terms with exact derivatives.

use crate::cutoff::{axis_bound, axis_derivative, Smoothstep};
use crate::error::{Error, Result};
use crate::multiindex::{enumerate_up_to, MultiIndex};

/// One term `weight · ψ_Q(x) · Σ_α a_α (x − c_Q)^α` supported on the closed cell `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellTerm {
    pub stage: u32,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Local coefficients in graded multi-index order (all `|α| ≤ m`).
    pub coeffs: Vec<f64>,
    pub theta: f64,
    pub weight: f64,
}

impl CellTerm {
    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&xi, (&l, &h))| xi >= l && xi <= h)
    }
}

#[derive(Clone, Debug, Default)]
struct SpatialIndex {
    lower: Vec<f64>,
    width: Vec<f64>,
    res: Vec<usize>,
    offsets: Vec<u32>,
    ids: Vec<u32>,
}

impl SpatialIndex {
    fn build(n: usize, terms: &[CellTerm]) -> Self {
        if terms.is_empty() {
            return SpatialIndex::default();
        }
        let mut lower = vec![f64::INFINITY; n];
        let mut upper = vec![f64::NEG_INFINITY; n];
        for t in terms {
            for a in 0..n {
                lower[a] = lower[a].min(t.lo[a]);
                upper[a] = upper[a].max(t.hi[a]);
            }
        }
        let per_axis = ((terms.len() as f64).powf(1.0 / n as f64).ceil() as usize).clamp(1, 1 << 12);
        let res = vec![per_axis; n];
        let width: Vec<f64> = (0..n)
            .map(|a| ((upper[a] - lower[a]) / per_axis as f64).max(f64::MIN_POSITIVE))
            .collect();
        let buckets: usize = res.iter().product();
        let span = |t: &CellTerm, a: usize| {
            let i0 = ((t.lo[a] - lower[a]) / width[a]).floor().max(0.0) as usize;
            let i1 = ((t.hi[a] - lower[a]) / width[a]).floor().max(0.0) as usize;
            (i0.min(res[a] - 1), i1.min(res[a] - 1))
        };
        let mut counts = vec![0u32; buckets + 1];
        let visit = |t: &CellTerm, f: &mut dyn FnMut(usize)| {
            let ranges: Vec<(usize, usize)> = (0..n).map(|a| span(t, a)).collect();
            let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
            loop {
                let flat = idx.iter().zip(&res).fold(0, |acc, (&i, &r)| acc * r + i);
                f(flat);
                let mut a = n;
                loop {
                    if a == 0 {
                        return;
                    }
                    a -= 1;
                    if idx[a] < ranges[a].1 {
                        idx[a] += 1;
                        break;
                    }
                    idx[a] = ranges[a].0;
                }
            }
        };
        for t in terms {
            visit(t, &mut |b| counts[b + 1] += 1);
        }
        for b in 0..buckets {
            counts[b + 1] += counts[b];
        }
        let mut fill = counts.clone();
        let mut ids = vec![0u32; counts[buckets] as usize];
        for (k, t) in terms.iter().enumerate() {
            visit(t, &mut |b| {
                ids[fill[b] as usize] = k as u32;
                fill[b] += 1;
            });
        }
        SpatialIndex {
            lower,
            width,
            res,
            offsets: counts,
            ids,
        }
    }

    fn candidates(&self, x: &[f64]) -> &[u32] {
        if self.res.is_empty() {
            return &[];
        }
        let mut flat = 0;
        for a in 0..x.len() {
            let k = ((x[a] - self.lower[a]) / self.width[a]).floor();
            if !(k >= 0.0) || k as usize > self.res[a] {
                return &[];
            }
            flat = flat * self.res[a] + (k as usize).min(self.res[a] - 1);
        }
        &self.ids[self.offsets[flat] as usize..self.offsets[flat + 1] as usize]
    }
}

/// `g = Σ_terms weight · ψ_Q · P_Q`, evaluable with exact derivatives up to order `m`.
#[derive(Clone, Debug)]
pub struct BumpPolySum {
    dim: usize,
    order: usize,
    terms: Vec<CellTerm>,
    basis: Vec<MultiIndex>,
    step: Smoothstep,
    index: SpatialIndex,
}

impl BumpPolySum {
    pub fn new(dim: usize, order: usize, terms: Vec<CellTerm>) -> Result<Self> {
        let basis = enumerate_up_to(dim, order);
        for (k, t) in terms.iter().enumerate() {
            if t.lo.len() != dim || t.hi.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: t.lo.len(),
                });
            }
            if t.coeffs.len() != basis.len() {
                return Err(Error::InvalidArgument(format!(
                    "term {k}: {} coefficients, expected {}",
                    t.coeffs.len(),
                    basis.len()
                )));
            }
            if !(t.theta > 0.0 && t.theta < 1.0) || t.lo.iter().zip(&t.hi).any(|(l, h)| !(l < h)) {
                return Err(Error::InvalidArgument(format!("term {k}: degenerate cell or θ")));
            }
        }
        let index = SpatialIndex::build(dim, &terms);
        Ok(BumpPolySum {
            dim,
            order,
            terms,
            basis,
            step: Smoothstep::new(order),
            index,
        })
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        BumpPolySum::new(dim, order, Vec::new()).expect("empty sum is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[CellTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<CellTerm> {
        self.terms
    }

    /// Multi-indices labelling the coefficient slots of every term.
    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn stage_count(&self) -> u32 {
        self.terms.iter().map(|t| t.stage).max().map_or(0, |s| s + 1)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.deriv_unchecked(x, &MultiIndex::zero(self.dim))
    }

    /// `D^γ g(x)`.
    pub fn deriv(&self, x: &[f64], gamma: &MultiIndex) -> Result<f64> {
        if gamma.order() > self.order {
            return Err(Error::DerivativeOrder {
                order: gamma.order(),
                max: self.order,
            });
        }
        if x.len() != self.dim || gamma.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.deriv_unchecked(x, gamma))
    }

    pub(crate) fn deriv_unchecked(&self, x: &[f64], gamma: &MultiIndex) -> f64 {
        self.deriv_filtered(x, gamma, |_| true)
    }

    /// `D^γ` of the sub-sum of terms accepted by `keep`.
    pub fn deriv_filtered(&self, x: &[f64], gamma: &MultiIndex, keep: impl Fn(&CellTerm) -> bool) -> f64 {
        let lower = gamma.lower_set();
        let mut sum = 0.0;
        for &k in self.index.candidates(x) {
            let t = &self.terms[k as usize];
            if keep(t) && t.contains(x) {
                sum += self.term_deriv_with(t, x, gamma, &lower);
            }
        }
        sum
    }

    /// Per-stage values of `D^γ g_j(x)`, indexed by stage.
    pub fn deriv_by_stage(&self, x: &[f64], gamma: &MultiIndex) -> Vec<f64> {
        let lower = gamma.lower_set();
        let mut out = vec![0.0; self.stage_count() as usize];
        for &k in self.index.candidates(x) {
            let t = &self.terms[k as usize];
            if t.contains(x) {
                out[t.stage as usize] += self.term_deriv_with(t, x, gamma, &lower);
            }
        }
        out
    }

    /// `D^γ` of a single term.
    pub fn term_deriv(&self, term: &CellTerm, x: &[f64], gamma: &MultiIndex) -> f64 {
        if !term.contains(x) {
            return 0.0;
        }
        self.term_deriv_with(term, x, gamma, &gamma.lower_set())
    }

    fn term_deriv_with(&self, t: &CellTerm, x: &[f64], gamma: &MultiIndex, lower: &[MultiIndex]) -> f64 {
        let n = self.dim;
        // η_a^{(j)}(x_a) for j ≤ γ_a
        let mut eta: Vec<[f64; 8]> = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = [0.0; 8];
            for (j, slot) in row.iter_mut().enumerate().take(gamma.get(a) as usize + 1) {
                *slot = axis_derivative(&self.step, t.theta, t.lo[a], t.hi[a], x[a], j);
            }
            eta.push(row);
        }
        let center = t.center();
        let disp: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
        let mut sum = 0.0;
        for nu in lower {
            let cut: f64 = (0..n).map(|a| eta[a][nu.get(a) as usize]).product();
            if cut == 0.0 {
                continue;
            }
            let rho = gamma.checked_sub(nu).expect("ν ≤ γ");
            sum += gamma.binomial(nu) * cut * self.poly_deriv(&t.coeffs, &disp, &rho);
        }
        t.weight * sum
    }

    /// `D^ρ P(x)` for `P(x) = Σ a_α (x−c)^α`, given `disp = x − c`.
    fn poly_deriv(&self, coeffs: &[f64], disp: &[f64], rho: &MultiIndex) -> f64 {
        let mut s = 0.0;
        for (alpha, &a) in self.basis.iter().zip(coeffs) {
            if a == 0.0 {
                continue;
            }
            if let Some(rest) = alpha.checked_sub(rho) {
                s += a * alpha.factorial() / rest.factorial() * rest.monomial(disp);
            }
        }
        s
    }

    /// Rigorous per-order bounds `max_{|β|=j} sup |D^β term|`, `j = 0..=m`.
    pub fn term_bounds(&self, t: &CellTerm) -> Vec<f64> {
        term_bounds(&self.step, &self.basis, self.dim, self.order, t)
    }

    pub fn smoothstep(&self) -> &Smoothstep {
        &self.step
    }
}

/// See [`BumpPolySum::term_bounds`]; usable before a sum is assembled.
pub fn term_bounds(step: &Smoothstep, basis: &[MultiIndex], n: usize, m: usize, t: &CellTerm) -> Vec<f64> {
    let sides: Vec<f64> = (0..n).map(|a| t.hi[a] - t.lo[a]).collect();
    let poly_bound = |rho: &MultiIndex| -> f64 {
        basis
            .iter()
            .zip(&t.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .filter_map(|(alpha, &c)| {
                alpha.checked_sub(rho).map(|rest| {
                    let reach: f64 = (0..n).map(|a| (0.5 * sides[a]).powi(rest.get(a) as i32)).product();
                    c.abs() * alpha.factorial() / rest.factorial() * reach
                })
            })
            .sum()
    };
    (0..=m)
        .map(|j| {
            crate::multiindex::enumerate_multiindices(n, j)
                .iter()
                .map(|beta| {
                    beta.lower_set()
                        .iter()
                        .map(|nu| {
                            let cut: f64 = (0..n)
                                .map(|a| axis_bound(step, t.theta, nu.get(a) as usize, sides[a]))
                                .product();
                            let rho = beta.checked_sub(nu).unwrap();
                            beta.binomial(nu) * cut * poly_bound(&rho)
                        })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
                * t.weight.abs()
        })
        .collect()
}
