//! Collections `f = (f_α)_{|α|=m}` of prescribed top-order derivatives.

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::multiindex::{binomial, enumerate_multiindices, MultiIndex};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Closed-form fields known by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CatalogField {
    /// Every component zero.
    Zero { dim: usize, order: usize },
    /// `∂_x ↦ 2y`, `∂_y ↦ −2x`: the horizontality system for graphs in ℍ₁.
    Heisenberg,
    /// Constant values, one per multi-index in lexicographic order.
    Constant { dim: usize, order: usize, values: Vec<f64> },
    /// `∂_x ↦ 1/x`, `∂_y ↦ 0`.
    InvX,
}

impl CatalogField {
    pub fn dim(&self) -> usize {
        match self {
            CatalogField::Zero { dim, .. } | CatalogField::Constant { dim, .. } => *dim,
            CatalogField::Heisenberg | CatalogField::InvX => 2,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            CatalogField::Zero { order, .. } | CatalogField::Constant { order, .. } => *order,
            CatalogField::Heisenberg | CatalogField::InvX => 1,
        }
    }

    fn eval(&self, k: usize, x: &[f64]) -> f64 {
        match self {
            CatalogField::Zero { .. } => 0.0,
            // lexicographic order: k = 0 is (0,1) = ∂_y, k = 1 is (1,0) = ∂_x
            CatalogField::Heisenberg => {
                if k == 1 {
                    2.0 * x[1]
                } else {
                    -2.0 * x[0]
                }
            }
            CatalogField::Constant { values, .. } => values[k],
            CatalogField::InvX => {
                if k == 1 {
                    1.0 / x[0]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CatalogField::Zero { dim, order } => format!("zero:{dim}:{order}"),
            CatalogField::Heisenberg => "heisenberg".into(),
            CatalogField::InvX => "inv-x".into(),
            CatalogField::Constant { dim, order, values } => {
                let v: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                format!("constant:{dim}:{order}:{}", v.join(","))
            }
        }
    }
}

impl FromStr for CatalogField {
    type Err = Error;

    /// `zero[:n:m]`, `heisenberg`, `inv-x`, `quadratic-x`, `constant:n:m:v,…`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| -> Result<usize> {
            p.parse().map_err(|_| Error::InvalidArgument(format!("bad integer '{p}' in field '{s}'")))
        };
        match parts.as_slice() {
            ["zero"] => Ok(CatalogField::Zero { dim: 2, order: 1 }),
            ["zero", n, m] => Ok(CatalogField::Zero {
                dim: num(n)?,
                order: num(m)?,
            }),
            ["heisenberg"] => Ok(CatalogField::Heisenberg),
            ["inv-x"] => Ok(CatalogField::InvX),
            ["quadratic-x"] => Ok(CatalogField::Constant {
                dim: 2,
                order: 2,
                values: vec![0.0, 0.0, 2.0],
            }),
            ["constant", n, m, vals] => {
                let values = vals
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidArgument(format!("bad values in field '{s}'")))?;
                Ok(CatalogField::Constant {
                    dim: num(n)?,
                    order: num(m)?,
                    values,
                })
            }
            _ => Err(Error::InvalidArgument(format!("unknown field '{s}'"))),
        }
    }
}

/// Cell-center samples on a grid, one array per multi-index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldSource {
    Catalog(CatalogField),
    Sampled(SampledField),
}

/// Zeroing mask produced by the Lusin truncation step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub grid: Grid,
    pub keep: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldCollection {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    source: FieldSource,
    truncation: Option<Truncation>,
}

impl FieldCollection {
    pub fn catalog(field: CatalogField) -> Result<Self> {
        let (n, m) = (field.dim(), field.order());
        if n == 0 {
            return Err(Error::InvalidArgument("field dimension must be ≥ 1".into()));
        }
        let indices = enumerate_multiindices(n, m);
        if let CatalogField::Constant { values, .. } = &field {
            if values.len() != indices.len() {
                return Err(Error::InvalidArgument(format!(
                    "constant field needs {} values for n={n}, m={m}, got {}",
                    indices.len(),
                    values.len()
                )));
            }
        }
        Ok(FieldCollection {
            dim: n,
            order: m,
            indices,
            source: FieldSource::Catalog(field),
            truncation: None,
        })
    }

    pub fn heisenberg() -> Self {
        FieldCollection::catalog(CatalogField::Heisenberg).expect("catalog field is valid")
    }

    pub fn sampled(order: usize, grid: Grid, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = grid.dim();
        let indices = enumerate_multiindices(n, order);
        let expected = binomial((n + order - 1) as u32, order as u32) as usize;
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "sampled field needs {expected} components, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| v.len() != grid.cell_count()) {
            return Err(Error::InvalidArgument(format!(
                "component {bad}: {} samples for {} grid cells",
                values[bad].len(),
                grid.cell_count()
            )));
        }
        Ok(FieldCollection {
            dim: n,
            order,
            indices,
            source: FieldSource::Sampled(SampledField { grid, values }),
            truncation: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn source(&self) -> &FieldSource {
        &self.source
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = Some(truncation);
        self
    }

    /// Whether the truncation keeps the point (always true when untruncated).
    pub fn kept(&self, x: &[f64]) -> bool {
        match &self.truncation {
            None => true,
            Some(t) => t.grid.locate(x).map(|c| t.keep[c]).unwrap_or(false),
        }
    }

    /// `f_{α_k}(x)` for the k-th multi-index (truncation applied).
    pub fn eval(&self, k: usize, x: &[f64]) -> f64 {
        if !self.kept(x) {
            return 0.0;
        }
        self.eval_raw(k, x)
    }

    /// `f_{α_k}(x)` ignoring any truncation.
    pub fn eval_raw(&self, k: usize, x: &[f64]) -> f64 {
        match &self.source {
            FieldSource::Catalog(c) => c.eval(k, x),
            FieldSource::Sampled(s) => s.grid.locate(x).map(|c| s.values[k][c]).unwrap_or(0.0),
        }
    }

    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        (0..self.indices.len()).map(|k| self.eval(k, x)).collect()
    }

    /// `max_α |f_α(x)|`.
    pub fn max_abs(&self, x: &[f64]) -> f64 {
        (0..self.indices.len()).map(|k| self.eval(k, x).abs()).fold(0.0, f64::max)
    }

    pub fn label(&self) -> String {
        match &self.source {
            FieldSource::Catalog(c) => c.label(),
            FieldSource::Sampled(_) => "sampled".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoxDomain;

    #[test]
    fn heisenberg_components_follow_index_order() {
        let f = FieldCollection::heisenberg();
        assert_eq!(f.indices()[0], MultiIndex::new(vec![0, 1]));
        let v = f.eval_all(&[0.25, 0.5]);
        assert_eq!(v, vec![-0.5, 1.0]);
    }

    #[test]
    fn component_count_is_checked() {
        let bad = CatalogField::Constant {
            dim: 2,
            order: 2,
            values: vec![1.0, 2.0],
        };
        assert!(FieldCollection::catalog(bad).is_err());
        let grid = BoxDomain::unit(2).grid(4);
        assert!(FieldCollection::sampled(1, grid.clone(), vec![vec![0.0; 16]]).is_err());
        assert!(FieldCollection::sampled(1, grid.clone(), vec![vec![0.0; 16], vec![0.0; 15]]).is_err());
        assert!(FieldCollection::sampled(1, grid, vec![vec![0.0; 16], vec![1.0; 16]]).is_ok());
    }

    #[test]
    fn parses_catalog_names() {
        assert_eq!("heisenberg".parse::<CatalogField>().unwrap(), CatalogField::Heisenberg);
        assert_eq!(
            "quadratic-x".parse::<CatalogField>().unwrap().label(),
            "constant:2:2:0,0,2"
        );
        let z: CatalogField = "zero:3:2".parse().unwrap();
        assert_eq!((z.dim(), z.order()), (3, 2));
        assert!("nope".parse::<CatalogField>().is_err());
    }
}
