//! On-disk form of a constructed function.
//!
//! One line of JSON describing the sum, a newline, then the cell terms as
//! little-endian `f64` values. Each term occupies
//! `2n + |basis| + 3` values: `lo`, `hi`, the coefficients in graded
//! multi-index order, `θ`, the weight and the stage.

use crate::artifacts::write_atomic;
use crate::error::{HarnessError, Result};
use lusin_core::multiindex::enumerate_up_to;
use lusin_core::{BoxDomain, BumpPolySum, CellTerm};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FUNCTION_FORMAT: &str = "lusin-function";
pub const FUNCTION_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionHeader {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub order: usize,
    pub domain: BoxDomain,
    /// Catalog label of the prescribed field, when there is one.
    pub field: Option<String>,
    pub stages: u32,
    pub terms: usize,
    /// `f64` values per term.
    pub record_len: usize,
}

#[derive(Clone, Debug)]
pub struct FunctionFile {
    pub header: FunctionHeader,
    pub function: BumpPolySum,
}

fn record_len(dim: usize, order: usize) -> usize {
    2 * dim + enumerate_up_to(dim, order).len() + 3
}

impl FunctionFile {
    pub fn new(function: BumpPolySum, domain: BoxDomain, field: Option<String>) -> Self {
        let header = FunctionHeader {
            format: FUNCTION_FORMAT.into(),
            version: FUNCTION_VERSION,
            dim: function.dim(),
            order: function.order(),
            domain,
            field,
            stages: function.stage_count(),
            terms: function.terms().len(),
            record_len: record_len(function.dim(), function.order()),
        };
        FunctionFile { header, function }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(&self.header).expect("header serializes");
        out.push(b'\n');
        out.reserve(8 * self.header.terms * self.header.record_len);
        for t in self.function.terms() {
            let vals = t.lo.iter().chain(&t.hi).chain(&t.coeffs);
            for v in vals.copied().chain([t.theta, t.weight, f64::from(t.stage)]) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let bad = |reason: String| HarnessError::Format {
            path: path.to_path_buf(),
            reason,
        };
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line".into()))?;
        let probe: serde_json::Value = serde_json::from_slice(&bytes[..nl]).map_err(HarnessError::json(path))?;
        if probe.get("format").and_then(|f| f.as_str()) != Some(FUNCTION_FORMAT) {
            return Err(bad(format!("not a {FUNCTION_FORMAT} file")));
        }
        let found = probe.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != FUNCTION_VERSION {
            return Err(HarnessError::Version {
                path: path.to_path_buf(),
                expected: FUNCTION_VERSION,
                found,
            });
        }
        let header: FunctionHeader = serde_json::from_value(probe).map_err(HarnessError::json(path))?;
        let (n, m) = (header.dim, header.order);
        let len = record_len(n, m);
        if header.record_len != len {
            return Err(bad(format!("record length {} for n={n}, m={m}; expected {len}", header.record_len)));
        }
        let block = &bytes[nl + 1..];
        if block.len() != 8 * len * header.terms {
            return Err(bad(format!(
                "{} bytes of terms, expected {} for {} terms",
                block.len(),
                8 * len * header.terms,
                header.terms
            )));
        }
        let vals: Vec<f64> = block
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let terms = vals
            .chunks_exact(len)
            .map(|r| {
                let stage = r[len - 1];
                if !(stage >= 0.0 && stage.fract() == 0.0 && stage <= f64::from(u32::MAX)) {
                    return Err(bad(format!("stage value {stage} is not a count")));
                }
                Ok(CellTerm {
                    lo: r[..n].to_vec(),
                    hi: r[n..2 * n].to_vec(),
                    coeffs: r[2 * n..len - 3].to_vec(),
                    theta: r[len - 3],
                    weight: r[len - 2],
                    stage: stage as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let function = BumpPolySum::new(n, m, terms)?;
        Ok(FunctionFile { header, function })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(HarnessError::io(path))?;
        FunctionFile::from_bytes(path, &bytes)
    }
}
