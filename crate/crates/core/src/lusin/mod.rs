//! The constructor: from prescribed top-order fields to a [`BumpPolySum`]
//! whose top derivatives match them on a large certified set.
//!
//! [`BumpPolySum`]: crate::bumpsum::BumpPolySum

mod build;
mod certificate;
mod cover;
mod params;
mod stage;
mod truncate;

pub use build::{multi_stage_build, BuildConfig};
pub use certificate::{BuildCertificate, CoveredBox, StageRecord};
pub use params::{choose_lemma_params, lipschitz_bound, LemmaParams, DELTA_FLOOR};
pub use stage::{single_stage_build, StageInput, StageOutcome};
pub use truncate::{keep_finite, lusin_truncate, Truncated, TruncationSummary};

use crate::bumpsum::BumpPolySum;
use crate::check::{tail_pinch_check, CheckReport};

/// Sample `x ∈ K_k`, `|h| ∈ [1e−4, 1e−1]` and compare the tail
/// `Σ_{j>k} |D^γ g_j(x+h)|` against `σ|h|²` for `|γ| = m−1`.
pub fn tail_pinch(g: &BumpPolySum, cert: &BuildCertificate, samples: usize, seed: u64) -> CheckReport {
    tail_pinch_check(g, &cert.stage_boxes(), cert.sigma, samples, seed)
}
