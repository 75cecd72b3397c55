//! Constructive prescription of top-order derivatives with a controlled
//! modulus of continuity, and the Heisenberg-group geometry built on it.
//!
//! The crate is organised in three layers:
//!
//! - value types shared by everything else ([`multiindex`], [`domain`],
//!   [`modulus`], [`cutoff`], [`bumpsum`], [`field`]),
//! - the constructor in [`lusin`], which turns a collection of top-order
//!   fields into a finite sum of cutoff-times-polynomial cell terms together
//!   with a [`lusin::BuildCertificate`],
//! - the first Heisenberg group in [`heisenberg`]: group law, Korányi gauge,
//!   certified Carnot–Carathéodory bounds, graph analysis and the horizontal
//!   graph pipeline.
//!
//! Sampling-based verification of a constructed function lives in [`check`].
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is on and plain iterators otherwise.

// NaN must fail validation, so checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Many loops index several per-axis arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod bumpsum;
pub mod check;
pub mod cutoff;
pub mod domain;
pub mod error;
pub mod field;
pub mod heisenberg;
pub mod lusin;
pub mod modulus;
pub mod multiindex;
pub mod par;
pub mod rng;

pub use bumpsum::{BumpPolySum, CellTerm};
pub use cutoff::CutoffProfile;
pub use domain::BoxDomain;
pub use error::{Error, Result};
pub use field::{CatalogField, FieldCollection};
pub use modulus::Modulus;
pub use multiindex::{enumerate_multiindices, MultiIndex};
