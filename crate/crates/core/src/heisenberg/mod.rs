//! The first Heisenberg group: metrics, horizontal paths and graph analysis.

pub mod cc;
pub mod counterexample;
pub mod graph;
pub mod group;
pub mod holder;
pub mod path;
pub mod pipeline;

pub use cc::{arc_ansatz, cc_dist_bounds, cc_lower_bound, CcBounds, CcConfig};
pub use group::{euclidean_comparison, koranyi_dist, koranyi_parts, EuclideanComparison, HPoint};
pub use path::{segment_dt, HorizontalPath};
pub use counterexample::{circulation_counterexample, Circulation};
pub use graph::{characteristic_fraction, horizontality_residual, CharacteristicReport, GraphMap, GraphSource, Surface};
pub use holder::{graph_exponent, holder_exponent, holder_transfer_check, lift_exponent, HolderBin, HolderConfig, HolderFit, HolderTransferReport};
pub use pipeline::build_horizontal_graph;
