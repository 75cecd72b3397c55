//! File formats, reports and the command-line driver around `lusin-core`.

pub mod artifacts;
pub mod cli;
pub mod error;
pub mod function_file;

pub use artifacts::{CertifyReport, RunManifest};
pub use error::{HarnessError, Result};
pub use function_file::FunctionFile;
