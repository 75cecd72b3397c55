//! Almost-everywhere horizontal graphs from the constructor.

use super::graph::{GraphMap, GraphSource};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::field::FieldCollection;
use crate::lusin::{multi_stage_build, BuildCertificate, BuildConfig};

/// Builds `u` with `∇u = (2y, −2x)` off a set of measure at most `ε` and
/// returns its graph map with the build certificate.
pub fn build_horizontal_graph(dom: &BoxDomain, cfg: &BuildConfig) -> Result<(GraphMap, BuildCertificate)> {
    if dom.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: dom.dim(),
        });
    }
    let field = FieldCollection::heisenberg();
    let (g, cert) = multi_stage_build(&field, dom, cfg)?;
    Ok((GraphMap::new(dom.clone(), GraphSource::Bump(g))?, cert))
}
