use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("derivative order {order} exceeds smoothness order {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// No admissible scale exists for the lemma parameters.
    #[error("lemma parameters infeasible: {constraint} (value {value:e}, limit {limit:e})")]
    LemmaInfeasible {
        constraint: String,
        value: f64,
        limit: f64,
    },

    /// A stage could not place a single term at any refinement level.
    #[error("stage {stage} infeasible at finest level {level}: {constraint} (needed {needed:e}, allowed {allowed:e})")]
    StageInfeasible {
        stage: usize,
        level: u32,
        constraint: String,
        needed: f64,
        allowed: f64,
    },
}
