use thiserror::Error;

use crate::numkernel::NumError;
use crate::words::WordError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("tuple is not a row contraction (min eigenvalue of I - ΣT_jT_j* is {min_eigenvalue:.3e})")]
    NotContraction { min_eigenvalue: f64 },
    #[error("C is not coisometric: ‖ΣC_jC_j* - I‖ = {violation:.3e}")]
    NotCoisometricC { violation: f64 },
    #[error("E is not coisometric: block identity `{block}` violated by {violation:.3e}")]
    NotCoisometricE { block: &'static str, violation: f64 },
    #[error("γ is undefined: B* does not vanish on ker D_*,A (violation {violation:.3e})")]
    GammaUndefined { violation: f64 },
    #[error("infeasible lifting: rank D_*,A = {rank_star} exceeds rank D_C = {rank_c}")]
    Infeasible { rank_star: usize, rank_c: usize },
    #[error("vector support reaches the truncation depth {depth}")]
    OverDepth { depth: usize },
    #[error("inner space mismatch: expected dimension {expected}, got {got}")]
    InnerSpaceMismatch { expected: usize, got: usize },
    #[error("stage mismatch: {0}")]
    StageMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("depth error: {0}")]
    DepthError(String),
    #[error("characteristic function ill-defined: does not vanish on ker D_E (violation {violation:.3e})")]
    IllDefined { violation: f64 },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
