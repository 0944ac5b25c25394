//! MSR codes on `X ⊗ S^t Y` and `X ⊗ Λ^t W`.

mod axioms;
mod msr;
mod params;
mod stars;

use thiserror::Error;

use crate::field::FieldError;
use crate::linalg::LinalgError;
use crate::tensor::TensorError;

pub use axioms::{check_axioms, verify_axioms, Axiom, AxiomReport, AxiomViolation};
pub use msr::{
    DownloadPlan, FileTensor, HelpMessage, MsrCode, NodeContent, RegeneratingCode, RepairPlan,
};
pub use params::{derive_params, shortening_depth_for, CodeParams, Flavor};
pub use stars::{fixture_956, rs_stars_t2, StarFamily, FIXTURE_956_EXPONENTS, FIXTURE_956_X_PATTERN, FIXTURE_956_Y_PATTERN};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(
        "t = d/(d-k+1) is not an integer for (n, k, d) = ({n}, {k}, {d}); shorten a ({}, {}, {}) code instead",
        shorten_from.0, shorten_from.1, shorten_from.2
    )]
    NonIntegralT { n: usize, k: usize, d: usize, shorten_from: (usize, usize, usize) },
    #[error("field too small: need {needed} distinct values, only {available} available")]
    FieldTooSmall { needed: usize, available: usize },
    #[error("{what} has length {got}, expected {expected}")]
    Length { what: &'static str, got: usize, expected: usize },
    #[error("node index {index} out of range for n = {n}")]
    NodeIndex { index: usize, n: usize },
    #[error("axiom violation: {0}")]
    Axiom(AxiomViolation),
    #[error("insufficient nodes: have {have}, need {need}")]
    InsufficientNodes { have: usize, need: usize },
    #[error("{0}")]
    Usage(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
