//! Decoder synthesis, code search over middle-edge composites, and
//! rank-counting certificates for the capacity bounds.

mod bounds;
mod composite;
mod search;

pub use bounds::{
    applicable_mode, bound_check, capacity, wrong_char_bound, BoundContext, BoundMode, BoundReport, BoundStatus,
    SplitDetail,
};
pub use composite::{composites_of, feasible_decoders, CompositeEncoding, Feasibility};
pub use search::{search, Candidate, SearchOutcome, Solution, Strategy, DEFAULT_BUDGET};

use alloc::string::String;

use thiserror::Error;

use crate::coding::CodeError;
use crate::galois::FieldError;
use crate::matrix::MatError;
use crate::network::NetworkError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("search space of {space} candidates exceeds the budget {budget}")]
    BudgetExceeded { space: String, budget: u64 },
    #[error("composite encoding does not fit the network: {0}")]
    Shape(String),
    #[error("code does not verify (first failure at `{0}`)")]
    NotVerified(String),
    #[error("bound mode {mode} does not apply to this network: {reason}")]
    ModeMismatch { mode: &'static str, reason: String },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
