//! The retrieval scheme for `P >= (K - M) / 2`, generalised to any
//! `N >= 2`: query generation at the user, answers at the servers, and
//! decoding with side information.

mod answer;
mod decode;
mod exchange;
mod library;
mod params;
mod query;

use thiserror::Error;

use crate::field::FieldError;
use crate::mds::MdsError;

pub use answer::{answer_query, validate_query, Answer};
pub use decode::decode;
pub use exchange::{
    admissible_pairs, exchange_with, exhaustive_grid, run_exchange, simulate, CaseOutcome, SimulationSummary,
    Transcript,
};
pub use library::{validate_selection, Library, RequestSet, SideInfo};
pub use params::{plan_scheme, Params, Regime, SchemePlan};
pub(crate) use query::server_query_with;
pub use query::{
    build_queries, fresh_slot, generate_queries, partner, phase1_slot, referenced_slots, server_query,
    ChunkDescriptor, FreshChunkDraw, Instance, OuterCodeSpec, Query, Randomness,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid request or side information: {0}")]
    InvalidSelection(String),
    #[error("invalid library: {0}")]
    InvalidLibrary(String),
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("protocol invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Mds(#[from] MdsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
