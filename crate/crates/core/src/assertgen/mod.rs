//! Security assertion generation for the seven vulnerability classes,
//! configuration handling, and source instrumentation.

pub mod candidate;
pub mod config;
pub mod generators;
pub mod instrument;

use thiserror::Error;

pub use candidate::{AssertionCandidate, CandidateKind, CandidateLocation, ShadowSpec, VulnClass};
pub use config::{parse_config, Caps, ConfigError, SecurityConfig};
pub use generators::{
    gen_buffer, gen_illegal_transitions, gen_implants, gen_leakage, gen_numeric,
    gen_privilege, gen_resource, generate_all, sidecar_report,
};
pub use instrument::instrument;

#[derive(Debug, Error)]
pub enum AssertgenError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Frontend(#[from] crate::frontend::FrontendError),
    #[error("candidate `{id}` is stale: {detail}")]
    SpanStale { id: String, detail: String },
}

pub type Result<T> = std::result::Result<T, AssertgenError>;
