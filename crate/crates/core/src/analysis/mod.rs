//! Static analyses over elaborated designs: FSM extraction, rarity
//! estimation, taint propagation, buffer-access and numeric-hazard
//! discovery.

pub mod buffers;
pub mod fsm;
pub mod numeric;
pub mod rarity;
pub mod taint;

use thiserror::Error;

pub use buffers::{find_buffer_accesses, AccessKind, BufferAccess};
pub use fsm::{extract_fsm, fsm_oracle, FsmModel, Transition};
pub use numeric::{find_numeric_hazards, HazardKind, NumericHazard};
pub use rarity::{estimate_rarity, find_rare_conditions, RareCondition, RareKind, RarityEstimate};
pub use taint::{propagate_tags, Tag, TagMap};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown seed signal `{0}`")]
    UnknownSeedSignal(String),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Frontend(#[from] crate::frontend::FrontendError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
