//! Seeded, reproducible design mutation: operators, site enumeration,
//! and vulnerability campaigns with non-equivalence witnessing.

pub mod campaign;
pub mod operators;

use thiserror::Error;

pub use campaign::{campaign, campaign_with, CampaignSpec, OperatorDraw, ParamPool, SiteFilter};
pub use operators::{
    apply, list_sites, MutationOperator, MutationParams, MutationSite, MutationSpec, SiteKind,
    VulnInstance,
};

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("mutation site does not apply")]
    InvalidSite,
    #[error("mutant rejected: {0}")]
    MutantRejected(String),
    #[error("no applicable mutation sites")]
    NoApplicableSites,
    #[error(transparent)]
    Frontend(#[from] crate::frontend::FrontendError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

pub type Result<T> = std::result::Result<T, MutationError>;
