//! Group communication analysis for multi-party chat.
//!
//! The crate turns chat transcripts into six sociocognitive measures per
//! participant (participation, social impact, overall responsivity,
//! internal cohesion, newness and communication density), clusters those
//! profiles into interaction roles, validates the clustering, and derives
//! group-level composition and topic-relevance descriptors.
//!
//! Modules follow the data flow:
//!
//! - [`corpus`]: transcript and background-document ingestion
//! - [`semspace`]: latent semantic space (weighting + truncated SVD)
//! - [`measures`]: per-participant GCA measures
//! - [`topics`]: LDA topic model and topic relevance
//! - [`roles`]: normalization, k-means, role labels
//! - [`validation`]: cluster tendency, quality, stability and agreement
//! - [`composition`]: group-level role composition and learning gains
//! - [`synth`]: deterministic synthetic fixtures
//! - [`tables`]: CSV files exchanged between stages
//! - [`pipeline`]: end-to-end orchestration with manifests

pub mod composition;
pub mod corpus;
mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod pipeline;
pub mod roles;
pub mod semspace;
pub mod synth;
pub mod tables;
pub mod topics;
pub mod validation;

pub use error::{GcaError, Result};

/// Crate version stamped into every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
