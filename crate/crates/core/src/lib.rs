//! Diachronic word embeddings for time-stamped poetry corpora.
//!
//! The crate trains a joint skip-gram model in which every word has one
//! shared main vector plus a per-time-slot offset, then measures semantic
//! change on top of it:
//!
//! - [`corpus`]: JSON Lines stanza ingestion, first-line dedup, lemmatization,
//!   time slotting and vocabulary construction.
//! - [`trainer`]: the joint SGNS model, its training loop and model file format.
//! - [`linalg`]: cosine similarity, Jacobi eigendecomposition and PCA.
//! - [`analysis`]: adjacent-slot and distance-aggregated self-similarity,
//!   change points, frequency bands and the linearity fit.
//! - [`tropes`]: word-pair similarity trajectories and their PCA extremes.
//! - [`synthgen`]: synthetic corpora with planted ground truth.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod linalg;
pub mod synthgen;
pub mod trainer;
pub mod tropes;

pub use error::{Error, Result};
