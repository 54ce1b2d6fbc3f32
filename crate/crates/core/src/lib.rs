//! Toolkit for cross-lingual aspect sentiment triplet extraction with
//! code-switching.
//!
//! The crate covers the data side of the pipeline: loading structured
//! sentiment corpora, building boundary-aware code-switched training sets
//! and alignment examples, serializing triplets for sequence-to-sequence
//! models, test-time augmentation with candidate voting, and the weighted
//! overlap metrics. Neural inference is reached through the [`backends`]
//! traits.

pub mod align_data;
pub mod artifact;
pub mod backends;
pub mod corpus;
pub mod csw;
mod error;
pub mod lexicon;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod text;
pub mod triplet_format;
pub mod tta;

pub use error::{Error, Result};
