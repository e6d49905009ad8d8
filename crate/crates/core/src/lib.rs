//! Readability measurement for medical text: classic formulas and their
//! jargon-weighted variants, a lexicon-based complex-span tagger, span
//! evaluation, and the correlation statistics used to compare metrics with
//! human judgements.

pub mod analyzers;
pub mod corpus;
pub mod error;
pub mod features;
pub mod jargon;
pub mod metrics;
pub mod scoring;
pub mod spaneval;
pub mod stats;

pub use error::{Error, Result};
