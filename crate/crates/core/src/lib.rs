//! Multilingual visual sentiment concepts: adjective-noun pairs gathered per
//! language, mapped onto a pivot language, embedded, clustered, and compared
//! by sentiment, visual co-occurrence and face statistics.
//!
//! The [`cli`] module drives the pipeline stage by stage; every other module
//! is usable on its own, as the examples show.

pub mod cli;
pub mod clustering;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pivot;
pub mod portrait;
pub mod relatedness;
pub mod seeding;
pub mod stats;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
