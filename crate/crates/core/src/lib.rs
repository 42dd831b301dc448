//! Toolkit for collecting and analysing fine-grained human judgments of
//! machine translation: campaign model, file formats, text metrics,
//! statistics, analyses and a synthetic campaign generator.

pub mod analysis;
pub mod ingest;
pub mod model;
pub mod stats;
pub mod synth;
pub mod textmetrics;

pub use model::{Campaign, Category, RatingScale, RatingVector};
