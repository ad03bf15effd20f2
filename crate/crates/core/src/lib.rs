//! Few-shot semantic parsing evaluation harness.
//!
//! The pipeline for one query is:
//!
//! ```text
//! corpus ──► primitives ──► sampler ──► prompt ──► client ──► scorer ──► metrics
//! ```
//!
//! [`runner`] drives that pipeline over the four exemplar/query split
//! settings (Test→Test, Train→Train, Test→Train, Train→Test), persists
//! resumable per-example records, and [`runner::report`] turns records into
//! gap reports and plot-data CSVs.

pub mod client;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod primitives;
pub mod prompt;
pub mod runner;
pub mod sampler;
pub mod scorer;
mod seed;

pub use client::{CompletionModel, CompletionParams, ModelEndpoint};
pub use corpus::{DatasetDescriptor, DatasetId, Example, Split};
pub use error::{Error, Result};
pub use metrics::{EvalSetting, GapReport, RelativeGap};
pub use primitives::{Origin, Primitive, PrimitiveInventory, PrimitiveSet};
pub use prompt::PromptTemplate;
pub use runner::{RunConfig, RunRecord};
pub use sampler::{CandidatePool, ShotSelection};
pub use seed::derive_rng;
