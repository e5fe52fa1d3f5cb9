//! Contestability assessment toolkit.

pub mod cli;
pub mod doc;
pub mod error;
pub mod fixtures;
pub mod formal;
pub mod http;
pub mod questionnaire;
pub mod report;
pub mod scoring;
pub mod store;
pub mod taxonomy;
pub mod whatif;

pub use error::{Error, Result};
pub use scoring::{compute_cas, CasResult, PropertyId, RawScoreVector, WeightConfig};
