//! Experiment harness for random multiplicative functions: Monte Carlo
//! campaigns, a verification suite, and the CSV/JSON record formats they
//! write.

// NaN-rejecting range checks read best as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaigns;
pub mod config;
pub mod error;
pub mod records;
pub mod seeds;
pub mod stats;
pub mod verify;

pub use campaigns::{run_campaign, CampaignOutput, CampaignSummary};
pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::{HarnessError, Result};
pub use records::TrialRecord;
pub use stats::SummaryStats;
