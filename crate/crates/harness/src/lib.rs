//! Monte-Carlo experiment harness for joint sampling frequency and time
//! offset estimation.

pub mod config;
pub mod experiments;
pub mod output;
pub mod scenario;
pub mod seeds;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::run;
pub use output::{ExperimentOutput, Table};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("cell: {0}")]
    Cell(String),
    #[error("io: {0}")]
    Io(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
