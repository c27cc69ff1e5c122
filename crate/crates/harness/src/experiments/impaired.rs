use super::{joint_estimators, sweep_table};
use crate::config::ExperimentConfig;
use crate::output::ExperimentOutput;
use crate::HarnessError;

/// Estimation under carrier frequency and phase offsets, scored against the
/// equally impaired reference.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    sweep_table(cfg, "impaired", &joint_estimators(cfg)?, full, false)
}
