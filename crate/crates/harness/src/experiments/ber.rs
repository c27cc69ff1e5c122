use super::{joint_estimators, sweep_table};
use crate::config::{ExperimentConfig, SignalKindConfig};
use crate::output::ExperimentOutput;
use crate::HarnessError;

/// Bit error rate of one compensated OFDM symbol per trial.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    if cfg.signals().iter().any(|&k| k != SignalKindConfig::Ofdm) {
        return Err(HarnessError::Config("ber needs an ofdm signal".into()));
    }
    sweep_table(cfg, "ber", &joint_estimators(cfg)?, full, true)
}
