use farrow_sync::estimation::Method;

use super::{joint_estimators, sweep_table};
use crate::config::ExperimentConfig;
use crate::output::ExperimentOutput;
use crate::scenario::Estimator;
use crate::HarnessError;

/// Joint estimation next to the delta-only ablation.
pub fn run_example1(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    let mut ests = joint_estimators(cfg)?;
    for method in cfg.estimator.parsed_methods()? {
        if method != Method::Simplified {
            ests.push(Estimator::SfoOnly {
                method,
                iterations: cfg.sweep.sfo_only_iterations,
            });
        }
    }
    sweep_table(cfg, "example1", &ests, full, false)
}

pub fn run_table3(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    sweep_table(cfg, "table3", &joint_estimators(cfg)?, full, false)
}
