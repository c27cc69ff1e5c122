use farrow_sync::metrics::{campaign_stats, CampaignStats, TrialResult};
use farrow_sync::OffsetParams;
use rayon::prelude::*;

use crate::output::{f, u};
use crate::scenario::{Estimator, Scenario};
use crate::seeds::cell_seed;

/// Trials of one estimator at one sweep point.
#[derive(Debug, Clone, Default)]
pub struct CellOutcome {
    pub results: Vec<TrialResult>,
    pub failures: usize,
    pub first_error: Option<String>,
}

impl CellOutcome {
    pub fn stats(&self, truth: &OffsetParams) -> Option<CampaignStats> {
        match self.results.len() {
            0 => None,
            1 => {
                // a single trial has zero spread
                let mut two = self.results.clone();
                two.push(self.results[0].clone());
                campaign_stats(&two, truth).ok().map(|mut s| {
                    s.n_trials = 1;
                    s
                })
            }
            _ => campaign_stats(&self.results, truth).ok(),
        }
    }

    pub fn mean_ber(&self) -> Option<f64> {
        let b: Vec<f64> = self.results.iter().filter_map(|r| r.ber).collect();
        (!b.is_empty()).then(|| b.iter().sum::<f64>() / b.len() as f64)
    }

    pub fn d_exceeded(&self) -> usize {
        self.results.iter().filter(|r| r.d_exceeded).count()
    }

    /// Values for [`STATS_COLUMNS`].
    pub fn stats_cells(&self, truth: &OffsetParams) -> Vec<String> {
        let mut row = vec![u(self.results.len() + self.failures), u(self.failures)];
        match self.stats(truth) {
            Some(s) => row.extend(
                [
                    s.mean_nmse,
                    s.std_nmse,
                    s.sigma_delta_ppm,
                    s.sigma_epsilon,
                    s.mean_delta_ppm,
                    s.std_delta_ppm,
                    s.mean_epsilon,
                    s.std_epsilon,
                ]
                .map(f),
            ),
            None => row.extend(std::iter::repeat_n(String::new(), 8)),
        }
        row.push(self.mean_ber().map(f).unwrap_or_default());
        row.push(u(self.d_exceeded()));
        row.push(self.first_error.clone().unwrap_or_default());
        row
    }
}

pub const STATS_COLUMNS: [&str; 13] = [
    "trials",
    "failures",
    "mean_nmse",
    "std_nmse",
    "sigma_delta_ppm",
    "sigma_epsilon",
    "mean_delta_ppm",
    "std_delta_ppm",
    "mean_epsilon",
    "std_epsilon",
    "mean_ber",
    "d_exceeded_trials",
    "error",
];

/// Runs `trials` observations of `scenario`, scoring every estimator on the
/// same observation. Trials run in parallel; results keep trial order.
pub fn run_campaign(
    scenario: &Scenario<'_>,
    base_seed: u64,
    coords: &[u64],
    trials: usize,
    estimators: &[Estimator],
) -> Vec<CellOutcome> {
    let per_trial: Vec<Vec<Result<TrialResult, String>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = cell_seed(base_seed, coords, t);
            match scenario.observe(seed) {
                Ok(obs) => estimators
                    .iter()
                    .map(|&e| scenario.evaluate(&obs, e, seed).map_err(|e| e.to_string()))
                    .collect(),
                Err(e) => vec![Err(e.to_string()); estimators.len()],
            }
        })
        .collect();
    let mut cells = vec![CellOutcome::default(); estimators.len()];
    for trial in per_trial {
        for (cell, r) in cells.iter_mut().zip(trial) {
            match r {
                Ok(r) => cell.results.push(r),
                Err(e) => {
                    cell.failures += 1;
                    cell.first_error.get_or_insert(e);
                }
            }
        }
    }
    cells
}
