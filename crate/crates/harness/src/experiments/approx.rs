use std::f64::consts::PI;

use farrow_sync::design::{design_bank, measure_error, DesignSpec};
use farrow_sync::OffsetParams;
use rayon::prelude::*;

use super::{joint_estimators, run_campaign, scenario, STATS_COLUMNS};
use crate::config::ExperimentConfig;
use crate::output::{f, u, ExperimentOutput, Table};
use crate::seeds::coord;
use crate::HarnessError;

/// Estimation accuracy for banks of decreasing approximation error. Every bank
/// sees the same observations.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    let ests = joint_estimators(cfg)?;
    let trials = cfg.n_trials(full);
    let params = OffsetParams::new(cfg.sweep.delta_ppm * 1e-6, cfg.sweep.epsilon);
    let kind = cfg.signal.kind;
    let omega_c = cfg.bank.omega_c * PI;
    let banks = cfg
        .sweep
        .banks
        .par_iter()
        .map(|row| {
            let spec = DesignSpec::new(row[1] as usize, row[2] as usize, omega_c).with_target_db(row[0]);
            let bank = design_bank(&spec, spec.default_grid())
                .map_err(|e| HarnessError::Config(format!("bank {row:?}: {e}")))?;
            let err = measure_error(&bank, omega_c, spec.default_grid().refined());
            Ok((spec, bank, err.error_db()))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut out = ExperimentOutput::default();
    let cols: Vec<&str> = [
        "experiment",
        "base_seed",
        "signal",
        "snr_db",
        "target_db",
        "degree",
        "order",
        "measured_error_db",
        "delta_ppm",
        "epsilon",
        "n",
        "method",
        "iterations",
    ]
    .into_iter()
    .chain(STATS_COLUMNS)
    .collect();
    let mut table = Table::new("approx_sweep", &cols);
    for &snr in &cfg.sweep.snr_db {
        for (spec, bank, err_db) in &banks {
            let scn = scenario(cfg, kind, bank, params, snr);
            // observations depend on the SNR only, not on the bank
            let coords = [kind.index(), coord(snr)];
            let cells = run_campaign(&scn, cfg.seed, &coords, trials, &ests);
            for (est, cell) in ests.iter().zip(&cells) {
                out.failed_cells += cell.failures;
                let (_, method, it) = est.label();
                let mut row = vec![
                    "approx_sweep".to_string(),
                    u(cfg.seed),
                    kind.name().to_string(),
                    f(snr),
                    f(spec.target_error_db),
                    u(spec.degree),
                    u(spec.order),
                    f(*err_db),
                    f(cfg.sweep.delta_ppm),
                    f(cfg.sweep.epsilon),
                    u(cfg.estimator.n),
                    method.to_string(),
                    u(it),
                ];
                row.extend(cell.stats_cells(&params));
                table.push(row);
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}
