use farrow_sync::OffsetParams;

use super::{joint_estimators, run_campaign, scenario, STATS_COLUMNS};
use crate::config::ExperimentConfig;
use crate::output::{f, u, ExperimentOutput, Table};
use crate::seeds::coord;
use crate::HarnessError;

/// Axis values and the indices kept by `subgrid`.
pub fn grid_axis(cfg: &ExperimentConfig) -> Vec<(usize, f64)> {
    let s = &cfg.sweep;
    let p = s.grid_points;
    let value = |i: usize| s.grid_min_ppm + (s.grid_max_ppm - s.grid_min_ppm) * i as f64 / (p - 1) as f64;
    let keep: Vec<usize> = match s.subgrid {
        None => (0..p).collect(),
        Some(1) => vec![(p - 1) / 2],
        Some(k) => (0..k)
            .map(|j| ((j * (p - 1)) as f64 / (k - 1) as f64).round() as usize)
            .collect(),
    };
    keep.into_iter().map(|i| (i, value(i))).collect()
}

/// RMS delta error over a `(delta, epsilon)` grid, one row per point,
/// SNR and estimator.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    let bank = cfg.bank.build(cfg.base_dir.as_deref())?;
    let ests = joint_estimators(cfg)?;
    let trials = cfg.n_trials(full);
    let axis = grid_axis(cfg);
    let kind = cfg.signal.kind;
    let mut out = ExperimentOutput::default();
    let cols: Vec<&str> = [
        "experiment",
        "base_seed",
        "signal",
        "snr_db",
        "i",
        "j",
        "delta_ppm",
        "epsilon_ppm",
        "n",
        "method",
        "iterations",
    ]
    .into_iter()
    .chain(STATS_COLUMNS)
    .collect();
    let mut table = Table::new("grid", &cols);
    for &snr in &cfg.sweep.snr_db {
        for &(i, d_ppm) in &axis {
            for &(j, e_ppm) in &axis {
                let params = OffsetParams::from_ppm(d_ppm, e_ppm);
                super::warn_delay(&mut out, &params, cfg.estimator.n);
                let scn = scenario(cfg, kind, &bank, params, snr);
                let coords = [kind.index(), coord(snr), i as u64, j as u64];
                let cells = run_campaign(&scn, cfg.seed, &coords, trials, &ests);
                for (est, cell) in ests.iter().zip(&cells) {
                    out.failed_cells += cell.failures;
                    let (_, method, it) = est.label();
                    let mut row = vec![
                        "grid".to_string(),
                        u(cfg.seed),
                        kind.name().to_string(),
                        f(snr),
                        u(i),
                        u(j),
                        f(d_ppm),
                        f(e_ppm),
                        u(cfg.estimator.n),
                        method.to_string(),
                        u(it),
                    ];
                    row.extend(cell.stats_cells(&params));
                    table.push(row);
                }
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}
