use farrow_sync::OffsetParams;

use super::{joint_estimators, run_campaign, scenario, STATS_COLUMNS};
use crate::config::ExperimentConfig;
use crate::output::{f, u, ExperimentOutput, Table};
use crate::seeds::coord;
use crate::HarnessError;

/// Estimate spread against the window length.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    let bank = cfg.bank.build(cfg.base_dir.as_deref())?;
    let ests = joint_estimators(cfg)?;
    let trials = cfg.n_trials(full);
    let kind = cfg.signal.kind;
    let mut out = ExperimentOutput::default();
    let cols: Vec<&str> = [
        "experiment",
        "base_seed",
        "signal",
        "snr_db",
        "delta_ppm",
        "epsilon",
        "n",
        "method",
        "iterations",
    ]
    .into_iter()
    .chain(STATS_COLUMNS)
    .collect();
    let mut table = Table::new("nsweep", &cols);
    for (k, &[d_ppm, eps]) in cfg.sweep.offsets.iter().enumerate() {
        let params = OffsetParams::new(d_ppm * 1e-6, eps);
        for &snr in &cfg.sweep.snr_db {
            for &n in &cfg.sweep.n_values {
                super::warn_delay(&mut out, &params, n);
                let mut scn = scenario(cfg, kind, &bank, params, snr);
                scn.n = n;
                let coords = [kind.index(), k as u64, coord(snr), n as u64];
                let cells = run_campaign(&scn, cfg.seed, &coords, trials, &ests);
                for (est, cell) in ests.iter().zip(&cells) {
                    out.failed_cells += cell.failures;
                    let (_, method, it) = est.label();
                    let mut row = vec![
                        "nsweep".to_string(),
                        u(cfg.seed),
                        kind.name().to_string(),
                        f(snr),
                        f(d_ppm),
                        f(eps),
                        u(n),
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
