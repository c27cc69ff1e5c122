//! Experiment drivers. Each returns one or more tables of aggregate rows.

mod approx;
mod ber;
mod campaign;
mod design;
mod grid;
mod impaired;
mod nsweep;
mod opcounts;
mod table3;

pub use campaign::{run_campaign, CellOutcome, STATS_COLUMNS};

use farrow_sync::estimation::Method;
use farrow_sync::{CoefficientBank, OffsetParams};

use crate::config::{ExperimentConfig, ExperimentKind, SignalKindConfig};
use crate::output::{f, u, ExperimentOutput, Table};
use crate::scenario::{Estimator, Scenario};
use crate::seeds::coord;
use crate::HarnessError;

/// Runs the experiment named in `cfg`; `full` selects the full trial counts.
pub fn run(cfg: &ExperimentConfig, full: bool) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Design => design::run_design(cfg),
        ExperimentKind::Measure => design::run_measure(cfg),
        ExperimentKind::Example1 => table3::run_example1(cfg, full),
        ExperimentKind::Table3 => table3::run_table3(cfg, full),
        ExperimentKind::Ber => ber::run(cfg, full),
        ExperimentKind::Impaired => impaired::run(cfg, full),
        ExperimentKind::Grid => grid::run(cfg, full),
        ExperimentKind::ApproxSweep => approx::run(cfg, full),
        ExperimentKind::Nsweep => nsweep::run(cfg, full),
        ExperimentKind::Opcounts => opcounts::run(cfg),
    }
}

/// Joint estimators for every configured method and iteration count; the
/// closed-form solver appears once.
fn joint_estimators(cfg: &ExperimentConfig) -> Result<Vec<Estimator>, HarnessError> {
    let mut out = Vec::new();
    for method in cfg.estimator.parsed_methods()? {
        if method == Method::Simplified {
            out.push(Estimator::Joint { method, iterations: 1 });
            continue;
        }
        for &iterations in &cfg.estimator.iterations {
            out.push(Estimator::Joint { method, iterations });
        }
    }
    if cfg.sweep.include_truth {
        out.push(Estimator::Truth);
    }
    Ok(out)
}

fn scenario<'a>(
    cfg: &'a ExperimentConfig,
    kind: SignalKindConfig,
    bank: &'a CoefficientBank,
    params: OffsetParams,
    snr_db: f64,
) -> Scenario<'a> {
    Scenario {
        signal: &cfg.signal,
        kind,
        bank,
        params,
        snr_db,
        cfo_fraction: cfg.sweep.cfo_fraction,
        random_phase: cfg.sweep.random_phase,
        n: cfg.estimator.n,
        tolerance: cfg.estimator.tolerance,
        ber: false,
    }
}

const POINT_COLUMNS: [&str; 10] = [
    "experiment",
    "base_seed",
    "signal",
    "snr_db",
    "delta_ppm",
    "epsilon",
    "n",
    "mode",
    "method",
    "iterations",
];

fn header() -> Vec<&'static str> {
    POINT_COLUMNS.iter().chain(STATS_COLUMNS.iter()).copied().collect()
}

fn warn_delay(out: &mut ExperimentOutput, params: &OffsetParams, n: usize) {
    let d = params.max_abs_delay(n);
    if d > farrow_sync::farrow::MAX_DESIGN_DELAY {
        out.warnings.push(format!(
            "offsets ({} ppm, {}) reach |d| = {d:.4} > 0.5 within N = {n}",
            params.delta_ppm(),
            params.epsilon
        ));
    }
}

/// Campaign over `signals x snr_db` at the configured offsets; one row per
/// point and estimator.
fn sweep_table(
    cfg: &ExperimentConfig,
    name: &str,
    estimators: &[Estimator],
    full: bool,
    ber: bool,
) -> Result<ExperimentOutput, HarnessError> {
    let bank = cfg.bank.build(cfg.base_dir.as_deref())?;
    let params = OffsetParams::new(cfg.sweep.delta_ppm * 1e-6, cfg.sweep.epsilon);
    let trials = cfg.n_trials(full);
    let mut out = ExperimentOutput::default();
    warn_delay(&mut out, &params, cfg.estimator.n);
    let mut table = Table::new(name, &header());
    for kind in cfg.signals() {
        for &snr in &cfg.sweep.snr_db {
            let mut scn = scenario(cfg, kind, &bank, params, snr);
            scn.ber = ber;
            let coords = [kind.index(), coord(snr)];
            let cells = run_campaign(&scn, cfg.seed, &coords, trials, estimators);
            for (est, cell) in estimators.iter().zip(&cells) {
                out.failed_cells += cell.failures;
                let (mode, method, it) = est.label();
                let mut row = vec![
                    name.to_string(),
                    u(cfg.seed),
                    kind.name().to_string(),
                    f(snr),
                    f(cfg.sweep.delta_ppm),
                    f(cfg.sweep.epsilon),
                    u(cfg.estimator.n),
                    mode.to_string(),
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
