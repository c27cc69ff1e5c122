use farrow_sync::design::{design_bank, measure_error};
use farrow_sync::CoefficientBank;

use crate::config::ExperimentConfig;
use crate::output::{f, u, ExperimentOutput, Table};
use crate::HarnessError;

fn report(name: &str, cfg: &ExperimentConfig, bank: &CoefficientBank) -> Table {
    let omega_c = cfg.bank.spec().omega_c;
    let grid = cfg.bank.spec().default_grid().refined();
    let e = measure_error(bank, omega_c, grid);
    let mut t = Table::new(
        name,
        &[
            "degree",
            "order",
            "omega_c",
            "measured_minimax_error",
            "measured_error_db",
            "grid_points",
            "worst_omega",
            "worst_d",
        ],
    );
    t.push(vec![
        u(bank.degree()),
        u(bank.order()),
        f(cfg.bank.omega_c),
        f(e.measured_minimax_error),
        f(e.error_db()),
        u(e.grid_points),
        f(e.worst_point.0),
        f(e.worst_point.1),
    ]);
    t
}

/// Designs the configured bank and writes its taps next to the report.
pub fn run_design(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let spec = cfg.bank.spec();
    let bank = design_bank(&spec, spec.default_grid()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut out = ExperimentOutput::default();
    out.tables.push(report("design", cfg, &bank));
    out.files
        .push((format!("bank_L{}_N{}.txt", bank.degree(), bank.order()), bank.to_text()));
    Ok(out)
}

/// Measures the configured bank, read from file when one is given.
pub fn run_measure(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let bank = cfg.bank.build(cfg.base_dir.as_deref())?;
    let mut out = ExperimentOutput::default();
    out.tables.push(report("measure", cfg, &bank));
    Ok(out)
}
