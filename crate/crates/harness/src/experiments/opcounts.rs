use std::f64::consts::PI;

use farrow_sync::estimation::{count_operations, estimate, EstimatorConfig, Method};
use farrow_sync::signal::{make_bandpass_noise, sample_pair, ImpairmentSpec};
use farrow_sync::{design_bank, DesignSpec, OffsetParams};

use crate::config::ExperimentConfig;
use crate::output::{u, ExperimentOutput, Table};
use crate::seeds::substream;
use crate::HarnessError;

const ORDER: usize = 16;

/// Tallied operation counts of real runs next to the closed-form counts.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let methods = cfg.estimator.parsed_methods()?;
    let params = OffsetParams::new(cfg.sweep.delta_ppm * 1e-6, cfg.sweep.epsilon);
    let max_n = cfg.sweep.n_values.iter().copied().max().unwrap_or(0);
    let model = make_bandpass_noise(cfg.signal.n_lines, (cfg.signal.band_low, cfg.signal.band_high), cfg.seed)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let imp = ImpairmentSpec::new(params, substream(cfg.seed, 2)).with_snr(40.0);
    let pair = sample_pair(&model, &imp, -((ORDER / 2) as i64), max_n + ORDER)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let (x0, x1) = (pair.x0_re(), pair.x1_re());

    let mut table = Table::new(
        "opcounts",
        &[
            "method",
            "degree",
            "n",
            "iterations",
            "general_mults",
            "fixed_mults",
            "additions",
            "divisions",
            "predicted_general_mults",
            "predicted_fixed_mults",
            "predicted_additions",
            "predicted_divisions",
            "match",
        ],
    );
    let mut out = ExperimentOutput::default();
    for &method in &methods {
        for &degree in &cfg.sweep.degrees {
            let spec = DesignSpec::new(degree, ORDER, 0.9 * PI);
            let bank = design_bank(&spec, spec.default_grid())
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            for &n in &cfg.sweep.n_values {
                let its: Vec<usize> = if method == Method::Simplified {
                    vec![1]
                } else {
                    cfg.estimator.iterations.clone()
                };
                for it in its {
                    // never stop early, every iteration must be tallied
                    let ecfg = EstimatorConfig::new(method, n)
                        .with_iterations(it)
                        .with_tolerance(f64::MIN_POSITIVE);
                    let counted = match estimate(&x0, &x1, &bank, &ecfg) {
                        Ok((_, trace)) => trace.op_counts,
                        Err(e) => {
                            out.failed_cells += 1;
                            out.warnings.push(format!("{} L={degree} N={n} m={it}: {e}", method.name()));
                            continue;
                        }
                    };
                    let p = count_operations(method, degree, n, it);
                    table.push(vec![
                        method.name().to_string(),
                        u(degree),
                        u(n),
                        u(it),
                        u(counted.general_mults),
                        u(counted.fixed_mults),
                        u(counted.additions),
                        u(counted.divisions),
                        u(p.general_mults),
                        u(p.fixed_mults),
                        u(p.additions),
                        u(p.divisions),
                        u(counted == p),
                    ]);
                }
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}
