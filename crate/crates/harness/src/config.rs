//! Experiment configuration, read from TOML.
//!
//! A file holds top-level keys (`experiment`, `seed`, `trials`, ...) and the
//! flat sections `[bank]`, `[signal]`, `[estimator]` and `[sweep]`. Every key has
//! a default matching the canonical setup, so a file only lists what differs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use farrow_sync::estimation::Method;
use farrow_sync::{CoefficientBank, DesignSpec};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Design,
    Measure,
    Example1,
    Table3,
    Ber,
    Impaired,
    Grid,
    ApproxSweep,
    Nsweep,
    Opcounts,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Design => "design",
            ExperimentKind::Measure => "measure",
            ExperimentKind::Example1 => "example1",
            ExperimentKind::Table3 => "table3",
            ExperimentKind::Ber => "ber",
            ExperimentKind::Impaired => "impaired",
            ExperimentKind::Grid => "grid",
            ExperimentKind::ApproxSweep => "approx_sweep",
            ExperimentKind::Nsweep => "nsweep",
            ExperimentKind::Opcounts => "opcounts",
        }
    }

    fn default_full_trials(self) -> usize {
        match self {
            ExperimentKind::Ber => 10_000,
            _ => 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKindConfig {
    Multisine,
    Bandpass,
    Ofdm,
}

impl SignalKindConfig {
    pub fn name(self) -> &'static str {
        match self {
            SignalKindConfig::Multisine => "multisine",
            SignalKindConfig::Bandpass => "bandpass",
            SignalKindConfig::Ofdm => "ofdm",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BankConfig {
    pub degree: usize,
    pub order: usize,
    /// Passband edge as a fraction of pi.
    pub omega_c: f64,
    /// Load the bank from this text file instead of designing it.
    pub file: Option<PathBuf>,
}

impl Default for BankConfig {
    fn default() -> Self {
        Self {
            degree: 4,
            order: 36,
            omega_c: 0.9,
            file: None,
        }
    }
}

impl BankConfig {
    pub fn spec(&self) -> DesignSpec {
        DesignSpec::new(self.degree, self.order, self.omega_c * PI)
    }

    /// Reads `file` when given, otherwise designs the bank.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<CoefficientBank, HarnessError> {
        match &self.file {
            Some(f) => {
                let path = match base_dir {
                    Some(d) if f.is_relative() => d.join(f),
                    _ => f.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| HarnessError::Config(format!("bank file {}: {e}", path.display())))?;
                text.parse()
                    .map_err(|e| HarnessError::Config(format!("bank file {}: {e}", path.display())))
            }
            None => {
                let spec = self.spec();
                farrow_sync::design_bank(&spec, spec.default_grid())
                    .map_err(|e| HarnessError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: SignalKindConfig,
    pub n_tones: usize,
    pub qam_order: u32,
    /// Multisine bandwidth as a fraction of pi.
    pub bandwidth: f64,
    pub complex: bool,
    pub n_lines: usize,
    /// Bandpass noise band edges as fractions of pi.
    pub band_low: f64,
    pub band_high: f64,
    pub n_fft: usize,
    pub active_subcarriers: usize,
    pub cp_length: usize,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            kind: SignalKindConfig::Multisine,
            n_tones: 64,
            qam_order: 16,
            bandwidth: 0.9,
            complex: false,
            n_lines: 512,
            band_low: 0.1,
            band_high: 0.8,
            n_fft: 2048,
            active_subcarriers: 1536,
            cp_length: 144,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub methods: Vec<String>,
    pub iterations: Vec<usize>,
    pub tolerance: f64,
    pub n: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            methods: vec!["newton".into(), "ils".into()],
            iterations: vec![1, 2],
            tolerance: 1e-8,
            n: 1024,
        }
    }
}

impl EstimatorSection {
    pub fn parsed_methods(&self) -> Result<Vec<Method>, HarnessError> {
        self.methods
            .iter()
            .map(|m| m.parse().map_err(HarnessError::Config))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub delta_ppm: f64,
    /// Time offset in sampling periods.
    pub epsilon: f64,
    /// `inf` means noiseless.
    pub snr_db: Vec<f64>,
    pub signals: Vec<SignalKindConfig>,
    pub cfo_fraction: Option<f64>,
    pub random_phase: bool,
    /// Include compensation with the true offsets as a reference row.
    pub include_truth: bool,
    /// Iterations of the SFO-only ablation.
    pub sfo_only_iterations: usize,
    pub grid_points: usize,
    pub grid_min_ppm: f64,
    pub grid_max_ppm: f64,
    /// Evaluate only this many evenly picked points per grid axis.
    pub subgrid: Option<usize>,
    pub n_values: Vec<usize>,
    /// `[delta_ppm, epsilon]` pairs.
    pub offsets: Vec<[f64; 2]>,
    /// `[target_db, degree, order]` rows.
    pub banks: Vec<[f64; 3]>,
    pub degrees: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delta_ppm: 300.0,
            epsilon: 300e-6,
            snr_db: vec![30.0],
            signals: Vec::new(),
            cfo_fraction: None,
            random_phase: false,
            include_truth: false,
            sfo_only_iterations: 1,
            grid_points: 20,
            grid_min_ppm: -500.0,
            grid_max_ppm: 500.0,
            subgrid: None,
            n_values: vec![64, 128, 256, 512, 1024, 2048],
            offsets: vec![[200.0, 0.03], [100.0, 300e-6]],
            banks: default_bank_list(),
            degrees: vec![1, 2, 3, 4, 5],
        }
    }
}

/// Target error and `(L, N_G)` of the approximation-error sweep. Orders are
/// even, so the -35 dB row uses 24.
pub fn default_bank_list() -> Vec<[f64; 3]> {
    [
        (-95.0, 7, 62),
        (-90.0, 7, 58),
        (-85.0, 6, 58),
        (-80.0, 6, 52),
        (-75.0, 6, 48),
        (-70.0, 6, 44),
        (-65.0, 5, 42),
        (-60.0, 5, 38),
        (-55.0, 5, 34),
        (-50.0, 4, 36),
        (-45.0, 4, 30),
        (-40.0, 4, 24),
        (-35.0, 4, 22),
        (-30.0, 3, 18),
        (-25.0, 3, 14),
        (-20.0, 3, 12),
    ]
    .iter()
    .map(|&(t, l, n)| [t, l as f64, n as f64])
    .collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub full_trials: Option<usize>,
    #[serde(default)]
    pub bank: BankConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Directory relative bank paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn n_trials(&self, full: bool) -> usize {
        if full {
            self.full_trials
                .unwrap_or_else(|| self.experiment.default_full_trials())
        } else {
            self.trials
        }
    }

    pub fn signals(&self) -> Vec<SignalKindConfig> {
        if self.sweep.signals.is_empty() {
            vec![self.signal.kind]
        } else {
            self.sweep.signals.clone()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.estimator.n <= 2 {
            return bad(format!("window length n = {} must exceed 2", self.estimator.n));
        }
        if let Some(n) = self.sweep.n_values.iter().find(|&&n| n <= 2) {
            return bad(format!("window length {n} in n_values must exceed 2"));
        }
        if self.trials == 0 || self.full_trials == Some(0) {
            return bad("trial count must be positive".into());
        }
        if self.estimator.iterations.is_empty() || self.estimator.iterations.contains(&0) {
            return bad("iterations must be a nonempty list of positive counts".into());
        }
        if !(self.estimator.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        self.estimator.parsed_methods()?;
        if self.sweep.snr_db.is_empty() || self.sweep.snr_db.iter().any(|s| s.is_nan()) {
            return bad("snr_db must be a nonempty list of numbers or inf".into());
        }
        if self.sweep.grid_points < 2 || !(self.sweep.grid_min_ppm < self.sweep.grid_max_ppm) {
            return bad("grid needs at least 2 points and min < max".into());
        }
        if let Some(s) = self.sweep.subgrid {
            if s < 1 || s > self.sweep.grid_points {
                return bad(format!("subgrid {s} outside 1..={}", self.sweep.grid_points));
            }
        }
        if self.sweep.n_values.is_empty() || self.sweep.offsets.is_empty() || self.sweep.banks.is_empty() {
            return bad("sweep lists must be nonempty".into());
        }
        if self.sweep.degrees.is_empty() || self.sweep.degrees.contains(&0) {
            return bad("degrees must be a nonempty list of positive degrees".into());
        }
        for row in &self.sweep.banks {
            if row[1] < 1.0 || row[2] < 2.0 || !(row[2] as usize).is_multiple_of(2) || row[1].fract() != 0.0 || row[2].fract() != 0.0 {
                return bad(format!("bank row {row:?} needs integer degree >= 1 and even order"));
            }
        }
        if self.bank.file.is_none() {
            self.bank
                .spec()
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"table3\"\nseed = 7\n[sweep]\nsnr_db = [20.0, inf]\nsignals = [\"multisine\", \"bandpass\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Table3);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.bank, BankConfig::default());
        assert_eq!(cfg.sweep.snr_db, vec![20.0, f64::INFINITY]);
        assert_eq!(cfg.n_trials(false), 100);
        assert_eq!(cfg.n_trials(true), 1000);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "experiment = \"nope\"",
            "experiment = \"table3\"\nbogus = 1",
            "experiment = \"table3\"\n[estimator]\nn = 2",
            "experiment = \"nsweep\"\n[sweep]\nn_values = [2, 3]",
            "experiment = \"table3\"\n[estimator]\nmethods = [\"gauss\"]",
            "experiment = \"table3\"\n[bank]\norder = 35",
            "experiment = \"table3\"\n[sweep]\nsnr_db = []",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }
}
