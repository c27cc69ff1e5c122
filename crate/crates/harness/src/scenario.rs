//! One Monte-Carlo trial: generate, estimate, compensate, score.

use std::f64::consts::PI;

use farrow_sync::estimation::{estimate, estimate_sfo_only, EstimatorConfig, Method};
use farrow_sync::farrow::{compute_subfilter_outputs, farrow_output, farrow_output_wrapped};
use farrow_sync::metrics::{nmse, nmse_complex, qam_bit_errors, TrialResult};
use farrow_sync::signal::{
    make_bandpass_noise, make_multisine, make_ofdm, sample_pair, HarmonicSignalModel, ImpairmentSpec,
    OfdmFrame, OfdmSpec, SampledPair,
};
use farrow_sync::{CoefficientBank, OffsetParams};
use num_complex::Complex64;

use crate::config::{SignalConfig, SignalKindConfig};
use crate::seeds::{substream, unit_float};
use crate::HarnessError;

/// What to do with an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Joint { method: Method, iterations: usize },
    /// Delta only, epsilon held at zero.
    SfoOnly { method: Method, iterations: usize },
    /// Compensate with the true offsets.
    Truth,
}

impl Estimator {
    pub fn label(&self) -> (&'static str, &'static str, usize) {
        match *self {
            Estimator::Joint { method, iterations } => ("joint", method.name(), iterations),
            Estimator::SfoOnly { method, iterations } => ("sfo_only", method.name(), iterations),
            Estimator::Truth => ("truth", "truth", 0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub signal: &'a SignalConfig,
    pub kind: SignalKindConfig,
    pub bank: &'a CoefficientBank,
    pub params: OffsetParams,
    pub snr_db: f64,
    pub cfo_fraction: Option<f64>,
    pub random_phase: bool,
    pub n: usize,
    pub tolerance: f64,
    /// Also demodulate one OFDM symbol and count bit errors.
    pub ber: bool,
}

pub struct Observation {
    pub pair: SampledPair,
    pub frame: Option<OfdmFrame>,
    /// Extra samples before the estimation data.
    pub margin: usize,
}

fn signal_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Cell(e.to_string())
}

impl<'a> Scenario<'a> {
    fn model(&self, seed: u64) -> Result<(HarmonicSignalModel, Option<OfdmFrame>), HarnessError> {
        let s = self.signal;
        Ok(match self.kind {
            SignalKindConfig::Multisine => (
                make_multisine(s.n_tones, s.qam_order, s.bandwidth, seed, s.complex).map_err(signal_err)?,
                None,
            ),
            SignalKindConfig::Bandpass => (
                make_bandpass_noise(s.n_lines, (s.band_low, s.band_high), seed).map_err(signal_err)?,
                None,
            ),
            SignalKindConfig::Ofdm => {
                let frame = make_ofdm(OfdmSpec {
                    n_fft: s.n_fft,
                    active_subcarriers: s.active_subcarriers,
                    qam_order: s.qam_order,
                    cp_length: s.cp_length,
                    seed,
                })
                .map_err(signal_err)?;
                (frame.model.clone(), Some(frame))
            }
        })
    }

    fn ber_margin(&self) -> usize {
        let drift = self.params.delta.abs() * self.signal.n_fft as f64 + self.params.epsilon.abs();
        drift.ceil() as usize + 2
    }

    /// Draws the signal, phase offset and noise of cell seed `seed`.
    pub fn observe(&self, seed: u64) -> Result<Observation, HarnessError> {
        let (model, frame) = self.model(substream(seed, 1))?;
        let order = self.bank.order();
        let mut imp = ImpairmentSpec::new(self.params, substream(seed, 2));
        if self.snr_db.is_finite() {
            imp = imp.with_snr(self.snr_db);
        }
        if self.cfo_fraction.is_some() || self.random_phase {
            let po = if self.random_phase {
                -PI + 2.0 * PI * unit_float(substream(seed, 3))
            } else {
                0.0
            };
            imp = imp.with_carrier(self.cfo_fraction.unwrap_or(0.0), po);
        }
        let (margin, len) = if self.ber && frame.is_some() {
            let m = self.ber_margin();
            (m, (self.signal.n_fft + order + 2 * m).max(self.n + order + m))
        } else {
            (0, self.n + order)
        };
        let m0 = -((order / 2 + margin) as i64);
        let pair = sample_pair(&model, &imp, m0, len).map_err(signal_err)?;
        Ok(Observation { pair, frame, margin })
    }

    /// Runs one estimator on an observation.
    pub fn evaluate(&self, obs: &Observation, est: Estimator, seed: u64) -> Result<TrialResult, HarnessError> {
        let n = self.n;
        let order = self.bank.order();
        let m = obs.margin;
        let x0 = obs.pair.x0_re();
        let x1 = obs.pair.x1_re();
        let (x0e, x1e) = (&x0[m..], &x1[m..]);

        let (params, iterations_used, bank) = match est {
            Estimator::Joint { method, iterations } => {
                let cfg = EstimatorConfig::new(method, n)
                    .with_iterations(iterations)
                    .with_tolerance(self.tolerance);
                let (p, trace) = estimate(x0e, x1e, self.bank, &cfg).map_err(signal_err)?;
                let bank = if method == Method::Simplified {
                    self.bank.truncated(1)
                } else {
                    self.bank.clone()
                };
                (p, trace.iterations(), bank)
            }
            Estimator::SfoOnly { method, iterations } => {
                let p = estimate_sfo_only(x0e, x1e, self.bank, method, n, iterations).map_err(signal_err)?;
                (p, iterations, self.bank.clone())
            }
            Estimator::Truth => (self.params, 0, self.bank.clone()),
        };

        let window = |x: &[f64]| compute_subfilter_outputs(&x[..n + order], &bank).map_err(signal_err);
        let u_re = window(x1e)?;
        let y_re = farrow_output(&u_re, &params);
        let score = if obs.pair.complex {
            let x1i = obs.pair.x1_im();
            let u_im = window(&x1i[m..])?;
            let y_im = farrow_output(&u_im, &params);
            let y: Vec<Complex64> = y_re
                .samples
                .iter()
                .zip(&y_im.samples)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect();
            nmse_complex(&y, &obs.pair.x0[m + order / 2..m + order / 2 + n])
        } else {
            nmse(&y_re.samples, &x0e[order / 2..order / 2 + n])
        }
        .map_err(signal_err)?;

        let ber = match (&obs.frame, self.ber) {
            (Some(frame), true) => Some(self.bit_error_rate(obs, frame, &bank, &params)?),
            _ => None,
        };
        Ok(TrialResult {
            seed,
            delta_hat: params.delta,
            epsilon_hat: params.epsilon,
            nmse: score,
            ber,
            iterations_used,
            d_exceeded: y_re.delay_out_of_range(),
        })
    }

    /// Compensates one full OFDM symbol, `n_fft` samples from time 0, and
    /// returns the bit error rate.
    fn bit_error_rate(
        &self,
        obs: &Observation,
        frame: &OfdmFrame,
        bank: &CoefficientBank,
        params: &OffsetParams,
    ) -> Result<f64, HarnessError> {
        let n_fft = frame.spec.n_fft;
        let comp = |x: &[f64]| -> Result<Vec<f64>, HarnessError> {
            let u = compute_subfilter_outputs(x, bank).map_err(signal_err)?;
            farrow_output_wrapped(&u, params, obs.margin, n_fft)
                .into_iter()
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| HarnessError::Cell("demodulation window leaves the observation".into()))
        };
        let re = comp(&obs.pair.x1_re())?;
        let im = comp(&obs.pair.x1_im())?;
        let y: Vec<Complex64> = re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect();
        let rx = frame.demodulate(&y, 0.0).map_err(signal_err)?;
        let (e, b) = qam_bit_errors(&rx, &frame.symbols, &frame.qam).map_err(signal_err)?;
        Ok(e as f64 / b as f64)
    }
}
