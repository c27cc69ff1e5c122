//! Exactly evaluable test signals and their impaired, offset observations.
//!
//! Every signal is a finite sum of harmonic components, so it can be sampled at
//! any real time without interpolation error. The reference is `x0(m) = x(m)`
//! and the offset observation is `x1(m) = x(m (1 + delta) + epsilon)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use thiserror::Error;

use crate::params::OffsetParams;
use crate::qam::Qam;

/// Highest component frequency any generator produces, in rad/sample.
pub const BANDLIMIT: f64 = 0.9 * PI;

// samples between exact re-evaluations of the phasor recurrence
const ANCHOR: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),
    #[error("component frequency {0} exceeds the band limit")]
    OutOfBand(f64),
    #[error("carrier offset needs an OFDM model")]
    CfoWithoutFft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Multisine,
    BandpassNoise,
    Ofdm,
}

/// `amplitude * cos(frequency t + phase)` for real models, or
/// `amplitude * exp(j (frequency t + phase))` for complex ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSignalModel {
    components: Vec<Tone>,
    kind: SignalKind,
    complex: bool,
    fft_size: Option<usize>,
}

impl HarmonicSignalModel {
    pub fn new(components: Vec<Tone>, kind: SignalKind, complex: bool) -> Result<Self, SignalError> {
        if components.is_empty() {
            return Err(SignalError::InvalidSpec("no components".into()));
        }
        for c in &components {
            if !(c.amplitude.is_finite() && c.frequency.is_finite() && c.phase.is_finite()) {
                return Err(SignalError::InvalidSpec("non-finite component".into()));
            }
            if c.frequency.abs() > BANDLIMIT * (1.0 + 1e-12) {
                return Err(SignalError::OutOfBand(c.frequency));
            }
        }
        Ok(Self {
            components,
            kind,
            complex,
            fft_size: None,
        })
    }

    pub fn components(&self) -> &[Tone] {
        &self.components
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn fft_size(&self) -> Option<usize> {
        self.fft_size
    }

    pub fn max_frequency(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.frequency.abs())
            .fold(0.0, f64::max)
    }

    /// Mean power assuming distinct component frequencies.
    pub fn nominal_power(&self) -> f64 {
        let s: f64 = self.components.iter().map(|c| c.amplitude * c.amplitude).sum();
        if self.complex {
            s
        } else {
            0.5 * s
        }
    }

    /// Exact value at time `t` in sampling periods (imaginary part zero for real
    /// models).
    pub fn eval(&self, t: f64) -> Complex64 {
        let z: Complex64 = self
            .components
            .iter()
            .map(|c| Complex64::from_polar(c.amplitude, c.frequency * t + c.phase))
            .sum();
        self.project(z)
    }

    fn project(&self, z: Complex64) -> Complex64 {
        if self.complex {
            z
        } else {
            Complex64::new(z.re, 0.0)
        }
    }

    /// Samples at `t_i = (m0 + i) step + offset` for `i < count`.
    pub fn sample_times(&self, m0: i64, step: f64, offset: f64, count: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        let time = |i: usize| (m0 + i as i64) as f64 * step + offset;
        for c in &self.components {
            let rot = Complex64::from_polar(1.0, c.frequency * step);
            let mut z = Complex64::new(0.0, 0.0);
            for (i, o) in out.iter_mut().enumerate() {
                if i % ANCHOR == 0 {
                    z = Complex64::from_polar(c.amplitude, c.frequency * time(i) + c.phase);
                } else {
                    z *= rot;
                }
                *o += z;
            }
        }
        if !self.complex {
            for o in &mut out {
                o.im = 0.0;
            }
        }
        out
    }

    /// Shifts every component by `d_omega` rad/sample and adds `phase`.
    pub fn shifted(&self, d_omega: f64, phase: f64) -> HarmonicSignalModel {
        let mut m = self.clone();
        for c in &mut m.components {
            c.frequency += d_omega;
            c.phase += phase;
        }
        m
    }
}

fn uniform_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

/// `n_tones` tones on the grid `k * bandwidth_fraction * pi / n_tones`,
/// `k = 1..=n_tones`, with amplitude and phase from random QAM points.
pub fn make_multisine(
    n_tones: usize,
    qam_order: u32,
    bandwidth_fraction: f64,
    seed: u64,
    complex: bool,
) -> Result<HarmonicSignalModel, SignalError> {
    if n_tones == 0 {
        return Err(SignalError::InvalidSpec("n_tones must be at least 1".into()));
    }
    if !(bandwidth_fraction > 0.0 && bandwidth_fraction <= 0.9) {
        return Err(SignalError::InvalidSpec(format!(
            "bandwidth fraction {bandwidth_fraction} outside (0, 0.9]"
        )));
    }
    let qam = Qam::new(qam_order)
        .ok_or_else(|| SignalError::InvalidSpec(format!("unsupported QAM order {qam_order}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = qam.random_symbols(&mut rng, n_tones);
    let components = symbols
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let z = qam.modulate(s);
            Tone {
                amplitude: z.norm(),
                frequency: bandwidth_fraction * PI * (i + 1) as f64 / n_tones as f64,
                phase: z.arg(),
            }
        })
        .collect();
    HarmonicSignalModel::new(components, SignalKind::Multisine, complex)
}

/// Real line spectrum of `n_lines` equal-amplitude tones equally spaced over
/// `[low pi, high pi]` with independent uniform phases, normalized to unit power.
pub fn make_bandpass_noise(
    n_lines: usize,
    band: (f64, f64),
    seed: u64,
) -> Result<HarmonicSignalModel, SignalError> {
    let (low, high) = band;
    if n_lines == 0 {
        return Err(SignalError::InvalidSpec("n_lines must be at least 1".into()));
    }
    if !(0.0 <= low && low < high && high <= 0.9) {
        return Err(SignalError::InvalidSpec(format!("band ({low}, {high}) invalid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitude = (2.0 / n_lines as f64).sqrt();
    let components = (0..n_lines)
        .map(|i| {
            let f = if n_lines == 1 {
                0.5 * (low + high)
            } else {
                low + (high - low) * i as f64 / (n_lines - 1) as f64
            };
            Tone {
                amplitude,
                frequency: f * PI,
                phase: uniform_phase(&mut rng),
            }
        })
        .collect();
    HarmonicSignalModel::new(components, SignalKind::BandpassNoise, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmSpec {
    pub n_fft: usize,
    pub active_subcarriers: usize,
    pub qam_order: u32,
    pub cp_length: usize,
    pub seed: u64,
}

impl OfdmSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !self.n_fft.is_power_of_two() || self.n_fft < 4 {
            return Err(SignalError::InvalidSpec(format!("n_fft {} not a power of two", self.n_fft)));
        }
        if self.active_subcarriers == 0 || self.active_subcarriers >= self.n_fft {
            return Err(SignalError::InvalidSpec("active subcarriers out of range".into()));
        }
        if self.active_subcarriers > 1 && !self.active_subcarriers.is_multiple_of(2) {
            return Err(SignalError::InvalidSpec("active subcarrier count must be even".into()));
        }
        if Qam::new(self.qam_order).is_none() {
            return Err(SignalError::InvalidSpec(format!("unsupported QAM order {}", self.qam_order)));
        }
        Ok(())
    }

    /// Active subcarrier indices: `+-1 ..= +-A/2`, DC unused (a single carrier
    /// sits at +1).
    pub fn carriers(&self) -> Vec<i64> {
        if self.active_subcarriers == 1 {
            return vec![1];
        }
        let h = (self.active_subcarriers / 2) as i64;
        (-h..=h).filter(|&k| k != 0).collect()
    }
}

/// One OFDM symbol and the payload it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrame {
    pub spec: OfdmSpec,
    pub model: HarmonicSignalModel,
    pub carriers: Vec<i64>,
    pub symbols: Vec<u32>,
    pub qam: Qam,
    /// Per-carrier amplitude scale, `1 / sqrt(A)` for unit mean power.
    pub scale: f64,
}

/// `x(t) = scale * sum_k S_k exp(j 2 pi k t / n_fft)` over the active carriers.
pub fn make_ofdm(spec: OfdmSpec) -> Result<OfdmFrame, SignalError> {
    spec.validate()?;
    let qam = Qam::new(spec.qam_order).expect("validated");
    let carriers = spec.carriers();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let symbols = qam.random_symbols(&mut rng, carriers.len());
    let scale = 1.0 / (carriers.len() as f64).sqrt();
    let components = carriers
        .iter()
        .zip(&symbols)
        .map(|(&k, &s)| {
            let z = qam.modulate(s) * scale;
            Tone {
                amplitude: z.norm(),
                frequency: 2.0 * PI * k as f64 / spec.n_fft as f64,
                phase: z.arg(),
            }
        })
        .collect();
    let mut model = HarmonicSignalModel::new(components, SignalKind::Ofdm, true)?;
    model.fft_size = Some(spec.n_fft);
    Ok(OfdmFrame {
        spec,
        model,
        carriers,
        symbols,
        qam,
        scale,
    })
}

impl OfdmFrame {
    /// Equalized carrier values from `n_fft` samples taken at times
    /// `t0, t0 + 1, ...`; the known phase ramp of the window start is removed.
    pub fn demodulate(&self, window: &[Complex64], t0: f64) -> Result<Vec<Complex64>, SignalError> {
        let n = self.spec.n_fft;
        if window.len() != n {
            return Err(SignalError::InvalidSpec(format!(
                "demodulation window has {} samples, need {n}",
                window.len()
            )));
        }
        let mut buf = window.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let norm = 1.0 / (n as f64 * self.scale);
        Ok(self
            .carriers
            .iter()
            .map(|&k| {
                let bin = k.rem_euclid(n as i64) as usize;
                let ramp = Complex64::from_polar(1.0, -2.0 * PI * k as f64 * t0 / n as f64);
                buf[bin] * ramp * norm
            })
            .collect())
    }

    pub fn bits(&self) -> usize {
        self.symbols.len() * self.qam.bits_per_symbol() as usize
    }
}

/// Offsets, noise and carrier impairments applied to a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentSpec {
    pub params: OffsetParams,
    /// `None` or `+inf` means noiseless.
    pub snr_db: Option<f64>,
    /// Carrier offset as a fraction of the subcarrier spacing.
    pub cfo_fraction: Option<f64>,
    pub phase_offset: Option<f64>,
    pub seed: u64,
}

impl ImpairmentSpec {
    pub fn new(params: OffsetParams, seed: u64) -> Self {
        Self {
            params,
            snr_db: None,
            cfo_fraction: None,
            phase_offset: None,
            seed,
        }
    }

    pub fn with_snr(mut self, snr_db: f64) -> Self {
        self.snr_db = Some(snr_db);
        self
    }

    pub fn with_carrier(mut self, cfo_fraction: f64, phase_offset: f64) -> Self {
        self.cfo_fraction = Some(cfo_fraction);
        self.phase_offset = Some(phase_offset);
        self
    }

    fn noisy(&self) -> Option<f64> {
        self.snr_db.filter(|s| s.is_finite())
    }
}

/// Reference and offset observation, both starting at time index `m0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPair {
    pub m0: i64,
    pub x0: Vec<Complex64>,
    pub x1: Vec<Complex64>,
    pub complex: bool,
    /// Clean reference, before noise.
    pub x0_clean: Vec<Complex64>,
}

impl SampledPair {
    pub fn x0_re(&self) -> Vec<f64> {
        self.x0.iter().map(|z| z.re).collect()
    }

    pub fn x1_re(&self) -> Vec<f64> {
        self.x1.iter().map(|z| z.re).collect()
    }

    pub fn x1_im(&self) -> Vec<f64> {
        self.x1.iter().map(|z| z.im).collect()
    }

    /// CSV with header `n,x0_re,x0_im,x1_re,x1_im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,x0_re,x0_im,x1_re,x1_im\n");
        for (i, (a, b)) in self.x0.iter().zip(&self.x1).enumerate() {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.m0 + i as i64,
                a.re,
                a.im,
                b.re,
                b.im
            );
        }
        s
    }
}

/// The model with the carrier impairments of `impair` folded in.
pub fn impaired_model(
    model: &HarmonicSignalModel,
    impair: &ImpairmentSpec,
) -> Result<HarmonicSignalModel, SignalError> {
    let d_omega = match impair.cfo_fraction {
        Some(f) if f != 0.0 => {
            let n_fft = model.fft_size.ok_or(SignalError::CfoWithoutFft)?;
            2.0 * PI * f / n_fft as f64
        }
        _ => 0.0,
    };
    let phase = impair.phase_offset.unwrap_or(0.0);
    if d_omega == 0.0 && phase == 0.0 {
        Ok(model.clone())
    } else {
        Ok(model.shifted(d_omega, phase))
    }
}

/// Samples `x0` and `x1` over time indices `m0..m0 + count` and adds
/// independent noise to both.
pub fn sample_pair(
    model: &HarmonicSignalModel,
    impair: &ImpairmentSpec,
    m0: i64,
    count: usize,
) -> Result<SampledPair, SignalError> {
    let m = impaired_model(model, impair)?;
    let p = impair.params;
    let x0_clean = m.sample_times(m0, 1.0, 0.0, count);
    let x1_clean = m.sample_times(m0, 1.0 + p.delta, p.epsilon, count);
    let (x0, x1) = match impair.noisy() {
        Some(snr) => {
            let mut rng = ChaCha8Rng::seed_from_u64(impair.seed);
            (
                awgn_with(&x0_clean, m.complex, snr, &mut rng),
                awgn_with(&x1_clean, m.complex, snr, &mut rng),
            )
        }
        None => (x0_clean.clone(), x1_clean),
    };
    Ok(SampledPair {
        m0,
        x0,
        x1,
        complex: m.complex,
        x0_clean,
    })
}

fn awgn_with(x: &[Complex64], complex: bool, snr_db: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let power = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len().max(1) as f64;
    let var = power / 10f64.powf(snr_db / 10.0);
    if complex {
        let normal = Normal::new(0.0, (0.5 * var).sqrt()).expect("finite variance");
        x.iter()
            .map(|z| z + Complex64::new(normal.sample(rng), normal.sample(rng)))
            .collect()
    } else {
        let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
        x.iter()
            .map(|z| Complex64::new(z.re + normal.sample(rng), z.im))
            .collect()
    }
}

/// Adds white Gaussian noise at `snr_db` relative to the mean power of `x`.
pub fn add_awgn(x: &[f64], snr_db: f64, seed: u64) -> Vec<f64> {
    if !snr_db.is_finite() {
        return x.to_vec();
    }
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    awgn_with(&z, false, snr_db, &mut rng)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Complex variant; the noise variance is split equally between components.
pub fn add_awgn_complex(x: &[Complex64], snr_db: f64, seed: u64) -> Vec<Complex64> {
    if !snr_db.is_finite() {
        return x.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    awgn_with(x, true, snr_db, &mut rng)
}
