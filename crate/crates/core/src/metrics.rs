//! Compensation quality and Monte-Carlo statistics.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::params::OffsetParams;
use crate::qam::{bit_errors, Qam};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("reference has zero power")]
    ZeroReference,
    #[error("need at least 2 trials, got {0}")]
    TooFewTrials(usize),
}

fn check_lengths(a: usize, b: usize) -> Result<(), MetricsError> {
    if a != b {
        return Err(MetricsError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// `sum (y - ref)^2 / sum ref^2`.
pub fn nmse(y: &[f64], reference: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(y.len(), reference.len())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, r) in y.iter().zip(reference) {
        num += (a - r) * (a - r);
        den += r * r;
    }
    if den == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    Ok(num / den)
}

/// NMSE summed over both components.
pub fn nmse_complex(y: &[Complex64], reference: &[Complex64]) -> Result<f64, MetricsError> {
    check_lengths(y.len(), reference.len())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, r) in y.iter().zip(reference) {
        num += (a - r).norm_sqr();
        den += r.norm_sqr();
    }
    if den == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    Ok(num / den)
}

/// Bit errors and total bits after hard-decision demapping.
pub fn qam_bit_errors(
    received: &[Complex64],
    transmitted: &[u32],
    qam: &Qam,
) -> Result<(u64, u64), MetricsError> {
    check_lengths(received.len(), transmitted.len())?;
    let errors = received
        .iter()
        .zip(transmitted)
        .map(|(&z, &s)| bit_errors(qam.demodulate(z), s) as u64)
        .sum();
    Ok((errors, (received.len() as u64) * qam.bits_per_symbol() as u64))
}

pub fn qam_demod_ber(received: &[Complex64], transmitted: &[u32], qam: &Qam) -> Result<f64, MetricsError> {
    let (e, b) = qam_bit_errors(received, transmitted, qam)?;
    Ok(e as f64 / b as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub delta_hat: f64,
    pub epsilon_hat: f64,
    pub nmse: f64,
    pub ber: Option<f64>,
    pub iterations_used: usize,
    pub d_exceeded: bool,
}

impl TrialResult {
    pub const CSV_HEADER: &'static str =
        "seed,delta_hat_ppm,epsilon_hat,nmse,ber,iterations_used,flag_d_exceeded";

    pub fn params(&self) -> OffsetParams {
        OffsetParams::new(self.delta_hat, self.epsilon_hat)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            fmt_f64(self.delta_hat * 1e6),
            fmt_f64(self.epsilon_hat),
            fmt_f64(self.nmse),
            self.ber.map(fmt_f64).unwrap_or_default(),
            self.iterations_used,
            u8::from(self.d_exceeded)
        )
    }
}

/// Population statistics over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignStats {
    pub n_trials: usize,
    pub mean_nmse: f64,
    pub std_nmse: f64,
    /// `sqrt(mean((delta_hat - delta)^2))` in ppm.
    pub sigma_delta_ppm: f64,
    pub sigma_epsilon: f64,
    pub mean_delta_ppm: f64,
    pub std_delta_ppm: f64,
    pub mean_epsilon: f64,
    pub std_epsilon: f64,
}

impl CampaignStats {
    pub const CSV_HEADER: &'static str = "n_trials,mean_nmse,std_nmse,sigma_delta_ppm,sigma_epsilon,mean_delta_ppm,std_delta_ppm,mean_epsilon,std_epsilon";

    pub fn csv_row(&self) -> String {
        let mut s = self.n_trials.to_string();
        for v in [
            self.mean_nmse,
            self.std_nmse,
            self.sigma_delta_ppm,
            self.sigma_epsilon,
            self.mean_delta_ppm,
            self.std_delta_ppm,
            self.mean_epsilon,
            self.std_epsilon,
        ] {
            let _ = write!(s, ",{}", fmt_f64(v));
        }
        s
    }
}

/// Mean and population standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn campaign_stats(results: &[TrialResult], truth: &OffsetParams) -> Result<CampaignStats, MetricsError> {
    if results.len() < 2 {
        return Err(MetricsError::TooFewTrials(results.len()));
    }
    let n = results.len() as f64;
    let nm: Vec<f64> = results.iter().map(|r| r.nmse).collect();
    let dh: Vec<f64> = results.iter().map(|r| r.delta_hat * 1e6).collect();
    let eh: Vec<f64> = results.iter().map(|r| r.epsilon_hat).collect();
    let (mean_nmse, std_nmse) = mean_std(&nm);
    let (mean_delta_ppm, std_delta_ppm) = mean_std(&dh);
    let (mean_epsilon, std_epsilon) = mean_std(&eh);
    let sd = (results
        .iter()
        .map(|r| (r.delta_hat - truth.delta).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let se = (results
        .iter()
        .map(|r| (r.epsilon_hat - truth.epsilon).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(CampaignStats {
        n_trials: results.len(),
        mean_nmse,
        std_nmse,
        sigma_delta_ppm: sd * 1e6,
        sigma_epsilon: se,
        mean_delta_ppm,
        std_delta_ppm,
        mean_epsilon,
        std_epsilon,
    })
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(nmse: f64, delta_hat: f64) -> TrialResult {
        TrialResult {
            seed: 0,
            delta_hat,
            epsilon_hat: 0.0,
            nmse,
            ber: None,
            iterations_used: 1,
            d_exceeded: false,
        }
    }

    #[test]
    fn nmse_edges() {
        let r = [1.0, -2.0, 3.0];
        assert_eq!(nmse(&r, &r).unwrap(), 0.0);
        assert_eq!(nmse(&[0.0; 3], &r).unwrap(), 1.0);
        assert_eq!(nmse(&r, &[0.0; 3]), Err(MetricsError::ZeroReference));
        assert_eq!(nmse(&r, &r[..2]), Err(MetricsError::LengthMismatch(3, 2)));
        assert_eq!(nmse(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn population_std() {
        let s = campaign_stats(&[trial(1.0, 0.0), trial(3.0, 0.0)], &OffsetParams::ZERO).unwrap();
        assert_eq!((s.mean_nmse, s.std_nmse), (2.0, 1.0));
        let s = campaign_stats(&vec![trial(1.0, 1e-6); 5], &OffsetParams::ZERO).unwrap();
        assert_eq!(s.std_nmse, 0.0);
        assert!((s.sigma_delta_ppm - 1.0).abs() < 1e-12);
        assert_eq!(
            campaign_stats(&[trial(1.0, 0.0)], &OffsetParams::ZERO),
            Err(MetricsError::TooFewTrials(1))
        );
    }

    #[test]
    fn ber_of_exact_points_is_zero() {
        let q = Qam::new(64).unwrap();
        let tx: Vec<u32> = (0..64).collect();
        let rx: Vec<Complex64> = tx.iter().map(|&s| q.modulate(s)).collect();
        assert_eq!(qam_demod_ber(&rx, &tx, &q).unwrap(), 0.0);
    }

    #[test]
    fn csv_row_shape() {
        let row = trial(1e-3, 4e-4).csv_row();
        assert_eq!(row.split(',').count(), TrialResult::CSV_HEADER.split(',').count());
        assert!(row.contains(",4.0000000000000"));
    }
}
