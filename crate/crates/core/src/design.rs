//! Least-squares design of Farrow coefficient banks and minimax error measurement.
//!
//! With linear-phase branches the bulk delay factors out of the error
//! `G(e^{jw}, d) - exp(-jw(d + N_G/2))`, leaving a real part that only the even
//! branches can fit (`cos(wd) - 1`) and an imaginary part that only the odd
//! branches can fit (`-sin(wd)`). Each part is a tensor-product problem on the
//! `d x w` grid, `min ||D X B^T - T||_F`, whose solution is
//! `X = pinv(D) T pinv(B)^T`. Both pseudo-inverses are taken by SVD.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::farrow::{CoefficientBank, FarrowError};

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("invalid design spec: {0}")]
    InvalidSpec(String),
    #[error(
        "{basis} basis is rank deficient ({rank} of {columns} columns, smallest/largest singular value {ratio:.3e}); refine the grid"
    )]
    RankDeficient {
        basis: &'static str,
        rank: usize,
        columns: usize,
        ratio: f64,
    },
    #[error(transparent)]
    Bank(#[from] FarrowError),
}

/// Target of a bank design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub degree: usize,
    pub order: usize,
    /// Passband edge `w_c T` in radians.
    pub omega_c: f64,
    /// Desired approximation error, `20 log10(delta_c)`. Informational for the
    /// least-squares design.
    pub target_error_db: f64,
}

impl DesignSpec {
    pub fn new(degree: usize, order: usize, omega_c: f64) -> Self {
        Self {
            degree,
            order,
            omega_c,
            target_error_db: f64::NAN,
        }
    }

    pub fn with_target_db(mut self, db: f64) -> Self {
        self.target_error_db = db;
        self
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        if self.degree < 1 {
            return Err(DesignError::InvalidSpec("degree must be at least 1".into()));
        }
        if self.order == 0 || !self.order.is_multiple_of(2) {
            return Err(DesignError::InvalidSpec(format!(
                "order {} must be even and positive",
                self.order
            )));
        }
        if !(self.omega_c > 0.0 && self.omega_c < PI) {
            return Err(DesignError::InvalidSpec(format!(
                "passband edge {} outside (0, pi)",
                self.omega_c
            )));
        }
        Ok(())
    }

    /// Default design grid: `16 N_G` frequencies by 33 delays.
    pub fn default_grid(&self) -> GridDensity {
        GridDensity::new(16 * self.order, 33)
    }
}

/// Number of frequency and delay points of a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDensity {
    pub n_freq: usize,
    pub n_delay: usize,
}

impl GridDensity {
    pub fn new(n_freq: usize, n_delay: usize) -> Self {
        Self { n_freq, n_delay }
    }

    /// Four times finer per axis, keeping the end points of both axes.
    pub fn refined(&self) -> GridDensity {
        GridDensity::new(
            4 * self.n_freq.saturating_sub(1) + 1,
            4 * self.n_delay.saturating_sub(1) + 1,
        )
    }

    fn frequencies(&self, omega_max: f64) -> Vec<f64> {
        uniform(0.0, omega_max, self.n_freq)
    }

    fn delays(&self, d_max: f64) -> Vec<f64> {
        uniform(-d_max, d_max, self.n_delay)
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Measured peak deviation from the ideal fractional delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub measured_minimax_error: f64,
    pub grid_points: usize,
    /// `(w T, d)` where the peak occurs.
    pub worst_point: (f64, f64),
}

impl ErrorReport {
    pub fn error_db(&self) -> f64 {
        20.0 * self.measured_minimax_error.log10()
    }
}

/// Designs a bank over `[0, w_c] x [-0.5, 0.5]`.
pub fn design_bank(spec: &DesignSpec, grid: GridDensity) -> Result<CoefficientBank, DesignError> {
    spec.validate()?;
    if grid.n_freq < 8 * spec.order || grid.n_delay < 16 {
        return Err(DesignError::InvalidSpec(format!(
            "grid {}x{} below the minimum {}x16",
            grid.n_freq,
            grid.n_delay,
            8 * spec.order
        )));
    }
    design_bank_over(spec.degree, spec.order, spec.omega_c, 0.5, grid)
}

/// Designs a bank over `[0, omega_max] x [-d_max, d_max]` without the grid
/// minimums of [`design_bank`].
pub fn design_bank_over(
    degree: usize,
    order: usize,
    omega_max: f64,
    d_max: f64,
    grid: GridDensity,
) -> Result<CoefficientBank, DesignError> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(DesignError::InvalidSpec(format!("order {order} must be even and positive")));
    }
    let half = order / 2;
    let freqs = grid.frequencies(omega_max);
    let delays = grid.delays(d_max);

    let odd: Vec<usize> = (1..=degree).filter(|k| k % 2 == 1).collect();
    let even: Vec<usize> = (2..=degree).filter(|k| k % 2 == 0).collect();

    let mut halves = vec![Vec::new(); degree];

    if !odd.is_empty() {
        let d_basis = power_basis(&delays, &odd);
        let w_basis = DMatrix::from_fn(freqs.len(), half, |i, m| 2.0 * ((m + 1) as f64 * freqs[i]).sin());
        let target = DMatrix::from_fn(delays.len(), freqs.len(), |j, i| -(freqs[i] * delays[j]).sin());
        let x = separable_solve(&d_basis, &w_basis, &target, "delay (odd)", "sine")?;
        for (c, &k) in odd.iter().enumerate() {
            halves[k - 1] = x.row(c).iter().copied().collect();
        }
    }
    if !even.is_empty() {
        let d_basis = power_basis(&delays, &even);
        let w_basis = DMatrix::from_fn(freqs.len(), half + 1, |i, m| {
            if m == 0 {
                1.0
            } else {
                2.0 * (m as f64 * freqs[i]).cos()
            }
        });
        let target =
            DMatrix::from_fn(delays.len(), freqs.len(), |j, i| (freqs[i] * delays[j]).cos() - 1.0);
        let x = separable_solve(&d_basis, &w_basis, &target, "delay (even)", "cosine")?;
        for (c, &k) in even.iter().enumerate() {
            halves[k - 1] = x.row(c).iter().copied().collect();
        }
    }
    Ok(CoefficientBank::from_half_rows(order, &halves)?)
}

fn power_basis(delays: &[f64], powers: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(delays.len(), powers.len(), |j, c| delays[j].powi(powers[c] as i32))
}

fn separable_solve(
    d_basis: &DMatrix<f64>,
    w_basis: &DMatrix<f64>,
    target: &DMatrix<f64>,
    d_name: &'static str,
    w_name: &'static str,
) -> Result<DMatrix<f64>, DesignError> {
    let d_pinv = checked_pinv(d_basis, d_name)?;
    let w_pinv = checked_pinv(w_basis, w_name)?;
    Ok(d_pinv * target * w_pinv.transpose())
}

// Relative singular-value floor below which a column is treated as dependent.
const RANK_TOLERANCE: f64 = 1e-13;

fn checked_pinv(m: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>, DesignError> {
    let columns = m.ncols();
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > smax * RANK_TOLERANCE)
        .count();
    if m.nrows() < columns || rank < columns || smax == 0.0 {
        return Err(DesignError::RankDeficient {
            basis: name,
            rank,
            columns,
            ratio,
        });
    }
    svd.pseudo_inverse(smax * RANK_TOLERANCE)
        .map_err(|e| DesignError::InvalidSpec(e.to_string()))
}

/// Peak `|G(e^{jw}, d) - exp(-jw(d + N_G/2))|` over `[0, w_c] x [-0.5, 0.5]`.
pub fn measure_error(bank: &CoefficientBank, omega_c: f64, grid: GridDensity) -> ErrorReport {
    measure_error_over(bank, omega_c, 0.5, grid)
}

/// Peak deviation over `[0, omega_max] x [-d_max, d_max]`.
pub fn measure_error_over(
    bank: &CoefficientBank,
    omega_max: f64,
    d_max: f64,
    grid: GridDensity,
) -> ErrorReport {
    let freqs = grid.frequencies(omega_max);
    let delays = grid.delays(d_max);
    let degree = bank.degree();
    let mut amp = vec![0.0; degree + 1];
    let mut worst = (0.0, (0.0, 0.0));
    for &w in &freqs {
        for (k, a) in amp.iter_mut().enumerate() {
            let r = bank.branch_response_centred(k, w);
            *a = if k % 2 == 1 { r.im } else { r.re };
        }
        for &d in &delays {
            let mut re = 0.0;
            let mut im = 0.0;
            let mut p = 1.0;
            for (k, &a) in amp.iter().enumerate() {
                if k % 2 == 1 {
                    im += p * a;
                } else {
                    re += p * a;
                }
                p *= d;
            }
            let err = (re - (w * d).cos()).hypot(im + (w * d).sin());
            if err > worst.0 {
                worst = (err, (w, d));
            }
        }
    }
    ErrorReport {
        measured_minimax_error: worst.0,
        grid_points: freqs.len() * delays.len(),
        worst_point: worst.1,
    }
}

/// One cell of the first-degree error surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    /// Normalized bandwidth `w_max / pi`.
    pub bandwidth: f64,
    pub d_max: f64,
    pub error: f64,
}

/// Minimax error of least-squares first-degree banks of order `order`, one
/// design per `(bandwidth, d_max)` pair. Rows follow `bandwidths`, columns
/// `d_max_values`.
pub fn first_degree_error_surface(
    order: usize,
    bandwidths: &[f64],
    d_max_values: &[f64],
) -> Result<Vec<SurfaceCell>, DesignError> {
    let mut cells = Vec::with_capacity(bandwidths.len() * d_max_values.len());
    let design_grid = GridDensity::new((16 * order).max(64), 33);
    for &b in bandwidths {
        if !(b > 0.0 && b < 1.0) {
            return Err(DesignError::InvalidSpec(format!("bandwidth {b} outside (0, 1)")));
        }
        for &d_max in d_max_values {
            if !(0.0..=0.5).contains(&d_max) {
                return Err(DesignError::InvalidSpec(format!("d_max {d_max} outside [0, 0.5]")));
            }
            let error = if d_max == 0.0 {
                // only d = 0 is in range, where the pure delay is exact
                0.0
            } else {
                let bank = design_bank_over(1, order, b * PI, d_max, design_grid)?;
                measure_error_over(&bank, b * PI, d_max, design_grid.refined()).measured_minimax_error
            };
            cells.push(SurfaceCell {
                bandwidth: b,
                d_max,
                error,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(DesignSpec::new(0, 4, 1.0).validate().is_err());
        assert!(DesignSpec::new(1, 3, 1.0).validate().is_err());
        assert!(DesignSpec::new(1, 4, PI).validate().is_err());
        assert!(DesignSpec::new(2, 4, 1.0).validate().is_ok());
        let spec = DesignSpec::new(2, 4, 1.0);
        assert!(matches!(
            design_bank(&spec, GridDensity::new(16, 16)),
            Err(DesignError::InvalidSpec(_))
        ));
    }

    #[test]
    fn first_degree_order_two_structure() {
        let spec = DesignSpec::new(1, 2, 0.5 * PI);
        let bank = design_bank(&spec, spec.default_grid()).unwrap();
        let r = bank.row(1);
        assert_eq!(r[1], 0.0);
        assert_eq!(r[0], -r[2]);
        // a positive delay is realized by a negative leading tap
        assert!(r[0] < 0.0, "{r:?}");
    }

    #[test]
    fn pure_delay_exact_on_zero_delay_line() {
        let bank = CoefficientBank::pure_delay(8).unwrap();
        let rep = measure_error_over(&bank, 0.9 * PI, 0.0, GridDensity::new(200, 1));
        assert!(rep.measured_minimax_error < 1e-15);
    }

    #[test]
    fn coarse_grid_is_rank_deficient() {
        // fewer frequencies than sine columns
        let err = design_bank_over(1, 20, 0.9 * PI, 0.5, GridDensity::new(5, 9)).unwrap_err();
        assert!(matches!(err, DesignError::RankDeficient { basis: "sine", .. }), "{err}");
        // a single delay point cannot separate d from d^3
        let err = design_bank_over(3, 4, 0.9 * PI, 0.5, GridDensity::new(64, 1)).unwrap_err();
        assert!(matches!(err, DesignError::RankDeficient { .. }), "{err}");
    }

    #[test]
    fn response_matches_direct_evaluation() {
        let spec = DesignSpec::new(3, 10, 0.8 * PI);
        let bank = design_bank(&spec, spec.default_grid()).unwrap();
        for &(w, d) in &[(0.3_f64, 0.1_f64), (2.0, -0.45), (1.1, 0.5)] {
            let mut direct = num_complex::Complex64::new(0.0, 0.0);
            for k in 0..=bank.degree() {
                let gk: num_complex::Complex64 = bank
                    .row(k)
                    .iter()
                    .enumerate()
                    .map(|(n, &g)| num_complex::Complex64::from_polar(g, -w * n as f64))
                    .sum();
                direct += gk * d.powi(k as i32);
            }
            assert!((direct - bank.frequency_response(w, d)).norm() < 1e-12);
        }
    }
}
