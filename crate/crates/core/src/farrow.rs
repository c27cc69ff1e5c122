//! Farrow-structure variable fractional delay filter.
//!
//! A bank of `L + 1` linear-phase FIR subfilters `G_k(z)` of common even order
//! `N_G` is applied to the offset signal; the outputs `u_k(n)` are combined as a
//! polynomial in the per-sample fractional delay `d(n) = n * delta + epsilon`:
//!
//! ```text
//! y(n) = sum_k d(n)^k u_k(n)
//! ```
//!
//! Branch 0 is the pure delay `z^{-N_G/2}`, odd branches are antisymmetric and
//! even branches symmetric about the centre tap. The overall response
//! approximates `exp(-j w (d + N_G/2))`.
//!
//! Subfilter outputs are taken in steady state only: column `n` of
//! [`SubfilterOutputs`] is the convolution evaluated at input index `n + N_G`,
//! so it is centred on input sample `n + N_G/2`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::params::OffsetParams;

/// Designed operating range of the fractional delay.
pub const MAX_DESIGN_DELAY: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum FarrowError {
    #[error("filter order {0} is odd; only even orders are supported")]
    OddOrder(usize),
    #[error("bank needs at least one branch")]
    EmptyBank,
    #[error("row {row} has {got} taps, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("row 0 must be the pure delay z^-{0}")]
    NotPureDelay(usize),
    #[error("row {0} violates its linear-phase symmetry")]
    Symmetry(usize),
    #[error("non-finite tap in row {0}")]
    NonFinite(usize),
    #[error("input has {got} samples, at least {needed} required")]
    InsufficientData { got: usize, needed: usize },
    #[error("component lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("malformed bank text: {0}")]
    Parse(String),
}

/// Fixed coefficients of the Farrow subfilters, one row per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBank {
    order: usize,
    rows: Vec<Vec<f64>>,
}

impl CoefficientBank {
    /// Validates and wraps a full set of rows. Row 0 must be the pure delay and
    /// every other row must satisfy its (anti)symmetry exactly.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, FarrowError> {
        let first = rows.first().ok_or(FarrowError::EmptyBank)?;
        if first.is_empty() {
            return Err(FarrowError::EmptyBank);
        }
        let order = first.len() - 1;
        if order % 2 != 0 {
            return Err(FarrowError::OddOrder(order));
        }
        let centre = order / 2;
        for (k, row) in rows.iter().enumerate() {
            if row.len() != order + 1 {
                return Err(FarrowError::RowLength {
                    row: k,
                    got: row.len(),
                    expected: order + 1,
                });
            }
            if row.iter().any(|g| !g.is_finite()) {
                return Err(FarrowError::NonFinite(k));
            }
            if k == 0 {
                let pure = row
                    .iter()
                    .enumerate()
                    .all(|(n, &g)| g == if n == centre { 1.0 } else { 0.0 });
                if !pure {
                    return Err(FarrowError::NotPureDelay(centre));
                }
            } else if !row_has_symmetry(row, k) {
                return Err(FarrowError::Symmetry(k));
            }
        }
        Ok(Self { order, rows })
    }

    /// Degree-0 bank holding only the pure delay.
    pub fn pure_delay(order: usize) -> Result<Self, FarrowError> {
        if !order.is_multiple_of(2) {
            return Err(FarrowError::OddOrder(order));
        }
        Ok(Self {
            order,
            rows: vec![pure_delay_row(order)],
        })
    }

    /// Assembles a bank from the free half of each branch `k >= 1`.
    ///
    /// For branch `k`, `halves[k - 1][m]` is the tap at `N_G/2 - m`. Odd branches
    /// take `m = 1..=N_G/2` (the centre tap is zero), even branches take
    /// `m = 0..=N_G/2`. The mirrored half is filled in so the symmetry holds
    /// bit for bit.
    pub fn from_half_rows(order: usize, halves: &[Vec<f64>]) -> Result<Self, FarrowError> {
        if !order.is_multiple_of(2) {
            return Err(FarrowError::OddOrder(order));
        }
        let centre = order / 2;
        let mut rows = vec![pure_delay_row(order)];
        for (i, half) in halves.iter().enumerate() {
            let k = i + 1;
            let mut row = vec![0.0; order + 1];
            if k % 2 == 1 {
                if half.len() != centre {
                    return Err(FarrowError::RowLength {
                        row: k,
                        got: half.len(),
                        expected: centre,
                    });
                }
                for (j, &a) in half.iter().enumerate() {
                    let m = j + 1;
                    row[centre - m] = a;
                    row[centre + m] = -a;
                }
            } else {
                if half.len() != centre + 1 {
                    return Err(FarrowError::RowLength {
                        row: k,
                        got: half.len(),
                        expected: centre + 1,
                    });
                }
                for (m, &b) in half.iter().enumerate() {
                    row[centre - m] = b;
                    row[centre + m] = b;
                }
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    /// Polynomial degree `L`.
    pub fn degree(&self) -> usize {
        self.rows.len() - 1
    }

    /// Common subfilter order `N_G`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn group_delay(&self) -> usize {
        self.order / 2
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Keeps branches `0..=degree`.
    pub fn truncated(&self, degree: usize) -> CoefficientBank {
        let keep = (degree + 1).min(self.rows.len());
        CoefficientBank {
            order: self.order,
            rows: self.rows[..keep].to_vec(),
        }
    }

    /// Zero-phase amplitude of branch `k` at `w`: `G_k(e^{jw}) e^{jw N_G/2}`,
    /// which is real for even `k` and purely imaginary for odd `k`.
    pub fn branch_response_centred(&self, k: usize, omega: f64) -> Complex64 {
        let row = &self.rows[k];
        let c = self.order / 2;
        if k % 2 == 1 {
            let mut s = 0.0;
            for m in 1..=c {
                s += row[c - m] * (m as f64 * omega).sin();
            }
            Complex64::new(0.0, 2.0 * s)
        } else {
            let mut s = row[c];
            for m in 1..=c {
                s += 2.0 * row[c - m] * (m as f64 * omega).cos();
            }
            Complex64::new(s, 0.0)
        }
    }

    /// Overall frequency response `G(e^{jw}, d) = sum_k d^k G_k(e^{jw})`.
    pub fn frequency_response(&self, omega: f64, d: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..self.rows.len()).rev() {
            acc = acc * d + self.branch_response_centred(k, omega);
        }
        acc * Complex64::from_polar(1.0, -omega * self.group_delay() as f64)
    }

    /// Plain-text form: header `L N_G`, then one line of taps per branch.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.degree(), self.order);
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|g| format!("{g:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for CoefficientBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for CoefficientBank {
    type Err = FarrowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| FarrowError::Parse("missing header".into()))?;
        let mut fields = header.split_whitespace();
        let mut next_usize = |name: &str| -> Result<usize, FarrowError> {
            fields
                .next()
                .ok_or_else(|| FarrowError::Parse(format!("header lacks {name}")))?
                .parse::<usize>()
                .map_err(|e| FarrowError::Parse(format!("{name}: {e}")))
        };
        let degree = next_usize("L")?;
        let order = next_usize("N_G")?;
        let mut rows = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let line = lines
                .next()
                .ok_or_else(|| FarrowError::Parse(format!("missing row {k}")))?;
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| FarrowError::Parse(format!("row {k}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != order + 1 {
                return Err(FarrowError::RowLength {
                    row: k,
                    got: row.len(),
                    expected: order + 1,
                });
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(FarrowError::Parse("trailing rows after the last branch".into()));
        }
        CoefficientBank::new(rows)
    }
}

fn pure_delay_row(order: usize) -> Vec<f64> {
    let mut row = vec![0.0; order + 1];
    row[order / 2] = 1.0;
    row
}

fn row_has_symmetry(row: &[f64], k: usize) -> bool {
    let n = row.len() - 1;
    (0..=n).all(|i| {
        if k % 2 == 1 {
            row[i] == -row[n - i]
        } else {
            row[i] == row[n - i]
        }
    })
}

/// Steady-state outputs of every subfilter, `rows[k][n] = u_k(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubfilterOutputs {
    rows: Vec<Vec<f64>>,
}

impl SubfilterOutputs {
    /// Wraps precomputed rows; all rows must be equally long and non-empty.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, FarrowError> {
        let len = rows.first().map(Vec::len).ok_or(FarrowError::EmptyBank)?;
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != len) {
            return Err(FarrowError::RowLength {
                row: k,
                got: r.len(),
                expected: len,
            });
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Columns `start..start + len` as a new set of outputs.
    pub fn window(&self, start: usize, len: usize) -> SubfilterOutputs {
        SubfilterOutputs {
            rows: self
                .rows
                .iter()
                .map(|r| r[start..start + len].to_vec())
                .collect(),
        }
    }

    /// Keeps branches `0..=degree`.
    pub fn truncated(&self, degree: usize) -> SubfilterOutputs {
        let keep = (degree + 1).min(self.rows.len());
        SubfilterOutputs {
            rows: self.rows[..keep].to_vec(),
        }
    }

    /// Column `n` across all branches.
    #[inline]
    pub(crate) fn column(&self, n: usize, out: &mut [f64]) {
        for (o, r) in out.iter_mut().zip(&self.rows) {
            *o = r[n];
        }
    }
}

/// Runs every subfilter over `x1` and keeps the `len(x1) - N_G` steady-state
/// samples.
pub fn compute_subfilter_outputs(
    x1: &[f64],
    bank: &CoefficientBank,
) -> Result<SubfilterOutputs, FarrowError> {
    let order = bank.order();
    if x1.len() < order + 1 {
        return Err(FarrowError::InsufficientData {
            got: x1.len(),
            needed: order + 1,
        });
    }
    let c = order / 2;
    let len = x1.len() - order;
    let rows = bank
        .rows()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            if k == 0 {
                return x1[c..c + len].to_vec();
            }
            let odd = k % 2 == 1;
            (0..len)
                .map(|n| {
                    let centre = n + c;
                    let mut acc = if odd { 0.0 } else { g[c] * x1[centre] };
                    for m in 1..=c {
                        let pair = if odd {
                            x1[centre + m] - x1[centre - m]
                        } else {
                            x1[centre + m] + x1[centre - m]
                        };
                        acc += g[c - m] * pair;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(SubfilterOutputs { rows })
}

/// Compensated samples plus the delay-range diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensated {
    pub samples: Vec<f64>,
    /// Number of samples whose fractional delay left `[-0.5, 0.5]`.
    pub delay_exceeded: usize,
    pub max_abs_delay: f64,
}

impl Compensated {
    pub fn delay_out_of_range(&self) -> bool {
        self.delay_exceeded > 0
    }
}

/// Evaluates `y(n) = sum_k d(n)^k u_k(n)` by Horner's scheme with
/// `d(n) = n * delta + epsilon`. Out-of-range delays are counted, not rejected.
pub fn farrow_output(u: &SubfilterOutputs, params: &OffsetParams) -> Compensated {
    let degree = u.degree();
    let mut col = vec![0.0; degree + 1];
    let mut exceeded = 0;
    let mut max_abs = 0.0f64;
    let samples = (0..u.len())
        .map(|n| {
            let d = params.delay_at(n);
            if d.abs() > MAX_DESIGN_DELAY {
                exceeded += 1;
            }
            max_abs = max_abs.max(d.abs());
            u.column(n, &mut col);
            horner(&col, d)
        })
        .collect();
    Compensated {
        samples,
        delay_exceeded: exceeded,
        max_abs_delay: max_abs,
    }
}

#[inline]
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = coeffs[coeffs.len() - 1];
    for &c in coeffs[..coeffs.len() - 1].iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Compensates the real and imaginary parts with two identical structures.
pub fn compensate_complex(
    x1_re: &[f64],
    x1_im: &[f64],
    bank: &CoefficientBank,
    params: &OffsetParams,
) -> Result<Vec<Complex64>, FarrowError> {
    if x1_re.len() != x1_im.len() {
        return Err(FarrowError::LengthMismatch(x1_re.len(), x1_im.len()));
    }
    let re = farrow_output(&compute_subfilter_outputs(x1_re, bank)?, params);
    let im = farrow_output(&compute_subfilter_outputs(x1_im, bank)?, params);
    Ok(re
        .samples
        .into_iter()
        .zip(im.samples)
        .map(|(r, i)| Complex64::new(r, i))
        .collect())
}

/// Compensation over spans where the accumulated delay exceeds one sample.
///
/// The delay at column `n` is split into an integer shift `s = round(d)` and a
/// remainder `mu = d - s` with `|mu| <= 0.5`; the output combines the
/// subfilter columns at `n - s` with powers of `mu`. Column `n` of the result
/// corresponds to column `origin + n` of `u`, and `d` is evaluated at `n`.
/// Columns whose shifted index falls outside `u` are `None`.
pub fn farrow_output_wrapped(
    u: &SubfilterOutputs,
    params: &OffsetParams,
    origin: usize,
    len: usize,
) -> Vec<Option<f64>> {
    let degree = u.degree();
    let mut col = vec![0.0; degree + 1];
    (0..len)
        .map(|n| {
            let d = params.delay_at(n);
            let shift = d.round();
            let mu = d - shift;
            let idx = origin as i64 + n as i64 - shift as i64;
            if idx < 0 || idx as usize >= u.len() {
                return None;
            }
            u.column(idx as usize, &mut col);
            Some(horner(&col, mu))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_bank() -> CoefficientBank {
        // L = 3, N_G = 4
        CoefficientBank::from_half_rows(
            4,
            &[
                vec![-0.6, 0.08],
                vec![0.4, -0.3, 0.1],
                vec![0.05, -0.02],
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_odd_order_and_bad_rows() {
        assert_eq!(
            CoefficientBank::new(vec![vec![0.0, 1.0]]),
            Err(FarrowError::OddOrder(1))
        );
        assert_eq!(
            CoefficientBank::new(vec![vec![0.0, 1.0, 0.5]]),
            Err(FarrowError::NotPureDelay(1))
        );
        assert_eq!(
            CoefficientBank::new(vec![vec![0.0, 1.0, 0.0], vec![0.3, 0.0, 0.3]]),
            Err(FarrowError::Symmetry(1))
        );
        assert_eq!(
            CoefficientBank::new(vec![vec![0.0, 1.0, 0.0], vec![0.3, 0.0, -0.3], vec![0.1, 0.2, -0.1]]),
            Err(FarrowError::Symmetry(2))
        );
    }

    #[test]
    fn half_rows_mirror_exactly() {
        let bank = toy_bank();
        assert_eq!(bank.degree(), 3);
        assert_eq!(bank.row(1), &[0.08, -0.6, 0.0, 0.6, -0.08]);
        assert_eq!(bank.row(2), &[0.1, -0.3, 0.4, -0.3, 0.1]);
    }

    #[test]
    fn impulse_reproduces_taps() {
        let bank = toy_bank();
        let order = bank.order();
        let mut x1 = vec![0.0; 2 * order + 1];
        x1[order] = 1.0;
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        // column n sees x1(n + N_G - i); the impulse at index N_G gives g_k(n)
        for k in 0..=bank.degree() {
            for n in 0..=order {
                assert_eq!(u.row(k)[n], bank.row(k)[n], "k={k} n={n}");
            }
        }
    }

    #[test]
    fn pure_delay_row_is_exact_shift() {
        let bank = toy_bank();
        let x1: Vec<f64> = (0..40).map(|i| (0.37 * i as f64).sin() + 0.01 * i as f64).collect();
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        for n in 0..u.len() {
            assert_eq!(u.row(0)[n], x1[n + 2]);
        }
    }

    #[test]
    fn too_short_input_errors() {
        let bank = toy_bank();
        assert_eq!(
            compute_subfilter_outputs(&[1.0; 4], &bank),
            Err(FarrowError::InsufficientData { got: 4, needed: 5 })
        );
        assert_eq!(compute_subfilter_outputs(&[1.0; 5], &bank).unwrap().len(), 1);
    }

    #[test]
    fn zero_params_give_branch_zero() {
        let bank = toy_bank();
        let x1: Vec<f64> = (0..64).map(|i| (0.9 * i as f64).cos()).collect();
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        let y = farrow_output(&u, &OffsetParams::ZERO);
        assert_eq!(y.samples, u.row(0));
        assert_eq!(y.delay_exceeded, 0);
    }

    #[test]
    fn linear_case() {
        let bank = toy_bank().truncated(1);
        let x1: Vec<f64> = (0..32).map(|i| (0.5 * i as f64).sin()).collect();
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        let y = farrow_output(&u, &OffsetParams::new(0.0, 0.3));
        for n in 0..u.len() {
            assert_eq!(y.samples[n], u.row(0)[n] + 0.3 * u.row(1)[n]);
        }
    }

    #[test]
    fn flags_out_of_range_delay() {
        let bank = toy_bank();
        let x1 = vec![1.0; 24];
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        let y = farrow_output(&u, &OffsetParams::new(0.05, 0.2));
        // d(n) = 0.2 + 0.05 n exceeds 0.5 for n >= 7
        assert_eq!(y.delay_exceeded, u.len() - 7);
        assert!(y.delay_out_of_range());
        assert!((y.max_abs_delay - (0.2 + 0.05 * (u.len() - 1) as f64)).abs() < 1e-15);
    }

    #[test]
    fn complex_components_are_independent() {
        let bank = toy_bank();
        let re: Vec<f64> = (0..30).map(|i| (0.2 * i as f64).sin()).collect();
        let im = vec![0.0; 30];
        let y = compensate_complex(&re, &im, &bank, &OffsetParams::new(1e-3, -0.1)).unwrap();
        assert!(y.iter().all(|c| c.im == 0.0));
        let y0 = compensate_complex(&re, &re, &bank, &OffsetParams::ZERO).unwrap();
        for (n, c) in y0.iter().enumerate() {
            assert_eq!(c.re, re[n + 2]);
            assert_eq!(c.im, re[n + 2]);
        }
        assert_eq!(
            compensate_complex(&re, &im[..10], &bank, &OffsetParams::ZERO),
            Err(FarrowError::LengthMismatch(30, 10))
        );
    }

    #[test]
    fn text_round_trip_and_errors() {
        let bank = toy_bank();
        let parsed: CoefficientBank = bank.to_text().parse().unwrap();
        assert_eq!(parsed, bank);
        assert!("3 4\n0 0 1 0 0\n".parse::<CoefficientBank>().is_err());
        assert!("x".parse::<CoefficientBank>().is_err());
    }

    #[test]
    fn wrapped_output_matches_plain_inside_range() {
        let bank = toy_bank();
        let x1: Vec<f64> = (0..80).map(|i| (0.3 * i as f64).sin()).collect();
        let u = compute_subfilter_outputs(&x1, &bank).unwrap();
        let p = OffsetParams::new(1e-3, 0.1);
        let plain = farrow_output(&u.window(3, 40), &p);
        let wrapped = farrow_output_wrapped(&u, &p, 3, 40);
        for n in 0..40 {
            assert!((plain.samples[n] - wrapped[n].unwrap()).abs() < 1e-15);
        }
        // once d passes 0.5 the integer part moves to the index
        let p = OffsetParams::new(0.02, 0.45);
        let wrapped = farrow_output_wrapped(&u, &p, 5, 40);
        for (n, w) in wrapped.iter().enumerate() {
            let d = p.delay_at(n);
            let s = d.round();
            let mut col = vec![0.0; 4];
            u.column(5 + n - s as usize, &mut col);
            assert_eq!(w.unwrap(), horner(&col, d - s));
        }
        assert!(farrow_output_wrapped(&u, &OffsetParams::new(0.0, 3.0), 0, 2)
            .iter()
            .all(Option::is_none));
    }
}
