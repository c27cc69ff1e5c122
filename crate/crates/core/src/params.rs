//! Offset parameter pair shared by the compensator and the estimators.

/// Sampling-period mismatch and initial timing offset, both in units of the
/// reference sampling period.
///
/// The fractional delay applied to sample `n` is `n * delta + epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OffsetParams {
    pub delta: f64,
    pub epsilon: f64,
}

impl OffsetParams {
    pub const ZERO: OffsetParams = OffsetParams {
        delta: 0.0,
        epsilon: 0.0,
    };

    pub fn new(delta: f64, epsilon: f64) -> Self {
        Self { delta, epsilon }
    }

    /// Builds parameters from values given in parts per million.
    pub fn from_ppm(delta_ppm: f64, epsilon_ppm: f64) -> Self {
        Self::new(delta_ppm * 1e-6, epsilon_ppm * 1e-6)
    }

    /// Relation between the frequency offset of the second clock and the
    /// sampling-period mismatch: `delta = -df / (f0 + df)`.
    pub fn delta_from_frequency_offset(f0: f64, df: f64) -> f64 {
        -df / (f0 + df)
    }

    pub fn delta_ppm(&self) -> f64 {
        self.delta * 1e6
    }

    pub fn epsilon_ppm(&self) -> f64 {
        self.epsilon * 1e6
    }

    #[inline]
    pub fn delay_at(&self, n: usize) -> f64 {
        n as f64 * self.delta + self.epsilon
    }

    /// Largest `|n * delta + epsilon|` over `n = 0..len`. The delay is affine in `n`,
    /// so the extremes sit at the window ends.
    pub fn max_abs_delay(&self, len: usize) -> f64 {
        if len == 0 {
            return 0.0;
        }
        self.delay_at(0).abs().max(self.delay_at(len - 1).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.delta.is_finite() && self.epsilon.is_finite()
    }
}

impl std::ops::Sub for OffsetParams {
    type Output = OffsetParams;

    fn sub(self, rhs: OffsetParams) -> OffsetParams {
        OffsetParams::new(self.delta - rhs.delta, self.epsilon - rhs.epsilon)
    }
}

/// Upper bound on the window length that keeps `|n * delta + epsilon| <= 0.5`,
/// or `None` when no finite bound applies (`delta == 0`).
pub fn max_window_len(params: &OffsetParams) -> Option<f64> {
    if params.delta == 0.0 {
        return None;
    }
    Some((0.5 - params.epsilon.abs()) / params.delta.abs())
}
