//! Joint SFO/STO estimation: Newton, iterative least squares and the
//! closed-form first-degree solver.
//!
//! All index-weighted sums (`sum n v_n`, `sum n^2 v_n`) are produced by a cascade
//! of running-sum accumulators followed by a constant-scaled combination, so no
//! per-sample multiplication by `n` is needed.
//!
//! Inputs are a set of subfilter outputs `u` and a reference `x0` aligned so that
//! `y_c(n)` is compared with `x0[n]` for `n in 0..N`.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use thiserror::Error;

use crate::farrow::{
    compute_subfilter_outputs, horner, CoefficientBank, FarrowError, SubfilterOutputs,
    MAX_DESIGN_DELAY,
};
use crate::params::OffsetParams;

#[derive(Debug, Error, PartialEq)]
pub enum EstimationError {
    #[error("empty input")]
    EmptyInput,
    #[error("window length {0} too short, need N > 2")]
    WindowTooShort(usize),
    #[error("invalid estimator config: {0}")]
    InvalidConfig(String),
    #[error("need {needed} samples, got {got}")]
    InsufficientData { got: usize, needed: usize },
    #[error("singular Hessian (det {det:.3e}, |H|_F^2 {norm_sq:.3e})")]
    SingularHessian { det: f64, norm_sq: f64 },
    #[error("singular Q: u1 has {nonzero} nonzero samples, need at least 2")]
    SingularQ { nonzero: usize },
    #[error("non-finite update")]
    NonFinite,
    #[error(transparent)]
    Farrow(#[from] FarrowError),
}

/// Operation counts of one estimator run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub general_mults: u64,
    pub fixed_mults: u64,
    pub additions: u64,
    pub divisions: u64,
}

impl OpCounts {
    pub const fn new(general_mults: u64, fixed_mults: u64, additions: u64, divisions: u64) -> Self {
        Self {
            general_mults,
            fixed_mults,
            additions,
            divisions,
        }
    }

    fn scaled(general: u64, fixed: u64, adds: u64, n: u64) -> Self {
        Self::new(general * n, fixed * n, adds * n, 0)
    }
}

impl Add for OpCounts {
    type Output = OpCounts;
    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts::new(
            self.general_mults + o.general_mults,
            self.fixed_mults + o.fixed_mults,
            self.additions + o.additions,
            self.divisions + o.divisions,
        )
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

// ---------------------------------------------------------------------------
// accumulators

/// Final outputs of up to three cascaded accumulators over `v_0..v_{N-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccumulatorTriple {
    pub a1: f64,
    pub a2: f64,
    pub a3: Option<f64>,
}

/// Index-weighted sums recovered from an [`AccumulatorTriple`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSums {
    /// `sum v_n`
    pub s0: f64,
    /// `sum n v_n`
    pub s1: f64,
    /// `sum n^2 v_n`, only with three stages
    pub s2: Option<f64>,
}

/// Runs `stages` (2 or 3) running-sum accumulators in cascade and returns the
/// final value of each stage.
pub fn cascaded_accumulate(v: &[f64], stages: usize) -> Result<AccumulatorTriple, EstimationError> {
    if v.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    if !(2..=3).contains(&stages) {
        return Err(EstimationError::InvalidConfig(format!(
            "accumulator stages must be 2 or 3, got {stages}"
        )));
    }
    Ok(accumulate(v, stages == 3))
}

fn accumulate(v: &[f64], third: bool) -> AccumulatorTriple {
    let (mut c1, mut c2, mut c3) = (0.0, 0.0, 0.0);
    for &x in v {
        c1 += x;
        c2 += c1;
        if third {
            c3 += c2;
        }
    }
    AccumulatorTriple {
        a1: c1,
        a2: c2,
        a3: third.then_some(c3),
    }
}

/// `S1 = N A1 - A2`, `S2 = N^2 A1 - (2N + 1) A2 + 2 A3`.
pub fn weighted_sums(acc: AccumulatorTriple, n: usize) -> WeightedSums {
    let nf = n as f64;
    WeightedSums {
        s0: acc.a1,
        s1: nf * acc.a1 - acc.a2,
        s2: acc.a3.map(|a3| nf * nf * acc.a1 - (2.0 * nf + 1.0) * acc.a2 + 2.0 * a3),
    }
}

fn accumulator_ops(count: u64, n: u64) -> OpCounts {
    OpCounts::new(0, 0, count * (n - 1), 0)
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    Ils,
    Simplified,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Ils => "ils",
            Method::Simplified => "simplified",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "newton" | "nm" => Ok(Method::Newton),
            "ils" => Ok(Method::Ils),
            "simplified" | "ls" => Ok(Method::Simplified),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub max_iterations: usize,
    /// Stop once `max(|delta_update|, |epsilon_update|)` falls below this.
    pub tolerance: f64,
    /// Window length `N`.
    pub n: usize,
}

impl EstimatorConfig {
    pub fn new(method: Method, n: usize) -> Self {
        Self {
            method,
            max_iterations: 2,
            tolerance: 1e-8,
            n,
        }
    }

    pub fn with_iterations(mut self, m: usize) -> Self {
        self.max_iterations = m;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<(), EstimationError> {
        if self.n <= 2 {
            return Err(EstimationError::WindowTooShort(self.n));
        }
        if self.max_iterations == 0 {
            return Err(EstimationError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(EstimationError::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// per-sample quantities

/// `(y, dy/dd, d^2y/dd^2)` for one column of subfilter outputs.
#[inline]
fn horner2(c: &[f64], d: f64) -> (f64, f64, f64) {
    let last = c.len() - 1;
    let mut p = c[last];
    let mut p1 = 0.0;
    let mut p2 = 0.0;
    for &ck in c[..last].iter().rev() {
        p2 = p2 * d + p1;
        p1 = p1 * d + p;
        p = p * d + ck;
    }
    (p, p1, 2.0 * p2)
}

/// First and second derivatives of `F_n = (y_c(n) - x0(n))^2 / 2` with respect
/// to the delay `d = n delta + epsilon`.
pub fn per_sample_derivatives(
    u: &SubfilterOutputs,
    x0: &[f64],
    params: &OffsetParams,
    n: usize,
) -> (f64, f64) {
    let mut col = vec![0.0; u.degree() + 1];
    u.column(n, &mut col);
    let (y, y1, y2) = horner2(&col, params.delay_at(n));
    let e = y - x0[n];
    (e * y1, y1 * y1 + e * y2)
}

fn check_inputs(u: &SubfilterOutputs, x0: &[f64], n: usize) -> Result<(), EstimationError> {
    if n <= 2 {
        return Err(EstimationError::WindowTooShort(n));
    }
    let have = u.len().min(x0.len());
    if have < n {
        return Err(EstimationError::InsufficientData { got: have, needed: n });
    }
    Ok(())
}

/// Batch cost `F = 1/2 sum (y_c(n) - x0(n))^2` over `n < N`.
pub fn batch_cost(u: &SubfilterOutputs, x0: &[f64], params: &OffsetParams, n: usize) -> f64 {
    let mut col = vec![0.0; u.degree() + 1];
    (0..n)
        .map(|i| {
            u.column(i, &mut col);
            let e = horner(&col, params.delay_at(i)) - x0[i];
            0.5 * e * e
        })
        .sum()
}

// ---------------------------------------------------------------------------
// 2x2 algebra

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + 2.0 * self.b * self.b + self.c * self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.det() > 0.0
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.a + self.c);
        let r = (0.25 * (self.a - self.c).powi(2) + self.b * self.b).sqrt();
        (m - r, m + r)
    }

    fn singular(&self) -> bool {
        self.det().abs() < 1e3 * f64::EPSILON * self.frobenius_sq() || !self.det().is_finite()
    }

    /// `M^{-1} g` through the explicit inverse.
    fn solve(&self, g: [f64; 2]) -> [f64; 2] {
        let inv = 1.0 / self.det();
        [
            (self.c * g[0] - self.b * g[1]) * inv,
            (-self.b * g[0] + self.a * g[1]) * inv,
        ]
    }

    fn from_sums(s: WeightedSums) -> Sym2 {
        Sym2 {
            a: s.s2.expect("three-stage sums"),
            b: s.s1,
            c: s.s0,
        }
    }
}

const SOLVE_OPS: OpCounts = OpCounts::new(8, 0, 3, 1);
const UPDATE_OPS: OpCounts = OpCounts::new(0, 0, 2, 0);

fn apply(params: OffsetParams, step: [f64; 2]) -> Result<OffsetParams, EstimationError> {
    let next = OffsetParams::new(params.delta - step[0], params.epsilon - step[1]);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(EstimationError::NonFinite)
    }
}

// ---------------------------------------------------------------------------
// Newton

/// Newton iterate with the gradient and Hessian of the batch cost at `params`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonState {
    pub params: OffsetParams,
    /// `[dF/d delta, dF/d epsilon]`
    pub gradient: [f64; 2],
    pub hessian: Sym2,
    pub cost: f64,
    pub iteration: usize,
}

impl NewtonState {
    pub fn grad_norm(&self) -> f64 {
        self.gradient[0].hypot(self.gradient[1])
    }

    pub fn is_indefinite(&self) -> bool {
        !self.hessian.is_positive_definite()
    }
}

/// Assembles gradient and Hessian at `params` from the cascaded accumulators.
fn newton_assemble(
    u: &SubfilterOutputs,
    x0: &[f64],
    params: OffsetParams,
    n: usize,
) -> (Sym2, [f64; 2], f64, OpCounts) {
    let degree = u.degree();
    let mut col = vec![0.0; degree + 1];
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut cost = 0.0;
    for i in 0..n {
        u.column(i, &mut col);
        let (y, y1, y2) = horner2(&col, params.delay_at(i));
        let e = y - x0[i];
        cost += 0.5 * e * e;
        first.push(e * y1);
        second.push(y1 * y1 + e * y2);
    }
    let h = Sym2::from_sums(weighted_sums(accumulate(&second, true), n));
    let gs = weighted_sums(accumulate(&first, false), n);
    (h, [gs.s1, gs.s0], cost, newton_assembly_ops(degree, n))
}

fn newton_assembly_ops(degree: usize, n: usize) -> OpCounts {
    let l = degree as u64;
    let n = n as u64;
    // d and its powers up to d^(L-2)
    let powers = OpCounts::scaled(l.saturating_sub(3), 0, 1, n);
    let derivatives = if degree >= 2 {
        OpCounts::scaled(4, 2 * l - 2, 2 * l - 1, n)
    } else {
        OpCounts::scaled(2, 0, 1, n)
    };
    let combine = OpCounts::new(0, 5, 4, 0);
    powers + derivatives + accumulator_ops(5, n) + combine
}

/// Gradient, Hessian and cost at `params`.
pub fn newton_state(
    u: &SubfilterOutputs,
    x0: &[f64],
    params: OffsetParams,
    n: usize,
) -> Result<NewtonState, EstimationError> {
    check_inputs(u, x0, n)?;
    let (hessian, gradient, cost, _) = newton_assemble(u, x0, params, n);
    Ok(NewtonState {
        params,
        gradient,
        hessian,
        cost,
        iteration: 0,
    })
}

fn newton_update(state: &NewtonState) -> Result<[f64; 2], EstimationError> {
    if state.hessian.singular() {
        return Err(EstimationError::SingularHessian {
            det: state.hessian.det(),
            norm_sq: state.hessian.frobenius_sq(),
        });
    }
    Ok(state.hessian.solve(state.gradient))
}

/// One Newton update `w - H^{-1} g`; the returned state is evaluated at the new
/// point. Indefinite Hessians are not rejected.
pub fn newton_step(
    u: &SubfilterOutputs,
    x0: &[f64],
    state: &NewtonState,
    n: usize,
) -> Result<NewtonState, EstimationError> {
    check_inputs(u, x0, n)?;
    let step = newton_update(state)?;
    let params = apply(state.params, step)?;
    let mut next = newton_state(u, x0, params, n)?;
    next.iteration = state.iteration + 1;
    Ok(next)
}

// ---------------------------------------------------------------------------
// ILS

/// `Q = [[sum n^2 u1^2, sum n u1^2], [sum n u1^2, sum u1^2]]`, independent of
/// the parameters.
pub fn ils_assemble_q(u1: &[f64], n: usize) -> Result<Sym2, EstimationError> {
    if u1.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    if u1.len() < n {
        return Err(EstimationError::InsufficientData { got: u1.len(), needed: n });
    }
    let u1 = &u1[..n];
    let nonzero = u1.iter().filter(|&&x| x != 0.0).count();
    if nonzero < 2 {
        return Err(EstimationError::SingularQ { nonzero });
    }
    let sq: Vec<f64> = u1.iter().map(|x| x * x).collect();
    Ok(Sym2::from_sums(weighted_sums(accumulate(&sq, true), n)))
}

// S1 takes one fixed product, S2 three
fn ils_q_ops(n: usize) -> OpCounts {
    OpCounts::scaled(1, 0, 0, n as u64) + accumulator_ops(3, n as u64) + OpCounts::new(0, 4, 3, 0)
}

fn ils_residual_ops(n: usize) -> OpCounts {
    let n = n as u64;
    // d, residual and the u1 r product, then two accumulators and S1
    OpCounts::scaled(1, 0, 2, n) + accumulator_ops(2, n) + OpCounts::new(0, 1, 1, 0)
}

/// `c = [sum n u1 r, sum u1 r]` with `r = y_c - x0` at `params`.
fn ils_residual_sums(u: &SubfilterOutputs, x0: &[f64], params: OffsetParams, n: usize) -> [f64; 2] {
    let mut col = vec![0.0; u.degree() + 1];
    let u1 = u.row(1);
    let v: Vec<f64> = (0..n)
        .map(|i| {
            u.column(i, &mut col);
            let r = horner(&col, params.delay_at(i)) - x0[i];
            u1[i] * r
        })
        .collect();
    let s = weighted_sums(accumulate(&v, false), n);
    [s.s1, s.s0]
}

/// One ILS update `w - Q^{-1} c` with a precomputed `Q`.
pub fn ils_step(
    u: &SubfilterOutputs,
    x0: &[f64],
    params: OffsetParams,
    q: &Sym2,
    n: usize,
) -> Result<OffsetParams, EstimationError> {
    check_inputs(u, x0, n)?;
    if u.degree() < 1 {
        return Err(EstimationError::InvalidConfig("ILS needs a first-degree branch".into()));
    }
    if q.singular() {
        return Err(EstimationError::SingularQ { nonzero: 0 });
    }
    let c = ils_residual_sums(u, x0, params, n);
    apply(params, q.solve(c))
}

// ---------------------------------------------------------------------------
// closed-form first degree

/// `theta = -H^{-1} b` with `b = [sum n u1 (u0 - x0), sum u1 (u0 - x0)]`.
pub fn simplified_solve(
    u0: &[f64],
    u1: &[f64],
    x0: &[f64],
    n: usize,
) -> Result<OffsetParams, EstimationError> {
    if n <= 2 {
        return Err(EstimationError::WindowTooShort(n));
    }
    let have = u0.len().min(x0.len());
    if have < n {
        return Err(EstimationError::InsufficientData { got: have, needed: n });
    }
    let h = ils_assemble_q(u1, n)?;
    if h.singular() {
        return Err(EstimationError::SingularHessian {
            det: h.det(),
            norm_sq: h.frobenius_sq(),
        });
    }
    let v: Vec<f64> = (0..n).map(|i| u1[i] * (u0[i] - x0[i])).collect();
    let s = weighted_sums(accumulate(&v, false), n);
    let theta = h.solve([s.s1, s.s0]);
    let p = OffsetParams::new(-theta[0], -theta[1]);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(EstimationError::NonFinite)
    }
}

fn simplified_ops(n: usize) -> OpCounts {
    let n = n as u64;
    OpCounts::scaled(2, 0, 1, n) + accumulator_ops(5, n) + OpCounts::new(0, 5, 4, 0) + SOLVE_OPS
}

// ---------------------------------------------------------------------------
// driver

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Parameters after this iteration's update.
    pub params: OffsetParams,
    pub update: [f64; 2],
    /// Diagnostics at `params`.
    pub grad_norm: f64,
    pub cost: f64,
    pub d_exceeded: bool,
    /// The Hessian used for this update was not positive definite.
    pub indefinite: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimationTrace {
    pub records: Vec<IterationRecord>,
    pub op_counts: OpCounts,
}

impl EstimationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn any_indefinite(&self) -> bool {
        self.records.iter().any(|r| r.indefinite)
    }

    pub fn any_d_exceeded(&self) -> bool {
        self.records.iter().any(|r| r.d_exceeded)
    }

    /// CSV with header `iter,delta_ppm,epsilon,grad_norm,cost,flag_d_exceeded`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,delta_ppm,epsilon,grad_norm,cost,flag_d_exceeded\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.iteration,
                r.params.delta_ppm(),
                r.params.epsilon,
                r.grad_norm,
                r.cost,
                u8::from(r.d_exceeded)
            );
        }
        s
    }
}

/// Estimates `(delta, epsilon)` from precomputed subfilter outputs and an
/// aligned reference, starting from `(0, 0)`.
pub fn estimate_from_outputs(
    u: &SubfilterOutputs,
    x0: &[f64],
    config: &EstimatorConfig,
) -> Result<(OffsetParams, EstimationTrace), EstimationError> {
    config.validate()?;
    let n = config.n;
    check_inputs(u, x0, n)?;
    if u.degree() < 1 {
        return Err(EstimationError::InvalidConfig("bank must have degree at least 1".into()));
    }
    let mut trace = EstimationTrace::default();
    let record = |iteration, params: OffsetParams, update, state: &NewtonState, indefinite| IterationRecord {
        iteration,
        params,
        update,
        grad_norm: state.grad_norm(),
        cost: state.cost,
        d_exceeded: params.max_abs_delay(n) > MAX_DESIGN_DELAY,
        indefinite,
    };

    let start = OffsetParams::ZERO;
    let params = match config.method {
        Method::Newton => {
            let (h, g, cost, ops) = newton_assemble(u, x0, start, n);
            let mut state = NewtonState {
                params: start,
                gradient: g,
                hessian: h,
                cost,
                iteration: 0,
            };
            let mut pending = ops;
            for m in 1..=config.max_iterations {
                trace.op_counts += pending + SOLVE_OPS + UPDATE_OPS;
                let indefinite = state.is_indefinite();
                let step = newton_update(&state)?;
                let params = apply(state.params, step)?;
                let (h, g, cost, ops) = newton_assemble(u, x0, params, n);
                pending = ops;
                state = NewtonState {
                    params,
                    gradient: g,
                    hessian: h,
                    cost,
                    iteration: m,
                };
                trace.records.push(record(m, params, step, &state, indefinite));
                if step[0].abs().max(step[1].abs()) < config.tolerance {
                    break;
                }
            }
            state.params
        }
        Method::Ils => {
            let q = ils_assemble_q(u.row(1), n)?;
            trace.op_counts += ils_q_ops(n);
            let mut params = start;
            for m in 1..=config.max_iterations {
                let next = ils_step(u, x0, params, &q, n)?;
                trace.op_counts += ils_residual_ops(n) + SOLVE_OPS + UPDATE_OPS;
                let step = [params.delta - next.delta, params.epsilon - next.epsilon];
                params = next;
                let state = newton_state(u, x0, params, n)?;
                trace.records.push(record(m, params, step, &state, false));
                if step[0].abs().max(step[1].abs()) < config.tolerance {
                    break;
                }
            }
            params
        }
        Method::Simplified => {
            let params = simplified_solve(u.row(0), u.row(1), x0, n)?;
            trace.op_counts += simplified_ops(n);
            let state = newton_state(&u.truncated(1), x0, params, n)?;
            trace
                .records
                .push(record(1, params, [-params.delta, -params.epsilon], &state, false));
            params
        }
    };
    Ok((params, trace))
}

/// Runs the subfilters over `x1` and estimates against `x0`.
///
/// Both arrays start at the same time index, `N_G / 2` samples before the first
/// window sample, and must hold at least `N + N_G` samples.
pub fn estimate(
    x0: &[f64],
    x1: &[f64],
    bank: &CoefficientBank,
    config: &EstimatorConfig,
) -> Result<(OffsetParams, EstimationTrace), EstimationError> {
    config.validate()?;
    let (u, x0w) = prepare(x0, x1, bank, config.n)?;
    estimate_from_outputs(&u, x0w, config)
}

fn prepare<'a>(
    x0: &'a [f64],
    x1: &[f64],
    bank: &CoefficientBank,
    n: usize,
) -> Result<(SubfilterOutputs, &'a [f64]), EstimationError> {
    let order = bank.order();
    let needed = n + order;
    let got = x0.len().min(x1.len());
    if got < needed {
        return Err(EstimationError::InsufficientData { got, needed });
    }
    let u = compute_subfilter_outputs(&x1[..needed], bank)?;
    Ok((u, &x0[order / 2..order / 2 + n]))
}

/// Analytic operation counts for `iterations` iterations of `method`.
pub fn count_operations(method: Method, degree: usize, n: usize, iterations: usize) -> OpCounts {
    let it = iterations as u64;
    let nn = n as u64;
    match method {
        Method::Newton => {
            let l = degree as u64;
            let per = if degree >= 2 {
                OpCounts::new((l + 1).max(4) * nn + 8, (2 * l - 2) * nn + 5, (2 * l + 5) * nn + 4, 1)
            } else {
                OpCounts::new(2 * nn + 8, 5, 7 * nn + 4, 1)
            };
            OpCounts::new(
                per.general_mults * it,
                per.fixed_mults * it,
                per.additions * it,
                per.divisions * it,
            )
        }
        Method::Ils => {
            if it == 0 {
                return OpCounts::default();
            }
            let first = OpCounts::new(2 * nn + 8, 5, 7 * nn + 4, 1);
            let reuse = OpCounts::new(nn + 8, 1, 4 * nn + 4, 1);
            let r = it - 1;
            first
                + OpCounts::new(
                    reuse.general_mults * r,
                    reuse.fixed_mults * r,
                    reuse.additions * r,
                    reuse.divisions * r,
                )
        }
        Method::Simplified => OpCounts::new(2 * nn + 8, 5, 6 * nn + 2, 1),
    }
}

// ---------------------------------------------------------------------------
// SFO-only ablation

/// Estimates `delta` alone with `epsilon` held at zero, by scalar Newton or
/// scalar ILS. Only meant to show the bias of ignoring the time offset.
pub fn estimate_sfo_only(
    x0: &[f64],
    x1: &[f64],
    bank: &CoefficientBank,
    method: Method,
    n: usize,
    iterations: usize,
) -> Result<OffsetParams, EstimationError> {
    if n <= 2 {
        return Err(EstimationError::WindowTooShort(n));
    }
    let (u, x0w) = prepare(x0, x1, bank, n)?;
    let mut params = OffsetParams::ZERO;
    let q = match method {
        Method::Ils => {
            let q = ils_assemble_q(u.row(1), n)?;
            Some(q.a)
        }
        _ => None,
    };
    for _ in 0..iterations {
        let step = match q {
            Some(qa) => ils_residual_sums(&u, x0w, params, n)[0] / qa,
            None => {
                let (h, g, _, _) = newton_assemble(&u, x0w, params, n);
                g[0] / h.a
            }
        };
        params = OffsetParams::new(params.delta - step, 0.0);
        if !params.is_finite() {
            return Err(EstimationError::NonFinite);
        }
    }
    Ok(params)
}
