use std::f64::consts::PI;

use farrow_sync::estimation::{
    batch_cost, cascaded_accumulate, count_operations, ils_assemble_q, ils_step, newton_state, newton_step,
    simplified_solve, weighted_sums, EstimationError, Method,
};
use farrow_sync::farrow::SubfilterOutputs;
use farrow_sync::{design_bank, estimate, estimate_from_outputs, DesignSpec, EstimatorConfig, OffsetParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn direct_sum(v: &[f64], power: i32) -> (f64, f64) {
    let mut s = 0.0;
    let mut scale = 0.0;
    for (n, &x) in v.iter().enumerate() {
        let w = (n as f64).powi(power);
        s += w * x;
        scale += w * x.abs();
    }
    (s, scale)
}

/// Random subfilter outputs shaped like a real bank, taps falling with `k`.
fn random_batch(rng: &mut ChaCha8Rng, degree: usize, n: usize) -> (SubfilterOutputs, Vec<f64>, OffsetParams) {
    let mut fact = 1.0;
    let rows: Vec<Vec<f64>> = (0..=degree)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) / fact).collect()
        })
        .collect();
    let u = SubfilterOutputs::from_rows(rows).unwrap();
    let x0: Vec<f64> = (0..n)
        .map(|i| u.row(0)[i] + 0.3 * u.row(1)[i] + 0.05 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let span = 0.45 / n as f64;
    let p = OffsetParams::new(rng.random_range(-span..span), rng.random_range(-0.4..0.4) * 0.1);
    (u, x0, p)
}

#[test]
fn cascade_matches_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..3000);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = weighted_sums(cascaded_accumulate(&v, 3).unwrap(), n);
        for (got, power) in [(s.s0, 0), (s.s1, 1), (s.s2.unwrap(), 2)] {
            let (want, scale) = direct_sum(&v, power);
            worst = worst.max((got - want).abs() / scale);
        }
    }
    assert!(worst < 1e-11, "worst relative error {worst:e}");
}

#[test]
fn accumulator_stage_count_is_checked() {
    assert!(matches!(cascaded_accumulate(&[], 2), Err(EstimationError::EmptyInput)));
    assert!(cascaded_accumulate(&[1.0], 4).is_err());
    assert!(cascaded_accumulate(&[1.0, 2.0], 2).unwrap().a3.is_none());
}

/// Central difference in scaled coordinates `(N delta, epsilon)`, refined by
/// one Richardson step.
fn fd_gradient_hessian(u: &SubfilterOutputs, x0: &[f64], p: OffsetParams, n: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let nf = n as f64;
    let f = |s0: f64, s1: f64| batch_cost(u, x0, &OffsetParams::new(p.delta + s0 / nf, p.epsilon + s1), n);
    let grad = |h: f64| {
        [
            (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
            (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
        ]
    };
    let hess = |h: f64| {
        let f0 = f(0.0, 0.0);
        let aa = (f(h, 0.0) - 2.0 * f0 + f(-h, 0.0)) / (h * h);
        let cc = (f(0.0, h) - 2.0 * f0 + f(0.0, -h)) / (h * h);
        let bb = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        [[aa, bb], [bb, cc]]
    };
    let h = 1e-2;
    let (g1, g2) = (grad(h), grad(h / 2.0));
    let (h1, h2) = (hess(h), hess(h / 2.0));
    let r = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    (
        [r(g1[0], g2[0]), r(g1[1], g2[1])],
        [
            [r(h1[0][0], h2[0][0]), r(h1[0][1], h2[0][1])],
            [r(h1[1][0], h2[1][0]), r(h1[1][1], h2[1][1])],
        ],
    )
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for degree in 1..=5 {
        for _ in 0..100 {
            let n = rng.random_range(50..400);
            let (u, x0, p) = random_batch(&mut rng, degree, n);
            let st = newton_state(&u, &x0, p, n).unwrap();
            let nf = n as f64;
            let g = [st.gradient[0] / nf, st.gradient[1]];
            let h = [[st.hessian.a / (nf * nf), st.hessian.b / nf], [st.hessian.b / nf, st.hessian.c]];
            let (gf, hf) = fd_gradient_hessian(&u, &x0, p, n);
            let g_err = (g[0] - gf[0]).hypot(g[1] - gf[1]) / g[0].hypot(g[1]);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    num += (h[i][j] - hf[i][j]).powi(2);
                    den += h[i][j].powi(2);
                }
            }
            let h_err = (num / den).sqrt();
            assert!(g_err < 1e-5, "L={degree} gradient {g_err:e}");
            assert!(h_err < 1e-5, "L={degree} hessian {h_err:e}");
        }
    }
}

#[test]
fn first_degree_newton_is_ils_and_converges_in_one_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 512;
    let (u, x0, _) = random_batch(&mut rng, 1, n);
    let q = ils_assemble_q(u.row(1), n).unwrap();
    let nf = n as f64;
    for _ in 0..50 {
        let w = OffsetParams::new(rng.random_range(-1e-3..1e-3), rng.random_range(-0.5..0.5));
        let s1 = newton_step(&u, &x0, &newton_state(&u, &x0, w, n).unwrap(), n).unwrap();
        let i1 = ils_step(&u, &x0, w, &q, n).unwrap();
        assert!(nf * (s1.params.delta - i1.delta).abs() < 1e-12);
        assert!((s1.params.epsilon - i1.epsilon).abs() < 1e-12);
        let s2 = newton_step(&u, &x0, &s1, n).unwrap();
        let step = (nf * (s2.params.delta - s1.params.delta)).hypot(s2.params.epsilon - s1.params.epsilon);
        assert!(step < 1e-12, "second update {step:e}");
    }
}

#[test]
fn q_is_positive_definite_with_two_nonzeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let n = rng.random_range(3..500);
        let nonzero = rng.random_range(2..=n.min(6));
        let mut u1 = vec![0.0; n];
        for _ in 0..nonzero {
            // may hit the same index twice, so place until the count holds
            loop {
                let i = rng.random_range(0..n);
                if u1[i] == 0.0 {
                    let mag: f64 = rng.random_range(0.1..1.0);
                    u1[i] = if rng.random::<bool>() { mag } else { -mag };
                    break;
                }
            }
        }
        let q = ils_assemble_q(&u1, n).unwrap();
        assert!(q.det() > 0.0);
        assert!(q.is_positive_definite());
    }
}

#[test]
fn q_is_singular_with_one_nonzero() {
    let n = 64;
    assert!(matches!(ils_assemble_q(&vec![0.0; n], n), Err(EstimationError::SingularQ { nonzero: 0 })));
    for i in [0, 5, 63] {
        let mut u1 = vec![0.0; n];
        u1[i] = 0.7;
        // exact: (i^2 u^2)(u^2) - (i u^2)^2 = 0
        let (a, b, c) = ((i * i) as f64 * 0.49, i as f64 * 0.49, 0.49);
        assert!((a * c - b * b).abs() <= 1e-15 * a.max(1.0));
        assert!(matches!(ils_assemble_q(&u1, n), Err(EstimationError::SingularQ { nonzero: 1 })));
    }
}

fn table_counts(method: Method, l: u64, n: u64) -> [u64; 4] {
    // [fixed, general, additions, divisions] per block of N samples
    match (method, l) {
        (Method::Newton, l) if l >= 2 => [(2 * l - 2) * n + 5, (l + 1).max(4) * n + 8, (2 * l + 5) * n + 4, 1],
        _ => [5, 2 * n + 8, 7 * n + 4, 1],
    }
}

#[test]
fn instrumented_counts_follow_the_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for method in [Method::Newton, Method::Ils] {
        for degree in 1..=5usize {
            for n in [64usize, 1024] {
                let (u, x0, _) = random_batch(&mut rng, degree, n);
                let cfg = EstimatorConfig::new(method, n)
                    .with_iterations(1)
                    .with_tolerance(f64::MIN_POSITIVE);
                let (_, trace) = estimate_from_outputs(&u, &x0, &cfg).unwrap();
                let c = trace.op_counts;
                let want = table_counts(method, degree as u64, n as u64);
                assert_eq!(
                    [c.fixed_mults, c.general_mults, c.additions, c.divisions],
                    want,
                    "{method:?} L={degree} N={n}"
                );
                for m in 1..=3 {
                    let cfg = cfg.with_iterations(m);
                    let (_, trace) = estimate_from_outputs(&u, &x0, &cfg).unwrap();
                    assert_eq!(trace.iterations(), m);
                    assert_eq!(trace.op_counts, count_operations(method, degree, n, m));
                }
            }
        }
    }
}

#[test]
fn simplified_equals_one_ils_step_from_zero() {
    let spec = DesignSpec::new(4, 16, 0.9 * PI);
    let bank = design_bank(&spec, spec.default_grid()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 300;
    for _ in 0..20 {
        let (u, x0, _) = random_batch(&mut rng, 4, n);
        let s = simplified_solve(u.row(0), u.row(1), &x0, n).unwrap();
        let q = ils_assemble_q(u.row(1), n).unwrap();
        let i = ils_step(&u, &x0, OffsetParams::ZERO, &q, n).unwrap();
        assert_eq!(s, i);
    }
    let x: Vec<f64> = (0..n + 16).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cfg = EstimatorConfig::new(Method::Simplified, n);
    assert!(estimate(&x, &x, &bank, &cfg).is_ok());
}

#[test]
fn short_windows_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (u, x0, _) = random_batch(&mut rng, 2, 10);
    for n in [0, 1, 2] {
        let cfg = EstimatorConfig::new(Method::Newton, n);
        assert!(estimate_from_outputs(&u, &x0, &cfg).is_err());
    }
    let cfg = EstimatorConfig::new(Method::Newton, 3);
    assert!(estimate_from_outputs(&u, &x0, &cfg).is_ok());
}

proptest! {
    #[test]
    fn two_stage_cascade_gives_first_moments(v in prop::collection::vec(-10.0..10.0f64, 1..200)) {
        let n = v.len();
        let s = weighted_sums(cascaded_accumulate(&v, 2).unwrap(), n);
        let (s0, c0) = direct_sum(&v, 0);
        let (s1, c1) = direct_sum(&v, 1);
        prop_assert!((s.s0 - s0).abs() <= 1e-12 * c0.max(1.0));
        prop_assert!((s.s1 - s1).abs() <= 1e-12 * c1.max(1.0));
        prop_assert!(s.s2.is_none());
    }

    #[test]
    fn cost_is_nonnegative_and_zero_at_exact_fit(seed in any::<u64>(), delta in -1e-3..1e-3f64, eps in -0.2..0.2f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 100;
        let (u, _, _) = random_batch(&mut rng, 3, n);
        let p = OffsetParams::new(delta, eps);
        let x0: Vec<f64> = (0..n)
            .map(|i| {
                let d = p.delay_at(i);
                (0..=3).map(|k| d.powi(k) * u.row(k as usize)[i]).sum()
            })
            .collect();
        prop_assert!(batch_cost(&u, &x0, &p, n) < 1e-25);
        prop_assert!(batch_cost(&u, &x0, &OffsetParams::ZERO, n) >= 0.0);
    }
}
