use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use netrecon::dictionary::{build_design_matrix, evaluate_basis, BasisFunction, DictionarySpec, RationalMode};
use netrecon::pipeline::reconstruct;
use netrecon::rvm::{fit_rvm, log_marginal_direct, log_marginal_woodbury, posterior, RvmOptions};
use netrecon::simulator::{repressilator_model, NoiseSpec, OdeModel, RepressilatorParams, Term};
use netrecon::timeseries::TimeSeries;

fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

fn planted(seed: u64, m: usize, n: usize, k: usize, sd: f64) -> (DMatrix<f64>, DVector<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = gaussian(&mut rng, m, n);
    let mut support = rand::seq::index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut w = DVector::zeros(n);
    for &j in &support {
        w[j] = rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    let noise = DVector::from_fn(m, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    (phi.clone(), &phi * w + noise, support)
}

fn short_repressilator(seed: u64, q: f64) -> TimeSeries {
    repressilator_model(&RepressilatorParams::default())
        .unwrap()
        .simulate_euler(&[0.2, 0.1, 0.3, 0.1, 0.4, 0.5], 0.1, 120, &NoiseSpec::new(q, seed))
        .unwrap()
}

proptest! {
    #[test]
    fn hill_columns_sum_to_one(x in 0.0f64..1e3, coeff in 1u32..=8) {
        let r = BasisFunction::HillRepress { var: 0, coeff }.eval(&[x]).unwrap();
        let a = BasisFunction::HillActivate { var: 0, coeff }.eval(&[x]).unwrap();
        prop_assert!((r + a - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn csv_round_trip_is_exact(
        rows in 2usize..20,
        cols in 1usize..5,
        seed in any::<u64>(),
        step in 1e-3f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1e3..1e3));
        let ts = TimeSeries::new(states, step).unwrap();
        let back = TimeSeries::read_csv(ts.to_csv_string().as_bytes(), None).unwrap();
        prop_assert_eq!(back.states(), ts.states());
        prop_assert!((back.step() - step).abs() <= 1e-9 * step);
    }

    #[test]
    fn finite_differences_are_linear(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 10, 3);
        let b = gaussian(&mut rng, 10, 3);
        let ta = TimeSeries::new(a.clone(), 0.1).unwrap().finite_difference_targets();
        let tb = TimeSeries::new(b.clone(), 0.1).unwrap().finite_difference_targets();
        let tab = TimeSeries::new(&a * c + &b, 0.1).unwrap().finite_difference_targets();
        for i in 0..3 {
            let diff = (tab.column(i) - (ta.column(i) * c + tb.column(i))).amax();
            prop_assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn design_matrix_matches_pointwise_evaluation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = DMatrix::from_fn(8, 3, |_, _| rng.random_range(0.0..4.0));
        let ts = TimeSeries::new(states, 0.5).unwrap();
        let spec = DictionarySpec {
            monomial_max_degree: Some(2),
            ..DictionarySpec::linear_hill_constant(3, &[1, 3])
        };
        let dm = build_design_matrix(&ts, &spec, None).unwrap();
        prop_assert_eq!(dm.values.nrows(), 7);
        for k in 0..7 {
            let x = ts.row(k);
            for (j, f) in dm.basis.iter().enumerate() {
                prop_assert_eq!(dm.values[(k, j)], f.eval(&x).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn posterior_mean_is_ridge_solution(seed in any::<u64>(), a in 0.1f64..10.0, beta in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.random_range(5..40), rng.random_range(1..15));
        let phi = gaussian(&mut rng, m, n);
        let y = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        let post = posterior(&phi, &y, &vec![a; n], beta).unwrap();
        let lhs = phi.tr_mul(&phi) + DMatrix::identity(n, n) * (a / beta);
        let ridge = lhs.lu().solve(&phi.tr_mul(&y)).unwrap();
        prop_assert!((post.mean - ridge).amax() <= 1e-10);
    }

    #[test]
    fn evidence_routes_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.random_range(3..30), rng.random_range(1..30));
        let phi = gaussian(&mut rng, m, n);
        let y = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let beta = rng.random_range(0.1..10.0);
        let w = log_marginal_woodbury(&phi, &y, &alpha, beta).unwrap();
        let d = log_marginal_direct(&phi, &y, &alpha, beta).unwrap();
        prop_assert!((w - d).abs() <= 1e-8 * (1.0 + d.abs()));
    }

    #[test]
    fn orthonormal_three_sparse_recovery(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = gaussian(&mut rng, 64, 64).qr().q();
        let mut support = rand::seq::index::sample(&mut rng, 64, 3).into_vec();
        support.sort_unstable();
        let mut w = DVector::zeros(64);
        for &j in &support {
            w[j] = rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let sol = fit_rvm(&q, &(&q * &w), &RvmOptions::default()).unwrap();
        prop_assert_eq!(&sol.support, &support);
        for &j in &support {
            prop_assert!((sol.weights[j] - w[j]).abs() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn evidence_never_decreases(seed in any::<u64>()) {
        let (phi, y, _) = planted(seed, 60, 30, 4, 0.1);
        let sol = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        for w in sol.evidence_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8, "evidence fell from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn scaling_the_target_scales_the_weights(seed in any::<u64>(), c in 0.01f64..100.0) {
        let (phi, y, _) = planted(seed, 60, 20, 3, 0.1);
        let base = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        let scaled = fit_rvm(&phi, &(&y * c), &RvmOptions::default()).unwrap();
        prop_assert_eq!(&base.support, &scaled.support);
        for (a, b) in base.weights.iter().zip(&scaled.weights) {
            prop_assert!((b / c - a).abs() <= 1e-8 * (1.0 + a.abs()));
        }
        prop_assert!((scaled.sigma2 / (c * c) - base.sigma2).abs() <= 1e-8 * base.sigma2);
    }

    #[test]
    fn refitting_on_the_survivors_keeps_the_weights(seed in any::<u64>()) {
        let (phi, y, _) = planted(seed, 60, 30, 4, 0.1);
        let full = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        // an unconverged fit stops mid-path, where a refit need not agree
        prop_assume!(full.converged);
        let sub = fit_rvm(&phi.select_columns(&full.support), &y, &RvmOptions::default()).unwrap();
        prop_assert_eq!(sub.support.len(), full.support.len());
        for (k, &j) in full.support.iter().enumerate() {
            prop_assert!((sub.weights[k] - full.weights[j]).abs() <= 1e-6);
        }
    }

    #[test]
    fn scaling_a_column_inversely_scales_its_weight(seed in any::<u64>(), d in 0.01f64..100.0) {
        let (mut phi, y, _) = planted(seed, 60, 20, 3, 0.1);
        let base = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        let j = (seed % 20) as usize;
        phi.column_mut(j).scale_mut(d);
        let scaled = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        prop_assert_eq!(&base.support, &scaled.support);
        for (k, (a, b)) in base.weights.iter().zip(&scaled.weights).enumerate() {
            let b = if k == j { b * d } else { *b };
            prop_assert!((b - a).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        prop_assert_eq!(short_repressilator(seed, 1e-3), short_repressilator(seed, 1e-3));
    }

    #[test]
    fn reconstruction_is_deterministic(seed in any::<u64>()) {
        let ts = short_repressilator(seed, 1e-3);
        let spec = DictionarySpec::repressilator();
        let a = reconstruct(&ts, &spec, &RvmOptions::default()).unwrap();
        let b = reconstruct(&ts, &spec, &RvmOptions::default()).unwrap();
        prop_assert_eq!(a.w_discrete, b.w_discrete);
    }

    #[test]
    fn pruned_rows_do_not_change_the_vector_field(seed in any::<u64>()) {
        let ts = short_repressilator(seed, 1e-3);
        let model = reconstruct(&ts, &DictionarySpec::repressilator(), &RvmOptions::default()).unwrap();
        let full = model.to_ode(false).unwrap();
        let pruned = model.to_ode(true).unwrap();
        for k in (0..ts.len()).step_by(10) {
            let x = ts.row(k);
            let (a, b) = (full.eval_rhs(&x).unwrap(), pruned.eval_rhs(&x).unwrap());
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }
    }

    /// The multiplied-through regression reproduces the rational update exactly.
    #[test]
    fn rational_expansion_reproduces_the_update(
        seed in any::<u64>(),
        a in 0.01f64..0.2,
        b in 0.1f64..2.0,
        g in 0.01f64..0.2,
        c in 0.0f64..0.05,
        exponent in 1u32..=3,
        activation in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = 60;
        let mut x = DMatrix::<f64>::zeros(steps + 1, 2);
        x[(0, 0)] = rng.random_range(0.0..1.0);
        for k in 0..=steps {
            x[(k, 1)] = rng.random_range(0.0..2.0);
        }
        for k in 0..steps {
            let h = x[(k, 1)].powi(exponent as i32);
            let num = if activation { a * h } else { a };
            x[(k + 1, 0)] = x[(k, 0)] + num / (1.0 + b * h) - g * x[(k, 0)] + c;
        }
        let ts = TimeSeries::new(x, 0.1).unwrap();
        let mode = if activation { RationalMode::Activation } else { RationalMode::Repression };
        let spec = DictionarySpec {
            n_vars: 2,
            rational_mode: mode,
            rational_exponents: vec![exponent],
            regulators: Some(vec![1]),
            ..DictionarySpec::default()
        };
        let dm = build_design_matrix(&ts, &spec, Some(0)).unwrap();
        let power = BasisFunction::power(1, exponent, 2);
        let coef = |f: &BasisFunction| -> f64 {
            match f {
                BasisFunction::Constant => if activation { c } else { a + c },
                f if *f == BasisFunction::linear(0, 2) => -g,
                f if *f == power => if activation { a + c * b } else { c * b },
                BasisFunction::CrossTerm { lag, .. } => match lag {
                    netrecon::dictionary::Lag::Current => b - g * b,
                    netrecon::dictionary::Lag::Next => -b,
                },
                _ => 0.0,
            }
        };
        let w = DVector::from_iterator(dm.basis.len(), dm.basis.iter().map(coef));
        let y = ts.finite_difference_targets().column(0);
        prop_assert!((&dm.values * w - y).amax() <= 1e-8);
    }
}

#[test]
fn evaluate_basis_rejects_poles() {
    let ts = TimeSeries::new(DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 2.0]), 1.0).unwrap();
    let pole = vec![BasisFunction::HillActivate { var: 0, coeff: 1 }];
    assert!(evaluate_basis(&ts, &pole).is_err());
}

#[test]
fn noiseless_euler_matches_hand_stepping() {
    let model = OdeModel::new(vec![
        vec![
            Term { coeff: -0.5, basis: BasisFunction::linear(0, 2) },
            Term { coeff: 1.0, basis: BasisFunction::HillRepress { var: 1, coeff: 2 } },
        ],
        vec![Term { coeff: 0.3, basis: BasisFunction::linear(0, 2) }],
    ])
    .unwrap();
    let ts = model.simulate_euler(&[1.0, 0.5], 0.05, 40, &NoiseSpec::none()).unwrap();
    let (mut a, mut b) = (1.0_f64, 0.5_f64);
    for k in 0..40 {
        let da = -0.5 * a + 1.0 / (1.0 + b * b);
        let db = 0.3 * a;
        a += 0.05 * da;
        b += 0.05 * db;
        assert_eq!(ts.row(k + 1), vec![a, b]);
    }
}
