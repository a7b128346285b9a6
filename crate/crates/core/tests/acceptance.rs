//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use netrecon::benchmark::{run_experiment, ExperimentConfig, ExperimentReport, Preset};
use netrecon::dictionary::{BasisFunction, DictionarySpec, HillParameters, RationalMode};
use netrecon::pipeline::{reconstruct, score_against_truth};
use netrecon::rvm::{fit_rvm, ls_on_support, posterior, reestimate, RvmOptions};
use netrecon::timeseries::TimeSeries;

const EXP1_TOLERANCE: f64 = 0.05;
const EXP1_SUPPORT_FRACTION: f64 = 0.9;
const EXP1_BUDGET: Duration = Duration::from_secs(60);
const EXP2_TOLERANCE: f64 = 0.15;
const EXP2_BUDGET: Duration = Duration::from_secs(20);
const NOISELESS_MAX_ERROR: f64 = 1e-6;
const NOISELESS_ORACLE_RESIDUAL: f64 = 1e-10;
const SCALAR_TOLERANCE: f64 = 1e-12;
const PARTITION_TOLERANCE: f64 = 1e-15;
const RIDGE_TOLERANCE: f64 = 1e-10;
const RIDGE_INSTANCES: u64 = 100;
const EVIDENCE_SLACK: f64 = 1e-8;
const EVIDENCE_INSTANCES: u64 = 50;
const ORTHONORMAL_SIZE: usize = 64;
const ORTHONORMAL_SPARSITY: usize = 3;
const ORTHONORMAL_SEEDS: u64 = 100;
const SCALE_TOLERANCE: f64 = 1e-8;
const RATIONAL_TOLERANCE: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed_experiment(preset: Preset) -> (ExperimentReport, Duration) {
    let cfg = ExperimentConfig::preset(preset);
    let start = Instant::now();
    let report = run_experiment(&cfg).expect("experiment runs");
    (report, start.elapsed())
}

fn worst_kinetic(report: &ExperimentReport) -> (String, f64) {
    report
        .kinetic
        .iter()
        .map(|k| (k.name.clone(), k.abs_error()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn exp1() -> Outcome {
    let (report, elapsed) = timed_experiment(Preset::Exp1);
    let (worst, err) = worst_kinetic(&report);
    let medians_ok = report.kinetic.len() == 15 && err <= EXP1_TOLERANCE;
    let support_ok = report.kinetic_exact_fraction >= EXP1_SUPPORT_FRACTION;
    let budget_ok = elapsed < EXP1_BUDGET && report.completed == 100;
    outcome(
        medians_ok && support_ok && budget_ok,
        format!(
            "worst median deviation {err:.4} ({worst}), exact kinetic support in {:.0}% of rounds \
             (need {:.0}%), {} of 100 rounds in {:.1} s",
            100.0 * report.kinetic_exact_fraction,
            100.0 * EXP1_SUPPORT_FRACTION,
            report.completed,
            elapsed.as_secs_f64()
        ),
    )
}

fn exp2() -> Outcome {
    let (report, elapsed) = timed_experiment(Preset::Exp2);
    let kinetic: Vec<_> = report.kinetic.iter().filter(|k| !k.name.starts_with("theta")).collect();
    let (worst, err) = kinetic
        .iter()
        .map(|k| (k.name.clone(), k.abs_error()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let constant_row = report.basis.iter().position(|b| b == "1").unwrap();
    let theta_absent = report.median_weights[constant_row].iter().all(|v| *v == 0.0);
    let budget_ok = elapsed < EXP2_BUDGET && report.completed == 100;
    outcome(
        err <= EXP2_TOLERANCE && theta_absent && budget_ok,
        format!(
            "worst median deviation {err:.4} ({worst}), theta row absent: {theta_absent}, \
             {} of 100 rounds in {:.1} s",
            report.completed,
            elapsed.as_secs_f64()
        ),
    )
}

fn noiseless() -> Outcome {
    let mut cfg = ExperimentConfig::preset(Preset::Exp1);
    cfg.noise_variance = 0.0;
    cfg.rounds = 1;
    let ts = cfg.simulate_round(0).unwrap();
    let truth = cfg.truth().unwrap();
    let model = reconstruct(&ts, &cfg.spec, &cfg.rvm).unwrap();
    let m = score_against_truth(&model, &truth).unwrap();

    // oracle: the true support explains the increments exactly
    let dm = netrecon::build_design_matrix(&ts, &cfg.spec, None).unwrap();
    let y = ts.finite_difference_targets();
    let mut oracle_residual = 0.0_f64;
    for i in 0..6 {
        let support: Vec<usize> = (0..truth.basis.len()).filter(|&r| truth.w_discrete[(r, i)] != 0.0).collect();
        let w = ls_on_support(&dm.values, &y.column(i), &support).unwrap();
        let r = (&dm.values * w - y.column(i)).amax();
        oracle_residual = oracle_residual.max(r);
    }
    outcome(
        m.exact_support && m.max_abs_error < NOISELESS_MAX_ERROR && oracle_residual < NOISELESS_ORACLE_RESIDUAL,
        format!(
            "exact support {}, max error {:.2e}, oracle residual {:.2e}",
            m.exact_support, m.max_abs_error, oracle_residual
        ),
    )
}

fn scalar_instance() -> Outcome {
    let phi = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
    let y = DVector::from_column_slice(&[1.0, 1.0]);
    let post = posterior(&phi, &y, &[1.0], 1.0).unwrap();
    let re = reestimate(&post, &[1.0], &phi, &y, f64::INFINITY).unwrap();
    let got = [post.covariance[(0, 0)], post.mean[0], re.gamma[0], re.alpha[0], re.beta];
    let want = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.5, 6.0];
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(err <= SCALAR_TOLERANCE, format!("Sigma, m, gamma, alpha', beta' = {got:?}, max error {err:.1e}"))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

fn partition_of_unity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let x = vec![rng.random_range(0.0..10.0)];
        for coeff in 1..=8 {
            let r = BasisFunction::HillRepress { var: 0, coeff }.eval(&x).unwrap();
            let a = BasisFunction::HillActivate { var: 0, coeff }.eval(&x).unwrap();
            worst = worst.max((r + a - 1.0).abs());
        }
    }
    (worst <= PARTITION_TOLERANCE, format!("partition {worst:.1e}"))
}

fn ridge_equivalence() -> (bool, String) {
    let mut worst = 0.0_f64;
    for seed in 0..RIDGE_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.random_range(5..40), rng.random_range(1..15));
        let phi = gaussian_matrix(&mut rng, m, n);
        let y = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        let a: f64 = rng.random_range(0.1..10.0);
        let beta: f64 = rng.random_range(0.1..10.0);
        let post = posterior(&phi, &y, &vec![a; n], beta).unwrap();
        // ridge through an SVD of the stacked system [Phi; sqrt(a/beta) I]
        let mut stacked = DMatrix::zeros(m + n, n);
        stacked.view_mut((0, 0), (m, n)).copy_from(&phi);
        for j in 0..n {
            stacked[(m + j, j)] = (a / beta).sqrt();
        }
        let mut rhs = DVector::zeros(m + n);
        rhs.rows_mut(0, m).copy_from(&y);
        let ridge = stacked.svd(true, true).solve(&rhs, 1e-14).unwrap();
        worst = worst.max((post.mean - ridge).amax());
    }
    (worst <= RIDGE_TOLERANCE, format!("ridge {worst:.1e}"))
}

fn planted(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize, sd: f64) -> (DMatrix<f64>, DVector<f64>, Vec<usize>) {
    let phi = gaussian_matrix(rng, m, n);
    let mut support: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let mut w = DVector::zeros(n);
    for &j in &support {
        let mag: f64 = rng.random_range(1.0..3.0);
        w[j] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    let y = &phi * w + DVector::from_fn(m, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    (phi, y, support)
}

fn evidence_ascent() -> (bool, String) {
    let mut worst_drop = 0.0_f64;
    for seed in 0..EVIDENCE_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (phi, y, _) = planted(&mut rng, 60, 30, 4, 0.1);
        let sol = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        for w in sol.evidence_trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    (worst_drop <= EVIDENCE_SLACK, format!("evidence drop {worst_drop:.1e}"))
}

fn orthonormal_recovery() -> (bool, String) {
    let mut recovered = 0;
    for seed in 0..ORTHONORMAL_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let g = gaussian_matrix(&mut rng, ORTHONORMAL_SIZE, ORTHONORMAL_SIZE);
        let q = g.qr().q();
        let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, ORTHONORMAL_SIZE, ORTHONORMAL_SPARSITY).into_vec();
        support.sort_unstable();
        let mut w = DVector::zeros(ORTHONORMAL_SIZE);
        for &j in &support {
            w[j] = rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let y = &q * w;
        let sol = fit_rvm(&q, &y, &RvmOptions::default()).unwrap();
        if sol.support == support {
            recovered += 1;
        }
    }
    (
        recovered == ORTHONORMAL_SEEDS,
        format!("orthonormal {recovered}/{ORTHONORMAL_SEEDS}"),
    )
}

fn scale_equivariance() -> (bool, String) {
    let mut worst = 0.0_f64;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let (phi, y, _) = planted(&mut rng, 60, 20, 3, 0.1);
        let base = fit_rvm(&phi, &y, &RvmOptions::default()).unwrap();
        let c: f64 = rng.random_range(0.01..100.0);
        let scaled_y = fit_rvm(&phi, &(&y * c), &RvmOptions::default()).unwrap();
        let d: Vec<f64> = (0..20).map(|_| rng.random_range(0.01..100.0)).collect();
        let mut phi_d = phi.clone();
        for (j, dj) in d.iter().enumerate() {
            phi_d.column_mut(j).scale_mut(*dj);
        }
        let scaled_cols = fit_rvm(&phi_d, &y, &RvmOptions::default()).unwrap();
        let wmax = base.weights.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for (j, dj) in d.iter().enumerate() {
            worst = worst.max((scaled_y.weights[j] / c - base.weights[j]).abs() / wmax);
            worst = worst.max((scaled_cols.weights[j] * dj - base.weights[j]).abs() / wmax);
        }
    }
    (worst <= SCALE_TOLERANCE, format!("scale {worst:.1e}"))
}

fn properties() -> Outcome {
    let checks = [
        partition_of_unity(),
        ridge_equivalence(),
        evidence_ascent(),
        orthonormal_recovery(),
        scale_equivariance(),
    ];
    let pass = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join(", ");
    outcome(pass, detail)
}

/// One target driven by an exogenous signal through a discrete Hill law.
fn driven_gene(mode: RationalMode, a: f64, b: f64, g: f64, c: f64) -> TimeSeries {
    let steps = 400;
    let mut x = DMatrix::zeros(steps + 1, 2);
    x[(0, 0)] = 0.3;
    for k in 0..=steps {
        let t = k as f64;
        x[(k, 1)] = 1.0 + 0.8 * (0.07 * t).sin() + 0.3 * (0.23 * t).sin();
    }
    for k in 0..steps {
        let (xi, xj) = (x[(k, 0)], x[(k, 1)]);
        let h = xj * xj;
        let numerator = match mode {
            RationalMode::Activation => a * h,
            _ => a,
        };
        x[(k + 1, 0)] = xi + numerator / (1.0 + b * h) - g * xi + c;
    }
    TimeSeries::new(x, 0.1).unwrap()
}

fn rational_fit(mode: RationalMode, ts: &TimeSeries) -> HillParameters {
    let spec = DictionarySpec {
        n_vars: 2,
        rational_mode: mode,
        rational_exponents: vec![2],
        regulators: Some(vec![1]),
        ..DictionarySpec::default()
    };
    let model = reconstruct(ts, &spec, &RvmOptions::default()).unwrap();
    model.per_target[0].hill.clone().expect("hill parameters for target 1")
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(", ")
}

fn rational_round_trip() -> Outcome {
    let eps = 0.1;
    let (a, b, g, c) = (0.08, 0.5, 0.03, 0.005);
    let act = rational_fit(RationalMode::Activation, &driven_gene(RationalMode::Activation, a, b, g, c));
    let fam = &act.families[0];
    let act_err = [
        (act.gamma - g / eps).abs(),
        (fam.beta - b).abs(),
        (fam.alpha.unwrap_or(f64::NAN) - a / eps).abs(),
        (act.constant - c / eps).abs(),
    ];

    let (a, b, g, c) = (0.1, 0.7, 0.04, 0.002);
    let rep = rational_fit(RationalMode::Repression, &driven_gene(RationalMode::Repression, a, b, g, c));
    let fam = &rep.families[0];
    let rep_err = [
        (rep.gamma - g / eps).abs(),
        (fam.beta - b).abs(),
        (rep.constant - (a + c) / eps).abs(),
    ];
    let worst = act_err.iter().chain(&rep_err).fold(0.0_f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(*v) });
    outcome(
        worst <= RATIONAL_TOLERANCE && act.families.len() == 1 && rep.families.len() == 1,
        format!("activation errors [{}], repression errors [{}]", sci(&act_err), sci(&rep_err)),
    )
}

fn run_demo(dir: &Path, preset: &str, rounds: &str, threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_netrecon"))
        .args(["--threads", threads, "demo", "repressilator", "--preset", preset])
        .args(["--rounds", rounds, "--seed", "11", "--out"])
        .arg(dir)
        .env("RUST_LOG", "error")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut compared = 0;
    for (preset, rounds) in [("exp1", "5"), ("exp2", "20")] {
        let a = tmp.path().join(format!("{preset}-a"));
        let b = tmp.path().join(format!("{preset}-b"));
        if !(run_demo(&a, preset, rounds, "1") && run_demo(&b, preset, rounds, "2")) {
            return outcome(false, format!("demo {preset} did not run"));
        }
        for f in ["report.json", "rounds.csv", "median_weights.csv"] {
            let x = std::fs::read(a.join(f)).unwrap();
            let y = std::fs::read(b.join(f)).unwrap();
            same &= x == y;
            compared += 1;
        }
    }
    outcome(same, format!("{compared} output files compared across reruns"))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 7] = [
        ("exp1 reproduction", exp1),
        ("exp2 reproduction", exp2),
        ("noiseless identifiability", noiseless),
        ("scalar solver instance", scalar_instance),
        ("property suites", properties),
        ("rational round-trip", rational_round_trip),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({})",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
