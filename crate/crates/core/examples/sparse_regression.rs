//! Fits a relevance vector machine to a planted sparse problem and prints the
//! evidence trace and the recovered weights.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use netrecon::rvm::{fit_rvm, ls_on_support, RvmOptions};

fn main() -> netrecon::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (m, n) = (80, 40);
    let phi = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut w = DVector::zeros(n);
    w[3] = 2.0;
    w[17] = -1.5;
    w[31] = 0.8;
    let y = &phi * &w + DVector::from_fn(m, |_, _| 0.05 * rng.sample::<f64, _>(StandardNormal));

    let sol = fit_rvm(&phi, &y, &RvmOptions::default())?;
    println!("converged {} after {} iterations", sol.converged, sol.iterations);
    println!("noise variance {:.2e} (true 2.5e-3)", sol.sigma2);
    for (k, &j) in sol.support.iter().enumerate() {
        let sd = sol.covariance[(k, k)].sqrt();
        println!("w[{j:2}] = {:+.4} +/- {sd:.4} (true {:+.1})", sol.weights[j], w[j]);
    }
    let first = sol.evidence_trace.first().copied().unwrap_or(f64::NAN);
    let last = sol.evidence_trace.last().copied().unwrap_or(f64::NAN);
    println!("log evidence {first:.2} -> {last:.2}");

    let ls = ls_on_support(&phi, &y, &sol.support)?;
    println!("least squares on the same support: {:.4?}", sol.support.iter().map(|&j| ls[j]).collect::<Vec<_>>());
    Ok(())
}
