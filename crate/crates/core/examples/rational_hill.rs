//! Recovers lumped Hill parameters of an activated gene with the rational expansion.

use nalgebra::DMatrix;

use netrecon::dictionary::{DictionarySpec, RationalMode};
use netrecon::{reconstruct, RvmOptions, TimeSeries};

fn main() -> netrecon::Result<()> {
    // per-step parameters of x1(t+1) - x1(t) = a x2^2 / (1 + b x2^2) - g x1 + c
    let (a, b, g, c) = (0.08, 0.5, 0.03, 0.005);
    let steps = 400;
    let mut x = DMatrix::<f64>::zeros(steps + 1, 2);
    x[(0, 0)] = 0.3;
    for k in 0..=steps {
        let t = k as f64;
        x[(k, 1)] = 1.0 + 0.8 * (0.07 * t).sin() + 0.3 * (0.23 * t).sin();
    }
    for k in 0..steps {
        let h = x[(k, 1)].powi(2);
        x[(k + 1, 0)] = x[(k, 0)] + a * h / (1.0 + b * h) - g * x[(k, 0)] + c;
    }
    let ts = TimeSeries::new(x, 0.1)?;

    let spec = DictionarySpec {
        n_vars: 2,
        rational_mode: RationalMode::Activation,
        rational_exponents: vec![1, 2],
        regulators: Some(vec![1]),
        ..DictionarySpec::default()
    };
    let model = reconstruct(&ts, &spec, &RvmOptions::default())?;
    let hill = model.per_target[0].hill.as_ref().expect("rational fit");
    println!("gamma {:.4} (true {})", hill.gamma, g / 0.1);
    println!("constant {:.4} (true {})", hill.constant, c / 0.1);
    for f in &hill.families {
        println!(
            "x{}^{}: beta {:.4}, alpha {:.4} (true beta {b}, alpha {})",
            f.regulator + 1,
            f.exponent,
            f.beta,
            f.alpha.unwrap_or(f64::NAN),
            a / 0.1
        );
    }
    for w in &hill.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
