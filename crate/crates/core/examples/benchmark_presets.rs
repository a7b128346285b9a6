//! Runs a multi-round repressilator experiment and prints the median kinetic estimates.
//!
//! cargo run --release --example benchmark_presets -- [exp1|exp2] [rounds]

use netrecon::benchmark::{run_experiment, ExperimentConfig, Preset};

fn main() -> netrecon::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset: Preset = args.next().as_deref().unwrap_or("exp1").parse()?;
    let mut cfg = ExperimentConfig::preset(preset);
    if let Some(r) = args.next() {
        cfg.rounds = r.parse().expect("rounds");
    }

    let report = run_experiment(&cfg)?;
    println!("{}: {}/{} rounds completed", cfg.name, report.completed, cfg.rounds);
    for k in &report.kinetic {
        println!(
            "{:<7} truth {:>5.2}  median {:>7.4}  present in {:>3.0}% of rounds",
            k.name,
            k.truth,
            k.median,
            100.0 * k.support_frequency
        );
    }
    println!("median model keeps: {}", report.median_support.join(", "));
    println!("exact kinetic support in {:.0}% of rounds", 100.0 * report.kinetic_exact_fraction);
    let per_round = report.timing.iter().sum::<f64>() / report.timing.len() as f64;
    println!("{per_round:.4} s per round");
    Ok(())
}
