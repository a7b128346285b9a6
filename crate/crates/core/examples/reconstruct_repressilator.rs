//! Reconstructs the repressilator from one noisy trajectory and scores it.
//!
//! cargo run --release --example reconstruct_repressilator -- [noise_variance] [seed]

use netrecon::benchmark::{ExperimentConfig, Preset};
use netrecon::{reconstruct, score_against_truth};

fn main() -> netrecon::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::preset(Preset::Exp1);
    cfg.noise_variance = args.next().map_or(1e-3, |s| s.parse().expect("noise variance"));
    cfg.seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let ts = cfg.simulate_round(0)?;
    let model = reconstruct(&ts, &cfg.spec, &cfg.rvm)?;
    let metrics = score_against_truth(&model, &cfg.truth()?)?;

    for eq in model.to_document(None).equations() {
        println!("{eq}");
    }
    println!(
        "precision {:.2}, recall {:.2}, {} spurious, max error {:.3}",
        metrics.precision, metrics.recall, metrics.spurious, metrics.max_abs_error
    );
    Ok(())
}
