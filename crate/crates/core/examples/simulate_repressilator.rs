//! Simulates the six-state repressilator with process noise and writes the trajectory.
//!
//! cargo run --example simulate_repressilator -- [out.csv] [noise_variance] [seed]

use netrecon::{repressilator_model, NoiseSpec, RepressilatorParams};

fn main() -> netrecon::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "repressilator.csv".into());
    let q: f64 = args.next().map_or(1e-3, |s| s.parse().expect("noise variance"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let model = repressilator_model(&RepressilatorParams::default())?;
    let ts = model.simulate_euler(&[0.2, 0.1, 0.3, 0.1, 0.4, 0.5], 0.1, 500, &NoiseSpec::new(q, seed))?;
    ts.write_csv(&out)?;

    let last = ts.row(ts.len() - 1);
    println!("{} samples, final state {:.3?}", ts.len(), last);
    println!("wrote {out}");
    Ok(())
}
