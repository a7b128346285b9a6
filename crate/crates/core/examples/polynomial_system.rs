//! Recovers a predator-prey system from a monomial dictionary.

use netrecon::dictionary::{BasisFunction, DictionarySpec};
use netrecon::{reconstruct, NoiseSpec, OdeModel, RvmOptions, Term};

fn main() -> netrecon::Result<()> {
    let xy = BasisFunction::monomial(vec![1, 1]);
    let model = OdeModel::new(vec![
        vec![
            Term { coeff: 1.0, basis: BasisFunction::linear(0, 2) },
            Term { coeff: -0.5, basis: xy.clone() },
        ],
        vec![
            Term { coeff: -0.8, basis: BasisFunction::linear(1, 2) },
            Term { coeff: 0.3, basis: xy },
        ],
    ])?;
    let ts = model.simulate_euler(&[2.0, 1.0], 0.02, 2000, &NoiseSpec::new(1e-6, 1))?;

    let spec = DictionarySpec {
        n_vars: 2,
        monomial_max_degree: Some(3),
        ..DictionarySpec::default()
    };
    let fit = reconstruct(&ts, &spec, &RvmOptions::default())?;
    println!("{} candidates, {} kept", fit.basis.len(), fit.retained_rows.len());
    for eq in fit.to_document(None).equations() {
        println!("{eq}");
    }
    Ok(())
}
