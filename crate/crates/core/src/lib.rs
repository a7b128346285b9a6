//! Reconstruction of biochemical reaction networks from sampled trajectories.
//!
//! A trajectory is turned into one regression problem per state: the
//! per-step increments are regressed on a dictionary of candidate basis
//! functions, and a relevance vector machine selects a sparse set of terms.
//!
//! ```
//! use netrecon::{reconstruct, DictionarySpec, NoiseSpec, RvmOptions, Term, OdeModel, BasisFunction};
//!
//! let decay = OdeModel::new(vec![vec![
//!     Term { coeff: -0.5, basis: BasisFunction::linear(0, 1) },
//!     Term { coeff: 1.0, basis: BasisFunction::Constant },
//! ]])?;
//! let ts = decay.simulate_euler(&[0.1], 0.1, 200, &NoiseSpec::new(1e-4, 7))?;
//! let spec = DictionarySpec::linear_hill_constant(1, &[1, 2]);
//! let model = reconstruct(&ts, &spec, &RvmOptions::default())?;
//! assert!((model.s_continuous[(0, 0)] + 0.5).abs() < 0.1);
//! # Ok::<(), netrecon::Error>(())
//! ```

pub mod benchmark;
pub mod cli;
pub mod dictionary;
pub mod error;
pub mod pipeline;
pub mod rvm;
pub mod simulator;
pub mod timeseries;

pub use benchmark::{run_experiment, ExperimentConfig, ExperimentReport, Preset};
pub use dictionary::{
    build_design_matrix, enumerate_basis, evaluate_basis, BasisFunction, DesignMatrix, DictionarySpec,
    RationalMode,
};
pub use error::{Error, Result};
pub use pipeline::{reconstruct, score_against_truth, Metrics, ModelDocument, NetworkModel};
pub use rvm::{fit_rvm, ls_on_support, posterior, RvmOptions, SparseSolution};
pub use simulator::{repressilator_model, NoiseSpec, OdeModel, RepressilatorParams, Term};
pub use timeseries::TimeSeries;
