//! Explicit Euler simulation of models `dx/dt = S f(x)` with additive Gaussian
//! process noise on the discrete map:
//!
//! ```text
//! x(t_{k+1}) = x(t_k) + eps * S f(x(t_k)) + xi(t_k),   xi(t_k) ~ N(0, q I)
//! ```
//!
//! The noise variance is the variance of `xi` itself, not an SDE diffusion
//! coefficient, so it is not scaled by the step.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dictionary::BasisFunction;
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// States beyond this magnitude abort the simulation.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// One additive term `coeff * basis(x)` of a right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub basis: BasisFunction,
}

/// `dx_i/dt = sum_k terms[i][k].coeff * terms[i][k].basis(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct OdeModel {
    n: usize,
    terms: Vec<Vec<Term>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    terms: Vec<Vec<Term>>,
}

impl TryFrom<RawModel> for OdeModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        OdeModel::new(raw.terms)
    }
}

impl From<OdeModel> for RawModel {
    fn from(m: OdeModel) -> Self {
        RawModel { terms: m.terms }
    }
}

impl OdeModel {
    /// One term list per state; the state count is the number of lists.
    pub fn new(terms: Vec<Vec<Term>>) -> Result<Self> {
        let n = terms.len();
        if n == 0 {
            return Err(Error::Invalid("model has no states".into()));
        }
        for (i, row) in terms.iter().enumerate() {
            for t in row {
                if !t.coeff.is_finite() {
                    return Err(Error::Invalid(format!(
                        "non-finite coefficient in equation {}",
                        i + 1
                    )));
                }
                if t.basis.is_cross_term() {
                    return Err(Error::Invalid(format!(
                        "cross term `{}` cannot appear in an ODE right-hand side",
                        t.basis
                    )));
                }
                if t.basis.max_var().is_some_and(|v| v >= n) || t.basis.arity() > n {
                    return Err(Error::Invalid(format!(
                        "term `{}` in equation {} references a variable outside 1..={n}",
                        t.basis,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { n, terms })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Vec<Term>] {
        &self.terms
    }

    /// Right-hand side `S f(x)`.
    pub fn eval_rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Invalid(format!(
                "state has dimension {}, model has {}",
                x.len(),
                self.n
            )));
        }
        let mut out = vec![0.0; self.n];
        for (i, row) in self.terms.iter().enumerate() {
            for t in row {
                if t.basis.denominator(x) == Some(0.0) {
                    return Err(Error::Evaluation {
                        term: t.basis.to_string(),
                        reason: "zero denominator".into(),
                    });
                }
                let v = t.basis.eval(x).expect("model terms need no lagged state");
                if !v.is_finite() {
                    return Err(Error::Evaluation {
                        term: t.basis.to_string(),
                        reason: format!("non-finite value {v}"),
                    });
                }
                out[i] += t.coeff * v;
            }
        }
        Ok(out)
    }

    /// Euler integration with optional additive Gaussian noise; returns `steps + 1` rows.
    pub fn simulate_euler(
        &self,
        x0: &[f64],
        eps: f64,
        steps: usize,
        noise: &NoiseSpec,
    ) -> Result<TimeSeries> {
        if x0.len() != self.n {
            return Err(Error::Invalid(format!(
                "initial state has dimension {}, model has {}",
                x0.len(),
                self.n
            )));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Invalid(format!("step must be positive, got {eps}")));
        }
        if steps == 0 {
            return Err(Error::Invalid("at least one step is required".into()));
        }
        if !(noise.variance.is_finite() && noise.variance >= 0.0) {
            return Err(Error::Invalid(format!(
                "noise variance must be non-negative, got {}",
                noise.variance
            )));
        }

        let sd = noise.variance.sqrt();
        let mut streams = noise.streams(self.n);
        let mut states = DMatrix::zeros(steps + 1, self.n);
        let mut x = x0.to_vec();
        states.row_mut(0).copy_from_slice(&x);
        let mut warned = false;
        for k in 0..steps {
            let f = self.eval_rhs(&x)?;
            for i in 0..self.n {
                x[i] += eps * f[i];
                if sd > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut streams[i]);
                    x[i] += sd * z;
                }
            }
            if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
                return Err(Error::Divergence { step: k + 1 });
            }
            if !warned && x.iter().any(|&v| v < 0.0) {
                log::warn!("state went negative at step {}", k + 1);
                warned = true;
            }
            states.row_mut(k + 1).copy_from_slice(&x);
        }
        TimeSeries::new(states, eps)
    }
}

/// Isotropic, time-invariant process noise `Q_k = variance * I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            variance: 0.0,
            seed: 0,
        }
    }

    pub fn new(variance: f64, seed: u64) -> Self {
        Self { variance, seed }
    }

    /// One independent ChaCha stream per state, all keyed by the seed.
    fn streams(&self, n: usize) -> Vec<ChaCha8Rng> {
        (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i as u64);
                rng
            })
            .collect()
    }
}

/// Kinetic constants of the six-state repressilator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepressilatorParams {
    /// Decay rates: mRNA 1-3, then protein 1-3.
    pub gamma: [f64; 6],
    /// Maximum promoter strengths.
    pub alpha: [f64; 3],
    /// Protein production rates.
    pub beta: [f64; 3],
    /// Basal transcription rates.
    pub theta: [f64; 3],
    pub hill: [u32; 3],
}

impl Default for RepressilatorParams {
    fn default() -> Self {
        Self {
            gamma: [0.3, 0.4, 0.5, 0.2, 0.4, 0.6],
            alpha: [4.0, 3.0, 5.0],
            beta: [1.4, 1.5, 1.6],
            theta: [0.02, 0.02, 0.01],
            hill: [2, 2, 2],
        }
    }
}

impl RepressilatorParams {
    /// Protein index repressing each mRNA: gene 1 by protein 3 (x6), gene 2 by x4, gene 3 by x5.
    pub const REPRESSOR: [usize; 3] = [5, 3, 4];
}

/// The three-gene ring oscillator with transcription and translation:
///
/// ```text
/// dx_i/dt     = -g_i x_i + a_i / (1 + x_r(i)^{n_i}) + theta_i     (mRNA, i = 1..3)
/// dx_{3+i}/dt = -g_{3+i} x_{3+i} + b_i x_i                           (protein)
/// ```
pub fn repressilator_model(p: &RepressilatorParams) -> Result<OdeModel> {
    if let Some(h) = p.hill.iter().find(|h| !(1..=4).contains(*h)) {
        return Err(Error::Invalid(format!("hill exponent {h} outside 1..=4")));
    }
    let n = 6;
    let mut terms = Vec::with_capacity(n);
    for i in 0..3 {
        terms.push(vec![
            Term {
                coeff: -p.gamma[i],
                basis: BasisFunction::linear(i, n),
            },
            Term {
                coeff: p.alpha[i],
                basis: BasisFunction::HillRepress {
                    var: RepressilatorParams::REPRESSOR[i],
                    coeff: p.hill[i],
                },
            },
            Term {
                coeff: p.theta[i],
                basis: BasisFunction::Constant,
            },
        ]);
    }
    for i in 0..3 {
        terms.push(vec![
            Term {
                coeff: -p.gamma[3 + i],
                basis: BasisFunction::linear(3 + i, n),
            },
            Term {
                coeff: p.beta[i],
                basis: BasisFunction::linear(i, n),
            },
        ]);
    }
    OdeModel::new(terms)
}
