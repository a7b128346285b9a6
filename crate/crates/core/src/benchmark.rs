//! Canned repressilator experiments with multi-round aggregation.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{BasisFunction, DictionarySpec};
use crate::error::{Error, Result};
use crate::pipeline::{reconstruct, score_against_truth, score_rows, Metrics, NetworkModel};
use crate::rvm::RvmOptions;
use crate::simulator::{repressilator_model, NoiseSpec, RepressilatorParams};
use crate::timeseries::TimeSeries;

/// Initial state shared by both presets.
pub const DEFAULT_X0: [f64; 6] = [0.2, 0.1, 0.3, 0.1, 0.4, 0.5];

/// Named experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 500 samples over `t in [0, 50]`.
    Exp1,
    /// 50 samples over `t in [0, 5]`.
    Exp2,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Preset::Exp1),
            "exp2" => Ok(Preset::Exp2),
            _ => Err(Error::Invalid(format!("unknown preset `{s}` (expected exp1 or exp2)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Preset name, or `custom`.
    pub name: String,
    pub horizon: f64,
    pub eps: f64,
    pub noise_variance: f64,
    pub rounds: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub params: RepressilatorParams,
    pub spec: DictionarySpec,
    pub rvm: RvmOptions,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (name, horizon) = match preset {
            Preset::Exp1 => ("exp1", 50.0),
            Preset::Exp2 => ("exp2", 5.0),
        };
        Self {
            name: name.into(),
            horizon,
            eps: 0.1,
            noise_variance: 1e-3,
            rounds: 100,
            seed: 2012,
            x0: DEFAULT_X0.to_vec(),
            params: RepressilatorParams::default(),
            spec: DictionarySpec::repressilator(),
            rvm: RvmOptions::default(),
        }
    }

    /// Number of Euler steps, which is also the number of regression samples.
    pub fn steps(&self) -> usize {
        (self.horizon / self.eps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Invalid("rounds must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) || !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Invalid("horizon and eps must be positive".into()));
        }
        if self.steps() < 1 {
            return Err(Error::Invalid("horizon shorter than one step".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::Invalid("noise variance must be non-negative".into()));
        }
        if self.x0.len() != 6 {
            return Err(Error::Invalid(format!("x0 has {} entries, expected 6", self.x0.len())));
        }
        self.spec.validate()?;
        self.rvm.validate()
    }

    /// Seed of round `r`, split deterministically from the master seed.
    pub fn round_seed(&self, round: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(round as u64);
        rng.next_u64()
    }

    /// Noisy trajectory of one round.
    pub fn simulate_round(&self, round: usize) -> Result<TimeSeries> {
        let model = repressilator_model(&self.params)?;
        let noise = NoiseSpec::new(self.noise_variance, self.round_seed(round));
        model.simulate_euler(&self.x0, self.eps, self.steps(), &noise)
    }

    /// The ground-truth weights on this configuration's basis.
    pub fn truth(&self) -> Result<NetworkModel> {
        NetworkModel::from_ode(&repressilator_model(&self.params)?, &self.spec, self.eps)
    }
}

/// Outcome of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: usize,
    pub seed: u64,
    pub metrics: Option<Metrics>,
    /// Exact support over every row except the constant.
    pub kinetic_support_exact: Option<bool>,
    pub error: Option<String>,
    /// Continuous-unit weights, kept in memory only.
    #[serde(skip)]
    pub weights: Option<DMatrix<f64>>,
}

/// Median estimate of one named kinetic constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticEstimate {
    pub name: String,
    pub basis: String,
    pub target: usize,
    pub truth: f64,
    pub median: f64,
    /// Fraction of completed rounds where the entry was nonzero.
    pub support_frequency: f64,
}

impl KineticEstimate {
    pub fn abs_error(&self) -> f64 {
        (self.median - self.truth).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub basis: Vec<String>,
    pub rounds: Vec<RoundResult>,
    pub completed: usize,
    pub failed: usize,
    pub kinetic_exact_fraction: f64,
    pub median_rms_error: f64,
    /// Per-entry median over completed rounds, continuous units, one row per basis function.
    pub median_weights: Vec<Vec<f64>>,
    /// Per-entry fraction of completed rounds with a nonzero weight.
    pub support_frequency: Vec<Vec<f64>>,
    /// Rows with any nonzero entry in the median model.
    pub median_support: Vec<String>,
    pub kinetic: Vec<KineticEstimate>,
    /// Wall-clock seconds per round; excluded from the serialized report.
    #[serde(skip)]
    pub timing: Vec<f64>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn row_of(basis: &[BasisFunction], f: &BasisFunction) -> Result<usize> {
    basis
        .iter()
        .position(|b| b == f)
        .ok_or_else(|| Error::BasisMismatch(format!("`{f}` is not in the dictionary")))
}

/// Name, basis row, target column, sign and true value of a kinetic constant.
type KineticEntry = (String, usize, usize, f64, f64);

fn kinetic_entries(cfg: &ExperimentConfig, basis: &[BasisFunction]) -> Result<Vec<KineticEntry>> {
    let n = 6;
    let p = &cfg.params;
    let mut out = Vec::new();
    for i in 0..6 {
        out.push((format!("gamma{}", i + 1), row_of(basis, &BasisFunction::linear(i, n))?, i, -1.0, p.gamma[i]));
    }
    for i in 0..3 {
        out.push((format!("beta{}", i + 1), row_of(basis, &BasisFunction::linear(i, n))?, 3 + i, 1.0, p.beta[i]));
    }
    for i in 0..3 {
        let f = BasisFunction::HillRepress {
            var: RepressilatorParams::REPRESSOR[i],
            coeff: p.hill[i],
        };
        out.push((format!("alpha{}", i + 1), row_of(basis, &f)?, i, 1.0, p.alpha[i]));
    }
    for i in 0..3 {
        out.push((format!("theta{}", i + 1), row_of(basis, &BasisFunction::Constant)?, i, 1.0, p.theta[i]));
    }
    Ok(out)
}

/// Runs every round, scores it against the built-in truth and aggregates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = cfg.truth()?;
    let basis = truth.basis.clone();
    let constant_row: Vec<usize> = basis.iter().position(|b| b.is_constant()).into_iter().collect();
    let kinetic = kinetic_entries(cfg, &basis)?;

    let outcomes: Vec<(RoundResult, f64)> = (0..cfg.rounds)
        .into_par_iter()
        .map(|round| {
            let seed = cfg.round_seed(round);
            let start = Instant::now();
            let result = cfg.simulate_round(round).and_then(|ts| {
                let model = reconstruct(&ts, &cfg.spec, &cfg.rvm)?;
                let metrics = score_against_truth(&model, &truth)?;
                let kinetic = score_rows(&model, &truth, &constant_row)?;
                Ok((model, metrics, kinetic.exact_support))
            });
            let elapsed = start.elapsed().as_secs_f64();
            let r = match result {
                Ok((model, metrics, exact)) => RoundResult {
                    round,
                    seed,
                    metrics: Some(metrics),
                    kinetic_support_exact: Some(exact),
                    error: None,
                    weights: Some(model.s_continuous),
                },
                Err(e) => {
                    log::warn!("round {round} failed: {e}");
                    RoundResult {
                        round,
                        seed,
                        metrics: None,
                        kinetic_support_exact: None,
                        error: Some(format!("[{}] {e}", e.code())),
                        weights: None,
                    }
                }
            };
            (r, elapsed)
        })
        .collect();
    let (rounds, timing): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    let done: Vec<&DMatrix<f64>> = rounds.iter().filter_map(|r| r.weights.as_ref()).collect();
    if done.is_empty() {
        let first = rounds.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::ExperimentFailed(first));
    }
    let completed = done.len();
    let (nb, n) = (basis.len(), truth.n_states());
    let mut median_weights = vec![vec![0.0; n]; nb];
    let mut support_frequency = vec![vec![0.0; n]; nb];
    let mut buf = Vec::with_capacity(completed);
    for r in 0..nb {
        for c in 0..n {
            buf.clear();
            buf.extend(done.iter().map(|w| w[(r, c)]));
            support_frequency[r][c] = buf.iter().filter(|v| **v != 0.0).count() as f64 / completed as f64;
            median_weights[r][c] = median(&mut buf);
        }
    }
    let median_support = (0..nb)
        .filter(|&r| median_weights[r].iter().any(|v| *v != 0.0))
        .map(|r| basis[r].to_string())
        .collect();
    let kinetic = kinetic
        .into_iter()
        .map(|(name, row, target, sign, value)| KineticEstimate {
            name,
            basis: basis[row].to_string(),
            target,
            truth: value,
            median: sign * median_weights[row][target],
            support_frequency: support_frequency[row][target],
        })
        .collect();
    let exact = rounds.iter().filter(|r| r.kinetic_support_exact == Some(true)).count();
    let mut rms: Vec<f64> = rounds.iter().filter_map(|r| r.metrics.as_ref().map(|m| m.rms_error)).collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        basis: basis.iter().map(|b| b.to_string()).collect(),
        completed,
        failed: rounds.len() - completed,
        kinetic_exact_fraction: exact as f64 / cfg.rounds as f64,
        median_rms_error: median(&mut rms),
        median_weights,
        support_frequency,
        median_support,
        kinetic,
        rounds,
        timing,
    })
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn kinetic_estimate(&self, name: &str) -> Option<&KineticEstimate> {
        self.kinetic.iter().find(|k| k.name == name)
    }

    /// One line per round: status and metrics.
    pub fn write_rounds_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
        wtr.write_record([
            "round", "seed", "status", "precision", "recall", "exact_support", "kinetic_support_exact",
            "max_abs_error", "rms_error", "spurious", "missed",
        ])
        .map_err(err)?;
        for r in &self.rounds {
            let mut rec = vec![r.round.to_string(), r.seed.to_string()];
            match &r.metrics {
                Some(m) => rec.extend([
                    "ok".to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.exact_support.to_string(),
                    r.kinetic_support_exact.unwrap_or(false).to_string(),
                    m.max_abs_error.to_string(),
                    m.rms_error.to_string(),
                    m.spurious.to_string(),
                    m.missed.to_string(),
                ]),
                None => {
                    rec.push("failed".into());
                    rec.extend(std::iter::repeat_n(String::new(), 8));
                }
            }
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Median weight matrix with one row per basis function.
    pub fn write_median_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
        let n = self.median_weights.first().map_or(0, |r| r.len());
        let mut header = vec!["basis".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        wtr.write_record(&header).map_err(err)?;
        for (b, row) in self.basis.iter().zip(&self.median_weights) {
            let mut rec = vec![b.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Wall-clock seconds per round.
    pub fn write_timing_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
        wtr.write_record(["round", "seconds"]).map_err(err)?;
        for (r, t) in self.timing.iter().enumerate() {
            wtr.write_record([r.to_string(), t.to_string()]).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }
}
