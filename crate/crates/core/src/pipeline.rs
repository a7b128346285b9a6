//! End-to-end reconstruction: targets, dictionary, one sparse fit per state,
//! assembly of the weight matrix, row pruning and back-mapping to continuous time.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{
    build_design_matrix, enumerate_basis, recover_hill_params, BasisFunction, DictionarySpec,
    ExpansionCoefficients, HillParameters, RationalMode,
};
use crate::error::{Error, Result};
use crate::rvm::{fit_rvm, RvmOptions, SparseSolution};
use crate::simulator::{OdeModel, Term};
use crate::timeseries::TimeSeries;

/// Surviving weights smaller than this fraction of their column's largest weight are zeroed.
pub const HARD_THRESHOLD: f64 = 1e-4;

/// Outcome of the fit for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFit {
    pub target: usize,
    /// Position in the model basis of each column of this target's design matrix.
    pub columns: Vec<usize>,
    /// Weights over this target's design-matrix columns; `None` when the fit failed.
    pub solution: Option<SparseSolution>,
    pub error: Option<String>,
    /// Lumped kinetic parameters in continuous time (rational mode only).
    pub hill: Option<HillParameters>,
}

impl TargetFit {
    /// Weights over the target's own columns; all zero when the fit failed.
    pub fn weights(&self) -> Vec<f64> {
        self.solution
            .as_ref()
            .map_or_else(|| vec![0.0; self.columns.len()], |s| s.weights.clone())
    }
}

/// A recovered network: weights over a shared basis for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub spec: DictionarySpec,
    pub names: Vec<String>,
    pub basis: Vec<BasisFunction>,
    pub eps: f64,
    /// `N x n`, per-step units: column `i` regresses `x_i(t_{k+1}) - x_i(t_k)`.
    pub w_discrete: DMatrix<f64>,
    /// `w_discrete / eps`.
    pub s_continuous: DMatrix<f64>,
    pub per_target: Vec<TargetFit>,
    /// Basis rows with at least one nonzero weight.
    pub retained_rows: Vec<usize>,
}

impl NetworkModel {
    /// Assembles a model from discrete weights over `basis`.
    pub fn from_weights(
        spec: DictionarySpec,
        names: Vec<String>,
        basis: Vec<BasisFunction>,
        eps: f64,
        w_discrete: DMatrix<f64>,
        per_target: Vec<TargetFit>,
    ) -> Self {
        let s_continuous = &w_discrete / eps;
        let retained_rows = (0..w_discrete.nrows())
            .filter(|&r| w_discrete.row(r).iter().any(|v| *v != 0.0))
            .collect();
        Self {
            spec,
            names,
            basis,
            eps,
            w_discrete,
            s_continuous,
            per_target,
            retained_rows,
        }
    }

    /// Ground-truth model of an ODE expressed on the basis of `spec`.
    pub fn from_ode(model: &OdeModel, spec: &DictionarySpec, eps: f64) -> Result<Self> {
        let basis = enumerate_basis(spec);
        let n = model.n_states();
        let mut s = DMatrix::zeros(basis.len(), n);
        for (i, terms) in model.terms().iter().enumerate() {
            for t in terms {
                let row = basis.iter().position(|b| *b == t.basis).ok_or_else(|| {
                    Error::BasisMismatch(format!("term `{}` is not in the dictionary", t.basis))
                })?;
                s[(row, i)] += t.coeff;
            }
        }
        let names = (1..=n).map(|i| format!("x{i}")).collect();
        let mut out = Self::from_weights(spec.clone(), names, basis, eps, &s * eps, Vec::new());
        // keep the exact continuous coefficients rather than round-tripping through eps
        out.s_continuous = s;
        Ok(out)
    }

    pub fn n_states(&self) -> usize {
        self.w_discrete.ncols()
    }

    /// The reduced basis: rows of `w` that are not identically zero.
    pub fn pruned_basis(&self) -> Vec<BasisFunction> {
        self.retained_rows.iter().map(|&r| self.basis[r].clone()).collect()
    }

    /// Continuous-time ODE on the full or the pruned basis. Fails for rational
    /// expansions, whose lagged columns have no right-hand-side meaning.
    pub fn to_ode(&self, pruned: bool) -> Result<OdeModel> {
        let rows: Vec<usize> = if pruned {
            self.retained_rows.clone()
        } else {
            (0..self.basis.len()).collect()
        };
        let terms = (0..self.n_states())
            .map(|i| {
                rows.iter()
                    .map(|&r| Term {
                        coeff: self.s_continuous[(r, i)],
                        basis: self.basis[r].clone(),
                    })
                    .collect()
            })
            .collect();
        OdeModel::new(terms)
    }
}

fn fit_one(
    dm: &crate::dictionary::DesignMatrix,
    y: &nalgebra::DVector<f64>,
    opts: &RvmOptions,
) -> Result<SparseSolution> {
    let mut sol = fit_rvm(&dm.values, y, opts)?;
    sol.drop_small(HARD_THRESHOLD);
    Ok(sol)
}

/// Reconstructs a network from a trajectory.
///
/// Failures of individual targets are recorded on their [`TargetFit`] and leave
/// a zero column; other targets are unaffected.
pub fn reconstruct(ts: &TimeSeries, spec: &DictionarySpec, opts: &RvmOptions) -> Result<NetworkModel> {
    spec.validate()?;
    opts.validate()?;
    let n = ts.n_states();
    let targets = ts.finite_difference_targets();
    let m = targets.nrows();

    let design = match spec.rational_mode {
        RationalMode::Off => {
            let dm = build_design_matrix(ts, spec, None)?;
            vec![dm; 1]
        }
        _ => (0..n)
            .into_par_iter()
            .map(|i| build_design_matrix(ts, spec, Some(i)))
            .collect::<Result<Vec<_>>>()?,
    };
    let dm_for = |i: usize| if design.len() == 1 { &design[0] } else { &design[i] };

    // union basis in order of first appearance
    let mut basis: Vec<BasisFunction> = Vec::new();
    let mut index: HashMap<BasisFunction, usize> = HashMap::new();
    let mut columns = Vec::with_capacity(n);
    for i in 0..n {
        let cols = dm_for(i)
            .basis
            .iter()
            .map(|b| {
                *index.entry(b.clone()).or_insert_with(|| {
                    basis.push(b.clone());
                    basis.len() - 1
                })
            })
            .collect::<Vec<_>>();
        columns.push(cols);
    }
    if m * 5 < basis.len() {
        log::warn!(
            "{m} samples for {} candidate functions; recovery may be unreliable",
            basis.len()
        );
    }

    let per_target: Vec<TargetFit> = (0..n)
        .into_par_iter()
        .map(|i| {
            let dm = dm_for(i);
            let y = targets.column(i);
            let mut fit = TargetFit {
                target: i,
                columns: columns[i].clone(),
                solution: None,
                error: None,
                hill: None,
            };
            match fit_one(dm, &y, opts) {
                Ok(sol) => {
                    if spec.rational_mode != RationalMode::Off {
                        let expanded = expanded_spec(spec, i);
                        let hill = ExpansionCoefficients::from_weights(&expanded, &dm.basis, &sol.weights)
                            .and_then(|c| recover_hill_params(&c));
                        match hill {
                            Ok(h) => fit.hill = Some(h.to_continuous(ts.step())),
                            Err(e) => fit.error = Some(format!("[{}] {e}", e.code())),
                        }
                    }
                    fit.solution = Some(sol);
                }
                Err(e) => {
                    log::warn!("fit for target {} failed: {e}", i + 1);
                    fit.error = Some(format!("[{}] {e}", e.code()));
                }
            }
            fit
        })
        .collect();

    let mut w = DMatrix::zeros(basis.len(), n);
    for fit in &per_target {
        for (k, wk) in fit.weights().into_iter().enumerate() {
            w[(fit.columns[k], fit.target)] = wk;
        }
    }

    Ok(NetworkModel::from_weights(
        spec.clone(),
        ts.names().to_vec(),
        basis,
        ts.step(),
        w,
        per_target,
    ))
}

fn expanded_spec(spec: &DictionarySpec, target: usize) -> DictionarySpec {
    DictionarySpec {
        rational_target: Some(target),
        ..spec.clone()
    }
}

/// Support and parameter accuracy of a model against a known truth, in continuous units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub exact_support: bool,
    /// Over entries that are nonzero in the truth.
    pub max_abs_error: f64,
    pub rms_error: f64,
    pub spurious: usize,
    pub missed: usize,
}

pub fn score_against_truth(model: &NetworkModel, truth: &NetworkModel) -> Result<Metrics> {
    score_rows(model, truth, &[])
}

/// Like [`score_against_truth`] but ignoring the given basis rows entirely.
pub fn score_rows(model: &NetworkModel, truth: &NetworkModel, ignore_rows: &[usize]) -> Result<Metrics> {
    if model.basis != truth.basis {
        return Err(Error::BasisMismatch(format!(
            "model has {} basis functions, truth has {} (or their order differs)",
            model.basis.len(),
            truth.basis.len()
        )));
    }
    if model.s_continuous.shape() != truth.s_continuous.shape() {
        return Err(Error::BasisMismatch("weight matrices differ in shape".into()));
    }
    let (mut hits, mut spurious, mut missed, mut n_true) = (0usize, 0usize, 0usize, 0usize);
    let mut max_abs = 0.0_f64;
    let mut sq = 0.0;
    for r in (0..truth.basis.len()).filter(|r| !ignore_rows.contains(r)) {
        for c in 0..truth.n_states() {
            let t = truth.s_continuous[(r, c)];
            let e = model.s_continuous[(r, c)];
            match (t != 0.0, e != 0.0) {
                (true, true) => hits += 1,
                (true, false) => missed += 1,
                (false, true) => spurious += 1,
                (false, false) => {}
            }
            if t != 0.0 {
                n_true += 1;
                let d = (e - t).abs();
                max_abs = max_abs.max(d);
                sq += d * d;
            }
        }
    }
    let n_est = hits + spurious;
    Ok(Metrics {
        precision: if n_est == 0 {
            if n_true == 0 { 1.0 } else { 0.0 }
        } else {
            hits as f64 / n_est as f64
        },
        recall: if n_true == 0 { 1.0 } else { hits as f64 / n_true as f64 },
        exact_support: spurious == 0 && missed == 0,
        max_abs_error: max_abs,
        rms_error: if n_true == 0 { 0.0 } else { (sq / n_true as f64).sqrt() },
        spurious,
        missed,
    })
}

/// One retained term of a target equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub index: usize,
    pub basis: String,
    pub weight_discrete: f64,
    pub weight_continuous: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDocument {
    pub target: usize,
    pub name: String,
    pub support: Vec<SupportEntry>,
    pub noise_variance: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub evidence_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hill: Option<HillParameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// JSON result document of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub spec: DictionarySpec,
    pub eps: f64,
    pub names: Vec<String>,
    pub basis: Vec<String>,
    pub basis_functions: Vec<BasisFunction>,
    /// Row-major, one row per basis function.
    pub w_discrete: Vec<Vec<f64>>,
    pub s_continuous: Vec<Vec<f64>>,
    pub retained_rows: Vec<usize>,
    pub targets: Vec<TargetDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl NetworkModel {
    pub fn to_document(&self, metrics: Option<Metrics>) -> ModelDocument {
        let targets = (0..self.n_states())
            .map(|i| {
                let fit = self.per_target.iter().find(|f| f.target == i);
                let sol = fit.and_then(|f| f.solution.as_ref());
                let support = (0..self.basis.len())
                    .filter(|&r| self.w_discrete[(r, i)] != 0.0)
                    .map(|r| SupportEntry {
                        index: r,
                        basis: self.basis[r].to_string(),
                        weight_discrete: self.w_discrete[(r, i)],
                        weight_continuous: self.s_continuous[(r, i)],
                    })
                    .collect();
                TargetDocument {
                    target: i,
                    name: self.names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)),
                    support,
                    noise_variance: sol.map(|s| s.sigma2),
                    iterations: sol.map(|s| s.iterations),
                    converged: sol.map(|s| s.converged),
                    evidence_trace: sol.map(|s| s.evidence_trace.clone()).unwrap_or_default(),
                    hill: fit.and_then(|f| f.hill.clone()),
                    error: fit.and_then(|f| f.error.clone()),
                }
            })
            .collect();
        ModelDocument {
            spec: self.spec.clone(),
            eps: self.eps,
            names: self.names.clone(),
            basis: self.basis.iter().map(|b| b.to_string()).collect(),
            basis_functions: self.basis.clone(),
            w_discrete: rows_of(&self.w_discrete),
            s_continuous: rows_of(&self.s_continuous),
            retained_rows: self.retained_rows.clone(),
            targets,
            metrics,
        }
    }

    /// Flat `target,basis,weight_continuous` listing of every nonzero weight.
    pub fn write_weights_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Invalid(format!("csv write failed: {e}"));
        wtr.write_record(["target", "basis", "weight_continuous"]).map_err(io)?;
        for i in 0..self.n_states() {
            for r in 0..self.basis.len() {
                let v = self.s_continuous[(r, i)];
                if v != 0.0 {
                    wtr.write_record([
                        self.names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)),
                        self.basis[r].to_string(),
                        v.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        wtr.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Human-readable equations, one per state, in continuous-time units.
    pub fn equations(&self) -> Vec<String> {
        let rational = self.spec.rational_mode != RationalMode::Off;
        self.targets
            .iter()
            .map(|t| {
                let lhs = if rational {
                    format!("{}(t+1) - {}(t)", t.name, t.name)
                } else {
                    format!("d{}/dt", t.name)
                };
                let mut rhs = String::new();
                for (k, e) in t.support.iter().enumerate() {
                    let v = if rational { e.weight_discrete } else { e.weight_continuous };
                    let sign = if v < 0.0 { "-" } else { "+" };
                    let mag = v.abs();
                    let term = if e.basis == "1" {
                        format!("{mag:.4}")
                    } else {
                        format!("{mag:.4}*{}", e.basis)
                    };
                    if k == 0 {
                        rhs.push_str(&format!("{}{term}", if v < 0.0 { "-" } else { "" }));
                    } else {
                        rhs.push_str(&format!(" {sign} {term}"));
                    }
                }
                if rhs.is_empty() {
                    rhs.push('0');
                }
                format!("{lhs} = {rhs}")
            })
            .collect()
    }
}
