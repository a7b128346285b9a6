//! Candidate basis functions and their evaluation into a design matrix.
//!
//! Column order is fixed: linear terms, then one block per Hill coefficient
//! (repressing forms for every variable, then activating forms), then higher
//! monomials in graded lexicographic order, then rational-expansion terms, and
//! the constant last. For six variables with Hill coefficients `{1,2,3,4}` this
//! gives the 55-column layout used by the repressilator benchmark.

mod basis;
pub mod rational;

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use basis::{BasisFunction, Lag};
pub use rational::{
    expand_rational_activation, expand_rational_repression, recover_hill_params,
    ExpansionCoefficients, ExpansionRole, FamilyCoefficients, FamilyParameters, HillParameters,
};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

pub const MAX_HILL_COEFF: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalMode {
    #[default]
    Off,
    Activation,
    Repression,
}

/// Which candidate families make up the dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DictionarySpec {
    pub n_vars: usize,
    pub include_linear: bool,
    /// All monomials of total degree up to this bound (constant and linear included).
    pub monomial_max_degree: Option<u32>,
    pub hill_coeffs: Vec<u32>,
    pub include_constant: bool,
    pub rational_mode: RationalMode,
    pub rational_exponents: Vec<u32>,
    /// Candidate regulators for the rational expansion; `None` means every variable.
    pub regulators: Option<Vec<usize>>,
    /// Target state of a rational expansion. Set by the `expand_rational_*` functions.
    pub rational_target: Option<usize>,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        Self {
            n_vars: 0,
            include_linear: false,
            monomial_max_degree: None,
            hill_coeffs: Vec::new(),
            include_constant: false,
            rational_mode: RationalMode::Off,
            rational_exponents: Vec::new(),
            regulators: None,
            rational_target: None,
        }
    }
}

impl DictionarySpec {
    /// Linear terms, repressing and activating Hill functions of the given
    /// coefficients, and a constant.
    pub fn linear_hill_constant(n_vars: usize, hill_coeffs: &[u32]) -> Self {
        Self {
            n_vars,
            include_linear: true,
            hill_coeffs: hill_coeffs.to_vec(),
            include_constant: true,
            ..Self::default()
        }
    }

    /// The 55-column repressilator dictionary: six states, Hill coefficients 1 to 4.
    pub fn repressilator() -> Self {
        Self::linear_hill_constant(6, &[1, 2, 3, 4])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_vars == 0 {
            return Err(Error::Invalid("dictionary needs at least one variable".into()));
        }
        let any_family = self.include_linear
            || self.monomial_max_degree.is_some()
            || !self.hill_coeffs.is_empty()
            || self.include_constant
            || self.rational_mode != RationalMode::Off;
        if !any_family {
            return Err(Error::Invalid("no basis family enabled".into()));
        }
        if let Some(c) = self
            .hill_coeffs
            .iter()
            .find(|&&c| c == 0 || c > MAX_HILL_COEFF)
        {
            return Err(Error::Invalid(format!(
                "hill coefficient {c} outside 1..={MAX_HILL_COEFF}"
            )));
        }
        if self.rational_mode != RationalMode::Off {
            if self.rational_exponents.is_empty() {
                return Err(Error::Invalid("rational expansion needs an exponent set".into()));
            }
            if let Some(e) = self
                .rational_exponents
                .iter()
                .find(|&&e| e == 0 || e > MAX_HILL_COEFF)
            {
                return Err(Error::Invalid(format!(
                    "rational exponent {e} outside 1..={MAX_HILL_COEFF}"
                )));
            }
        }
        if let Some(r) = self
            .regulators
            .iter()
            .flatten()
            .find(|&&r| r >= self.n_vars)
        {
            return Err(Error::Invalid(format!("regulator index {r} out of range")));
        }
        if let Some(t) = self.rational_target {
            if t >= self.n_vars {
                return Err(Error::Invalid(format!("target index {t} out of range")));
            }
        }
        Ok(())
    }

    fn hill_sorted(&self) -> Vec<u32> {
        let mut h = self.hill_coeffs.clone();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub(crate) fn exponents_sorted(&self) -> Vec<u32> {
        let mut e = self.rational_exponents.clone();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub(crate) fn regulator_list(&self) -> Vec<usize> {
        match &self.regulators {
            Some(r) => {
                let mut r = r.clone();
                r.sort_unstable();
                r.dedup();
                r
            }
            None => (0..self.n_vars).collect(),
        }
    }
}

/// Evaluated dictionary: `values[(k, j)]` is basis function `j` on transition `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub values: DMatrix<f64>,
    pub basis: Vec<BasisFunction>,
    pub target_index: Option<usize>,
}

/// Ordered candidate list for a spec. Rational-expansion terms are included only
/// when the spec carries a target (see [`expand_rational_activation`]).
pub fn enumerate_basis(spec: &DictionarySpec) -> Vec<BasisFunction> {
    let n = spec.n_vars;
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut push_monomial = |out: &mut Vec<BasisFunction>, f: BasisFunction| {
        let key = f.monomial_exponents(n).expect("monomial");
        if seen.insert(key) {
            out.push(f);
        }
    };

    let max_deg = spec.monomial_max_degree;
    if spec.include_linear || max_deg.is_some_and(|d| d >= 1) {
        for v in 0..n {
            push_monomial(&mut out, BasisFunction::linear(v, n));
        }
    }

    for c in spec.hill_sorted() {
        out.extend((0..n).map(|var| BasisFunction::HillRepress { var, coeff: c }));
        out.extend((0..n).map(|var| BasisFunction::HillActivate { var, coeff: c }));
    }

    if let Some(d) = max_deg {
        for deg in 2..=d {
            for e in graded_lex(n, deg) {
                push_monomial(&mut out, BasisFunction::monomial(e));
            }
        }
    }

    if let (Some(target), true) = (spec.rational_target, spec.rational_mode != RationalMode::Off) {
        push_monomial(&mut out, BasisFunction::linear(target, n));
        for j in spec.regulator_list() {
            for p in spec.exponents_sorted() {
                let power = BasisFunction::power(j, p, n);
                push_monomial(&mut out, power.clone());
                push_monomial(
                    &mut out,
                    BasisFunction::CrossTerm {
                        base: Box::new(power.clone()),
                        factor: target,
                        lag: Lag::Current,
                    },
                );
                out.push(BasisFunction::CrossTerm {
                    base: Box::new(power),
                    factor: target,
                    lag: Lag::Next,
                });
            }
        }
    }

    let want_constant =
        spec.include_constant || max_deg.is_some() || spec.rational_mode != RationalMode::Off;
    if want_constant {
        push_monomial(&mut out, BasisFunction::Constant);
    }
    out
}

/// Exponent vectors of total degree `deg` in descending lexicographic order.
fn graded_lex(n: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, deg, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Evaluates the dictionary on `ts`. Row `k` uses `x(t_k)` and, for lagged cross
/// terms, `x(t_{k+1})`, so the matrix has one row fewer than the trajectory.
///
/// `target` is required when the spec enables a rational expansion.
pub fn build_design_matrix(
    ts: &TimeSeries,
    spec: &DictionarySpec,
    target: Option<usize>,
) -> Result<DesignMatrix> {
    spec.validate()?;
    if spec.n_vars != ts.n_states() {
        return Err(Error::Invalid(format!(
            "dictionary declares {} variables, trajectory has {}",
            spec.n_vars,
            ts.n_states()
        )));
    }
    let spec = match (spec.rational_mode, target.or(spec.rational_target)) {
        (RationalMode::Off, _) => spec.clone(),
        (_, None) => {
            return Err(Error::Invalid(
                "a rational expansion needs a target state".into(),
            ))
        }
        (RationalMode::Activation, Some(t)) => expand_rational_activation(spec, t)?,
        (RationalMode::Repression, Some(t)) => expand_rational_repression(spec, t)?,
    };
    let basis = enumerate_basis(&spec);
    let values = evaluate_basis(ts, &basis)?;
    Ok(DesignMatrix {
        values,
        basis,
        target_index: spec.rational_target,
    })
}

/// Evaluates an explicit basis list on every transition of `ts`.
pub fn evaluate_basis(ts: &TimeSeries, basis: &[BasisFunction]) -> Result<DMatrix<f64>> {
    let m = ts.len() - 1;
    let states = ts.states();
    let mut values = DMatrix::zeros(m, basis.len());
    let mut cur = vec![0.0; ts.n_states()];
    let mut next = vec![0.0; ts.n_states()];
    for k in 0..m {
        for i in 0..ts.n_states() {
            cur[i] = states[(k, i)];
            next[i] = states[(k + 1, i)];
        }
        for (j, f) in basis.iter().enumerate() {
            if f.max_var().is_some_and(|v| v >= ts.n_states()) {
                return Err(Error::Invalid(format!(
                    "basis function `{f}` references a variable outside the trajectory"
                )));
            }
            let singular = || Error::Singular {
                row: k,
                column: j,
                term: f.to_string(),
            };
            if f.denominator(&cur) == Some(0.0) {
                return Err(singular());
            }
            let v = f.eval_pair(&cur, &next);
            if !v.is_finite() {
                return Err(singular());
            }
            values[(k, j)] = v;
        }
    }
    Ok(values)
}
