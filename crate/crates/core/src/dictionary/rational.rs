//! Reduction of rational (Hill-type) rate laws to linear regression.
//!
//! A target obeying
//!
//! ```text
//! e_i(t_{k+1}) = sum_j a_ij x_j^{n_ij} / (1 + sum_j b_ij x_j^{m_ij}) - g_i x_i + C_i
//! ```
//!
//! becomes linear in its coefficients after multiplying through by the
//! denominator and moving the `e_i` products to the right-hand side. Each
//! regulator `j` and exponent `n` then contributes three columns:
//! `x_j^n`, `x_j^n * x_i(t_k)` and `x_j^n * x_i(t_{k+1})`, next to the shared
//! `x_i` and constant columns.
//!
//! Only lumped parameters such as `b / K^n` are identifiable; `b` and `K`
//! cannot be separated. The multiplied-through regression also correlates the
//! effective noise with the lagged regressor; no whitening is attempted.

use serde::{Deserialize, Serialize};

use super::{BasisFunction, DictionarySpec, Lag, RationalMode};
use crate::error::{Error, Result};

/// Below this magnitude a decay coefficient counts as zero.
pub const IDENTIFIABILITY_FLOOR: f64 = 1e-10;

/// Relative disagreement between the two denominator estimates that triggers a warning.
pub const CONSISTENCY_TOLERANCE: f64 = 0.2;

/// Augments `spec` with the activation expansion (`n_ij = m_ij`) for `target`.
pub fn expand_rational_activation(spec: &DictionarySpec, target: usize) -> Result<DictionarySpec> {
    expand(spec, target, RationalMode::Activation)
}

/// Augments `spec` with the repression expansion (`n_ij = 0`) for `target`.
pub fn expand_rational_repression(spec: &DictionarySpec, target: usize) -> Result<DictionarySpec> {
    expand(spec, target, RationalMode::Repression)
}

fn expand(spec: &DictionarySpec, target: usize, mode: RationalMode) -> Result<DictionarySpec> {
    let out = DictionarySpec {
        rational_mode: mode,
        rational_target: Some(target),
        ..spec.clone()
    };
    out.validate()?;
    Ok(out)
}

/// What a column of a rational-expansion dictionary stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionRole {
    /// `x_i(t_k)`
    Decay,
    Constant,
    /// `x_j^n(t_k)`
    Power { regulator: usize, exponent: u32 },
    /// `x_j^n(t_k) x_i(t_k)`
    Cross { regulator: usize, exponent: u32 },
    /// `x_j^n(t_k) x_i(t_{k+1})`
    Next { regulator: usize, exponent: u32 },
}

/// Roles carried by each column of `basis` for a rational expansion on `target`.
/// A column may carry several roles when families overlap (self-regulation
/// with consecutive exponents); it carries none when it belongs to another family.
pub fn column_roles(spec: &DictionarySpec, basis: &[BasisFunction]) -> Vec<Vec<ExpansionRole>> {
    let n = spec.n_vars;
    let Some(target) = spec.rational_target else {
        return vec![Vec::new(); basis.len()];
    };
    let key = |f: &BasisFunction| f.monomial_exponents(n);
    let mut roles = vec![Vec::new(); basis.len()];
    let mut assign = |f: &BasisFunction, role: ExpansionRole| {
        let found = match f {
            BasisFunction::CrossTerm { lag: Lag::Next, .. } => basis.iter().position(|b| b == f),
            _ => {
                let k = key(f);
                basis.iter().position(|b| key(b) == k)
            }
        };
        if let Some(c) = found {
            roles[c].push(role);
        }
    };
    assign(&BasisFunction::linear(target, n), ExpansionRole::Decay);
    assign(&BasisFunction::Constant, ExpansionRole::Constant);
    for j in spec.regulator_list() {
        for p in spec.exponents_sorted() {
            let power = BasisFunction::power(j, p, n);
            let cross = |lag| BasisFunction::CrossTerm {
                base: Box::new(power.clone()),
                factor: target,
                lag,
            };
            let (regulator, exponent) = (j, p);
            assign(&power, ExpansionRole::Power { regulator, exponent });
            assign(&cross(Lag::Current), ExpansionRole::Cross { regulator, exponent });
            assign(&cross(Lag::Next), ExpansionRole::Next { regulator, exponent });
        }
    }
    roles
}

/// Raw regression coefficients of one regulator/exponent family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyCoefficients {
    pub regulator: usize,
    pub exponent: u32,
    /// Coefficient of `x_j^n`: the activation numerator term, or `C * b` under repression.
    pub power: f64,
    /// Product of the decay and denominator coefficients (`g_hat * b_bar`).
    pub cross: f64,
    /// Coefficient of the lagged column, minus the denominator coefficient.
    pub next: f64,
}

/// Fitted coefficients of a rational expansion, keyed by role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub mode: RationalMode,
    pub target: usize,
    /// Coefficient of `x_i`, i.e. minus the decay rate.
    pub decay: f64,
    /// `C` under activation, the lumped `sum_j a_ij + C` under repression.
    pub constant: f64,
    pub families: Vec<FamilyCoefficients>,
    /// Families whose columns coincide with another role.
    pub aliased: Vec<(usize, u32)>,
}

impl ExpansionCoefficients {
    /// Reads role coefficients out of a weight vector over `basis`.
    ///
    /// The `x_j^n x_i(t_k)` column collects both the cross product and the
    /// `+b x_j^n x_i(t_k)` half of the moved `e_i` term, so the pure cross
    /// coefficient is that column's weight plus the lagged column's weight.
    pub fn from_weights(
        spec: &DictionarySpec,
        basis: &[BasisFunction],
        weights: &[f64],
    ) -> Result<Self> {
        let target = spec
            .rational_target
            .ok_or_else(|| Error::Invalid("spec has no rational target".into()))?;
        if weights.len() != basis.len() {
            return Err(Error::Invalid(format!(
                "{} weights for {} basis functions",
                weights.len(),
                basis.len()
            )));
        }
        let roles = column_roles(spec, basis);
        let lookup = |role: ExpansionRole| -> (f64, bool) {
            roles
                .iter()
                .position(|r| r.contains(&role))
                .map_or((0.0, false), |c| (weights[c], roles[c].len() > 1))
        };
        let mut families = Vec::new();
        let mut aliased = Vec::new();
        for j in spec.regulator_list() {
            for p in spec.exponents_sorted() {
                let (regulator, exponent) = (j, p);
                let (power, a1) = lookup(ExpansionRole::Power { regulator, exponent });
                let (cur, a2) = lookup(ExpansionRole::Cross { regulator, exponent });
                let (next, a3) = lookup(ExpansionRole::Next { regulator, exponent });
                if a1 || a2 || a3 {
                    aliased.push((j, p));
                }
                families.push(FamilyCoefficients {
                    regulator,
                    exponent,
                    power,
                    cross: cur + next,
                    next,
                });
            }
        }
        Ok(Self {
            mode: spec.rational_mode,
            target,
            decay: lookup(ExpansionRole::Decay).0,
            constant: lookup(ExpansionRole::Constant).0,
            families,
            aliased,
        })
    }
}

/// Lumped kinetic parameters of one regulator/exponent family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParameters {
    pub regulator: usize,
    pub exponent: u32,
    /// Lumped denominator coefficient `b / K^n`, read from the lagged column.
    pub beta: f64,
    /// Second estimate of `beta` as `cross / decay`, when the decay is identifiable.
    pub beta_from_ratio: Option<f64>,
    /// Lumped numerator `a / K^n` (activation only).
    pub alpha: Option<f64>,
    pub consistent: bool,
}

/// Lumped parameters of one target, in the units of the regression (per step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillParameters {
    pub mode: RationalMode,
    pub target: usize,
    /// Decay rate `g_i`.
    pub gamma: f64,
    /// `C_i` under activation, `sum_j a_ij + C_i` under repression.
    pub constant: f64,
    pub families: Vec<FamilyParameters>,
    pub warnings: Vec<String>,
}

impl HillParameters {
    /// Converts per-step rates to continuous time. Denominator coefficients are unitless.
    pub fn to_continuous(&self, step: f64) -> Self {
        let mut out = self.clone();
        out.gamma /= step;
        out.constant /= step;
        for f in &mut out.families {
            f.alpha = f.alpha.map(|a| a / step);
        }
        out
    }
}

/// Inverts the rational reparametrization.
///
/// The lagged-column coefficient is taken as the primary estimate of each
/// denominator coefficient; the ratio `cross / decay` only serves as a
/// consistency check. Families whose coefficients all vanish are dropped.
pub fn recover_hill_params(coeffs: &ExpansionCoefficients) -> Result<HillParameters> {
    let gamma = -coeffs.decay;
    let mut warnings = Vec::new();
    let mut families = Vec::new();
    for (j, p) in &coeffs.aliased {
        warnings.push(format!(
            "family x{}^{} shares columns with another family; its coefficients are not separable",
            j + 1,
            p
        ));
    }
    for fam in &coeffs.families {
        if fam.power == 0.0 && fam.cross == 0.0 && fam.next == 0.0 {
            continue;
        }
        let beta = -fam.next;
        let decay_known = coeffs.decay.abs() >= IDENTIFIABILITY_FLOOR;
        if !decay_known && fam.cross.abs() >= IDENTIFIABILITY_FLOOR {
            return Err(Error::NonIdentifiable(format!(
                "decay coefficient {:e} vanishes while the cross coefficient of x{}^{} is {:e}",
                coeffs.decay,
                fam.regulator + 1,
                fam.exponent,
                fam.cross
            )));
        }
        let beta_from_ratio = decay_known.then(|| fam.cross / coeffs.decay);
        let consistent = match beta_from_ratio {
            Some(r) => {
                let scale = beta.abs().max(r.abs());
                scale == 0.0 || (beta - r).abs() <= CONSISTENCY_TOLERANCE * scale
            }
            None => true,
        };
        if !consistent {
            warnings.push(format!(
                "denominator estimates for x{}^{} disagree: {:.6} (lagged) vs {:.6} (ratio)",
                fam.regulator + 1,
                fam.exponent,
                beta,
                beta_from_ratio.unwrap_or(f64::NAN)
            ));
        }
        let alpha = match coeffs.mode {
            RationalMode::Activation => Some(fam.power - coeffs.constant * beta),
            _ => None,
        };
        families.push(FamilyParameters {
            regulator: fam.regulator,
            exponent: fam.exponent,
            beta,
            beta_from_ratio,
            alpha,
            consistent,
        });
    }
    Ok(HillParameters {
        mode: coeffs.mode,
        target: coeffs.target,
        gamma,
        constant: coeffs.constant,
        families,
        warnings,
    })
}
