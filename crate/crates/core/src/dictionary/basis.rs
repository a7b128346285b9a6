use std::fmt;

use serde::{Deserialize, Serialize};

/// Whether a cross term multiplies by the factor variable at `t_k` or at `t_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lag {
    Current,
    Next,
}

/// A symbolic candidate term. Variable indices are zero-based; they print one-based (`x1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFunction {
    Constant,
    /// `x_1^{a_1} ... x_n^{a_n}`; never all-zero (that is `Constant`).
    Monomial(Vec<u32>),
    /// `1 / (1 + x_var^coeff)`
    HillRepress { var: usize, coeff: u32 },
    /// `x_var^coeff / (1 + x_var^coeff)`
    HillActivate { var: usize, coeff: u32 },
    /// `base(x(t_k)) * x_factor(t_k or t_{k+1})`, only produced by rational expansions.
    CrossTerm {
        base: Box<BasisFunction>,
        factor: usize,
        lag: Lag,
    },
}

impl BasisFunction {
    /// Canonical constructor: an all-zero exponent vector becomes `Constant`.
    pub fn monomial(exponents: Vec<u32>) -> Self {
        if exponents.iter().all(|&a| a == 0) {
            BasisFunction::Constant
        } else {
            BasisFunction::Monomial(exponents)
        }
    }

    /// `x_var` in an `n`-variable system.
    pub fn linear(var: usize, n: usize) -> Self {
        Self::power(var, 1, n)
    }

    /// `x_var^p` in an `n`-variable system.
    pub fn power(var: usize, p: u32, n: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = p;
        Self::monomial(e)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, BasisFunction::Constant)
    }

    pub fn is_cross_term(&self) -> bool {
        matches!(self, BasisFunction::CrossTerm { .. })
    }

    /// Needs the state at `t_{k+1}` to evaluate.
    pub fn needs_next(&self) -> bool {
        matches!(self, BasisFunction::CrossTerm { lag: Lag::Next, .. })
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            BasisFunction::Constant => None,
            BasisFunction::Monomial(e) => e.iter().rposition(|&a| a > 0),
            BasisFunction::HillRepress { var, .. } | BasisFunction::HillActivate { var, .. } => {
                Some(*var)
            }
            BasisFunction::CrossTerm { base, factor, .. } => {
                Some(base.max_var().map_or(*factor, |v| v.max(*factor)))
            }
        }
    }

    /// Number of variables a monomial was declared over (0 for other kinds).
    pub fn arity(&self) -> usize {
        match self {
            BasisFunction::Monomial(e) => e.len(),
            _ => 0,
        }
    }

    /// Exponent vector when the function is a pure monomial in the current state
    /// (including the constant and `lag = current` cross terms of monomials).
    pub fn monomial_exponents(&self, n: usize) -> Option<Vec<u32>> {
        match self {
            BasisFunction::Constant => Some(vec![0; n]),
            BasisFunction::Monomial(e) => {
                let mut out = vec![0; n.max(e.len())];
                out[..e.len()].copy_from_slice(e);
                Some(out)
            }
            BasisFunction::CrossTerm {
                base,
                factor,
                lag: Lag::Current,
            } => {
                let mut e = base.monomial_exponents(n.max(factor + 1))?;
                e[*factor] += 1;
                Some(e)
            }
            _ => None,
        }
    }

    /// Evaluates at the current state only. Returns `None` for `lag = next` cross terms.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match self {
            BasisFunction::CrossTerm { lag: Lag::Next, .. } => None,
            _ => Some(self.eval_pair(x, x)),
        }
    }

    /// Evaluates with access to the state at `t_k` (`x`) and `t_{k+1}` (`next`).
    pub fn eval_pair(&self, x: &[f64], next: &[f64]) -> f64 {
        match self {
            BasisFunction::Constant => 1.0,
            BasisFunction::Monomial(e) => e
                .iter()
                .zip(x)
                .filter(|(a, _)| **a > 0)
                .map(|(&a, &v)| v.powi(a as i32))
                .product(),
            BasisFunction::HillRepress { var, coeff } => {
                1.0 / (1.0 + x[*var].powi(*coeff as i32))
            }
            BasisFunction::HillActivate { var, coeff } => {
                let p = x[*var].powi(*coeff as i32);
                p / (1.0 + p)
            }
            BasisFunction::CrossTerm { base, factor, lag } => {
                let f = match lag {
                    Lag::Current => x[*factor],
                    Lag::Next => next[*factor],
                };
                base.eval_pair(x, next) * f
            }
        }
    }

    /// Hill denominator `1 + x_var^coeff` if this term has one.
    pub(crate) fn denominator(&self, x: &[f64]) -> Option<f64> {
        match self {
            BasisFunction::HillRepress { var, coeff } | BasisFunction::HillActivate { var, coeff } => {
                Some(1.0 + x[*var].powi(*coeff as i32))
            }
            BasisFunction::CrossTerm { base, .. } => base.denominator(x),
            _ => None,
        }
    }
}

fn pow_str(var: usize, p: u32) -> String {
    if p == 1 {
        format!("x{}", var + 1)
    } else {
        format!("x{}^{}", var + 1, p)
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisFunction::Constant => write!(f, "1"),
            BasisFunction::Monomial(e) => {
                let parts: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a > 0)
                    .map(|(v, &a)| pow_str(v, a))
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            BasisFunction::HillRepress { var, coeff } => {
                write!(f, "1/(1+{})", pow_str(*var, *coeff))
            }
            BasisFunction::HillActivate { var, coeff } => {
                let p = pow_str(*var, *coeff);
                write!(f, "{p}/(1+{p})")
            }
            BasisFunction::CrossTerm { base, factor, lag } => {
                let x = format!("x{}", factor + 1);
                let suffix = match lag {
                    Lag::Current => "",
                    Lag::Next => "(t+1)",
                };
                if base.is_constant() {
                    write!(f, "{x}{suffix}")
                } else {
                    write!(f, "{base}*{x}{suffix}")
                }
            }
        }
    }
}
