//! Uniformly sampled multivariate trajectories and their finite-difference targets.
//!
//! The canonical interchange format is a CSV file with a header row. The first
//! column may be a time column named `t`; when it is absent the sampling step
//! has to be supplied by the caller.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance on the deviation of successive timestamp differences from the step.
pub const SAMPLING_TOLERANCE: f64 = 1e-9;

/// States sampled at `t_k = t_0 + k * step`. Rows are time points, columns are state variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    states: DMatrix<f64>,
    step: f64,
    names: Vec<String>,
}

/// Successive state differences `e(t_{k+1}) = x(t_{k+1}) - x(t_k)`, one row per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    pub values: DMatrix<f64>,
}

impl TimeSeries {
    /// Builds a trajectory with default column labels `x1..xn`.
    pub fn new(states: DMatrix<f64>, step: f64) -> Result<Self> {
        let names = (1..=states.ncols()).map(|i| format!("x{i}")).collect();
        Self::with_names(states, step, names)
    }

    pub fn with_names(states: DMatrix<f64>, step: f64, names: Vec<String>) -> Result<Self> {
        if states.nrows() < 2 {
            return Err(Error::InsufficientData(format!(
                "a trajectory needs at least 2 time points, got {}",
                states.nrows()
            )));
        }
        if states.ncols() == 0 {
            return Err(Error::InsufficientData("trajectory has no state columns".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Invalid(format!("sampling step must be positive, got {step}")));
        }
        if names.len() != states.ncols() {
            return Err(Error::Invalid(format!(
                "{} column labels for {} state columns",
                names.len(),
                states.ncols()
            )));
        }
        if let Some((idx, _)) = states.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (row, col) = (idx % states.nrows(), idx / states.nrows());
            return Err(Error::Invalid(format!(
                "non-finite state value at row {row}, column {col}"
            )));
        }
        Ok(Self {
            states,
            step,
            names,
        })
    }

    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of time points.
    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.states.nrows() == 0
    }

    pub fn n_states(&self) -> usize {
        self.states.ncols()
    }

    /// State vector at time index `k`.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.states.row(k).iter().copied().collect()
    }

    /// Reads a CSV trajectory. `step` is required when the file has no `t` column;
    /// when both are present they must agree.
    pub fn load_csv(path: impl AsRef<Path>, step: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, step)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, step: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers().map_err(csv_error)?.clone();
        let has_time = headers.get(0) == Some("t");
        let skip = usize::from(has_time);
        let names: Vec<String> = headers.iter().skip(skip).map(str::to_owned).collect();
        if names.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "no state columns in header".into(),
            });
        }

        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} is not a number: `{field}`", col + 1),
                })?;
                if has_time && col == 0 {
                    times.push(v);
                } else {
                    values.push(v);
                }
            }
        }

        let rows = values.len() / names.len();
        if rows < 2 {
            return Err(Error::InsufficientData(format!(
                "a trajectory needs at least 2 time points, got {rows}"
            )));
        }

        let step = if has_time {
            let inferred = check_uniform(&times)?;
            if let Some(given) = step {
                if (given - inferred).abs() > SAMPLING_TOLERANCE * inferred {
                    return Err(Error::Sampling {
                        index: 0,
                        found: inferred,
                        expected: given,
                    });
                }
            }
            inferred
        } else {
            step.ok_or_else(|| {
                Error::Invalid("no `t` column in the file; the sampling step must be given".into())
            })?
        };

        let states = DMatrix::from_row_slice(rows, names.len(), &values);
        Self::with_names(states, step, names)
    }

    /// Writes the trajectory with a leading `t` column, `t_k = k * step`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(&mut file).map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "t")?;
        for name in &self.names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for k in 0..self.len() {
            write!(out, "{}", k as f64 * self.step)?;
            for v in self.states.row(k).iter() {
                // `{}` on f64 prints the shortest representation that round-trips exactly.
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Regression targets `y[k][i] = x_i(t_{k+1}) - x_i(t_k)`.
    pub fn finite_difference_targets(&self) -> TargetMatrix {
        let m = self.len() - 1;
        let values = DMatrix::from_fn(m, self.n_states(), |k, i| {
            self.states[(k + 1, i)] - self.states[(k, i)]
        });
        TargetMatrix { values }
    }
}

impl TargetMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    /// Target vector of state `i`.
    pub fn column(&self, i: usize) -> nalgebra::DVector<f64> {
        self.values.column(i).into_owned()
    }
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    let n = times.len();
    let step = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Sampling {
            index: 0,
            found: step,
            expected: step,
        });
    }
    for (k, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if (d - step).abs() > SAMPLING_TOLERANCE * step {
            return Err(Error::Sampling {
                index: k,
                found: d,
                expected: step,
            });
        }
    }
    Ok(step)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
