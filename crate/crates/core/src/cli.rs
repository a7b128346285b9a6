//! Command-line frontend: `simulate`, `fit`, `demo` and `inspect`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::benchmark::{run_experiment, ExperimentConfig, Preset};
use crate::dictionary::{DictionarySpec, RationalMode};
use crate::error::{Error, Result};
use crate::pipeline::{reconstruct, score_against_truth, ModelDocument, NetworkModel};
use crate::rvm::{BetaInit, RvmOptions};
use crate::simulator::{repressilator_model, NoiseSpec, OdeModel, RepressilatorParams};
use crate::timeseries::TimeSeries;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "netrecon", version, about = "Sparse Bayesian reconstruction of reaction networks from time series")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a model with Euler steps and process noise; writes a trajectory CSV.
    Simulate(SimulateArgs),
    /// Reconstruct a network from a trajectory CSV.
    Fit(Box<FitArgs>),
    /// Run a canned multi-round experiment.
    Demo(DemoArgs),
    /// Print the equations of a fitted model.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON run document; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    noise_variance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated initial state.
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RationalArg {
    Activation,
    Repression,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Sampling interval, required when the CSV has no `t` column.
    #[arg(long)]
    step: Option<f64>,
    /// JSON dictionary spec; family flags extend it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    linear: bool,
    /// Every monomial up to this total degree.
    #[arg(long, value_name = "MAXDEG")]
    monomials: Option<u32>,
    /// Hill coefficients, e.g. `1,2,3,4`.
    #[arg(long, value_delimiter = ',')]
    hill: Option<Vec<u32>>,
    #[arg(long)]
    constant: bool,
    #[arg(long, value_enum)]
    rational: Option<RationalArg>,
    /// Exponents of the rational expansion.
    #[arg(long, value_delimiter = ',', requires = "rational")]
    exponents: Option<Vec<u32>>,
    /// 1-based regulator indices of the rational expansion (default: all states).
    #[arg(long, value_delimiter = ',', requires = "rational")]
    regulators: Option<Vec<usize>>,
    /// Run document of the generating model, used to score the fit.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Flat weight listing; defaults to the output path with a `.csv` extension.
    #[arg(long)]
    weights_csv: Option<PathBuf>,
    /// Directory for per-target solver diagnostics.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long)]
    alpha_init: Option<f64>,
    #[arg(long)]
    beta_init: Option<f64>,
    #[arg(long)]
    prune_threshold: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemoSystem {
    Repressilator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Exp1,
    Exp2,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(value_enum)]
    system: DemoSystem,
    #[arg(long, value_enum, default_value = "exp1")]
    preset: PresetArg,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_variance: Option<f64>,
    #[arg(long, default_value = "demo-out")]
    out: PathBuf,
    /// Also write every round's trajectory.
    #[arg(long)]
    dump_trajectories: bool,
}

#[derive(Debug, Args)]
struct InspectArgs {
    result: PathBuf,
}

/// Run document for `simulate`: a model (explicit terms or the built-in
/// repressilator) plus the integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Explicit per-state terms; the repressilator is used when absent.
    pub model: Option<OdeModel>,
    pub repressilator: RepressilatorParams,
    pub noise_variance: f64,
    pub seed: u64,
    pub eps: f64,
    pub steps: usize,
    pub x0: Vec<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: None,
            repressilator: RepressilatorParams::default(),
            noise_variance: 1e-3,
            seed: 0,
            eps: 0.1,
            steps: 500,
            x0: crate::benchmark::DEFAULT_X0.to_vec(),
        }
    }
}

impl SimulateConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn ode(&self) -> Result<OdeModel> {
        match &self.model {
            Some(m) => Ok(m.clone()),
            None => repressilator_model(&self.repressilator),
        }
    }

    pub fn run(&self) -> Result<TimeSeries> {
        self.ode()?
            .simulate_euler(&self.x0, self.eps, self.steps, &NoiseSpec::new(self.noise_variance, self.seed))
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure(Error::Invalid(format!("thread pool: {e}")))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Usage(msg)) => {
            eprintln!("error[cli.usage]: {msg}");
            EXIT_USAGE
        }
        Err(Failure(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            EXIT_FAILURE
        }
    }
}

enum CliError {
    Usage(String),
    Failure(Error),
}
use CliError::{Failure, Usage};

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Failure(e)
    }
}

fn dispatch(cmd: Command) -> std::result::Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(*a),
        Command::Demo(a) => demo(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn simulate(a: SimulateArgs) -> std::result::Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => SimulateConfig::read(p)?,
        None => SimulateConfig::default(),
    };
    if let Some(v) = a.noise_variance {
        cfg.noise_variance = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if let Some(v) = a.x0 {
        cfg.x0 = v;
    }
    let ts = cfg.run()?;
    ts.write_csv(&a.out)?;
    println!("wrote {} samples of {} states to {}", ts.len(), ts.n_states(), a.out.display());
    Ok(())
}

fn fit_spec(a: &FitArgs, n_vars: usize) -> std::result::Result<DictionarySpec, CliError> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(Error::from)?
        }
        None => {
            let any = a.linear || a.monomials.is_some() || a.hill.is_some() || a.constant || a.rational.is_some();
            if !any {
                return Err(Usage(
                    "no dictionary given; use --spec or --linear/--monomials/--hill/--constant/--rational".into(),
                ));
            }
            DictionarySpec {
                n_vars,
                include_linear: false,
                include_constant: false,
                ..DictionarySpec::default()
            }
        }
    };
    spec.n_vars = n_vars;
    spec.include_linear |= a.linear;
    spec.include_constant |= a.constant;
    if let Some(d) = a.monomials {
        spec.monomial_max_degree = Some(d);
    }
    if let Some(h) = &a.hill {
        spec.hill_coeffs = h.clone();
    }
    if let Some(r) = a.rational {
        spec.rational_mode = match r {
            RationalArg::Activation => RationalMode::Activation,
            RationalArg::Repression => RationalMode::Repression,
        };
        spec.rational_exponents = a.exponents.clone().unwrap_or_else(|| vec![1]);
    }
    if let Some(r) = &a.regulators {
        if r.contains(&0) {
            return Err(Usage("--regulators are 1-based".into()));
        }
        spec.regulators = Some(r.iter().map(|j| j - 1).collect());
    }
    spec.validate()?;
    Ok(spec)
}

fn fit(a: FitArgs) -> std::result::Result<(), CliError> {
    let ts = TimeSeries::load_csv(&a.data, a.step)?;
    let spec = fit_spec(&a, ts.n_states())?;
    let mut opts = RvmOptions::default();
    if let Some(v) = a.alpha_init {
        opts.alpha_init = v;
    }
    if let Some(v) = a.beta_init {
        opts.beta_init = BetaInit::Explicit(v);
    }
    if let Some(v) = a.prune_threshold {
        opts.prune_threshold = v;
    }
    if let Some(v) = a.max_iters {
        opts.max_iters = v;
    }
    if let Some(v) = a.tol {
        opts.tol = v;
    }
    if let Some(v) = a.beta_max {
        opts.beta_max = v;
    }
    let model = reconstruct(&ts, &spec, &opts)?;
    let metrics = match &a.truth {
        Some(p) => {
            let truth = NetworkModel::from_ode(&SimulateConfig::read(p)?.ode()?, &spec, ts.step())?;
            Some(score_against_truth(&model, &truth)?)
        }
        None => None,
    };
    let doc = model.to_document(metrics);
    write_file(&a.out, doc.to_json()?.as_bytes())?;
    let csv_path = a.weights_csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    let mut buf = Vec::new();
    model.write_weights_csv(&mut buf)?;
    write_file(&csv_path, &buf)?;
    if let Some(dir) = &a.diagnostics {
        for f in &model.per_target {
            if let Some(sol) = &f.solution {
                let mut buf = Vec::new();
                sol.write_diagnostics(&mut buf).map_err(|e| Error::io(dir, e))?;
                write_file(&dir.join(format!("target_{}.csv", f.target + 1)), &buf)?;
            }
        }
    }
    let terms: usize = doc.targets.iter().map(|t| t.support.len()).sum();
    println!(
        "{} basis functions, {} retained terms, {} retained rows; wrote {}",
        model.basis.len(),
        terms,
        model.retained_rows.len(),
        a.out.display()
    );
    for t in doc.targets.iter().filter(|t| t.error.is_some()) {
        eprintln!("warning: target {}: {}", t.name, t.error.as_deref().unwrap_or(""));
    }
    Ok(())
}

fn demo(a: DemoArgs) -> std::result::Result<(), CliError> {
    let DemoSystem::Repressilator = a.system;
    let mut cfg = ExperimentConfig::preset(match a.preset {
        PresetArg::Exp1 => Preset::Exp1,
        PresetArg::Exp2 => Preset::Exp2,
    });
    if let Some(r) = a.rounds {
        cfg.rounds = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(q) = a.noise_variance {
        cfg.noise_variance = q;
    }
    if cfg.rounds == 0 {
        return Err(Usage("--rounds must be at least 1".into()));
    }
    let report = run_experiment(&cfg)?;
    write_file(&a.out.join("report.json"), report.to_json()?.as_bytes())?;
    let mut buf = Vec::new();
    report.write_rounds_csv(&mut buf)?;
    write_file(&a.out.join("rounds.csv"), &buf)?;
    buf.clear();
    report.write_median_csv(&mut buf)?;
    write_file(&a.out.join("median_weights.csv"), &buf)?;
    buf.clear();
    report.write_timing_csv(&mut buf)?;
    write_file(&a.out.join("timing.csv"), &buf)?;
    if a.dump_trajectories {
        for r in 0..cfg.rounds {
            let ts = cfg.simulate_round(r)?;
            write_file(
                &a.out.join("trajectories").join(format!("round_{r:04}.csv")),
                ts.to_csv_string().as_bytes(),
            )?;
        }
    }

    println!(
        "{}: {} of {} rounds completed, x0 = {:?}",
        cfg.name, report.completed, cfg.rounds, cfg.x0
    );
    println!("{:<8} {:>8} {:>10} {:>8}", "param", "truth", "median", "support");
    for k in &report.kinetic {
        println!("{:<8} {:>8.3} {:>10.4} {:>8.2}", k.name, k.truth, k.median, k.support_frequency);
    }
    println!("exact kinetic support in {:.0}% of rounds", 100.0 * report.kinetic_exact_fraction);
    let total: f64 = report.timing.iter().sum();
    println!(
        "mean wall-clock per round {:.4} s; report in {}",
        total / report.timing.len() as f64,
        a.out.display()
    );
    Ok(())
}

fn inspect(a: InspectArgs) -> std::result::Result<(), CliError> {
    let doc = ModelDocument::read(&a.result)?;
    println!("{} basis functions, eps = {}", doc.basis.len(), doc.eps);
    for eq in doc.equations() {
        println!("{eq}");
    }
    for t in &doc.targets {
        if let Some(h) = &t.hill {
            println!(
                "{}: gamma = {:.4}, constant = {:.4}",
                t.name, h.gamma, h.constant
            );
            for f in &h.families {
                let alpha = f.alpha.map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "  regulator x{} exponent {}: beta = {:.4}, alpha = {alpha}{}",
                    f.regulator + 1,
                    f.exponent,
                    f.beta,
                    if f.consistent { "" } else { " (inconsistent)" }
                );
            }
        }
        if let Some(e) = &t.error {
            println!("{}: {e}", t.name);
        }
    }
    if let Some(m) = &doc.metrics {
        println!(
            "precision {:.3}, recall {:.3}, exact support {}, max error {:.3e}",
            m.precision, m.recall, m.exact_support, m.max_abs_error
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_arguments_is_a_usage_error() {
        assert_eq!(run(["netrecon"]), EXIT_USAGE);
    }

    #[test]
    fn help_and_version_succeed() {
        assert_eq!(run(["netrecon", "--help"]), EXIT_OK);
        assert_eq!(run(["netrecon", "--version"]), EXIT_OK);
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(["netrecon", "fit", "--bogus"]), EXIT_USAGE);
    }

    #[test]
    fn missing_data_is_a_failure() {
        let code = run(["netrecon", "fit", "--data", "/nonexistent/x.csv", "--linear", "--out", "/tmp/never.json"]);
        assert_eq!(code, EXIT_FAILURE);
    }

    #[test]
    fn simulate_config_defaults() {
        let cfg: SimulateConfig = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.steps, 500);
        assert!(serde_json::from_str::<SimulateConfig>(r#"{"sede": 3}"#).is_err());
    }
}
