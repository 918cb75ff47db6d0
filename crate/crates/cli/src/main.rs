//! `linopt`: JSON-in, JSON-out front end to the simulator.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid inputs, 3 when the
//! numerics fail. Errors are reported as a JSON object on standard output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linopt::io::{self, Metadata};
use linopt::{
    dilate, exact_distribution, expectation, gradient, gradient_descent, sample,
    clements_decompose, Circuit, EvalMode, Error, OccupationState, Observable,
    OptimizationProblem,
};

#[derive(Parser, Debug)]
#[command(name = "linopt", version, about = "Linear optical circuit simulator with dilation-based gradients")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Print the description of a JSON format and exit.
    #[arg(long, value_name = "NAME")]
    schema: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transition amplitude <out| A |in> of a matrix or diagram.
    Amplitude {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out")]
        output: String,
    },
    /// Output distribution of a circuit on an input state.
    Distribution {
        #[command(flatten)]
        source: UnitarySource,
        #[arg(long)]
        input: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Expectation value of a normal observable.
    Expectation {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        input: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Gradient of an expectation value with respect to every parameter.
    Grad {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        input: String,
        #[command(flatten)]
        sampling: Sampling,
        /// Include wall-clock timing (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Unitary dilation of an arbitrary matrix.
    Dilate {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Clements mesh realizing a unitary.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Gradient descent on a Hermitian expectation value.
    Optimize {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct UnitarySource {
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Unitary matrix file instead of a circuit.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Sampling {
    /// Exact evaluation (the default).
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long, requires = "seed")]
    shots: Option<u64>,
    #[arg(long, requires = "shots")]
    seed: Option<u64>,
}

impl Sampling {
    fn mode(&self) -> EvalMode {
        match (self.shots, self.seed) {
            (Some(shots), Some(seed)) => EvalMode::Shots { shots, seed },
            _ => EvalMode::Exact,
        }
    }

    fn metadata(&self, modes: usize, photons: usize) -> Metadata {
        Metadata {
            modes,
            photons,
            shots: self.shots,
            seed: self.seed,
        }
    }
}

/// Where a failure happened: loading inputs or computing on them.
enum Failure {
    Input(Error),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn load(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::Input(Error::InvalidArgument(format!(
            "cannot read {}: {e}",
            path.display()
        )))
    })
}

fn input<T>(r: linopt::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    input(io::parse_circuit(&load(path)?))
}

fn load_observable(path: &Path) -> Result<Observable, Failure> {
    input(io::parse_observable(&load(path)?))
}

fn state(text: &str) -> Result<OccupationState, Failure> {
    input(io::parse_state(text))
}

fn render<S: serde::Serialize>(value: &S) -> Result<String, Failure> {
    Ok(io::to_json_string(value)?)
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Amplitude {
            matrix,
            input: i,
            output: o,
        } => {
            let d = input(io::parse_diagram(&load(&matrix)?))?;
            let (i, o) = (state(&i)?, state(&o)?);
            let z = input(d.amplitude(&i, &o))?;
            render(&io::AmplitudeReport::new(i, o, z))
        }
        Command::Distribution {
            source,
            input: i,
            sampling,
        } => {
            let u = match (&source.circuit, &source.matrix) {
                (Some(c), _) => input(load_circuit(c)?.to_unitary_bound())?,
                (None, Some(m)) => input(io::parse_matrix(&load(m)?))?,
                (None, None) => unreachable!("clap enforces one source"),
            };
            let i = state(&i)?;
            let dist = exact_distribution(&u, &i)?;
            match sampling.mode() {
                EvalMode::Exact => render(&io::DistributionReport::exact(&i, &dist)),
                EvalMode::Shots { shots, seed } => {
                    let rec = sample(&dist, shots, seed)?;
                    render(&io::DistributionReport::sampled(&i, &dist, &rec))
                }
            }
        }
        Command::Expectation {
            circuit,
            observable,
            input: i,
            sampling,
        } => {
            let c = load_circuit(&circuit)?;
            let q = load_observable(&observable)?;
            let i = state(&i)?;
            let theta = input(c.values())?;
            let v = expectation(&q, &c, &theta, &i, sampling.mode())?;
            let meta = sampling.metadata(c.modes(), i.photons());
            render(&io::ExpectationReport::new(meta, i, v))
        }
        Command::Grad {
            circuit,
            observable,
            input: i,
            sampling,
            timing,
        } => {
            let c = load_circuit(&circuit)?;
            let q = load_observable(&observable)?;
            let i = state(&i)?;
            let theta = input(c.values())?;
            let report = gradient(&c, &theta, &q, &i, sampling.mode())?;
            let meta = sampling.metadata(c.modes(), i.photons());
            render(&io::GradientJson::new(&report, meta, i, timing))
        }
        Command::Dilate { matrix } => {
            let a = input(io::parse_matrix(&load(&matrix)?))?;
            let d = dilate(&a)?;
            render(&io::DilationJson::new(&d)?)
        }
        Command::Decompose { matrix } => {
            let u = input(io::parse_matrix(&load(&matrix)?))?;
            let d = input(clements_decompose(&u))?;
            render(&io::DecompositionJson::new(&d))
        }
        Command::Optimize {
            circuit,
            observable,
            input: i,
            step,
            max_iters,
            tol,
            sampling,
        } => {
            let c = load_circuit(&circuit)?;
            let q = load_observable(&observable)?;
            let i = state(&i)?;
            let theta0 = input(c.values())?;
            let names: Vec<String> = c.param_names().map(str::to_string).collect();
            let meta = sampling.metadata(c.modes(), i.photons());
            let problem = input(OptimizationProblem::new(c, q, i))?;
            let traj = gradient_descent(&problem, &theta0, step, max_iters, tol, sampling.mode())
                .map_err(|e| match e {
                    Error::InvalidArgument(_) => Failure::Input(e),
                    e => Failure::Compute(e),
                })?;
            render(&io::TrajectoryJson::new(&traj, names, meta))
        }
    }
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn report_error(e: &Error, code: u8) -> ExitCode {
    let body = io::to_json_string(&io::ErrorJson::new(e, code == 3)).unwrap_or_else(|_| e.to_string());
    emit(&body);
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(name) = cli.schema {
        return match io::schema(&name) {
            Some(doc) => {
                emit(doc);
                ExitCode::SUCCESS
            }
            None => report_error(
                &Error::InvalidArgument(format!(
                    "unknown schema `{name}`; available: {}",
                    io::SCHEMAS.join(", ")
                )),
                2,
            ),
        };
    }
    let Some(command) = cli.command else {
        return report_error(
            &Error::InvalidArgument("no subcommand given; see --help".into()),
            2,
        );
    };
    match run(command) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Input(e)) => report_error(&e, 2),
        Err(Failure::Compute(e)) => {
            let code = if e.is_numerical() { 3 } else { 2 };
            report_error(&e, code)
        }
    }
}
