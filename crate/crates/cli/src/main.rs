use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use halfpic::cones::{default_tolerance, membership};
use halfpic::curvature::{
    decompose, matrix_rows, model, operator_from_json, operator_to_json, spectrum3,
    CurvatureOperator, ModelName, OperatorDocument,
};
use halfpic::eigen::eigenvalues;
use halfpic::flow::{integrate, FlowParams};
use halfpic::group_actions::{average, exact_average, maximality_witness, Factor};
use halfpic::verify::{run_suite, Suite};
use halfpic::Error;

#[derive(Parser)]
#[command(name = "halfpic", version, about = "Curvature operators on four-manifolds: cones, flow, averaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named model operator as JSON.
    Models {
        #[arg(long)]
        name: ModelName,
        /// Scalar curvature (inverse squared radius for s3xr and s2xs2).
        #[arg(long, default_value_t = 12.0)]
        scal: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print cone margins and the membership class.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the scalar, traceless Ricci and Weyl parts with their spectra.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Integrate dR/dt = Q(R) and write the trajectory CSV.
    Flow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "t-max", default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        normalize: bool,
        #[arg(long = "blowup-norm", default_value_t = 1e8)]
        blowup_norm: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded property suite.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo average over one S³ factor.
    Average {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "left")]
        factor: Factor,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the CP²-pattern witness from an operator failing NNIC+ after projection.
    Witness {
        #[arg(long)]
        input: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn read_operator(path: &Path) -> Result<CurvatureOperator, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let r = operator_from_json(&text)?;
    r.check_bianchi()?;
    Ok(r)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            say(text);
            Ok(())
        }
    }
}

/// Writes a line to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("finite values")
}

#[derive(Serialize)]
struct Part {
    matrix: Vec<Vec<f64>>,
    spectrum: Vec<f64>,
}

#[derive(Serialize)]
struct DecompositionOutput {
    scal: f64,
    ric0: Part,
    wplus: Part,
    wminus: Part,
}

#[derive(Serialize)]
struct AverageOutput {
    factor: Factor,
    samples: usize,
    seed: u64,
    averaged: OperatorDocument,
    exact: OperatorDocument,
    distance: f64,
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Models { name, scal, out } => {
            emit(&operator_to_json(&model(name, scal)?), out.as_deref())?;
        }
        Command::Classify { input, tol } => {
            let r = read_operator(&input)?;
            let tol = tol.unwrap_or_else(|| default_tolerance(&r));
            say(&membership(&r, tol)?.to_json());
        }
        Command::Decompose { input } => {
            let d = decompose(&read_operator(&input)?)?;
            let out = DecompositionOutput {
                scal: d.scal,
                ric0: Part { matrix: matrix_rows(&d.ric0), spectrum: eigenvalues(&d.ric0).to_vec() },
                wplus: Part { matrix: matrix_rows(&d.wplus), spectrum: spectrum3(&d.wplus).to_vec() },
                wminus: Part { matrix: matrix_rows(&d.wminus), spectrum: spectrum3(&d.wminus).to_vec() },
            };
            say(&to_json(&out));
        }
        Command::Flow { input, t_max, dt, normalize, blowup_norm, out } => {
            let r = read_operator(&input)?;
            let p = FlowParams { t_max, dt, normalize, blowup_norm, ..FlowParams::default() };
            let traj = integrate(&r, &p)?;
            let csv = traj.to_csv_string();
            match out {
                Some(path) => fs::write(&path, csv)
                    .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))?,
                None => {
                    let _ = std::io::stdout().lock().write_all(csv.as_bytes());
                }
            }
            eprintln!(
                "termination: {:?} at t={} after {} samples",
                traj.termination,
                traj.last().t,
                traj.samples.len()
            );
        }
        Command::Verify { suite, samples, seed } => {
            let report = run_suite(suite, samples, seed)?;
            say(&report.to_string());
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
        Command::Average { input, factor, samples, seed } => {
            let r = read_operator(&input)?;
            let avg = average(&r, factor, samples, seed)?;
            let exact = exact_average(&r, factor)?;
            let out = AverageOutput {
                factor,
                samples,
                seed,
                distance: (avg.matrix() - exact.matrix()).norm(),
                averaged: OperatorDocument::from_operator(&avg),
                exact: OperatorDocument::from_operator(&exact),
            };
            say(&to_json(&out));
        }
        Command::Witness { input } => {
            let r = read_operator(&input)?;
            say(&maximality_witness(&r)?.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(2),
    }
}
