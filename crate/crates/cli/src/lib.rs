//! Command-line front end.
//!
//! Standard output carries machine-readable output only (JSON, or CSV for
//! the alpha sweep); diagnostics go to standard error. The exit code is the
//! classification channel:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (solution found and feasible) |
//! | 1 | solution found, but infeasible or no real pressure |
//! | 2 | solver failure |
//! | 3 | network failed validation, or does not fit the chosen method |
//! | 4 | I/O, schema or usage error |

use clap::{Args, Parser, Subcommand, ValueEnum};
use potflow::bounds::bound_is_guaranteed;
use potflow::eos::{alpha_error_sweep, SweepGrid};
use potflow::generate::{random_network, GeneratorSpec, Topology};
use potflow::io::{self, IoError, SolutionFile};
use potflow::solver::{self, Method, MethodError};
use potflow::*;
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "potflow", version, about = "Steady-state pipeline network solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a network against the admissibility rules.
    Validate { network: PathBuf },
    /// Print the a priori hypercube bound.
    Bounds {
        network: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Safe)]
        mode: ModeArg,
    },
    /// Solve a network and classify the solution.
    Solve {
        network: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also write the solution JSON here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the continuation trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the Jacobian at the final state (s = 1) as CSV triplets.
        #[arg(long)]
        dump_jacobian: Option<PathBuf>,
    },
    /// Classify a solution as feasible or not.
    Feasibility {
        network: PathBuf,
        /// Solution JSON from `solve`; solved on the fly when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compressor-ratio approximation error sweep as CSV.
    AlphaError {
        #[arg(long, default_value_t = 0.1)]
        p_min: f64,
        #[arg(long, default_value_t = 10.0)]
        p_max: f64,
        #[arg(long, default_value_t = 1.1)]
        alpha_min: f64,
        #[arg(long, default_value_t = 2.1)]
        alpha_max: f64,
        /// Grid points along each axis.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run Newton from random starts and count distinct solutions.
    Probe {
        network: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Emit a random admissible network.
    Generate {
        #[arg(long, value_enum, default_value_t = TopologyArg::Mesh)]
        topology: TopologyArg,
        #[arg(long, default_value_t = 20)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EosArg::Ideal)]
        eos: EosArg,
    },
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    ds_init: Option<f64>,
    #[arg(long)]
    ds_min: Option<f64>,
    /// Newton iterations per solve.
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Safe,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Newton,
    Homotopy,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TopologyArg {
    Tree,
    Mesh,
    Cycle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EosArg {
    Ideal,
    Cnga,
}

/// A failed command: exit code plus message for standard error.
struct Failure(i32, String);

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure(EXIT_IO, e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Failure> {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.ds_init {
            cfg.ds_init = v;
        }
        if let Some(v) = self.ds_min {
            cfg.ds_min = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_newton_iters = v;
        }
        cfg.validate().map_err(|e| Failure(EXIT_IO, e.to_string()))?;
        Ok(cfg)
    }

    fn method(&self) -> Method {
        match self.method {
            MethodArg::Auto => Method::Auto,
            MethodArg::Newton => Method::Newton,
            MethodArg::Homotopy => Method::Homotopy,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { network } => validate(&network, out, err),
        Command::Bounds { network, mode } => bounds(&network, mode, out),
        Command::Solve {
            network,
            solver,
            output,
            trace,
            dump_jacobian,
        } => solve(&network, &solver, output.as_deref(), trace.as_deref(), dump_jacobian.as_deref(), out, err),
        Command::Feasibility {
            network,
            solution,
            solver,
        } => feasibility(&network, solution.as_deref(), &solver, out, err),
        Command::AlphaError {
            p_min,
            p_max,
            alpha_min,
            alpha_max,
            points,
            output,
        } => {
            let grid = SweepGrid {
                p_range: (p_min, p_max),
                alpha_range: (alpha_min, alpha_max),
                n_p: points,
                n_alpha: points,
            };
            let sweep = alpha_error_sweep(&EosParams::cnga(), &grid).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
            emit(out, output.as_deref(), &sweep.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Probe {
            network,
            trials,
            seed,
            solver,
        } => probe(&network, trials, seed, &solver, out),
        Command::Generate {
            topology,
            nodes,
            seed,
            eos,
        } => {
            if nodes == 0 {
                return Err(Failure(EXIT_IO, "--nodes must be positive".into()));
            }
            let topology = match topology {
                TopologyArg::Tree => Topology::Tree,
                TopologyArg::Mesh => Topology::Mesh,
                TopologyArg::Cycle => Topology::SingleCycle,
            };
            let mut spec = GeneratorSpec::new(topology, nodes);
            spec.eos = match eos {
                EosArg::Ideal => EosParams::ideal(),
                EosArg::Cnga => EosParams::cnga(),
            };
            let net = random_network(&spec, seed);
            emit(out, None, &io::network_to_json(&net.to_description()))?;
            Ok(EXIT_OK)
        }
    }
}

fn with_newline(text: &str) -> String {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, with_newline(text)).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))
}

/// Writes to `path` if given, otherwise to standard output.
fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(with_newline(text).as_bytes())
            .map_err(|e| Failure(EXIT_IO, format!("standard output: {e}"))),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Network, Failure> {
    let desc = io::read_network(path)?;
    desc.validate().map_err(|v| {
        for violation in &v.0 {
            let _ = writeln!(err, "  {violation}");
        }
        Failure(EXIT_VALIDATION, v.to_string())
    })
}

#[derive(Serialize)]
struct ValidationReport {
    valid: bool,
    violations: Vec<potflow::Violation>,
}

fn validate(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let desc = io::read_network(path)?;
    match desc.validate() {
        Ok(_) => {
            emit(out, None, &json(&ValidationReport { valid: true, violations: vec![] }))?;
            Ok(EXIT_OK)
        }
        Err(v) => {
            for violation in &v.0 {
                let _ = writeln!(err, "  {violation}");
            }
            let _ = writeln!(err, "{v}");
            emit(out, None, &json(&ValidationReport { valid: false, violations: v.0 }))?;
            Ok(EXIT_VALIDATION)
        }
    }
}

#[derive(Serialize)]
struct BoundsReport {
    #[serde(flatten)]
    bounds: DomainBounds,
    /// Whether the cube provably contains every solution of this network.
    guaranteed: bool,
}

fn bounds(path: &Path, mode: ModeArg, out: &mut dyn Write) -> Outcome {
    let net = load(path, &mut std::io::sink())?;
    let mode = match mode {
        ModeArg::Paper => BoundsMode::Paper,
        ModeArg::Safe => BoundsMode::Safe,
    };
    let report = BoundsReport {
        bounds: compute_bounds(&net, mode),
        guaranteed: bound_is_guaranteed(&net),
    };
    emit(out, None, &json(&report))?;
    Ok(EXIT_OK)
}

fn run_solver(net: &Network, args: &SolverArgs) -> Result<SolveResult, Failure> {
    let cfg = args.config()?;
    solver::solve(net, args.method(), &cfg).map_err(|e| match e {
        MethodError::Oracle(o) => Failure(EXIT_VALIDATION, format!("oracle not applicable: {o}")),
    })
}

/// Exit code for a finished solve.
fn classify_exit(result: &SolveResult, report: Option<&FeasibilityReport>) -> i32 {
    if !result.converged() {
        return EXIT_SOLVER;
    }
    match report.map(|r| r.overall) {
        Some(Overall::Feasible) | None => EXIT_OK,
        Some(Overall::Infeasible | Overall::NoPressureSolution) => EXIT_INFEASIBLE,
    }
}

fn solve(
    path: &Path,
    args: &SolverArgs,
    output: Option<&Path>,
    trace: Option<&Path>,
    dump_jacobian: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let net = load(path, err)?;
    let result = run_solver(&net, args)?;
    let report = result
        .converged()
        .then(|| classify(&net, &result.state).expect("state has network layout"));

    if let Some(p) = trace {
        write_file(p, &result.trace_csv())?;
    }
    if let Some(p) = dump_jacobian {
        let cfg = args.config()?;
        let jac = assemble_jacobian(&net, result.state.values(), 1.0, cfg.epsilon).expect("state has network layout");
        write_file(p, &jac.to_csv())?;
    }

    let text = json(&SolutionFile::new(&net, &result, report.as_ref()));
    if let Some(p) = output {
        write_file(p, &text)?;
    }
    emit(out, None, &text)?;

    let code = classify_exit(&result, report.as_ref());
    match &report {
        None => {
            let _ = writeln!(err, "solver failed: {} (residual {:e})", result.status, result.residual_norm);
        }
        Some(r) => {
            let _ = write!(err, "{}", r.summary());
        }
    }
    Ok(code)
}

fn feasibility(
    path: &Path,
    solution: Option<&Path>,
    args: &SolverArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let net = load(path, err)?;
    let state = match solution {
        Some(p) => {
            let file = io::read_solution(p)?;
            if file.status != SolveStatus::Converged.as_str() {
                return Err(Failure(
                    EXIT_SOLVER,
                    format!("solution status is {}, nothing to classify", file.status),
                ));
            }
            file.to_state(&net)?
        }
        None => {
            let result = run_solver(&net, args)?;
            if !result.converged() {
                return Err(Failure(EXIT_SOLVER, format!("solver failed: {}", result.status)));
            }
            result.state
        }
    };
    let report = classify(&net, &state).expect("state has network layout");
    emit(out, None, &json(&report))?;
    let _ = write!(err, "{}", report.summary());
    Ok(match report.overall {
        Overall::Feasible => EXIT_OK,
        Overall::Infeasible | Overall::NoPressureSolution => EXIT_INFEASIBLE,
    })
}

#[derive(Serialize)]
struct ProbeReport<'a> {
    half_width: f64,
    converged: usize,
    distinct: usize,
    trials: &'a [solver::ProbeTrial],
    states: Vec<&'a [f64]>,
}

fn probe(path: &Path, trials: usize, seed: u64, args: &SolverArgs, out: &mut dyn Write) -> Outcome {
    let net = load(path, &mut std::io::sink())?;
    let cfg = args.config()?;
    let rep = uniqueness_probe(&net, &cfg, trials, seed);
    let report = ProbeReport {
        half_width: rep.half_width,
        converged: rep.converged_count(),
        distinct: rep.distinct.len(),
        trials: &rep.trials,
        states: rep.distinct.iter().map(|s| s.values()).collect(),
    };
    emit(out, None, &json(&report))?;
    Ok(if rep.distinct.len() <= 1 { EXIT_OK } else { EXIT_SOLVER })
}
