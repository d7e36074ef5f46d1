//! Linear start, damped Newton corrector and homotopy continuation.
//!
//! [`homotopy_solve`] starts from the exact solution of the linear system
//! `F(x, 0) = 0` and walks `s` up to 1, correcting with Newton at every
//! step. Each accepted iterate is checked against the safe-mode hypercube
//! from [`crate::bounds`]; leaving it means the data or the code is wrong,
//! because the continuation path stays strictly inside.

use crate::bounds::{bound_is_guaranteed, compute_bounds, path_half_width, BoundsMode};
use crate::inf_norm;
use crate::linalg::{self, LinearSolveError};
use crate::network::{Boundary, Network};
use crate::residual::{assemble_jacobian, assemble_residual, DimensionMismatch, StateVector, DEFAULT_EPSILON};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Residual infinity-norm tolerance.
    pub tol: f64,
    pub max_newton_iters: usize,
    pub ds_init: f64,
    pub ds_min: f64,
    /// Step growth after an accepted homotopy step.
    pub ds_growth: f64,
    /// Backtracking factor for the Newton line search.
    pub damping: f64,
    pub max_halvings: usize,
    /// Jacobian regularization floor for `|phi|`.
    pub epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton_iters: 50,
            ds_init: 0.1,
            ds_min: 1e-4,
            ds_growth: 1.5,
            damping: 0.5,
            max_halvings: 30,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid solver configuration: {0}")]
pub struct ConfigError(String);

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0) {
            return Err(ConfigError(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.ds_min > 0.0 && self.ds_min <= self.ds_init && self.ds_init <= 1.0) {
            return Err(ConfigError(format!(
                "need 0 < ds_min <= ds_init <= 1, got ds_min={} ds_init={}",
                self.ds_min, self.ds_init
            )));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(ConfigError(format!("damping must be in (0, 1), got {}", self.damping)));
        }
        if !(self.ds_growth >= 1.0) {
            return Err(ConfigError(format!("ds_growth must be >= 1, got {}", self.ds_growth)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(ConfigError(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    SingularAtS0,
    NewtonDiverged,
    HomotopyStalled,
    BoundaryViolation,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::SingularAtS0 => "SingularAtS0",
            SolveStatus::NewtonDiverged => "NewtonDiverged",
            SolveStatus::HomotopyStalled => "HomotopyStalled",
            SolveStatus::BoundaryViolation => "BoundaryViolation",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a Newton run stopped without converging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NewtonFailure {
    SingularJacobian(String),
    NoDecrease,
    IterationLimit,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub s: f64,
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub failure: Option<NewtonFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub state: StateVector,
    pub residual_norm: f64,
    pub status: SolveStatus,
    pub trace: Vec<TraceEntry>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `s,newton_iters,residual_norm` with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("s,newton_iters,residual_norm\n");
        for t in &self.trace {
            out.push_str(&format!("{:?},{},{:?}\n", t.s, t.newton_iters, t.residual_norm));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("linear system at s = 0 is singular: {0}")]
    SingularAtS0(String),
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
}

/// Exact solution of the linear system `F(x, 0) = 0`.
pub fn solve_linear_s0(network: &Network) -> Result<StateVector, SolveError> {
    let layout = network.layout();
    let jac = assemble_jacobian(network, &vec![0.0; layout.len()], 0.0, 0.0)?;
    let mut rhs = vec![0.0; layout.len()];
    for (i, j) in network.junctions().iter().enumerate() {
        rhs[layout.potential(i)] = match j.boundary {
            Boundary::Slack { potential } => potential,
            Boundary::NonSlack { withdrawal } => withdrawal,
        };
    }
    let x = linalg::solve(&jac, &rhs).map_err(|e| match e {
        LinearSolveError::Singular(msg) => SolveError::SingularAtS0(msg),
        LinearSolveError::Dimension { .. } => SolveError::SingularAtS0(e.to_string()),
    })?;
    Ok(StateVector::from_values(network, x)?)
}

fn residual_norm(network: &Network, x: &[f64], s: f64) -> f64 {
    let f = assemble_residual(network, x, s).expect("state dimension checked by caller");
    inf_norm(&f)
}

/// Damped Newton on `F(., s)` from `x0`.
pub fn newton_solve(
    network: &Network,
    x0: &StateVector,
    s: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let mut x = StateVector::from_values(network, x0.values().to_vec())?;
    let mut f = assemble_residual(network, x.values(), s)?;
    let mut norm = inf_norm(&f);
    let mut iters = 0;

    let finish = |x: StateVector, norm: f64, iters: usize, failure: Option<NewtonFailure>| {
        let status = if failure.is_none() {
            SolveStatus::Converged
        } else {
            SolveStatus::NewtonDiverged
        };
        SolveResult {
            state: x,
            residual_norm: norm,
            status,
            trace: vec![TraceEntry {
                s,
                newton_iters: iters,
                residual_norm: norm,
                failure,
            }],
        }
    };

    loop {
        if !norm.is_finite() {
            return Ok(finish(x, norm, iters, Some(NewtonFailure::NonFinite)));
        }
        if norm <= cfg.tol {
            return Ok(finish(x, norm, iters, None));
        }
        if iters >= cfg.max_newton_iters {
            return Ok(finish(x, norm, iters, Some(NewtonFailure::IterationLimit)));
        }
        iters += 1;

        let jac = assemble_jacobian(network, x.values(), s, cfg.epsilon)?;
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = match linalg::solve(&jac, &neg_f) {
            Ok(step) => step,
            Err(e) => {
                return Ok(finish(x, norm, iters, Some(NewtonFailure::SingularJacobian(e.to_string()))));
            }
        };

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = x.values().iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let f_trial = assemble_residual(network, &trial, s)?;
            let n_trial = inf_norm(&f_trial);
            if n_trial < norm || n_trial <= cfg.tol {
                accepted = Some((trial, f_trial, n_trial));
                break;
            }
            lambda *= cfg.damping;
        }
        match accepted {
            Some((trial, f_trial, n_trial)) => {
                x = StateVector::from_values(network, trial)?;
                f = f_trial;
                norm = n_trial;
            }
            None => return Ok(finish(x, norm, iters, Some(NewtonFailure::NoDecrease))),
        }
    }
}

fn failed(network: &Network, status: SolveStatus, trace: Vec<TraceEntry>) -> SolveResult {
    SolveResult {
        state: StateVector::zeros(network),
        residual_norm: f64::NAN,
        status,
        trace,
    }
}

/// Continuation from the linear system at `s = 0` to the physical system at
/// `s = 1`.
///
/// The trace records every accepted step. Once an accepted state already
/// satisfies `F(x, 1)` to tolerance the walk jumps straight to `s = 1`.
///
/// Where the a priori cube is a proven bound
/// ([`bound_is_guaranteed`]), every accepted state is checked against it and
/// an escape stops the walk with [`SolveStatus::BoundaryViolation`]; that can
/// only come from inconsistent data. Iterates are never projected.
pub fn homotopy_solve(network: &Network, cfg: &SolverConfig) -> SolveResult {
    let mut x = match solve_linear_s0(network) {
        Ok(x) => x,
        Err(_) => return failed(network, SolveStatus::SingularAtS0, Vec::new()),
    };
    // The cube is only a sound bound when flows cannot circulate; elsewhere
    // leaving it says nothing about the path and is not checked.
    let radius = bound_is_guaranteed(network).then(|| path_half_width(network));
    let escaped = |x: &StateVector| radius.is_some_and(|r| x.values().iter().any(|v| !(v.abs() <= r)));
    let mut trace = Vec::new();
    if escaped(&x) {
        let norm = residual_norm(network, x.values(), 0.0);
        return SolveResult {
            state: x,
            residual_norm: norm,
            status: SolveStatus::BoundaryViolation,
            trace,
        };
    }

    let mut s = 0.0_f64;
    let mut ds = cfg.ds_init;
    loop {
        let at_one = residual_norm(network, x.values(), 1.0);
        if at_one <= cfg.tol {
            if s < 1.0 {
                trace.push(TraceEntry {
                    s: 1.0,
                    newton_iters: 0,
                    residual_norm: at_one,
                    failure: None,
                });
            }
            return SolveResult {
                state: x,
                residual_norm: at_one,
                status: SolveStatus::Converged,
                trace,
            };
        }
        if s >= 1.0 {
            // Converged at s = 1 under the corrector but re-evaluation says
            // otherwise; only possible with a non-finite residual.
            return SolveResult {
                state: x,
                residual_norm: at_one,
                status: SolveStatus::NewtonDiverged,
                trace,
            };
        }

        let remaining = 1.0 - s;
        let s_next = if ds >= remaining { 1.0 } else { s + ds };
        let step = newton_solve(network, &x, s_next, cfg).expect("dimension fixed by network");
        let entry = step.trace.into_iter().next().expect("newton records one entry");
        if step.status == SolveStatus::Converged {
            x = step.state;
            trace.push(entry);
            s = s_next;
            if escaped(&x) {
                return SolveResult {
                    state: x,
                    residual_norm: step.residual_norm,
                    status: SolveStatus::BoundaryViolation,
                    trace,
                };
            }
            if s < 1.0 {
                ds = (ds * cfg.ds_growth).min(1.0 - s);
            }
        } else {
            ds *= 0.5;
            if ds < cfg.ds_min {
                let norm = residual_norm(network, x.values(), s);
                return SolveResult {
                    state: x,
                    residual_norm: norm,
                    status: SolveStatus::HomotopyStalled,
                    trace,
                };
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Newton at `s = 1` from the linear solution, homotopy if that fails.
    Auto,
    Newton,
    Homotopy,
    /// Closed-form tree propagation or loop-flow bisection.
    Oracle,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MethodError {
    #[error(transparent)]
    Oracle(#[from] crate::reference::OracleError),
}

pub fn solve(network: &Network, method: Method, cfg: &SolverConfig) -> Result<SolveResult, MethodError> {
    match method {
        Method::Homotopy => Ok(homotopy_solve(network, cfg)),
        Method::Newton | Method::Auto => {
            let x0 = match solve_linear_s0(network) {
                Ok(x0) => x0,
                Err(_) => return Ok(failed(network, SolveStatus::SingularAtS0, Vec::new())),
            };
            let direct = newton_solve(network, &x0, 1.0, cfg).expect("dimension fixed by network");
            if method == Method::Newton || direct.converged() {
                return Ok(direct);
            }
            let mut result = homotopy_solve(network, cfg);
            let mut trace = direct.trace;
            trace.append(&mut result.trace);
            result.trace = trace;
            Ok(result)
        }
        Method::Oracle => {
            let oracle = crate::reference::oracle_solve(network)?;
            let norm = residual_norm(network, oracle.state.values(), 1.0);
            let status = if norm <= cfg.tol {
                SolveStatus::Converged
            } else {
                SolveStatus::NewtonDiverged
            };
            Ok(SolveResult {
                state: oracle.state,
                residual_norm: norm,
                status,
                trace: vec![TraceEntry {
                    s: 1.0,
                    newton_iters: 0,
                    residual_norm: norm,
                    failure: None,
                }],
            })
        }
    }
}

/// Outcome of one random-start Newton run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTrial {
    pub index: usize,
    pub status: SolveStatus,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Index into [`UniquenessReport::distinct`] when converged.
    pub class: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub trials: Vec<ProbeTrial>,
    pub distinct: Vec<StateVector>,
    pub half_width: f64,
}

impl UniquenessReport {
    pub fn converged_count(&self) -> usize {
        self.trials.iter().filter(|t| t.class.is_some()).count()
    }
}

/// Converged states farther apart than this (infinity norm) count as distinct.
pub const DISTINCT_TOL: f64 = 1e-6;

// Sampling half-width cap; squares of larger values overflow f64.
const SAMPLE_CAP: f64 = 1e150;

/// Runs Newton at `s = 1` from `trials` starts drawn uniformly from the
/// safe-mode hypercube and groups the converged end states.
pub fn uniqueness_probe(network: &Network, cfg: &SolverConfig, trials: usize, seed: u64) -> UniquenessReport {
    let bounds = compute_bounds(network, BoundsMode::Safe);
    let half = bounds.half_width.min(SAMPLE_CAP);
    let n = network.layout().len();
    let starts: Vec<Vec<f64>> = (0..trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            (0..n)
                .map(|_| if half > 0.0 { rng.gen_range(-half..half) } else { 0.0 })
                .collect()
        })
        .collect();
    probe_from_starts(network, cfg, starts)
}

/// As [`uniqueness_probe`] with explicit starts. Each start is clamped into
/// the hypercube before iterating.
pub fn probe_from_starts(network: &Network, cfg: &SolverConfig, starts: Vec<Vec<f64>>) -> UniquenessReport {
    let half = compute_bounds(network, BoundsMode::Safe).half_width.min(SAMPLE_CAP);
    let results: Vec<(usize, SolveResult)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, start)| {
            let clamped: Vec<f64> = start.into_iter().map(|v| v.clamp(-half, half)).collect();
            let x0 = match StateVector::from_values(network, clamped) {
                Ok(x0) => x0,
                Err(_) => return (index, failed(network, SolveStatus::NewtonDiverged, Vec::new())),
            };
            (index, newton_solve(network, &x0, 1.0, cfg).expect("dimension checked"))
        })
        .collect();

    let mut distinct: Vec<StateVector> = Vec::new();
    let mut trials = Vec::with_capacity(results.len());
    for (index, r) in results {
        let class = if r.converged() {
            let found = distinct.iter().position(|d| d.distance(&r.state) <= DISTINCT_TOL);
            Some(found.unwrap_or_else(|| {
                distinct.push(r.state.clone());
                distinct.len() - 1
            }))
        } else {
            None
        };
        trials.push(ProbeTrial {
            index,
            status: r.status,
            residual_norm: r.residual_norm,
            iterations: r.trace.first().map_or(0, |t| t.newton_iters),
            class,
        });
    }
    UniquenessReport {
        trials,
        distinct,
        half_width: half,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EosParams;
    use crate::network::{fixtures, EdgeSpec, Junction, NetworkDescription};

    fn assert_state(x: &StateVector, flows: &[f64], potentials: &[f64], tol: f64) {
        for (a, b) in x.flows().iter().zip(flows) {
            assert!((a - b).abs() <= tol, "flows {:?} vs {flows:?}", x.flows());
        }
        for (a, b) in x.potentials().iter().zip(potentials) {
            assert!((a - b).abs() <= tol, "potentials {:?} vs {potentials:?}", x.potentials());
        }
    }

    #[test]
    fn linear_solve_examples() {
        let x = solve_linear_s0(&fixtures::single_pipe(EosParams::ideal())).unwrap();
        assert_state(&x, &[2.0], &[2.0, 0.0], 1e-14);
        let x = solve_linear_s0(&fixtures::chain()).unwrap();
        assert_state(&x, &[1.0, 1.0], &[1.0, 4.0, 3.0], 1e-14);
    }

    #[test]
    fn linear_solve_zero_withdrawals() {
        let net = NetworkDescription {
            eos: EosParams::ideal(),
            junctions: vec![
                Junction::slack("s", 3.0),
                Junction::nonslack("a", 0.0),
                Junction::nonslack("b", 0.0),
                Junction::nonslack("c", 0.0),
            ],
            edges: vec![
                EdgeSpec::compressor("s", "a", 1.5),
                EdgeSpec::pipe("a", "b", 1.0),
                EdgeSpec::compressor("b", "c", 2.0),
            ],
        }
        .validate()
        .unwrap();
        let x = solve_linear_s0(&net).unwrap();
        assert_state(&x, &[0.0; 3], &[3.0, 6.75, 6.75, 27.0], 1e-13);
        let r = homotopy_solve(&net, &SolverConfig::default());
        assert!(r.converged());
        assert_eq!(r.trace.len(), 1);
        assert_state(&r.state, &[0.0; 3], &[3.0, 6.75, 6.75, 27.0], 1e-13);
    }

    #[test]
    fn linear_solve_detects_inadmissible_networks() {
        let a2 = NetworkDescription {
            eos: EosParams::ideal(),
            junctions: vec![Junction::slack("s1", 1.0), Junction::slack("s2", 4.0)],
            edges: vec![EdgeSpec::compressor("s1", "s2", 2.0)],
        };
        assert!(a2.validate().is_err());
        let net = a2.build_unchecked().unwrap();
        assert!(matches!(solve_linear_s0(&net), Err(SolveError::SingularAtS0(_))));
        assert_eq!(homotopy_solve(&net, &SolverConfig::default()).status, SolveStatus::SingularAtS0);
    }

    #[test]
    fn newton_from_exact_solution() {
        let net = fixtures::single_pipe(EosParams::ideal());
        let exact = StateVector::from_parts(&[2.0], &[2.0, -2.0]);
        for s in [0.3, 1.0] {
            let exact_s = if s == 1.0 {
                exact.clone()
            } else {
                StateVector::from_parts(&[2.0], &[2.0, 2.0 - 2.0 * 2f64.powf(s)])
            };
            let r = newton_solve(&net, &exact_s, s, &SolverConfig::default()).unwrap();
            assert!(r.converged());
            assert!(r.trace[0].newton_iters <= 1);
        }
    }

    #[test]
    fn newton_single_pipe_from_linear_start() {
        let net = fixtures::single_pipe(EosParams::ideal());
        let x0 = solve_linear_s0(&net).unwrap();
        let r = newton_solve(&net, &x0, 1.0, &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert_state(&r.state, &[2.0], &[2.0, -2.0], 1e-12);
    }

    #[test]
    fn newton_chain_is_s_independent() {
        let net = fixtures::chain();
        let x0 = solve_linear_s0(&net).unwrap();
        let r = newton_solve(&net, &x0, 1.0, &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.trace[0].newton_iters, 0);
        assert_state(&r.state, &[1.0, 1.0], &[1.0, 4.0, 3.0], 1e-14);
    }

    #[test]
    fn newton_reports_dimension_mismatch() {
        let net = fixtures::chain();
        let x0 = StateVector::from_parts(&[0.0], &[0.0]);
        assert!(matches!(
            newton_solve(&net, &x0, 1.0, &SolverConfig::default()),
            Err(SolveError::Dimension(_))
        ));
    }

    #[test]
    fn newton_iteration_limit() {
        let net = fixtures::triangle();
        let cfg = SolverConfig {
            max_newton_iters: 1,
            ..SolverConfig::default()
        };
        let x0 = StateVector::from_parts(&[100.0, -50.0, 30.0], &[0.0; 3]);
        let r = newton_solve(&net, &x0, 1.0, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::NewtonDiverged);
        assert_eq!(r.trace[0].failure, Some(NewtonFailure::IterationLimit));
    }

    #[test]
    fn homotopy_single_pipe() {
        let net = fixtures::single_pipe(EosParams::ideal());
        let r = homotopy_solve(&net, &SolverConfig::default());
        assert!(r.converged());
        assert!(r.residual_norm <= 1e-10);
        assert_state(&r.state, &[2.0], &[2.0, -2.0], 1e-10);
        let bounds = compute_bounds(&net, BoundsMode::Paper);
        assert_eq!(bounds.half_width, 6.0);
        assert!(bounds.contains(r.state.values()));
        let s: Vec<f64> = r.trace.iter().map(|t| t.s).collect();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*s.last().unwrap(), 1.0);
    }

    #[test]
    fn homotopy_stalls_with_crippled_corrector() {
        let net = fixtures::single_pipe(EosParams::ideal());
        let cfg = SolverConfig {
            max_newton_iters: 0,
            ..SolverConfig::default()
        };
        let r = homotopy_solve(&net, &cfg);
        assert_eq!(r.status, SolveStatus::HomotopyStalled);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn two_slacks_converge_outside_the_cube() {
        // Flow between two slacks is driven by their potential difference,
        // not by withdrawals, so the cube is no bound here and is not enforced.
        let net = NetworkDescription {
            eos: EosParams::ideal(),
            junctions: vec![Junction::slack("hi", 100.0), Junction::slack("lo", 0.0)],
            edges: vec![EdgeSpec::pipe("hi", "lo", 1e-4)],
        }
        .validate()
        .unwrap();
        assert!(!bound_is_guaranteed(&net));
        let r = homotopy_solve(&net, &SolverConfig::default());
        assert!(r.converged());
        assert!((r.state.flows()[0] - 1000.0).abs() < 1e-8);
        assert!(!compute_bounds(&net, BoundsMode::Safe).contains(r.state.values()));
    }

    #[test]
    fn boundary_violation_on_inconsistent_data() {
        // A negative resistance slips past the bound's resistance term.
        let net = NetworkDescription {
            eos: EosParams::ideal(),
            junctions: vec![Junction::slack("a", 1.0), Junction::nonslack("b", 2.0)],
            edges: vec![EdgeSpec::pipe("a", "b", -1.0)],
        }
        .build_unchecked()
        .unwrap();
        let r = homotopy_solve(&net, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::BoundaryViolation);
    }

    #[test]
    fn triangle_solution() {
        // Loop closure gives phi = (1, 0, 1): the zero-flow pipe exercises the
        // Jacobian floor, and |phi| in {0, 1} makes the solution s-independent.
        let net = fixtures::triangle();
        let r = homotopy_solve(&net, &SolverConfig::default());
        assert!(r.converged());
        assert_state(&r.state, &[1.0, 0.0, 1.0], &[10.0, 9.0, 9.0], 1e-10);
        let oracle = crate::reference::cycle_bisect(&net).unwrap();
        assert!(r.state.distance(&oracle.state) < 1e-8);
    }

    #[test]
    fn auto_falls_back_to_homotopy() {
        let net = fixtures::triangle();
        let cfg = SolverConfig {
            max_newton_iters: 3,
            ..SolverConfig::default()
        };
        let r = solve(&net, Method::Auto, &cfg).unwrap();
        let h = homotopy_solve(&net, &cfg);
        assert_eq!(r.status, h.status);
        if h.converged() {
            assert!(r.state.distance(&h.state) < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            ds_min: 0.5,
            ds_init: 0.1,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SolverConfig { tol: 0.0, ..SolverConfig::default() }.validate().is_err());
    }

    #[test]
    fn probe_with_no_trials() {
        let report = uniqueness_probe(&fixtures::triangle(), &SolverConfig::default(), 0, 1);
        assert!(report.trials.is_empty());
        assert!(report.distinct.is_empty());
    }

    #[test]
    fn probe_agrees_on_one_state() {
        let net = fixtures::triangle();
        let cfg = SolverConfig {
            max_newton_iters: 200,
            ..SolverConfig::default()
        };
        let report = uniqueness_probe(&net, &cfg, 10, 7);
        assert_eq!(report.trials.len(), 10);
        assert!(report.converged_count() > 0);
        assert_eq!(report.distinct.len(), 1);
        let reference = homotopy_solve(&net, &SolverConfig::default());
        assert!(report.distinct[0].distance(&reference.state) < 1e-8);
        assert!(report.trials.iter().enumerate().all(|(i, t)| t.index == i));
    }

    #[test]
    fn probe_clamps_far_starts() {
        let net = fixtures::single_pipe(EosParams::ideal());
        let report = probe_from_starts(&net, &SolverConfig::default(), vec![vec![1e200, -1e200, 1e200]]);
        assert_eq!(report.half_width, 6.0);
        assert!(report.trials[0].class.is_some());
    }

    #[test]
    fn deterministic_traces() {
        let net = crate::generate::random_network(
            &crate::generate::GeneratorSpec::new(crate::generate::Topology::Mesh, 60),
            11,
        );
        let a = homotopy_solve(&net, &SolverConfig::default());
        let b = homotopy_solve(&net, &SolverConfig::default());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.state, b.state);
    }
}
