//! Sparse direct solves with singularity detection.
//!
//! Backed by faer's sparse LU with partial pivoting. faer reports
//! structurally singular matrices as errors but aborts the simplicial path
//! with a panic on an exactly zero pivot and lets tiny pivots through as
//! inf/NaN, so the wrapper catches that panic and checks the solution before
//! handing it back.

use crate::residual::SparseMatrix;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;
use std::cell::Cell;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Once;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("matrix is singular ({0})")]
    Singular(String),
    #[error("right-hand side has length {actual}, matrix has dimension {expected}")]
    Dimension { expected: usize, actual: usize },
}

thread_local! {
    static QUIET_PANICS: Cell<bool> = const { Cell::new(false) };
}

static HOOK: Once = Once::new();

fn install_quiet_hook() {
    HOOK.call_once(|| {
        let previous = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            if !QUIET_PANICS.with(Cell::get) {
                previous(info);
            }
        }));
    });
}

/// Solves `A x = b`.
pub fn solve(matrix: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
    let n = matrix.dim;
    if rhs.len() != n {
        return Err(LinearSolveError::Dimension {
            expected: n,
            actual: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let triplets: Vec<Triplet<usize, usize, f64>> = matrix
        .triplets
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| LinearSolveError::Singular(format!("invalid structure: {e:?}")))?;

    install_quiet_hook();
    QUIET_PANICS.with(|q| q.set(true));
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        a.sp_lu().map(|lu| {
            let b = Col::from_fn(n, |i| rhs[i]);
            let x = lu.solve(&b);
            (0..n).map(|i| x[i]).collect::<Vec<f64>>()
        })
    }));
    QUIET_PANICS.with(|q| q.set(false));

    let x = match outcome {
        Err(_) => return Err(LinearSolveError::Singular("zero pivot".into())),
        Ok(Err(e)) => return Err(LinearSolveError::Singular(format!("{e:?}"))),
        Ok(Ok(x)) => x,
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinearSolveError::Singular("non-finite solution".into()));
    }

    // Normwise backward error ||Ax - b|| / (||A|| ||x|| + ||b||).
    let ax = matrix.mul_vec(&x);
    let mut row_abs = vec![0.0_f64; n];
    for &(r, _, v) in &matrix.triplets {
        row_abs[r] += v.abs();
    }
    let a_norm = row_abs.iter().fold(0.0_f64, |m, v| m.max(*v));
    let x_norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let b_norm = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let err = ax.iter().zip(rhs).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if err > 1e-10 * (a_norm * x_norm + b_norm) {
        return Err(LinearSolveError::Singular(format!("backward error {err:e}")));
    }
    Ok(x)
}
