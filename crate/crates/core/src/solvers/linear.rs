use ndarray::{Array1, Array2, ArrayView2};

use super::cd::{CdState, Wls};
use super::prepare::Prepared;
use super::{active_set, check_dims, validate_grid, Family, FitOptions, LassoPath, Response};
use crate::error::{FsrError, Result};

fn continuous(y: &Response) -> Result<&Array1<f64>> {
    match y {
        Response::Continuous(v) => Ok(v),
        other => Err(FsrError::InvalidResponse(format!(
            "linear lasso needs a continuous response, got {}",
            other.family()
        ))),
    }
}

/// Lasso path for `(1/2n)||y - b0 - X beta||^2 + lambda ||beta||_1`, warm
/// started down the grid.
pub fn fit_linear_path(
    x: ArrayView2<'_, f64>,
    y: &Response,
    lambdas: &[f64],
    opts: &FitOptions,
) -> Result<LassoPath> {
    let yv = continuous(y)?;
    check_dims(x, y)?;
    validate_grid(lambdas)?;
    let prep = Prepared::new(x, opts.intercept, opts.standardize);
    let p = prep.p();
    let wls = Wls { x: &prep.x, z: yv, usable: &prep.usable, intercept: opts.intercept };

    let mut state = CdState::zeros(p);
    if opts.intercept {
        state.b0 = yv.mean().unwrap_or(0.0);
    }
    let mut coefs = Array2::zeros((lambdas.len(), p));
    let mut intercepts = Vec::with_capacity(lambdas.len());
    let mut active_sets = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        wls.solve(lambda, &mut state, opts.tol, opts.max_iter, None)
            .map_err(|e| FsrError::NoConvergence { lambda_index: i, iterations: e.0 })?;
        let (beta, b0) = prep.to_original(&state.beta, state.b0);
        active_sets.push(active_set(&beta));
        coefs.row_mut(i).assign(&Array1::from(beta));
        intercepts.push(b0);
    }
    Ok(LassoPath {
        family: Family::Linear,
        lambdas: lambdas.to_vec(),
        coefs,
        intercepts: Some(intercepts),
        active_sets,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
/// Objective value after every sweep of a single cold-started fit.
pub(crate) fn objective_trace(
    x: ArrayView2<'_, f64>,
    y: &Response,
    lambda: f64,
    opts: &FitOptions,
) -> Result<Vec<f64>> {
    let yv = continuous(y)?;
    let prep = Prepared::new(x, opts.intercept, opts.standardize);
    let wls = Wls { x: &prep.x, z: yv, usable: &prep.usable, intercept: opts.intercept };
    let mut state = CdState::zeros(prep.p());
    let mut trace = vec![wls.objective(&state, lambda)];
    wls.solve(lambda, &mut state, opts.tol, opts.max_iter, Some(&mut trace))
        .map_err(|e| FsrError::NoConvergence { lambda_index: 0, iterations: e.0 })?;
    Ok(trace)
}
