//! Preliminary estimates of the active set, fed to pseudo-variable generation.

use ndarray::{concatenate, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsrError, Result};
use crate::linalg::{permute_rows, qr_pivoted, random_permutation, take_columns, DEFAULT_RANK_TOL};
use crate::rng::{self, tag};
use crate::solvers::grid::log_grid;
use crate::solvers::{cv_select_lambda, default_lambda_ratio, fit_path, lambda_max, FitOptions, LassoPath, Response};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenMethod {
    PseudoScreen,
    CvLasso,
    /// Supplied by the caller.
    Fixed,
}

/// Per-lambda screening estimates from the row-permutation procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDiagnostics {
    pub lambdas: Vec<f64>,
    /// Mean over replicates of #selected permuted / max(#selected real, 1).
    pub mean_ratio: Vec<f64>,
    pub lambda_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub method: ScreenMethod,
    pub a0_hat: Vec<usize>,
    /// Numerical rank of the screened columns.
    pub r0_hat: usize,
    pub diagnostics: Option<ScreenDiagnostics>,
    /// No grid point met the screening threshold; `a0_hat` is then empty.
    pub no_feasible_lambda: bool,
}

fn rank_of(x: ArrayView2<'_, f64>, set: &[usize]) -> Result<usize> {
    if set.is_empty() {
        return Ok(0);
    }
    Ok(qr_pivoted(take_columns(x, set).view(), DEFAULT_RANK_TOL)?.rank)
}

impl ScreenResult {
    /// Wrap a caller-chosen set.
    pub fn fixed(x: ArrayView2<'_, f64>, set: &[usize]) -> Result<Self> {
        let mut a0 = set.to_vec();
        a0.sort_unstable();
        a0.dedup();
        if let Some(&bad) = a0.iter().find(|&&j| j >= x.ncols()) {
            return Err(FsrError::InvalidIndexSet(format!("index {bad} out of range for {} columns", x.ncols())));
        }
        let r0_hat = rank_of(x, &a0)?;
        Ok(Self { method: ScreenMethod::Fixed, a0_hat: a0, r0_hat, diagnostics: None, no_feasible_lambda: false })
    }
}

/// Active set of the full-data lasso at the K-fold CV choice of lambda.
pub fn screen_cv_lasso(
    x: ArrayView2<'_, f64>,
    y: &Response,
    k: usize,
    seed: u64,
    lambdas: &[f64],
    opts: &FitOptions,
) -> Result<ScreenResult> {
    let cv = cv_select_lambda(x, y, k, seed, lambdas, opts)?;
    let a0 = cv.path.active_set_or_last(cv.lambda_index).to_vec();
    let r0_hat = rank_of(x, &a0)?;
    Ok(ScreenResult { method: ScreenMethod::CvLasso, a0_hat: a0, r0_hat, diagnostics: None, no_feasible_lambda: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoScreenConfig {
    pub alpha_n: f64,
    pub b: usize,
    /// Grid size when no grid is supplied.
    pub lambda_count: usize,
    /// Grid ratio when no grid is supplied; None picks the size-based default.
    pub lambda_ratio: Option<f64>,
}

impl Default for PseudoScreenConfig {
    fn default() -> Self {
        Self { alpha_n: 0.2, b: 20, lambda_count: 100, lambda_ratio: None }
    }
}

/// `(x, x[perm, :])` for one row permutation.
fn augmented_with_permutation(x: ArrayView2<'_, f64>, seed: u64) -> ndarray::Array2<f64> {
    let perm = random_permutation(x.nrows(), &mut rng::stream(seed));
    let all: Vec<usize> = (0..x.ncols()).collect();
    let shuffled = permute_rows(x, &all, &perm);
    concatenate(Axis(1), &[x, shuffled.view()]).expect("row counts agree")
}

/// #selected permuted / max(#selected real, 1) at every grid point.
fn permutation_ratios(path: &LassoPath, p: usize, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let active = path.active_set_or_last(i);
            let fake = active.iter().filter(|&&j| j >= p).count();
            let real = active.len() - fake;
            fake as f64 / real.max(1) as f64
        })
        .collect()
}

/// Screening by augmenting `x` with a row-permuted copy of itself: choose the
/// smallest lambda whose averaged ratio of permuted to real selections is at
/// most `alpha_n`, then keep the real columns active there in a fresh
/// augmented fit.
///
/// With `lambdas` absent the grid runs from the largest augmented-design
/// lambda_max over the replicates down by the configured ratio.
pub fn screen_pseudo(
    x: ArrayView2<'_, f64>,
    y: &Response,
    cfg: &PseudoScreenConfig,
    lambdas: Option<&[f64]>,
    seed: u64,
    opts: &FitOptions,
) -> Result<ScreenResult> {
    if !(cfg.alpha_n > 0.0 && cfg.alpha_n < 1.0) {
        return Err(FsrError::InvalidConfig(format!("alpha_n must lie in (0, 1), got {}", cfg.alpha_n)));
    }
    if cfg.b == 0 {
        return Err(FsrError::InvalidConfig("screening needs at least one replicate".into()));
    }
    let (n, p) = x.dim();
    let replicate_seed = |b: usize| rng::derive_seed(seed, &[tag::SCREEN, b as u64]);
    let augmented: Vec<_> = (0..cfg.b).map(|b| augmented_with_permutation(x, replicate_seed(b))).collect();

    let grid = match lambdas {
        Some(g) => g.to_vec(),
        None => {
            let mut top = 0.0_f64;
            for a in &augmented {
                top = top.max(lambda_max(a.view(), y, opts)?);
            }
            let ratio = cfg.lambda_ratio.unwrap_or_else(|| default_lambda_ratio(n, 2 * p));
            log_grid(top, cfg.lambda_count, ratio)?
        }
    };
    let m = grid.len();
    let ratios: Vec<Vec<f64>> = augmented
        .par_iter()
        .map(|a| Ok(permutation_ratios(&fit_path(a.view(), y, &grid, opts)?, p, m)))
        .collect::<Result<_>>()?;
    let mean_ratio: Vec<f64> = (0..m).map(|i| ratios.iter().map(|r| r[i]).sum::<f64>() / cfg.b as f64).collect();
    let lambda_index = (0..m).rev().find(|&i| mean_ratio[i] <= cfg.alpha_n);

    let a0 = match lambda_index {
        None => Vec::new(),
        Some(idx) => {
            let a = augmented_with_permutation(x, rng::derive_seed(seed, &[tag::SCREEN, tag::FINAL]));
            let path = fit_path(a.view(), y, &grid[..=idx], opts)?;
            path.active_set_or_last(idx).iter().copied().filter(|&j| j < p).collect()
        }
    };
    let r0_hat = rank_of(x, &a0)?;
    Ok(ScreenResult {
        method: ScreenMethod::PseudoScreen,
        a0_hat: a0,
        r0_hat,
        diagnostics: Some(ScreenDiagnostics { lambdas: grid, mean_ratio, lambda_index }),
        no_feasible_lambda: lambda_index.is_none(),
    })
}
