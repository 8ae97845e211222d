//! False selection rate estimation along the lasso path.
//!
//! Each replicate refits the path on `(X_S, X_pseudo[, G X_S])`, where `S`
//! is the screened set, and counts how many selections land in the screened
//! block (`I`) versus the pseudo and permuted blocks (`U`). The estimate at
//! lambda is `U / max(I + U, 1)`, averaged over replicates.

use std::ops::Range;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsrError, Result};
use crate::linalg::{permute_rows, random_permutation, take_columns, PseudoGenerator, DEFAULT_RANK_TOL};
use crate::rng::{self, tag};
use crate::screening::{screen_cv_lasso, screen_pseudo, PseudoScreenConfig, ScreenResult};
use crate::solvers::{default_lambda_ratio, fit_path, lambda_grid, validate_grid, Family, FitOptions, LassoPath, Response};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScreeningMethod {
    /// Lasso tuned by K-fold cross-validation.
    Cv { folds: usize },
    /// Row-permutation screening.
    Pseudo { alpha_n: f64, b: usize },
    /// A known set, e.g. the true support in a simulation.
    Fixed { set: Vec<usize> },
}

impl Default for ScreeningMethod {
    fn default() -> Self {
        ScreeningMethod::Cv { folds: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrConfig {
    pub b_replicates: usize,
    pub use_permutation: bool,
    pub alpha_targets: Vec<f64>,
    pub screening: ScreeningMethod,
    /// Shared grid; when absent one is built from the full data with
    /// `lambda_count` points down to `lambda_ratio * lambda_max`.
    pub lambdas: Option<Vec<f64>>,
    pub lambda_count: usize,
    pub lambda_ratio: Option<f64>,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for FsrConfig {
    fn default() -> Self {
        Self {
            b_replicates: 100,
            use_permutation: true,
            alpha_targets: vec![0.2],
            screening: ScreeningMethod::default(),
            lambdas: None,
            lambda_count: 100,
            lambda_ratio: None,
            seed: 0,
            fit: FitOptions::default(),
        }
    }
}

impl FsrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b_replicates == 0 {
            return Err(FsrError::InvalidConfig("b_replicates must be at least 1".into()));
        }
        if let Some(a) = self.alpha_targets.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
            return Err(FsrError::InvalidConfig(format!("alpha {a} is outside (0, 1)")));
        }
        if let Some(g) = &self.lambdas {
            validate_grid(g)?;
        }
        match &self.screening {
            ScreeningMethod::Cv { folds } if *folds < 2 => {
                Err(FsrError::InvalidConfig(format!("cv screening needs at least 2 folds, got {folds}")))
            }
            ScreeningMethod::Pseudo { alpha_n, b } if !(*alpha_n > 0.0 && *alpha_n < 1.0) || *b == 0 => Err(
                FsrError::InvalidConfig(format!("pseudo screening needs alpha_n in (0, 1) and b >= 1, got {alpha_n}, {b}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Column ranges of the augmented design in one replicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub screened: Range<usize>,
    pub pseudo: Range<usize>,
    pub permuted: Range<usize>,
}

impl BlockLayout {
    pub fn total(&self) -> usize {
        self.permuted.end
    }
}

/// One replicate's counts along the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateEstimate {
    /// Selections inside the screened block.
    pub i_counts: Vec<usize>,
    /// Selections inside the pseudo and permuted blocks.
    pub u_counts: Vec<usize>,
    pub p_hat: Vec<f64>,
    pub layout: BlockLayout,
    /// The augmented path stopped early; later grid points reuse its last row.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSelection {
    pub alpha: f64,
    /// None when no grid point reaches the target.
    pub lambda_index: Option<usize>,
    pub lambda: Option<f64>,
    /// Active set of the full-data fit at the chosen lambda (empty if infeasible).
    pub active_set: Vec<usize>,
}

impl AlphaSelection {
    pub fn feasible(&self) -> bool {
        self.lambda_index.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsrCurve {
    pub lambdas: Vec<f64>,
    /// B × m.
    pub per_replicate: Array2<f64>,
    pub mean: Vec<f64>,
    pub selected: Vec<AlphaSelection>,
    pub screening: ScreenResult,
    /// Screening returned nothing and replicates fell back to permuted rows of X.
    pub degraded: bool,
    /// Replicates whose augmented path was truncated.
    pub truncated_replicates: usize,
    /// Full-data path over `lambdas`.
    pub path: LassoPath,
}

/// Smallest grid lambda whose mean estimate is at most `alpha`.
pub fn select_lambda_index(mean: &[f64], alpha: f64) -> Option<usize> {
    (0..mean.len()).rev().find(|&i| mean[i] <= alpha)
}

/// Pseudo-variables are generated in the geometry the solver works in: with
/// an intercept (or for Cox, whose partial likelihood ignores shifts) the
/// columns are centered first.
fn intercept_aware(family: Family, opts: &FitOptions) -> bool {
    family == Family::Cox || opts.intercept
}

pub(crate) struct ReplicateContext<'a> {
    generator: PseudoGenerator,
    x: ArrayView2<'a, f64>,
    y: &'a Response,
    screened: Vec<usize>,
    lambdas: &'a [f64],
    use_permutation: bool,
    opts: FitOptions,
}

impl<'a> ReplicateContext<'a> {
    pub fn new(
        x: ArrayView2<'a, f64>,
        y: &'a Response,
        screened: &[usize],
        lambdas: &'a [f64],
        use_permutation: bool,
        opts: &FitOptions,
    ) -> Result<Self> {
        validate_grid(lambdas)?;
        let p = x.ncols();
        let mut set = screened.to_vec();
        set.sort_unstable();
        set.dedup();
        if let Some(&bad) = set.iter().find(|&&j| j >= p) {
            return Err(FsrError::InvalidIndexSet(format!("screened index {bad} out of range for {p} columns")));
        }
        let generator = PseudoGenerator::new(x, intercept_aware(y.family(), opts), DEFAULT_RANK_TOL)?;
        Ok(Self { generator, x, y, screened: set, lambdas, use_permutation, opts: *opts })
    }

    /// The augmented design and its layout.
    pub fn augmented(&self, seed: u64) -> Result<(Array2<f64>, BlockLayout)> {
        let (n, p) = self.x.dim();
        let design = self.generator.design();
        let s = self.screened.len();
        let perm_seed = rng::derive_seed(seed, &[tag::PERMUTE]);
        if s == 0 {
            // Nothing screened: every column is replaced by a row-permuted copy.
            let perm = random_permutation(n, &mut rng::stream(perm_seed));
            let all: Vec<usize> = (0..p).collect();
            let block = permute_rows(design, &all, &perm);
            return Ok((block, BlockLayout { screened: 0..0, pseudo: 0..p, permuted: p..p }));
        }
        let xs = take_columns(design, &self.screened);
        let pseudo = if s < p {
            self.generator.generate(&self.screened, seed)?.values
        } else {
            Array2::zeros((n, 0))
        };
        let permuted = if self.use_permutation {
            let perm = random_permutation(n, &mut rng::stream(perm_seed));
            let cols: Vec<usize> = (0..s).collect();
            permute_rows(xs.view(), &cols, &perm)
        } else {
            Array2::zeros((n, 0))
        };
        let q = pseudo.ncols();
        let r = permuted.ncols();
        let layout = BlockLayout { screened: 0..s, pseudo: s..s + q, permuted: s + q..s + q + r };
        let x_new = concatenate(Axis(1), &[xs.view(), pseudo.view(), permuted.view()]).expect("row counts agree");
        Ok((x_new, layout))
    }

    pub fn run(&self, seed: u64) -> Result<ReplicateEstimate> {
        let (x_new, layout) = self.augmented(seed)?;
        let path = fit_path(x_new.view(), self.y, self.lambdas, &self.opts)?;
        let m = self.lambdas.len();
        let mut i_counts = Vec::with_capacity(m);
        let mut u_counts = Vec::with_capacity(m);
        let mut p_hat = Vec::with_capacity(m);
        for i in 0..m {
            let active = path.active_set_or_last(i);
            let real = active.iter().filter(|&&j| layout.screened.contains(&j)).count();
            let null = active.len() - real;
            i_counts.push(real);
            u_counts.push(null);
            p_hat.push(null as f64 / (real + null).max(1) as f64);
        }
        Ok(ReplicateEstimate { i_counts, u_counts, p_hat, layout, truncated: path.truncated() || path.len() < m })
    }
}

/// One replicate of the estimator for a given screening result.
pub fn fsr_replicate(
    x: ArrayView2<'_, f64>,
    y: &Response,
    screened: &ScreenResult,
    lambdas: &[f64],
    use_permutation: bool,
    seed: u64,
    opts: &FitOptions,
) -> Result<ReplicateEstimate> {
    ReplicateContext::new(x, y, &screened.a0_hat, lambdas, use_permutation, opts)?.run(seed)
}

/// Seed of replicate `b` under master seed `seed`.
pub fn replicate_seed(seed: u64, b: usize) -> u64 {
    rng::derive_seed(seed, &[tag::REPLICATE, b as u64])
}

/// Screening, B replicates, averaging, and lambda selection for each target.
pub fn estimate_fsr(x: ArrayView2<'_, f64>, y: &Response, cfg: &FsrConfig) -> Result<FsrCurve> {
    cfg.validate()?;
    let opts = &cfg.fit;
    let (n, p) = x.dim();
    let lambdas = match &cfg.lambdas {
        Some(g) => g.clone(),
        None => {
            let ratio = cfg.lambda_ratio.unwrap_or_else(|| default_lambda_ratio(n, p));
            lambda_grid(x, y, cfg.lambda_count, ratio, opts)?
        }
    };
    let path = fit_path(x, y, &lambdas, opts)?;

    let screen_seed = rng::derive_seed(cfg.seed, &[tag::SCREEN]);
    let screening = match &cfg.screening {
        ScreeningMethod::Cv { folds } => screen_cv_lasso(x, y, *folds, screen_seed, &lambdas, opts)?,
        ScreeningMethod::Pseudo { alpha_n, b } => {
            let sc = PseudoScreenConfig {
                alpha_n: *alpha_n,
                b: *b,
                lambda_count: lambdas.len().max(2),
                lambda_ratio: cfg.lambda_ratio,
            };
            screen_pseudo(x, y, &sc, None, screen_seed, opts)?
        }
        ScreeningMethod::Fixed { set } => ScreenResult::fixed(x, set)?,
    };

    let ctx = ReplicateContext::new(x, y, &screening.a0_hat, &lambdas, cfg.use_permutation, opts)?;
    let reps: Vec<ReplicateEstimate> = (0..cfg.b_replicates)
        .into_par_iter()
        .map(|b| ctx.run(replicate_seed(cfg.seed, b)))
        .collect::<Result<_>>()?;

    let m = lambdas.len();
    let mut per_replicate = Array2::zeros((cfg.b_replicates, m));
    for (b, rep) in reps.iter().enumerate() {
        for (i, &v) in rep.p_hat.iter().enumerate() {
            per_replicate[[b, i]] = v;
        }
    }
    let mean: Vec<f64> = (0..m)
        .map(|i| reps.iter().map(|r| r.p_hat[i]).sum::<f64>() / cfg.b_replicates as f64)
        .collect();
    let selected = cfg
        .alpha_targets
        .iter()
        .map(|&alpha| {
            let idx = select_lambda_index(&mean, alpha);
            AlphaSelection {
                alpha,
                lambda_index: idx,
                lambda: idx.map(|i| lambdas[i]),
                active_set: idx.map(|i| path.active_set_or_last(i).to_vec()).unwrap_or_default(),
            }
        })
        .collect();
    Ok(FsrCurve {
        degraded: screening.a0_hat.is_empty(),
        truncated_replicates: reps.iter().filter(|r| r.truncated).count(),
        lambdas,
        per_replicate,
        mean,
        selected,
        screening,
        path,
    })
}
