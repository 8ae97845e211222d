use ndarray::{Array1, ArrayView2, Axis};
use rayon::prelude::*;

use super::cox::CoxData;
use super::logistic::sigmoid;
use super::{check_dims, fit_path, validate_grid, FitOptions, LassoPath, Response};
use crate::error::{FsrError, Result};
use crate::linalg::random_permutation;
use crate::rng::{self, tag};

/// Outcome of K-fold cross-validation over a fixed lambda grid.
#[derive(Debug, Clone)]
pub struct CvResult {
    pub lambda_index: usize,
    pub lambda: f64,
    /// Mean per-observation deviance over folds, one per lambda.
    pub cv_mean: Vec<f64>,
    pub cv_se: Vec<f64>,
    /// Full-data path over the same grid.
    pub path: LassoPath,
}

/// Fold label of every observation: a seeded random permutation dealt out
/// round-robin, so fold sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let perm = random_permutation(n, &mut rng::stream(rng::derive_seed(seed, &[tag::FOLDS])));
    let mut folds = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

fn linear_predictor(x: ArrayView2<'_, f64>, path: &LassoPath, i: usize) -> Array1<f64> {
    let b0 = path.intercepts.as_ref().map_or(0.0, |v| v[i]);
    x.dot(&path.coefs.row(i)) + b0
}

/// Held-out deviance per observation for every lambda. Rows past a truncated
/// training path reuse its last fitted row.
fn fold_deviance(
    x: ArrayView2<'_, f64>,
    y: &Response,
    train: &[usize],
    test: &[usize],
    lambdas: &[f64],
    opts: &FitOptions,
) -> Result<Vec<f64>> {
    let x_train = x.select(Axis(0), train);
    let y_train = y.subset(train);
    let path = fit_path(x_train.view(), &y_train, lambdas, opts)?;
    if path.is_empty() {
        return Err(FsrError::InvalidResponse("training fold produced an empty path".into()));
    }
    let x_test = x.select(Axis(0), test);
    let last = path.len() - 1;
    let cox = match y {
        Response::Survival { .. } => Some((CoxData::from_response(y)?, CoxData::from_response(&y_train)?)),
        _ => None,
    };
    let mut out = Vec::with_capacity(lambdas.len());
    for i in 0..lambdas.len() {
        let row = i.min(last);
        let dev = match y {
            Response::Continuous(v) => {
                let eta = linear_predictor(x_test.view(), &path, row);
                test.iter().zip(&eta).map(|(&t, e)| (v[t] - e).powi(2)).sum::<f64>() / test.len() as f64
            }
            Response::Binary(v) => {
                let eta = linear_predictor(x_test.view(), &path, row);
                let ll: f64 = test
                    .iter()
                    .zip(&eta)
                    .map(|(&t, &e)| {
                        let p = sigmoid(e).clamp(1e-15, 1.0 - 1e-15);
                        v[t] * p.ln() + (1.0 - v[t]) * (1.0 - p).ln()
                    })
                    .sum();
                -2.0 * ll / test.len() as f64
            }
            Response::Survival { .. } => {
                // Cross-validated partial likelihood: full-data minus
                // training-data log PL at the training-fold coefficients.
                let (full, part) = cox.as_ref().expect("survival data");
                let eta_full = x.dot(&path.coefs.row(row));
                let eta_train = x_train.dot(&path.coefs.row(row));
                let cvl = full.log_likelihood(&eta_full) - part.log_likelihood(&eta_train);
                -2.0 * cvl / test.len() as f64
            }
        };
        out.push(dev);
    }
    Ok(out)
}

/// K-fold cross-validation of the lasso path over `lambdas`. Returns the
/// grid point with the smallest mean held-out deviance; ties go to the
/// larger lambda.
pub fn cv_select_lambda(
    x: ArrayView2<'_, f64>,
    y: &Response,
    k: usize,
    seed: u64,
    lambdas: &[f64],
    opts: &FitOptions,
) -> Result<CvResult> {
    check_dims(x, y)?;
    validate_grid(lambdas)?;
    let n = x.nrows();
    if k < 2 || k > n {
        return Err(FsrError::InvalidConfig(format!("fold count {k} must lie in [2, {n}]")));
    }
    let folds = fold_assignment(n, k, seed);
    let per_fold: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| folds[i] == f);
            fold_deviance(x, y, &train, &test, lambdas, opts)
        })
        .collect::<Result<_>>()?;

    let m = lambdas.len();
    let kf = k as f64;
    let cv_mean: Vec<f64> = (0..m).map(|i| per_fold.iter().map(|d| d[i]).sum::<f64>() / kf).collect();
    let cv_se: Vec<f64> = (0..m)
        .map(|i| {
            let var = per_fold.iter().map(|d| (d[i] - cv_mean[i]).powi(2)).sum::<f64>() / (kf - 1.0);
            (var / kf).sqrt()
        })
        .collect();
    let mut best = 0;
    for i in 1..m {
        if cv_mean[i] < cv_mean[best] {
            best = i;
        }
    }
    let path = fit_path(x, y, lambdas, opts)?;
    Ok(CvResult { lambda_index: best, lambda: lambdas[best], cv_mean, cv_se, path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::lambda_grid;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, p: usize, seed: u64) -> (Array2<f64>, Response) {
        let mut r = rng::stream(seed);
        let x = Array2::from_shape_fn((n, p), |_| r.sample(StandardNormal));
        let y = (0..n).map(|_| r.sample(StandardNormal)).collect();
        (x, Response::continuous(y).unwrap())
    }

    #[test]
    fn folds_are_balanced_and_reproducible() {
        let a = fold_assignment(23, 5, 9);
        assert_eq!(a, fold_assignment(23, 5, 9));
        for f in 0..5 {
            let c = a.iter().filter(|&&v| v == f).count();
            assert!(c == 4 || c == 5);
        }
        assert_ne!(a, fold_assignment(23, 5, 10));
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = noise(60, 8, 1);
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 30, 0.01, &opts).unwrap();
        let a = cv_select_lambda(x.view(), &y, 5, 3, &grid, &opts).unwrap();
        let b = cv_select_lambda(x.view(), &y, 5, 3, &grid, &opts).unwrap();
        assert_eq!(a.cv_mean, b.cv_mean);
        assert_eq!(a.lambda_index, b.lambda_index);
    }

    #[test]
    fn leave_one_out_runs() {
        let (x, y) = noise(20, 4, 2);
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 20, 0.01, &opts).unwrap();
        let cv = cv_select_lambda(x.view(), &y, 20, 4, &grid, &opts).unwrap();
        assert!(grid.contains(&cv.lambda));
        assert_eq!(cv.path.len(), 20);
    }

    #[test]
    fn pure_noise_prefers_large_lambda() {
        let opts = FitOptions::default();
        let trials = 40;
        let mut top_quartile = 0;
        for seed in 0..trials {
            let (x, y) = noise(100, 10, 100 + seed);
            let grid = lambda_grid(x.view(), &y, 40, 0.001, &opts).unwrap();
            let cv = cv_select_lambda(x.view(), &y, 10, seed, &grid, &opts).unwrap();
            if cv.lambda_index < grid.len() / 4 {
                top_quartile += 1;
            }
        }
        assert!(top_quartile as f64 >= 0.8 * trials as f64, "{top_quartile}/{trials}");
    }

    #[test]
    fn bad_fold_count() {
        let (x, y) = noise(10, 2, 3);
        assert!(cv_select_lambda(x.view(), &y, 1, 0, &[1.0, 0.5], &FitOptions::default()).is_err());
        assert!(cv_select_lambda(x.view(), &y, 11, 0, &[1.0, 0.5], &FitOptions::default()).is_err());
    }
}
