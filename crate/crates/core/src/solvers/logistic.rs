use ndarray::{Array1, Array2, ArrayView2};

use super::cd::CdState;
use super::glm::{prox_newton, NewtonSettings, SmoothLoss};
use super::prepare::Prepared;
use super::{active_set, check_dims, validate_grid, Family, FitOptions, LassoPath, PathWarning, Response};
use crate::error::{FsrError, Result};

/// Linear predictors beyond this magnitude are taken as (quasi-)separation.
pub const SEPARATION_BOUND: f64 = 30.0;

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

pub(crate) struct Binomial<'a> {
    pub y: &'a Array1<f64>,
}

impl SmoothLoss for Binomial<'_> {
    fn loss(&self, eta: &Array1<f64>) -> f64 {
        let n = eta.len() as f64;
        eta.iter().zip(self.y).map(|(&e, &y)| softplus(e) - y * e).sum::<f64>() / n
    }

    fn expand(&self, eta: &Array1<f64>) -> (f64, Array1<f64>, Array1<f64>) {
        let p = eta.mapv(sigmoid);
        let score = self.y - &p;
        let w = p.mapv(|q| q * (1.0 - q));
        (self.loss(eta), score, w)
    }
}

pub(crate) fn binary(y: &Response) -> Result<&Array1<f64>> {
    match y {
        Response::Binary(v) => Ok(v),
        other => Err(FsrError::InvalidResponse(format!(
            "logistic lasso needs a binary response, got {}",
            other.family()
        ))),
    }
}

/// Logistic lasso path, `-(1/n) sum [y eta - log(1 + e^eta)] + lambda ||beta||_1`
/// with an unpenalized intercept. Stops early (with a warning) once the fit
/// drives some linear predictor past [`SEPARATION_BOUND`].
pub fn fit_logistic_path(
    x: ArrayView2<'_, f64>,
    y: &Response,
    lambdas: &[f64],
    opts: &FitOptions,
) -> Result<LassoPath> {
    let yv = binary(y)?;
    check_dims(x, y)?;
    validate_grid(lambdas)?;
    let ybar = yv.mean().unwrap_or(0.0);
    if ybar == 0.0 || ybar == 1.0 {
        return Err(FsrError::InvalidResponse("binary response has a single class".into()));
    }
    let prep = Prepared::new(x, opts.intercept, opts.standardize);
    let p = prep.p();
    let loss = Binomial { y: yv };
    let settings = NewtonSettings { intercept: opts.intercept, tol: opts.tol, max_sweeps: opts.max_iter };

    let mut state = CdState::zeros(p);
    if opts.intercept {
        state.b0 = (ybar / (1.0 - ybar)).ln();
    }
    let mut coefs = Array2::zeros((lambdas.len(), p));
    let mut intercepts = Vec::with_capacity(lambdas.len());
    let mut active_sets = Vec::with_capacity(lambdas.len());
    let mut warnings = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        prox_newton(&prep, &loss, lambda, &mut state, &settings, i)?;
        let eta = prep.linear_predictor(&state.beta, state.b0);
        if eta.iter().any(|e| e.abs() > SEPARATION_BOUND) {
            warnings.push(PathWarning::SeparationDetected { lambda_index: i });
            break;
        }
        let (beta, b0) = prep.to_original(&state.beta, state.b0);
        active_sets.push(active_set(&beta));
        coefs.row_mut(i).assign(&Array1::from(beta));
        intercepts.push(b0);
    }
    let fitted = active_sets.len();
    Ok(LassoPath {
        family: Family::Logistic,
        lambdas: lambdas[..fitted].to_vec(),
        coefs: coefs.slice(ndarray::s![..fitted, ..]).to_owned(),
        intercepts: Some(intercepts),
        active_sets,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::solvers::{kkt::path_kkt_violation, lambda_grid};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, p: usize, seed: u64) -> Array2<f64> {
        let mut r = rng::stream(seed);
        Array2::from_shape_fn((n, p), |_| r.sample(StandardNormal))
    }

    fn draw_binary(eta: &Array1<f64>, seed: u64) -> Response {
        let mut r = rng::stream(seed);
        Response::binary(eta.iter().map(|&e| f64::from(r.random::<f64>() < sigmoid(e))).collect()).unwrap()
    }

    #[test]
    fn huge_lambda_gives_null_model() {
        let x = gaussian(50, 4, 1);
        let y = draw_binary(&Array1::zeros(50), 2);
        let ybar = binary(&y).unwrap().mean().unwrap();
        let path = fit_logistic_path(x.view(), &y, &[1e3], &FitOptions::default()).unwrap();
        assert!(path.active_sets[0].is_empty());
        let b0 = path.intercepts.unwrap()[0];
        assert!((b0 - (ybar / (1.0 - ybar)).ln()).abs() < 1e-10);
    }

    #[test]
    fn kkt_along_path() {
        let x = gaussian(120, 8, 3);
        let eta = x.column(0).to_owned() * 1.5 - x.column(1).to_owned();
        let y = draw_binary(&eta, 4);
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 40, 0.01, &opts).unwrap();
        let path = fit_logistic_path(x.view(), &y, &grid, &opts).unwrap();
        assert!(path.warnings.is_empty());
        assert!(path.active_sets[0].is_empty());
        assert!(path_kkt_violation(x.view(), &y, &path, &opts).unwrap() < 1e-4);
    }

    #[test]
    fn sign_follows_score_at_zero() {
        let x = gaussian(80, 1, 5);
        let y = draw_binary(&(x.column(0).to_owned() * 3.0), 6);
        let yv = binary(&y).unwrap();
        let ybar = yv.mean().unwrap();
        let score: f64 = x.column(0).iter().zip(yv).map(|(a, b)| a * (b - ybar)).sum();
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 10, 0.1, &opts).unwrap();
        let path = fit_logistic_path(x.view(), &y, &grid, &opts).unwrap();
        let last = path.coefs[[path.len() - 1, 0]];
        assert!(last != 0.0);
        assert_eq!(last.signum(), score.signum());
    }

    #[test]
    fn fitted_probabilities_match_class_rate() {
        // Stationarity in the unpenalized intercept: mean fitted p == ybar.
        let x = gaussian(150, 6, 9);
        let y = draw_binary(&(x.column(2).to_owned() - 0.5), 10);
        let ybar = binary(&y).unwrap().mean().unwrap();
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 20, 0.05, &opts).unwrap();
        let path = fit_logistic_path(x.view(), &y, &grid, &opts).unwrap();
        let b0 = path.intercepts.as_ref().unwrap();
        for i in 0..path.len() {
            let eta = x.dot(&path.coefs.row(i)) + b0[i];
            let mean_p = eta.mapv(sigmoid).mean().unwrap();
            assert!((mean_p - ybar).abs() < 1e-5, "row {i}: {mean_p} vs {ybar}");
        }
    }

    #[test]
    fn null_data_selects_nothing_above_bonferroni_level() {
        // Balanced y independent of x: each standardized score (1/n) x_j^T (y - 1/2)
        // is approximately N(0, 1/(4n)), so with n = 100, p = 5 the level
        // 3 * sqrt(1/(4n)) = 0.15 is exceeded by some column with probability
        // at most 5 * 0.0027. Require an empty fit there in >= 95% of seeds.
        let opts = FitOptions::default();
        let trials = 100;
        let mut empty = 0;
        for seed in 0..trials {
            let x = gaussian(100, 5, 1000 + seed);
            let labels: Vec<f64> = (0..100).map(|i| f64::from(i % 2 == 0)).collect();
            let perm = crate::linalg::random_permutation(100, &mut rng::stream(seed));
            let y = Response::binary(perm.iter().map(|&i| labels[i]).collect()).unwrap();
            let path = fit_logistic_path(x.view(), &y, &[0.15], &opts).unwrap();
            if path.active_sets[0].is_empty() {
                empty += 1;
            }
        }
        assert!(empty >= 95, "{empty}/{trials}");
    }

    #[test]
    fn separation_truncates_path() {
        let x = gaussian(40, 2, 7);
        let y = Response::binary(x.column(0).iter().map(|&v| f64::from(v > 0.0)).collect()).unwrap();
        let opts = FitOptions::default();
        let grid = lambda_grid(x.view(), &y, 50, 1e-4, &opts).unwrap();
        let path = fit_logistic_path(x.view(), &y, &grid, &opts).unwrap();
        assert!(path.truncated());
        let PathWarning::SeparationDetected { lambda_index } = path.warnings[0];
        assert_eq!(path.len(), lambda_index);
        assert!(path.len() < grid.len());
    }

    #[test]
    fn single_class_is_rejected() {
        let x = gaussian(10, 2, 8);
        let y = Response::binary(vec![1.0; 10]).unwrap();
        assert!(matches!(
            fit_logistic_path(x.view(), &y, &[1.0], &FitOptions::default()),
            Err(FsrError::InvalidResponse(_))
        ));
    }
}
