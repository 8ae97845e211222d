use ndarray::{Array1, ArrayView2};

use super::cox::CoxData;
use super::glm::SmoothLoss;
use super::prepare::Prepared;
use super::{check_dims, FitOptions, Response};
use crate::error::{FsrError, Result};

const MIN_SPREAD: f64 = 1e-10;

/// Score of the null (coefficient-free) model, as a function of eta.
pub(crate) fn null_score(y: &Response, intercept: bool) -> Result<Array1<f64>> {
    match y {
        Response::Continuous(v) => {
            let n = v.len() as f64;
            let mean = v.mean().unwrap_or(0.0);
            let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            if var < MIN_SPREAD {
                return Err(FsrError::ZeroVarianceResponse);
            }
            Ok(if intercept { v - mean } else { v.clone() })
        }
        Response::Binary(v) => {
            let c = if intercept { v.mean().unwrap_or(0.5) } else { 0.5 };
            Ok(v - c)
        }
        Response::Survival { .. } => {
            let data = CoxData::from_response(y)?;
            if data.events() == 0.0 {
                return Err(FsrError::AllCensored);
            }
            Ok(data.expand(&Array1::zeros(y.len())).1)
        }
    }
}

/// Smallest lambda at which every penalized coefficient is zero.
pub fn lambda_max(x: ArrayView2<'_, f64>, y: &Response, opts: &FitOptions) -> Result<f64> {
    check_dims(x, y)?;
    let intercept = opts.intercept && y.family() != super::Family::Cox;
    let center = intercept || y.family() == super::Family::Cox;
    let score = null_score(y, intercept)?;
    let prep = Prepared::new(x, center, opts.standardize);
    let lmax = prep.gradient(&score).into_iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    if !(lmax > MIN_SPREAD) {
        return Err(FsrError::ZeroVarianceResponse);
    }
    Ok(lmax)
}

/// `m` log-spaced values from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_grid(x: ArrayView2<'_, f64>, y: &Response, m: usize, ratio: f64, opts: &FitOptions) -> Result<Vec<f64>> {
    log_grid(lambda_max(x, y, opts)?, m, ratio)
}

pub(crate) fn log_grid(top: f64, m: usize, ratio: f64) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(FsrError::InvalidGrid(format!("need at least 2 lambdas, got {m}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(FsrError::InvalidGrid(format!("lambda ratio must lie in (0, 1), got {ratio}")));
    }
    let step = ratio.ln() / (m - 1) as f64;
    Ok((0..m).map(|i| top * (step * i as f64).exp()).collect())
}

pub fn default_lambda_ratio(n: usize, p: usize) -> f64 {
    if n > p {
        1e-3
    } else {
        1e-2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn grid_endpoints() {
        let g = log_grid(2.0, 5, 0.01).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 2.0).abs() < 1e-15);
        assert!((g[4] - 0.02).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(log_grid(1.0, 1, 0.1).is_err());
        assert!(log_grid(1.0, 3, 1.0).is_err());
    }

    #[test]
    fn linear_lambda_max_by_hand() {
        let x = array![[1.0, 0.0], [2.0, 1.0], [3.0, 0.0], [4.0, 1.0]];
        let y = Response::continuous(vec![1.0, 3.0, 2.0, 6.0]).unwrap();
        let opts = FitOptions { standardize: false, ..FitOptions::default() };
        // Centered: x1 = (-1.5,-.5,.5,1.5), x2 = (-.5,.5,-.5,.5), r = (-2,0,-1,3)
        // |x1.r|/4 = 7/4, |x2.r|/4 = 1/4
        assert!((lambda_max(x.view(), &y, &opts).unwrap() - 1.75).abs() < 1e-14);
    }

    #[test]
    fn constant_response_is_rejected() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = Response::continuous(vec![4.0; 3]).unwrap();
        assert!(matches!(
            lambda_max(x.view(), &y, &FitOptions::default()),
            Err(FsrError::ZeroVarianceResponse)
        ));
    }

    #[test]
    fn first_grid_point_fits_the_null_model_for_every_family() {
        use crate::rng;
        use crate::solvers::fit_path;
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut r = rng::stream(11);
        let n = 60;
        let x = ndarray::Array2::from_shape_fn((n, 5), |_| r.sample::<f64, _>(StandardNormal));
        let lin: Vec<f64> = (0..n).map(|i| x[[i, 0]] + r.sample::<f64, _>(StandardNormal)).collect();
        let bin: Vec<f64> = lin.iter().map(|v| f64::from(*v > 0.0)).collect();
        let time: Vec<f64> = lin.iter().map(|v| (-v).exp() + 0.01).collect();
        let status: Vec<f64> = (0..n).map(|i| f64::from(i % 4 != 0)).collect();
        let responses = [
            Response::continuous(lin).unwrap(),
            Response::binary(bin).unwrap(),
            Response::survival(time, status).unwrap(),
        ];
        let opts = FitOptions::default();
        for y in &responses {
            let grid = lambda_grid(x.view(), y, 3, 0.01, &opts).unwrap();
            assert!((grid[1] / grid[0] - 0.1).abs() < 1e-12);
            let path = fit_path(x.view(), y, &grid, &opts).unwrap();
            assert!(path.active_sets[0].is_empty(), "{:?}", y.family());
            assert!(!path.active_sets[2].is_empty(), "{:?}", y.family());
        }
    }

    #[test]
    fn response_orthogonal_to_columns_is_rejected() {
        let x = array![[1.0], [-1.0], [1.0], [-1.0]];
        let y = Response::continuous(vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(matches!(
            lambda_max(x.view(), &y, &FitOptions::default()),
            Err(FsrError::ZeroVarianceResponse)
        ));
    }

    #[test]
    fn default_ratio() {
        assert_eq!(default_lambda_ratio(100, 10), 1e-3);
        assert_eq!(default_lambda_ratio(50, 200), 1e-2);
    }
}
