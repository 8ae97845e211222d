//! Stationarity checks for the penalized objectives, computed from the
//! reported coefficients alone (no solver state).

use ndarray::{Array1, ArrayView1, ArrayView2};

use super::cox::CoxData;
use super::glm::SmoothLoss;
use super::logistic::sigmoid;
use super::prepare::Prepared;
use super::{check_dims, Family, FitOptions, LassoPath, Response};
use crate::error::Result;

/// Score `g` with d loss / d eta = -g / n.
fn score(y: &Response, eta: &Array1<f64>) -> Result<Array1<f64>> {
    Ok(match y {
        Response::Continuous(v) => v - eta,
        Response::Binary(v) => v - &eta.mapv(sigmoid),
        Response::Survival { .. } => CoxData::from_response(y)?.expand(eta).1,
    })
}

/// Largest KKT violation of one path row, on the standardized scale the
/// penalty is applied on. `intercept` is ignored for Cox.
pub fn kkt_violation(
    x: ArrayView2<'_, f64>,
    y: &Response,
    beta: ArrayView1<'_, f64>,
    intercept: Option<f64>,
    lambda: f64,
    opts: &FitOptions,
) -> Result<f64> {
    check_dims(x, y)?;
    let cox = y.family() == Family::Cox;
    let with_intercept = opts.intercept && !cox;
    let prep = Prepared::new(x, with_intercept || cox, opts.standardize);
    let (beta_std, b0) = prep.to_standardized(beta, if cox { 0.0 } else { intercept.unwrap_or(0.0) });
    let b0 = if cox { 0.0 } else { b0 };
    let g = score(y, &prep.linear_predictor(&beta_std, b0))?;
    let grad = prep.gradient(&g);

    let mut worst: f64 = 0.0;
    if with_intercept {
        worst = g.mean().unwrap_or(0.0).abs();
    }
    for (j, (&gj, &bj)) in grad.iter().zip(&beta_std).enumerate() {
        if !prep.usable[j] {
            continue;
        }
        let v = if bj != 0.0 { (gj - lambda * bj.signum()).abs() } else { (gj.abs() - lambda).max(0.0) };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Largest KKT violation over every fitted row of `path`.
pub fn path_kkt_violation(x: ArrayView2<'_, f64>, y: &Response, path: &LassoPath, opts: &FitOptions) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, &lambda) in path.lambdas.iter().enumerate() {
        let b0 = path.intercepts.as_ref().map(|v| v[i]);
        worst = worst.max(kkt_violation(x, y, path.coefs.row(i), b0, lambda, opts)?);
    }
    Ok(worst)
}
