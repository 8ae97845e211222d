//! Lasso path solvers for the linear, logistic and Cox families, with
//! K-fold cross-validation and solver-independent KKT checks.
//!
//! All three families minimise a (1/n)-scaled loss plus `lambda * ||beta||_1`
//! on internally standardized columns; coefficients are reported on the
//! original scale. Exact zeros are stored for inactive coordinates so active
//! sets can be read off with `!= 0.0`.

mod cd;
pub mod cox;
pub mod cv;
mod glm;
pub mod grid;
pub mod kkt;
pub mod linear;
pub mod logistic;
mod prepare;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{FsrError, Result};

pub use cox::fit_cox_path;
pub use cv::{cv_select_lambda, CvResult};
pub use grid::{default_lambda_ratio, lambda_grid, lambda_max};
pub use kkt::{kkt_violation, path_kkt_violation};
pub use linear::fit_linear_path;
pub use logistic::fit_logistic_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Logistic,
    Cox,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Logistic => "logistic",
            Family::Cox => "cox",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = FsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "gaussian" => Ok(Family::Linear),
            "logistic" | "binomial" => Ok(Family::Logistic),
            "cox" => Ok(Family::Cox),
            other => Err(FsrError::InvalidConfig(format!("unknown family '{other}'"))),
        }
    }
}

/// Observed outcome for one of the three model families.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Continuous(Array1<f64>),
    Binary(Array1<f64>),
    /// `status` is 1 for an observed failure, 0 for right-censoring.
    Survival { time: Array1<f64>, status: Array1<f64> },
}

impl Response {
    pub fn continuous(y: Vec<f64>) -> Result<Self> {
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(FsrError::InvalidResponse(format!("non-finite value at row {i}")));
        }
        Ok(Response::Continuous(Array1::from(y)))
    }

    pub fn binary(y: Vec<f64>) -> Result<Self> {
        if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(FsrError::InvalidResponse(format!("binary response must be 0/1, row {i} is {}", y[i])));
        }
        Ok(Response::Binary(Array1::from(y)))
    }

    pub fn survival(time: Vec<f64>, status: Vec<f64>) -> Result<Self> {
        if time.len() != status.len() {
            return Err(FsrError::InvalidResponse("time and status lengths differ".into()));
        }
        if let Some(i) = time.iter().position(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(FsrError::InvalidResponse(format!("survival time must be positive, row {i} is {}", time[i])));
        }
        if let Some(i) = status.iter().position(|&d| d != 0.0 && d != 1.0) {
            return Err(FsrError::InvalidResponse(format!("status must be 0/1, row {i} is {}", status[i])));
        }
        Ok(Response::Survival { time: Array1::from(time), status: Array1::from(status) })
    }

    pub fn family(&self) -> Family {
        match self {
            Response::Continuous(_) => Family::Linear,
            Response::Binary(_) => Family::Logistic,
            Response::Survival { .. } => Family::Cox,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Response::Continuous(y) | Response::Binary(y) => y.len(),
            Response::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Observations `rows`, in order.
    pub fn subset(&self, rows: &[usize]) -> Response {
        let pick = |a: &Array1<f64>| rows.iter().map(|&i| a[i]).collect::<Array1<f64>>();
        match self {
            Response::Continuous(y) => Response::Continuous(pick(y)),
            Response::Binary(y) => Response::Binary(pick(y)),
            Response::Survival { time, status } => Response::Survival { time: pick(time), status: pick(status) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Fit an unpenalized intercept (ignored by the Cox family).
    pub intercept: bool,
    pub standardize: bool,
    /// Convergence threshold on the largest coefficient change (standardized scale).
    pub tol: f64,
    /// Budget of coordinate sweeps per lambda.
    pub max_iter: usize,
    pub kkt_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            intercept: true,
            standardize: true,
            tol: 1e-7,
            max_iter: 100_000,
            kkt_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathWarning {
    /// Some |linear predictor| exceeded the separation bound; the path stops
    /// before `lambda_index`.
    SeparationDetected { lambda_index: usize },
}

/// Penalized fits over a strictly decreasing lambda grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    pub family: Family,
    pub lambdas: Vec<f64>,
    /// m × p coefficients on the original column scale.
    pub coefs: Array2<f64>,
    /// None for Cox.
    pub intercepts: Option<Vec<f64>>,
    pub active_sets: Vec<Vec<usize>>,
    pub warnings: Vec<PathWarning>,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn truncated(&self) -> bool {
        !self.warnings.is_empty()
    }

    /// Active set at row `i`, or the last fitted row when the path stopped early.
    pub fn active_set_or_last(&self, i: usize) -> &[usize] {
        match self.active_sets.len() {
            0 => &[],
            m => &self.active_sets[i.min(m - 1)],
        }
    }
}

pub(crate) fn active_set(coefs: &[f64]) -> Vec<usize> {
    coefs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, _)| j)
        .collect()
}

pub fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(FsrError::InvalidGrid("empty".into()));
    }
    if lambdas.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(FsrError::InvalidGrid("every lambda must be finite and positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FsrError::InvalidGrid("lambdas must be strictly decreasing".into()));
    }
    Ok(())
}

pub(crate) fn check_dims(x: ArrayView2<'_, f64>, y: &Response) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(FsrError::DimensionError(format!(
            "design has {} rows but response has {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < 2 || x.ncols() == 0 {
        return Err(FsrError::DimensionError(format!("degenerate design {}x{}", x.nrows(), x.ncols())));
    }
    crate::design::check_finite(x)
}

/// Fit the path for whichever family `y` belongs to.
pub fn fit_path(x: ArrayView2<'_, f64>, y: &Response, lambdas: &[f64], opts: &FitOptions) -> Result<LassoPath> {
    match y.family() {
        Family::Linear => fit_linear_path(x, y, lambdas, opts),
        Family::Logistic => fit_logistic_path(x, y, lambdas, opts),
        Family::Cox => fit_cox_path(x, y, lambdas, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_validation() {
        assert!(Response::binary(vec![0.0, 1.0, 2.0]).is_err());
        assert!(Response::continuous(vec![0.0, f64::NAN]).is_err());
        assert!(Response::survival(vec![1.0, 0.0], vec![1.0, 0.0]).is_err());
        assert!(Response::survival(vec![1.0, 2.0], vec![1.0, 0.5]).is_err());
        let r = Response::survival(vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.family(), Family::Cox);
        assert_eq!(
            r.subset(&[2, 0]),
            Response::survival(vec![3.0, 1.0], vec![1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[1.0, 0.5]).is_ok());
        assert!(validate_grid(&[1.0, 1.0]).is_err());
        assert!(validate_grid(&[1.0, -0.5]).is_err());
        assert!(validate_grid(&[]).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Cox".parse::<Family>().unwrap(), Family::Cox);
        assert_eq!("binomial".parse::<Family>().unwrap(), Family::Logistic);
        assert!("poisson".parse::<Family>().is_err());
    }
}
