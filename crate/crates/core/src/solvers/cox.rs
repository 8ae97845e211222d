use ndarray::{Array1, Array2, ArrayView2};

use super::cd::CdState;
use super::glm::{prox_newton, Curvature, NewtonSettings, SmoothLoss};
use super::logistic::SEPARATION_BOUND;
use super::prepare::Prepared;
use super::{active_set, check_dims, validate_grid, Family, FitOptions, LassoPath, PathWarning, Response};
use crate::error::{FsrError, Result};

/// Survival data sorted by time, with tied times grouped (Breslow).
#[derive(Debug, Clone)]
pub(crate) struct CoxData {
    /// Observation indices in ascending time order.
    order: Vec<usize>,
    /// `groups[g]..groups[g + 1]` spans tie group g inside `order`.
    groups: Vec<usize>,
    /// Failures per tie group.
    deaths: Vec<f64>,
    status: Array1<f64>,
}

impl CoxData {
    pub fn new(time: &Array1<f64>, status: &Array1<f64>) -> Self {
        let mut order: Vec<usize> = (0..time.len()).collect();
        order.sort_by(|&a, &b| time[a].total_cmp(&time[b]));
        let mut groups = vec![0];
        let mut deaths = Vec::new();
        let mut d = 0.0;
        for (pos, &i) in order.iter().enumerate() {
            if pos > 0 && time[i] != time[order[pos - 1]] {
                groups.push(pos);
                deaths.push(d);
                d = 0.0;
            }
            d += status[i];
        }
        groups.push(order.len());
        deaths.push(d);
        Self { order, groups, deaths, status: status.clone() }
    }

    pub fn from_response(y: &Response) -> Result<Self> {
        match y {
            Response::Survival { time, status } => Ok(Self::new(time, status)),
            other => Err(FsrError::InvalidResponse(format!(
                "Cox lasso needs a survival response, got {}",
                other.family()
            ))),
        }
    }

    pub fn events(&self) -> f64 {
        self.deaths.iter().sum()
    }

    fn n_groups(&self) -> usize {
        self.deaths.len()
    }

    /// Shifted exponentials and the log risk-set sums per tie group.
    fn risk_sums(&self, eta: &Array1<f64>) -> (Array1<f64>, f64, Vec<f64>) {
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = eta.mapv(|v| (v - shift).exp());
        let mut sums = vec![0.0; self.n_groups()];
        let mut acc = 0.0;
        for g in (0..self.n_groups()).rev() {
            for &i in &self.order[self.groups[g]..self.groups[g + 1]] {
                acc += e[i];
            }
            sums[g] = acc;
        }
        (e, shift, sums)
    }

    /// Log partial likelihood (unscaled).
    pub fn log_likelihood(&self, eta: &Array1<f64>) -> f64 {
        let (_, shift, sums) = self.risk_sums(eta);
        let fit: f64 = eta.iter().zip(&self.status).map(|(e, d)| e * d).sum();
        let norm: f64 = self
            .deaths
            .iter()
            .zip(&sums)
            .filter(|(&d, _)| d > 0.0)
            .map(|(&d, &s)| d * (s.ln() + shift))
            .sum();
        fit - norm
    }
}

impl SmoothLoss for CoxData {
    fn loss(&self, eta: &Array1<f64>) -> f64 {
        -self.log_likelihood(eta) / eta.len() as f64
    }

    fn expand(&self, eta: &Array1<f64>) -> (f64, Array1<f64>, Array1<f64>) {
        let (e, _, sums) = self.risk_sums(eta);
        let n = eta.len();
        let mut score = Array1::zeros(n);
        let mut w = Array1::zeros(n);
        let (mut a, mut b) = (0.0, 0.0);
        for g in 0..self.n_groups() {
            if self.deaths[g] > 0.0 {
                a += self.deaths[g] / sums[g];
                b += self.deaths[g] / (sums[g] * sums[g]);
            }
            for &i in &self.order[self.groups[g]..self.groups[g + 1]] {
                let ea = e[i] * a;
                score[i] = self.status[i] - ea;
                w[i] = (ea - e[i] * e[i] * b).max(0.0);
            }
        }
        (self.loss(eta), score, w)
    }

    /// `(Mv)_i = e_i v_i A_i - e_i sum_{g <= group(i)} d_g T_g / S_g^2` with
    /// `T_g` the risk-set sum of `e v`.
    fn curvature<'a>(&'a self, eta: &Array1<f64>) -> Curvature<'a> {
        let (e, _, sums) = self.risk_sums(eta);
        Box::new(move |v| {
            let groups = self.n_groups();
            let mut t = vec![0.0; groups];
            let mut acc = 0.0;
            for g in (0..groups).rev() {
                for &i in &self.order[self.groups[g]..self.groups[g + 1]] {
                    acc += e[i] * v[i];
                }
                t[g] = acc;
            }
            let mut out = Array1::zeros(v.len());
            let (mut a, mut c) = (0.0, 0.0);
            for g in 0..groups {
                if self.deaths[g] > 0.0 {
                    a += self.deaths[g] / sums[g];
                    c += self.deaths[g] * t[g] / (sums[g] * sums[g]);
                }
                for &i in &self.order[self.groups[g]..self.groups[g + 1]] {
                    out[i] = e[i] * (v[i] * a - c);
                }
            }
            out
        })
    }
}

/// Cox proportional-hazards lasso path, `-(1/n) log PL(beta) + lambda ||beta||_1`,
/// Breslow ties. There is no intercept.
pub fn fit_cox_path(x: ArrayView2<'_, f64>, y: &Response, lambdas: &[f64], opts: &FitOptions) -> Result<LassoPath> {
    let data = CoxData::from_response(y)?;
    check_dims(x, y)?;
    validate_grid(lambdas)?;
    if data.events() == 0.0 {
        return Err(FsrError::AllCensored);
    }
    // Centering leaves the partial likelihood unchanged and helps conditioning.
    let prep = Prepared::new(x, true, opts.standardize);
    let p = prep.p();
    let settings = NewtonSettings { intercept: false, tol: opts.tol, max_sweeps: opts.max_iter };

    let mut state = CdState::zeros(p);
    let mut coefs = Array2::zeros((lambdas.len(), p));
    let mut active_sets = Vec::with_capacity(lambdas.len());
    let mut warnings = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        prox_newton(&prep, &data, lambda, &mut state, &settings, i)?;
        let eta = prep.linear_predictor(&state.beta, 0.0);
        if eta.iter().any(|e| e.abs() > SEPARATION_BOUND) {
            warnings.push(PathWarning::SeparationDetected { lambda_index: i });
            break;
        }
        let (beta, _) = prep.to_original(&state.beta, 0.0);
        active_sets.push(active_set(&beta));
        coefs.row_mut(i).assign(&Array1::from(beta));
    }
    let fitted = active_sets.len();
    Ok(LassoPath {
        family: Family::Cox,
        lambdas: lambdas[..fitted].to_vec(),
        coefs: coefs.slice(ndarray::s![..fitted, ..]).to_owned(),
        intercepts: None,
        active_sets,
        warnings,
    })
}
