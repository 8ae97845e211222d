//! Simulation harness: AR(1) Gaussian designs, sparse coefficient vectors,
//! responses for the three families, and nested (beta draw × dataset) runs
//! scored by achieved FSR and TSR.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2, ArrayView2, ShapeBuilder};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{FsrError, Result};
use crate::fsr::{estimate_fsr, FsrConfig, ScreeningMethod};
use crate::metrics::{fsr_of, mean_se, tsr_of, SelectionOutcome};
use crate::rng::{self, tag};
use crate::solvers::{logistic::sigmoid, Family, FitOptions, Response};

/// Baseline hazard rate of the simulated survival times.
pub const COX_BASE_RATE: f64 = 0.01;
/// Mean of the exponential censoring times.
pub const COX_CENSOR_MEAN: f64 = 1000.0;

fn default_alpha() -> f64 {
    0.2
}
fn default_beta_draws() -> usize {
    5
}
fn default_datasets() -> usize {
    20
}
fn default_b() -> usize {
    20
}
fn default_true() -> bool {
    true
}
fn default_lambda_count() -> usize {
    100
}
fn default_family() -> Family {
    Family::Linear
}

/// One simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_family")]
    pub family: Family,
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub rho: f64,
    pub amplitude: f64,
    pub sparsity: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Logistic offset: P(y = 1) = 1 / (1 + exp(c - x^T beta)).
    #[serde(default)]
    pub intercept_c: f64,
    #[serde(default = "default_beta_draws")]
    pub n_beta_draws: usize,
    #[serde(default = "default_datasets")]
    pub n_datasets_per_beta: usize,
    #[serde(default)]
    pub seed: u64,
    /// Pseudo-variable replicates per dataset.
    #[serde(default = "default_b")]
    pub b_replicates: usize,
    #[serde(default = "default_true")]
    pub use_permutation: bool,
    #[serde(default = "default_lambda_count")]
    pub lambda_count: usize,
    /// Fit an intercept in the linear and logistic solvers.
    #[serde(default = "default_true")]
    pub intercept: bool,
}

impl Scenario {
    /// n = 200, p = 50, rho = 0.5, A = 1, s = 5, alpha = 0.2 at desk scale.
    pub fn base(family: Family) -> Self {
        Self {
            family,
            n: 200,
            p: 50,
            rho: 0.5,
            amplitude: 1.0,
            sparsity: 5,
            alpha: 0.2,
            intercept_c: 0.0,
            n_beta_draws: default_beta_draws(),
            n_datasets_per_beta: default_datasets(),
            seed: 0,
            b_replicates: default_b(),
            use_permutation: true,
            lambda_count: default_lambda_count(),
            intercept: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FsrError::InvalidConfig(m));
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if self.sparsity > self.p {
            return bad(format!("sparsity {} exceeds p = {}", self.sparsity, self.p));
        }
        if self.n < 10 || self.p == 0 {
            return bad(format!("need n >= 10 and p >= 1, got n = {}, p = {}", self.n, self.p));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n_beta_draws == 0 || self.n_datasets_per_beta == 0 || self.b_replicates == 0 {
            return bad("replicate counts must be positive".into());
        }
        if self.lambda_count < 2 {
            return bad("lambda_count must be at least 2".into());
        }
        if !self.amplitude.is_finite() || !self.intercept_c.is_finite() {
            return bad("amplitude and intercept_c must be finite".into());
        }
        Ok(())
    }

    pub fn replicates(&self) -> usize {
        self.n_beta_draws * self.n_datasets_per_beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Row-permutation screening.
    Pseudo1,
    /// 10-fold CV lasso screening.
    Pseudo2,
}

impl Method {
    pub fn screening(self) -> ScreeningMethod {
        match self {
            Method::Pseudo1 => ScreeningMethod::Pseudo { alpha_n: 0.2, b: 20 },
            Method::Pseudo2 => ScreeningMethod::Cv { folds: 10 },
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Pseudo1 => "pseudo1",
            Method::Pseudo2 => "pseudo2",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = FsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "pseudo1" => Ok(Method::Pseudo1),
            "pseudo2" => Ok(Method::Pseudo2),
            other => Err(FsrError::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// Coefficients with `s` entries equal to `amplitude` at uniformly chosen
/// positions, and those positions in increasing order.
pub fn draw_beta(p: usize, s: usize, amplitude: f64, seed: u64) -> Result<(Array1<f64>, Vec<usize>)> {
    if s > p {
        return Err(FsrError::InvalidConfig(format!("sparsity {s} exceeds p = {p}")));
    }
    let mut support = sample(&mut rng::stream(seed), p, s).into_vec();
    support.sort_unstable();
    let mut beta = Array1::zeros(p);
    support.iter().for_each(|&j| beta[j] = amplitude);
    Ok((beta, support))
}

/// Rows iid N(0, C) with C_ij = rho^|i-j|, via x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j.
pub fn draw_design(n: usize, p: usize, rho: f64, seed: u64) -> Result<DesignMatrix> {
    if !(rho.abs() < 1.0) {
        return Err(FsrError::InvalidConfig(format!("|rho| must be below 1, got {rho}")));
    }
    let mut r = rng::stream(seed);
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = Array2::<f64>::zeros((n, p).f());
    for i in 0..n {
        let mut prev: f64 = r.sample(StandardNormal);
        x[[i, 0]] = prev;
        for j in 1..p {
            prev = rho * prev + innov * r.sample::<f64, _>(StandardNormal);
            x[[i, j]] = prev;
        }
    }
    DesignMatrix::from_array(x)
}

/// Response for `family` given linear predictor `x beta`.
pub fn draw_response(
    x: ArrayView2<'_, f64>,
    beta: &Array1<f64>,
    family: Family,
    intercept_c: f64,
    seed: u64,
) -> Result<Response> {
    if x.ncols() != beta.len() {
        return Err(FsrError::DimensionError(format!("{} columns but {} coefficients", x.ncols(), beta.len())));
    }
    let eta = x.dot(beta);
    let mut r = rng::stream(seed);
    match family {
        Family::Linear => Response::continuous(eta.iter().map(|e| e + r.sample::<f64, _>(StandardNormal)).collect()),
        Family::Logistic => Response::binary(
            eta.iter()
                .map(|&e| {
                    let p = sigmoid(e - intercept_c);
                    f64::from(Bernoulli::new(p).expect("probability in [0, 1]").sample(&mut r))
                })
                .collect(),
        ),
        Family::Cox => {
            let censor = Exp::new(1.0 / COX_CENSOR_MEAN).expect("positive rate");
            let mut time = Vec::with_capacity(eta.len());
            let mut status = Vec::with_capacity(eta.len());
            for &e in &eta {
                let rate = COX_BASE_RATE * e.exp();
                let t: f64 = Exp::new(rate)
                    .map_err(|_| FsrError::InvalidConfig(format!("hazard rate {rate} out of range")))?
                    .sample(&mut r);
                let c: f64 = censor.sample(&mut r);
                time.push(t.min(c).max(f64::MIN_POSITIVE));
                status.push(f64::from(t <= c));
            }
            Response::survival(time, status)
        }
    }
}

/// One simulated dataset.
#[derive(Debug, Clone)]
pub struct SimData {
    pub x: DesignMatrix,
    pub y: Response,
    pub beta: Array1<f64>,
    pub support: Vec<usize>,
}

fn beta_seed(sc: &Scenario, b: usize) -> u64 {
    rng::derive_seed(sc.seed, &[tag::BETA, b as u64])
}

fn dataset_seed(sc: &Scenario, b: usize, d: usize) -> u64 {
    rng::derive_seed(sc.seed, &[tag::DATASET, b as u64, d as u64])
}

/// Dataset `d` under beta draw `b` of the scenario.
pub fn simulate_dataset(sc: &Scenario, b: usize, d: usize) -> Result<SimData> {
    let (beta, support) = draw_beta(sc.p, sc.sparsity, sc.amplitude, beta_seed(sc, b))?;
    let seed = dataset_seed(sc, b, d);
    let x = draw_design(sc.n, sc.p, sc.rho, rng::derive_seed(seed, &[tag::DESIGN]))?;
    let y = draw_response(x.view(), &beta, sc.family, sc.intercept_c, rng::derive_seed(seed, &[tag::RESPONSE]))?;
    Ok(SimData { x, y, beta, support })
}

/// Estimator settings used for every replicate of `sc`.
pub fn fsr_config(sc: &Scenario, method: Method, seed: u64) -> FsrConfig {
    FsrConfig {
        b_replicates: sc.b_replicates,
        use_permutation: sc.use_permutation,
        alpha_targets: vec![sc.alpha],
        screening: method.screening(),
        lambdas: None,
        lambda_count: sc.lambda_count,
        lambda_ratio: None,
        seed,
        fit: FitOptions { intercept: sc.intercept, ..FitOptions::default() },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub beta_index: usize,
    pub dataset_index: usize,
    pub fsr: f64,
    pub tsr: f64,
    pub n_selected: usize,
    /// Cox only.
    pub censored_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: Scenario,
    pub method: Method,
    pub per_replicate: Vec<ReplicateOutcome>,
    pub mean_fsr: f64,
    pub mean_tsr: f64,
    pub se_fsr: f64,
    pub se_tsr: f64,
    /// Replicates whose estimation failed (excluded from the averages).
    pub failures: usize,
    pub failure_messages: Vec<String>,
}

impl SimResult {
    pub fn mean_selected(&self) -> f64 {
        let k = self.per_replicate.len().max(1) as f64;
        self.per_replicate.iter().map(|r| r.n_selected as f64).sum::<f64>() / k
    }

    /// Share of replicates whose selected model is empty.
    pub fn empty_fraction(&self) -> f64 {
        let k = self.per_replicate.len().max(1) as f64;
        self.per_replicate.iter().filter(|r| r.n_selected == 0).count() as f64 / k
    }

    pub fn censoring_fraction(&self) -> Option<f64> {
        let v: Vec<f64> = self.per_replicate.iter().filter_map(|r| r.censored_fraction).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Score one replicate: simulate, estimate, select at `sc.alpha`.
pub fn run_replicate(sc: &Scenario, method: Method, b: usize, d: usize) -> Result<ReplicateOutcome> {
    let data = simulate_dataset(sc, b, d)?;
    let cfg = fsr_config(sc, method, rng::derive_seed(dataset_seed(sc, b, d), &[tag::REPLICATE]));
    let curve = estimate_fsr(data.x.view(), &data.y, &cfg)?;
    let selected = &curve.selected[0].active_set;
    let outcome = SelectionOutcome::new(selected, &data.support);
    let censored_fraction = match &data.y {
        Response::Survival { status, .. } => Some(1.0 - status.mean().unwrap_or(0.0)),
        _ => None,
    };
    Ok(ReplicateOutcome {
        beta_index: b,
        dataset_index: d,
        fsr: fsr_of(&outcome),
        tsr: tsr_of(&outcome),
        n_selected: selected.len(),
        censored_fraction,
    })
}

/// All `n_beta_draws × n_datasets_per_beta` replicates, in parallel.
pub fn run_scenario(sc: &Scenario, method: Method) -> Result<SimResult> {
    sc.validate()?;
    let jobs: Vec<(usize, usize)> = (0..sc.n_beta_draws)
        .flat_map(|b| (0..sc.n_datasets_per_beta).map(move |d| (b, d)))
        .collect();
    let results: Vec<Result<ReplicateOutcome>> =
        jobs.par_iter().map(|&(b, d)| run_replicate(sc, method, b, d)).collect();
    let mut per_replicate = Vec::with_capacity(jobs.len());
    let mut failure_messages = Vec::new();
    for ((b, d), r) in jobs.iter().zip(results) {
        match r {
            Ok(o) => per_replicate.push(o),
            Err(e) => failure_messages.push(format!("beta {b}, dataset {d}: {e}")),
        }
    }
    let fsr: Vec<f64> = per_replicate.iter().map(|r| r.fsr).collect();
    let tsr: Vec<f64> = per_replicate.iter().map(|r| r.tsr).collect();
    let (mean_fsr, se_fsr) = mean_se(&fsr);
    let (mean_tsr, se_tsr) = mean_se(&tsr);
    Ok(SimResult {
        scenario: sc.clone(),
        method,
        per_replicate,
        mean_fsr,
        mean_tsr,
        se_fsr,
        se_tsr,
        failures: failure_messages.len(),
        failure_messages,
    })
}

/// Lists of values to sweep; every combination is run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxes {
    pub family: Option<Vec<Family>>,
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub rho: Option<Vec<f64>>,
    pub amplitude: Option<Vec<f64>>,
    pub sparsity: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
}

/// A scenario file: a base scenario, axes to vary, and the methods to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub base: Scenario,
    #[serde(default)]
    pub vary: GridAxes,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Pseudo2]
}

impl ScenarioGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: ScenarioGrid =
            toml::from_str(text).map_err(|e| FsrError::InvalidConfig(format!("scenario file: {}", e.message())))?;
        if grid.methods.is_empty() {
            return Err(FsrError::InvalidConfig("scenario file lists no methods".into()));
        }
        for sc in grid.scenarios() {
            sc.validate()?;
        }
        Ok(grid)
    }

    /// Cartesian product of the axes over the base scenario, in axis order
    /// family, n, p, rho, amplitude, sparsity, alpha.
    pub fn scenarios(&self) -> Vec<Scenario> {
        fn expand<T: Clone>(acc: Vec<Scenario>, axis: &Option<Vec<T>>, set: impl Fn(&mut Scenario, T)) -> Vec<Scenario> {
            match axis {
                None => acc,
                Some(values) => acc
                    .into_iter()
                    .flat_map(|sc| {
                        values.iter().map(|v| {
                            let mut s = sc.clone();
                            set(&mut s, v.clone());
                            s
                        }).collect::<Vec<_>>()
                    })
                    .collect(),
            }
        }
        let v = &self.vary;
        let mut out = vec![self.base.clone()];
        out = expand(out, &v.family, |s, x| s.family = x);
        out = expand(out, &v.n, |s, x| s.n = x);
        out = expand(out, &v.p, |s, x| s.p = x);
        out = expand(out, &v.rho, |s, x| s.rho = x);
        out = expand(out, &v.amplitude, |s, x| s.amplitude = x);
        out = expand(out, &v.sparsity, |s, x| s.sparsity = x);
        out = expand(out, &v.alpha, |s, x| s.alpha = x);
        out
    }
}

/// One CSV row per (scenario, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: Family,
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub amplitude: f64,
    pub sparsity: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub failures: usize,
    pub mean_fsr: f64,
    pub se_fsr: f64,
    pub mean_tsr: f64,
    pub se_tsr: f64,
    pub mean_selected: f64,
    pub empty_fraction: f64,
    pub censoring_fraction: Option<f64>,
}

impl From<&SimResult> for SummaryRow {
    fn from(r: &SimResult) -> Self {
        let sc = &r.scenario;
        Self {
            family: sc.family,
            method: r.method,
            n: sc.n,
            p: sc.p,
            rho: sc.rho,
            amplitude: sc.amplitude,
            sparsity: sc.sparsity,
            alpha: sc.alpha,
            replicates: r.per_replicate.len(),
            failures: r.failures,
            mean_fsr: r.mean_fsr,
            se_fsr: r.se_fsr,
            mean_tsr: r.mean_tsr,
            se_tsr: r.se_tsr,
            mean_selected: r.mean_selected(),
            empty_fraction: r.empty_fraction(),
            censoring_fraction: r.censoring_fraction(),
        }
    }
}

pub fn write_summary_csv<W: Write>(results: &[SimResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(SummaryRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and SE of achieved FSR/TSR keyed by method, for quick comparisons.
pub fn by_method(results: &[SimResult]) -> BTreeMap<Method, (f64, f64)> {
    let mut acc: BTreeMap<Method, Vec<(f64, f64)>> = BTreeMap::new();
    for r in results {
        acc.entry(r.method).or_default().push((r.mean_fsr, r.mean_tsr));
    }
    acc.into_iter()
        .map(|(m, v)| {
            let k = v.len() as f64;
            (m, (v.iter().map(|x| x.0).sum::<f64>() / k, v.iter().map(|x| x.1).sum::<f64>() / k))
        })
        .collect()
}
