//! Proximal Newton outer loop shared by the logistic and Cox families:
//! quadratic approximation of the loss in the coefficients, a lasso on that
//! quadratic solved by coordinate descent over a working set, then
//! backtracking on the true penalized objective.

use ndarray::{Array1, ArrayView1};

use super::cd::{soft_threshold, CdState};
use super::prepare::Prepared;
use crate::error::{FsrError, Result};

const MAX_OUTER: usize = 500;
const MAX_HALVINGS: usize = 40;
/// Diagonal curvature below this is treated as flat and the coordinate is skipped.
const FLAT: f64 = 1e-12;

/// Curvature operator `v -> (d^2 n·loss / d eta^2) v`.
pub(crate) type Curvature<'a> = Box<dyn Fn(&Array1<f64>) -> Array1<f64> + 'a>;

/// Smooth part of the objective, as a function of the linear predictor.
pub(crate) trait SmoothLoss {
    /// (1/n)-scaled loss.
    fn loss(&self, eta: &Array1<f64>) -> f64;

    /// Loss together with the score `g` (so d loss / d eta_i = -g_i / n) and
    /// the diagonal of the curvature `w` (d^2 loss / d eta_i^2 = w_i / n).
    fn expand(&self, eta: &Array1<f64>) -> (f64, Array1<f64>, Array1<f64>);

    /// Full curvature at `eta`. Diagonal unless overridden.
    fn curvature<'a>(&'a self, eta: &Array1<f64>) -> Curvature<'a> {
        let w = self.expand(eta).2;
        Box::new(move |v| &w * v)
    }
}

fn l1(beta: &[f64]) -> f64 {
    beta.iter().map(|b| b.abs()).sum()
}

pub(crate) struct NewtonSettings {
    pub intercept: bool,
    pub tol: f64,
    pub max_sweeps: usize,
}

/// Second-order model restricted to a working set of coordinates. Coordinate
/// `p` stands for the intercept.
struct Quadratic<'a> {
    prep: &'a Prepared,
    hess: &'a Curvature<'a>,
    ones: Array1<f64>,
    /// Curvature times each coordinate's column, filled on demand.
    products: Vec<Option<Array1<f64>>>,
    work: Vec<usize>,
    /// Row-major k x k block of the coefficient Hessian over `work`.
    h: Vec<f64>,
}

impl<'a> Quadratic<'a> {
    fn column(&self, c: usize) -> ArrayView1<'_, f64> {
        if c == self.prep.p() {
            self.ones.view()
        } else {
            self.prep.x.column(c)
        }
    }

    fn rebuild(&mut self) {
        let n = self.prep.x.nrows() as f64;
        for &c in &self.work {
            if self.products[c].is_none() {
                self.products[c] = Some((self.hess)(&self.column(c).to_owned()));
            }
        }
        let k = self.work.len();
        self.h = vec![0.0; k * k];
        for a in 0..k {
            for b in a..k {
                let m = self.products[self.work[b]].as_ref().expect("filled above");
                let v = self.column(self.work[a]).dot(m) / n;
                self.h[a * k + b] = v;
                self.h[b * k + a] = v;
            }
        }
    }
}

pub(crate) fn prox_newton<L: SmoothLoss>(
    prep: &Prepared,
    loss: &L,
    lambda: f64,
    state: &mut CdState,
    settings: &NewtonSettings,
    lambda_index: usize,
) -> Result<()> {
    let n = prep.x.nrows() as f64;
    let p = prep.p();
    let threshold = lambda * (1.0 + 1e-10);
    let mut sweeps_used = 0;
    for _ in 0..MAX_OUTER {
        let eta = prep.linear_predictor(&state.beta, state.b0);
        let (value, score, _) = loss.expand(&eta);
        let objective = value + lambda * l1(&state.beta);
        let mut grad: Vec<f64> = prep.gradient(&score).iter().map(|g| -g).collect();
        grad.push(-score.sum() / n);

        let hess = loss.curvature(&eta);
        let mut quad = Quadratic {
            prep,
            hess: &hess,
            ones: Array1::ones(prep.x.nrows()),
            products: vec![None; p + 1],
            work: Vec::new(),
            h: Vec::new(),
        };
        quad.work = (0..p).filter(|&j| prep.usable[j] && (state.beta[j] != 0.0 || grad[j].abs() > threshold)).collect();
        if settings.intercept {
            quad.work.push(p);
        }

        let old = state.clone();
        let value_of = |s: &CdState, c: usize| if c == p { s.b0 } else { s.beta[c] };
        loop {
            quad.rebuild();
            let k = quad.work.len();
            let mut q: Vec<f64> = quad.work.iter().map(|&c| grad[c]).collect();
            for a in 0..k {
                let d = value_of(state, quad.work[a]) - value_of(&old, quad.work[a]);
                if d != 0.0 {
                    for b in 0..k {
                        q[b] += quad.h[b * k + a] * d;
                    }
                }
            }
            loop {
                let mut max_change: f64 = 0.0;
                for a in 0..k {
                    let hcc = quad.h[a * k + a];
                    if hcc <= FLAT {
                        continue;
                    }
                    let c = quad.work[a];
                    let cur = value_of(state, c);
                    let new = if c == p { cur - q[a] / hcc } else { soft_threshold(hcc * cur - q[a], lambda) / hcc };
                    let d = new - cur;
                    if d != 0.0 {
                        if c == p {
                            state.b0 = new;
                        } else {
                            state.beta[c] = new;
                        }
                        for b in 0..k {
                            q[b] += quad.h[b * k + a] * d;
                        }
                        max_change = max_change.max(d.abs());
                    }
                }
                sweeps_used += 1;
                if max_change < settings.tol {
                    break;
                }
                if sweeps_used >= settings.max_sweeps {
                    return Err(FsrError::NoConvergence { lambda_index, iterations: sweeps_used });
                }
            }

            // Coordinates outside the working set must stay at zero in the model.
            let mut step = Array1::zeros(prep.x.nrows());
            for &c in &quad.work {
                let d = value_of(state, c) - value_of(&old, c);
                if d != 0.0 {
                    step.scaled_add(d, &quad.column(c));
                }
            }
            let moved = hess(&step);
            let before = quad.work.len();
            for j in 0..p {
                if prep.usable[j] && !quad.work.contains(&j) {
                    let qj = grad[j] + prep.x.column(j).dot(&moved) / n;
                    if qj.abs() > threshold {
                        quad.work.push(j);
                    }
                }
            }
            if quad.work.len() == before {
                break;
            }
        }

        let candidate = state.clone();
        let eval = |s: &CdState| loss.loss(&prep.linear_predictor(&s.beta, s.b0)) + lambda * l1(&s.beta);
        let mut new_obj = eval(state);
        let slack = 1e-13 * objective.abs().max(1.0);
        let mut t = 1.0;
        let mut halvings = 0;
        while new_obj > objective + slack && halvings < MAX_HALVINGS {
            t *= 0.5;
            halvings += 1;
            for j in 0..p {
                state.beta[j] = old.beta[j] + t * (candidate.beta[j] - old.beta[j]);
            }
            state.b0 = old.b0 + t * (candidate.b0 - old.b0);
            new_obj = eval(state);
        }
        if new_obj > objective + slack {
            *state = old;
            return Ok(());
        }

        let change = state
            .beta
            .iter()
            .zip(&old.beta)
            .map(|(a, b)| (a - b).abs())
            .fold((state.b0 - old.b0).abs(), f64::max);
        if change < settings.tol {
            return Ok(());
        }
    }
    Err(FsrError::NoConvergence { lambda_index, iterations: sweeps_used })
}
