//! Cyclic coordinate descent for the least-squares lasso
//!
//!   min_{b0, beta} (1/2n) sum_i (z_i - b0 - x_i^T beta)^2 + lambda ||beta||_1
//!
//! Full sweeps alternate with sweeps over the current active set until a full
//! sweep moves no coordinate by more than `tol`.

use ndarray::{Array1, Array2};

/// Treat |u| within this relative margin of lambda as inside the dead zone so
/// that rows at lambda_max come out exactly zero despite rounding.
const THRESHOLD_SLACK: f64 = 1e-10;

pub(crate) fn soft_threshold(u: f64, lambda: f64) -> f64 {
    if u.abs() <= lambda * (1.0 + THRESHOLD_SLACK) {
        0.0
    } else {
        u - lambda * u.signum()
    }
}

pub(crate) struct Wls<'a> {
    pub x: &'a Array2<f64>,
    pub z: &'a Array1<f64>,
    pub usable: &'a [bool],
    pub intercept: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct CdState {
    pub beta: Vec<f64>,
    pub b0: f64,
}

impl CdState {
    pub fn zeros(p: usize) -> Self {
        Self { beta: vec![0.0; p], b0: 0.0 }
    }
}

/// Sweep budget exhausted.
#[derive(Debug)]
pub(crate) struct SweepLimit(pub usize);

impl Wls<'_> {
    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    fn residual(&self, state: &CdState) -> Array1<f64> {
        let mut r = self.z - state.b0;
        for (j, &b) in state.beta.iter().enumerate() {
            if b != 0.0 {
                r.scaled_add(-b, &self.x.column(j));
            }
        }
        r
    }

    pub fn objective(&self, state: &CdState, lambda: f64) -> f64 {
        let r = self.residual(state);
        let loss: f64 = r.dot(&r) / (2.0 * self.n());
        loss + lambda * state.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Solve to tolerance from the warm start in `state`. When `trace` is
    /// given, the objective after every sweep is appended to it.
    pub fn solve(
        &self,
        lambda: f64,
        state: &mut CdState,
        tol: f64,
        max_sweeps: usize,
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<(), SweepLimit> {
        let n = self.n();
        let p = self.x.ncols();
        let xw: Vec<f64> = self.x.columns().into_iter().map(|col| col.dot(&col) / n).collect();
        let mut r = self.residual(state);

        let update_intercept = |state: &mut CdState, r: &mut Array1<f64>| -> f64 {
            if !self.intercept {
                return 0.0;
            }
            let delta = r.sum() / n;
            if delta != 0.0 {
                state.b0 += delta;
                r.mapv_inplace(|v| v - delta);
            }
            delta.abs()
        };

        let update = |j: usize, state: &mut CdState, r: &mut Array1<f64>| -> f64 {
            if !self.usable[j] || xw[j] <= 0.0 {
                return 0.0;
            }
            let col = self.x.column(j);
            let g = col.dot(r) / n;
            let old = state.beta[j];
            let new = soft_threshold(g + xw[j] * old, lambda) / xw[j];
            let delta = new - old;
            if delta != 0.0 {
                state.beta[j] = new;
                r.scaled_add(-delta, &col);
            }
            delta.abs()
        };

        let mut sweeps = 0;
        loop {
            // Full pass over every coordinate.
            let mut max_change = update_intercept(state, &mut r);
            for j in 0..p {
                max_change = max_change.max(update(j, state, &mut r));
            }
            sweeps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.objective(state, lambda));
            }
            if max_change < tol {
                return Ok(());
            }
            if sweeps >= max_sweeps {
                return Err(SweepLimit(sweeps));
            }
            // Iterate on the active set until it settles.
            let active: Vec<usize> = (0..p).filter(|&j| state.beta[j] != 0.0).collect();
            loop {
                let mut change = update_intercept(state, &mut r);
                for &j in &active {
                    change = change.max(update(j, state, &mut r));
                }
                sweeps += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(self.objective(state, lambda));
                }
                if change < tol {
                    break;
                }
                if sweeps >= max_sweeps {
                    return Err(SweepLimit(sweeps));
                }
            }
        }
    }
}
