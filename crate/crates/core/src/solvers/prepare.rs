use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::design::{to_column_major, CONSTANT_TOL};

/// Design after centering/scaling, plus what is needed to map back.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub x: Array2<f64>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    /// False for constant columns, which are held at zero.
    pub usable: Vec<bool>,
}

impl Prepared {
    /// Centering happens whenever an intercept (or the Cox baseline) absorbs
    /// the column means; scaling uses the (1/n) second moment about that center.
    pub fn new(x: ArrayView2<'_, f64>, center: bool, standardize: bool) -> Self {
        let n = x.nrows() as f64;
        let mut xs = to_column_major(x);
        let p = xs.ncols();
        let mut centers = vec![0.0; p];
        let mut scales = vec![1.0; p];
        let mut usable = vec![true; p];
        for (j, mut col) in xs.axis_iter_mut(Axis(1)).enumerate() {
            let mean = col.sum() / n;
            let spread = if center {
                col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
            } else {
                col.iter().map(|v| v * v).sum::<f64>() / n
            };
            usable[j] = spread > CONSTANT_TOL;
            if center {
                col.mapv_inplace(|v| v - mean);
                centers[j] = mean;
            }
            if standardize {
                let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    col.mapv_inplace(|v| v / sd);
                    scales[j] = sd;
                }
            }
            if !usable[j] {
                col.fill(0.0);
            }
        }
        Self { x: xs, center: centers, scale: scales, usable }
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn to_original(&self, beta_std: &[f64], b0_std: f64) -> (Vec<f64>, f64) {
        let beta: Vec<f64> = beta_std
            .iter()
            .zip(&self.scale)
            .map(|(b, s)| if *b == 0.0 { 0.0 } else { b / s })
            .collect();
        let shift: f64 = beta.iter().zip(&self.center).map(|(b, c)| b * c).sum();
        (beta, b0_std - shift)
    }

    pub fn to_standardized(&self, beta: ArrayView1<'_, f64>, b0: f64) -> (Vec<f64>, f64) {
        let shift: f64 = beta.iter().zip(&self.center).map(|(b, c)| b * c).sum();
        let beta_std = beta.iter().zip(&self.scale).map(|(b, s)| b * s).collect();
        (beta_std, b0 + shift)
    }

    /// `b0 + X_std beta`.
    pub fn linear_predictor(&self, beta_std: &[f64], b0: f64) -> Array1<f64> {
        let mut eta = Array1::from_elem(self.x.nrows(), b0);
        for (j, &b) in beta_std.iter().enumerate() {
            if b != 0.0 {
                eta.scaled_add(b, &self.x.column(j));
            }
        }
        eta
    }

    /// (1/n) X_std^T v.
    pub fn gradient(&self, v: &Array1<f64>) -> Vec<f64> {
        let n = self.x.nrows() as f64;
        self.x.axis_iter(Axis(1)).map(|col| col.dot(v) / n).collect()
    }
}
