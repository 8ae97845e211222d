use ndarray::{Array2, ArrayView2, Axis, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{FsrError, Result};

/// Columns whose (1/n) variance falls below this are treated as constant.
pub const CONSTANT_TOL: f64 = 1e-12;

/// An n×p design with column labels.
///
/// Values are held in column-major order since every solver in this crate
/// walks the design one column at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
    standardized: bool,
    constant_columns: Vec<usize>,
}

/// Column centers and (1/n) standard deviations removed by [`DesignMatrix::standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

pub(crate) fn to_column_major(values: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros(values.raw_dim().f());
    out.assign(&values);
    out
}

pub(crate) fn check_finite(values: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(FsrError::NonFiniteInput { row, col });
        }
    }
    Ok(())
}

impl DesignMatrix {
    pub fn new(values: Array2<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, p) = values.dim();
        if n < 2 {
            return Err(FsrError::DimensionError(format!("design needs at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(FsrError::DimensionError("design needs at least one column".into()));
        }
        if column_names.len() != p {
            return Err(FsrError::DimensionError(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        check_finite(values.view())?;
        let values = to_column_major(values.view());
        let constant_columns = constant_columns(values.view());
        Ok(Self {
            values,
            column_names,
            standardized: false,
            constant_columns,
        })
    }

    /// Build a design with generated labels `x1..xp`.
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let names = (1..=values.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(values, names)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Columns with zero variance; these are never penalized or selected.
    pub fn constant_columns(&self) -> &[usize] {
        &self.constant_columns
    }

    /// Center every column to mean 0 and scale to unit (1/n) variance.
    /// Constant columns are centered only.
    pub fn standardize(&self) -> (DesignMatrix, Standardization) {
        let n = self.n() as f64;
        let mut values = self.values.clone();
        let mut center = Vec::with_capacity(self.p());
        let mut scale = Vec::with_capacity(self.p());
        for mut col in values.axis_iter_mut(Axis(1)) {
            let mean = col.sum() / n;
            col.mapv_inplace(|v| v - mean);
            let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            let sd = if sd * sd <= CONSTANT_TOL { 1.0 } else { sd };
            col.mapv_inplace(|v| v / sd);
            center.push(mean);
            scale.push(sd);
        }
        let out = DesignMatrix {
            values,
            column_names: self.column_names.clone(),
            standardized: true,
            constant_columns: self.constant_columns.clone(),
        };
        (out, Standardization { center, scale })
    }

    /// Columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((self.n(), idx.len()).f());
        for (k, &j) in idx.iter().enumerate() {
            out.column_mut(k).assign(&self.values.column(j));
        }
        out
    }
}

fn constant_columns(values: ArrayView2<'_, f64>) -> Vec<usize> {
    let n = values.nrows() as f64;
    values
        .axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, col)| {
            let mean = col.sum() / n;
            col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n <= CONSTANT_TOL
        })
        .map(|(j, _)| j)
        .collect()
}
