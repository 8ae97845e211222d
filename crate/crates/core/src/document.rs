//! JSON document holding a fitted path with its FSR labels.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{FsrError, Result};
use crate::fsr::{FsrConfig, FsrCurve, ScreeningMethod};
use crate::solvers::Family;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub column_names: Vec<String>,
    pub seed: u64,
    pub b_replicates: usize,
    pub screening: ScreeningMethod,
    pub use_permutation: bool,
    pub intercept: bool,
    pub screened_set: Vec<String>,
    /// Screening found nothing and pseudo-variables fell back to permuted rows.
    pub degraded: bool,
    pub truncated_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedModel {
    pub alpha: f64,
    pub lambda_index: Option<usize>,
    pub lambda: Option<f64>,
    /// Nonzero coefficients by column name.
    pub coefficients: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub lambdas: Vec<f64>,
    /// m rows of p coefficients on the original scale.
    pub coefficients: Vec<Vec<f64>>,
    pub intercepts: Option<Vec<f64>>,
    pub active_set_sizes: Vec<usize>,
    pub fsr_mean: Vec<f64>,
    /// B rows of m estimates.
    pub fsr_per_replicate: Vec<Vec<f64>>,
    pub selected: Vec<SelectedModel>,
}

/// Everything at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrSlice {
    pub lambda_index: usize,
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub intercept: Option<f64>,
    pub active_set: Vec<String>,
    pub fsr_mean: f64,
    pub fsr_min: f64,
    pub fsr_max: f64,
    pub fsr_sd: f64,
    pub fsr_per_replicate: Vec<f64>,
}

impl PathDocument {
    /// Assemble from an estimate on `x`. A truncated full-data path keeps only
    /// its fitted grid points.
    pub fn from_curve(curve: &FsrCurve, x: &DesignMatrix, cfg: &FsrConfig) -> Self {
        let names = x.column_names();
        let m = curve.path.len();
        let coefficients: Vec<Vec<f64>> = curve.path.coefs.rows().into_iter().map(|r| r.to_vec()).collect();
        let selected = curve
            .selected
            .iter()
            .map(|s| {
                let idx = s.lambda_index.map(|i| i.min(m.saturating_sub(1)));
                let coefficients = idx
                    .map(|i| {
                        curve.path.active_set_or_last(i).iter().map(|&j| (names[j].clone(), coefficients[i][j])).collect()
                    })
                    .unwrap_or_default();
                SelectedModel { alpha: s.alpha, lambda_index: idx, lambda: idx.map(|i| curve.path.lambdas[i]), coefficients }
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            metadata: Metadata {
                family: curve.path.family,
                n: x.n(),
                p: x.p(),
                column_names: names.to_vec(),
                seed: cfg.seed,
                b_replicates: cfg.b_replicates,
                screening: cfg.screening.clone(),
                use_permutation: cfg.use_permutation,
                intercept: cfg.fit.intercept && curve.path.family != Family::Cox,
                screened_set: curve.screening.a0_hat.iter().map(|&j| names[j].clone()).collect(),
                degraded: curve.degraded,
                truncated_replicates: curve.truncated_replicates,
            },
            lambdas: curve.path.lambdas.clone(),
            active_set_sizes: curve.path.active_sets.iter().map(Vec::len).collect(),
            intercepts: curve.path.intercepts.clone(),
            fsr_mean: curve.mean[..m].to_vec(),
            fsr_per_replicate: curve.per_replicate.rows().into_iter().map(|r| r.to_vec()[..m].to_vec()).collect(),
            coefficients,
            selected,
        }
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    /// Check that every per-lambda array has m entries and every row p.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FsrError::InvalidConfig(format!("path document: {m}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        let (m, p) = (self.m(), self.metadata.p);
        if self.metadata.column_names.len() != p {
            return bad(format!("{} column names for p = {p}", self.metadata.column_names.len()));
        }
        if self.coefficients.len() != m || self.coefficients.iter().any(|r| r.len() != p) {
            return bad("coefficient matrix does not match lambdas × p".into());
        }
        if self.active_set_sizes.len() != m || self.fsr_mean.len() != m {
            return bad("per-lambda arrays differ in length".into());
        }
        if self.intercepts.as_ref().is_some_and(|v| v.len() != m) {
            return bad("intercepts differ in length from lambdas".into());
        }
        if self.fsr_per_replicate.iter().any(|r| r.len() != m) {
            return bad("replicate rows differ in length from lambdas".into());
        }
        if self.selected.iter().any(|s| s.lambda_index.is_some_and(|i| i >= m)) {
            return bad("selected lambda index out of range".into());
        }
        Ok(())
    }

    pub fn slice(&self, i: usize) -> Option<FsrSlice> {
        if i >= self.m() {
            return None;
        }
        let reps: Vec<f64> = self.fsr_per_replicate.iter().map(|r| r[i]).collect();
        let k = reps.len() as f64;
        let mean = self.fsr_mean[i];
        let sd = if reps.len() > 1 {
            (reps.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        let coefs = &self.coefficients[i];
        Some(FsrSlice {
            lambda_index: i,
            lambda: self.lambdas[i],
            coefficients: coefs.clone(),
            intercept: self.intercepts.as_ref().map(|v| v[i]),
            active_set: (0..coefs.len())
                .filter(|&j| coefs[j] != 0.0)
                .map(|j| self.metadata.column_names[j].clone())
                .collect(),
            fsr_mean: mean,
            fsr_min: reps.iter().copied().fold(f64::INFINITY, f64::min).min(mean),
            fsr_max: reps.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(mean),
            fsr_sd: sd,
            fsr_per_replicate: reps,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PathDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsr::estimate_fsr;
    use crate::rng;
    use crate::solvers::Response;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn document() -> PathDocument {
        let mut r = rng::stream(1);
        let x = Array2::from_shape_fn((50, 4), |_| r.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..50).map(|i| 2.0 * x[[i, 1]] + r.sample::<f64, _>(StandardNormal)).collect();
        let x = DesignMatrix::from_array(x).unwrap();
        let cfg = FsrConfig { b_replicates: 3, lambda_count: 12, alpha_targets: vec![0.1, 0.3], ..FsrConfig::default() };
        let curve = estimate_fsr(x.view(), &Response::continuous(y).unwrap(), &cfg).unwrap();
        PathDocument::from_curve(&curve, &x, &cfg)
    }

    #[test]
    fn round_trips_through_json() {
        let doc = document();
        doc.validate().unwrap();
        let back = PathDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(doc, back);
        assert!(doc.to_json().unwrap().contains("\"schema_version\": 1"));
    }

    #[test]
    fn first_slice_is_the_null_model() {
        let doc = document();
        let s = doc.slice(0).unwrap();
        assert!(s.coefficients.iter().all(|&c| c == 0.0));
        assert!(s.active_set.is_empty());
        assert_eq!(s.fsr_mean, 0.0);
        assert!(doc.slice(doc.m()).is_none());
        let last = doc.slice(doc.m() - 1).unwrap();
        assert!(last.fsr_min <= last.fsr_mean && last.fsr_mean <= last.fsr_max);
        assert_eq!(last.fsr_per_replicate.len(), 3);
    }

    #[test]
    fn inconsistent_documents_are_rejected() {
        let mut doc = document();
        doc.fsr_mean.pop();
        assert!(doc.validate().is_err());
        let mut doc = document();
        doc.schema_version = 2;
        assert!(doc.validate().is_err());
    }
}
