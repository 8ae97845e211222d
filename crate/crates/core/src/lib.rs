//! False selection rate estimation for Lasso solution paths.
//!
//! Pseudo-variables that reproduce the Gram matrix of the unscreened columns
//! are appended to a screened set of real predictors; the share of selections
//! that land on pseudo (or row-permuted) columns estimates the false
//! selection rate at every point of the path. Linear, logistic and Cox
//! Lasso solvers, screening procedures, a simulation harness, and CSV/JSON
//! I/O are included.

pub mod design;
pub mod document;
pub mod error;
pub mod fsr;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod screening;
pub mod simgen;
pub mod solvers;

pub use design::{DesignMatrix, Standardization};
pub use document::{FsrSlice, PathDocument, SelectedModel};
pub use error::{FsrError, Result};
pub use fsr::{estimate_fsr, fsr_replicate, AlphaSelection, FsrConfig, FsrCurve, ReplicateEstimate, ScreeningMethod};
pub use io::{read_dataset, read_dataset_file, Dataset, ResponseSpec};
pub use linalg::{generate_pseudo, haar_orthonormal, null_space_basis, permuted_copy, qr_pivoted, PseudoGenerator, PseudoMatrix, QrFactors};
pub use metrics::{fsr_of, tsr_of, SelectionOutcome};
pub use screening::{screen_cv_lasso, screen_pseudo, PseudoScreenConfig, ScreenResult};
pub use simgen::{run_scenario, Method, Scenario, ScenarioGrid, SimResult};
pub use solvers::{fit_path, Family, FitOptions, LassoPath, Response};
