//! Transfer learning for Fisher's linear discriminant.
//!
//! A data-poor target task is classified with a convex combination of its own
//! estimated discriminant direction and the mean direction of many source
//! tasks. The mixing coefficient is chosen by minimizing a Monte-Carlo
//! estimate of the expected 0-1 risk under the asymptotic sampling
//! distribution of both directions.
//!
//! * [`sampling`]: task mixtures, multivariate normal and von Mises-Fisher draws
//! * [`fld`]: fitting the discriminant and the assumption-matching transform
//! * [`transfer`]: source summaries, risk, and coefficient selection
//! * [`simlab`]: simulation studies on synthetic tasks
//! * [`dataset`]: session files, windowed splits, evaluation and signed-rank tests
//! * [`cli`]: the `fld-transfer` command-line frontend

pub mod cli;
pub mod dataset;
pub mod error;
pub mod fld;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sampling;
pub mod simlab;
pub mod special;
pub mod transfer;

pub use error::{Error, Result};
pub use fld::{
    estimate_class_stats, fit_assumption_transform, fit_fld, predict, projection_covariance,
    AssumptionTransform, CovarianceModel, FldFit, ProjectionVector,
};
pub use linalg::{Matrix, Vector};
pub use metrics::balanced_accuracy;
pub use rng::RngStream;
pub use sampling::{sample_mvn, sample_task, sample_vmf, Label, LabeledSample, TaskDistribution, VmfModel};
pub use transfer::{
    closed_form_risk, combine, expected_risk_mc, optimal_alpha, oracle_alpha, reparameterize_alpha,
    summarize_sources, AlphaGrid, RiskCurve, SourceSummary,
};
