//! # cspkit — common spatial pattern filtering for binary EEG classification
//!
//! Spatial filters project multichannel EEG onto a few discriminative virtual
//! channels before classification. This crate implements the classical common
//! spatial pattern (CSP) filters by two equivalent routes, a trace-ratio
//! variant that keeps each half of the filter bank orthonormal, ridge
//! regularization for both, and the downstream machinery needed to compare
//! them: log-variance features with LDA, minimum distance to Riemannian mean
//! (MDRM), and a repeated-split experiment harness.
//!
//! ## Pipeline overview
//!
//! ```text
//! file.epo1  ──►  Dataset (labeled C×T epochs)
//!    │  extract_window / bandpass_fir
//!    ▼
//! class_covariances ──► (Σ₀, Σ₁)
//!    │  csp_approach1 / csp_approach2 / rcsp / sm_filters / rsm_filters
//!    ▼
//! FilterBank W (C×C')
//!    │  logvar_features + LDA          │  filtered-trial covariances + MDRM
//!    ▼                                 ▼
//! labels                             labels
//! ```
//!
//! The [`experiment`] module drives the full comparison protocol (repeated
//! stratified 50/50 splits, per-split λ cross-validation for the regularized
//! methods) and renders JSON/CSV reports.
//!
//! All randomness is seeded and all eigensolvers use a fixed sign convention,
//! so every result in this crate is reproducible bit for bit.

pub mod classify;
pub mod covariance;
pub mod csp;
pub mod data;
mod error;
pub mod experiment;
pub mod spdgeom;
pub mod stiefel;

pub use error::{Error, ErrorCategory, Result};

pub use classify::{
    lda_fit, lda_predict, logvar_features, mdrm_fit, mdrm_fit_raw, mdrm_predict,
    mdrm_predict_raw, FeatureVector, LdaModel, MdrmModel,
};
pub use covariance::{class_covariances, composite, regularize, RegParam, SpdMatrix};
pub use csp::{
    column_correlation, csp_approach1, csp_approach2, ratio1, ratio2, rcsp, FilterBank,
    FilterMethod,
};
pub use data::{
    bandpass_fir, extract_window, generate_synthetic, read_epo, write_epo, Dataset, Epoch,
    SynthParams, SYNTH_SAMPLE_RATE_HZ,
};
pub use experiment::{
    build_bank, crossval_lambda, render_report, run_experiment, run_experiment_with, AccuracyRow,
    ClassifierName, ExperimentConfig, ExperimentReport, LambdaRow, MethodName, ObjectiveRow,
};
pub use stiefel::{rsm_filters, sm_filters, trace_ratio_max, TraceRatioResult};
