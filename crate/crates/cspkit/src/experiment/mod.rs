//! Experiment orchestration: repeated seeded train/test splits, per-split λ
//! cross-validation for the regularized methods, evaluation of every
//! method × classifier combination, and report aggregation.

mod report;

pub use report::{render_report, AccuracyRow, ExperimentReport, LambdaRow, ObjectiveRow};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{
    lda_fit, lda_predict, logvar_features, mdrm_fit, mdrm_fit_raw, mdrm_predict, mdrm_predict_raw,
};
use crate::covariance::{class_covariances, RegParam, SpdMatrix};
use crate::csp::{column_correlation, csp_approach2, ratio1, ratio2, rcsp, FilterBank};
use crate::data::{read_epo, Dataset};
use crate::stiefel::{rsm_filters, sm_filters};
use crate::{Error, Result};

/// Spatial-filter method selectable in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodName {
    #[serde(rename = "CSP", alias = "csp")]
    Csp,
    #[serde(rename = "SM", alias = "sm")]
    Sm,
    #[serde(rename = "RCSP", alias = "rcsp")]
    Rcsp,
    #[serde(rename = "RSM", alias = "rsm")]
    Rsm,
}

impl MethodName {
    pub const ALL: [MethodName; 4] = [
        MethodName::Csp,
        MethodName::Sm,
        MethodName::Rcsp,
        MethodName::Rsm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Csp => "CSP",
            MethodName::Sm => "SM",
            MethodName::Rcsp => "RCSP",
            MethodName::Rsm => "RSM",
        }
    }

    /// True for the methods that take a ridge weight λ.
    pub fn is_regularized(&self) -> bool {
        matches!(self, MethodName::Rcsp | MethodName::Rsm)
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CSP" => Ok(MethodName::Csp),
            "SM" => Ok(MethodName::Sm),
            "RCSP" => Ok(MethodName::Rcsp),
            "RSM" => Ok(MethodName::Rsm),
            other => Err(Error::BadConfig(format!(
                "unknown method {other:?}; expected one of CSP, SM, RCSP, RSM"
            ))),
        }
    }
}

/// Classifier applied on top of a filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierName {
    #[serde(rename = "LDA", alias = "lda")]
    Lda,
    #[serde(rename = "MDRM", alias = "mdrm")]
    Mdrm,
}

impl ClassifierName {
    pub const ALL: [ClassifierName; 2] = [ClassifierName::Lda, ClassifierName::Mdrm];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassifierName::Lda => "LDA",
            ClassifierName::Mdrm => "MDRM",
        }
    }
}

impl fmt::Display for ClassifierName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LDA" => Ok(ClassifierName::Lda),
            "MDRM" => Ok(ClassifierName::Mdrm),
            other => Err(Error::BadConfig(format!(
                "unknown classifier {other:?}; expected LDA or MDRM"
            ))),
        }
    }
}

/// Full experiment description; the JSON config file mirrors these field
/// names exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    #[serde(default = "default_c_prime")]
    pub c_prime: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierName>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// When set, MDRM runs on raw C×C trial covariances instead of the
    /// filtered C'×C' ones, making its accuracy independent of the method.
    #[serde(default)]
    pub mdrm_raw: bool,
}

fn default_c_prime() -> usize {
    6
}

fn default_methods() -> Vec<MethodName> {
    MethodName::ALL.to_vec()
}

fn default_classifiers() -> Vec<ClassifierName> {
    ClassifierName::ALL.to_vec()
}

fn default_repetitions() -> usize {
    30
}

fn default_train_fraction() -> f64 {
    0.5
}

fn default_lambda_grid() -> Vec<f64> {
    vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0]
}

fn default_cv_folds() -> usize {
    5
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset_path: PathBuf::new(),
            c_prime: default_c_prime(),
            methods: default_methods(),
            classifiers: default_classifiers(),
            repetitions: default_repetitions(),
            train_fraction: default_train_fraction(),
            lambda_grid: default_lambda_grid(),
            cv_folds: default_cv_folds(),
            seed: 0,
            mdrm_raw: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::BadConfig("repetitions must be at least 1".into()));
        }
        if !self.train_fraction.is_finite()
            || self.train_fraction <= 0.0
            || self.train_fraction >= 1.0
        {
            return Err(Error::BadConfig(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::BadConfig("lambda_grid must not be empty".into()));
        }
        for &l in &self.lambda_grid {
            RegParam::new(l)?;
        }
        if self.cv_folds < 2 {
            return Err(Error::BadConfig("cv_folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// Loads the dataset named by the config and runs the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = read_epo(&config.dataset_path)?;
    run_experiment_with(config, &dataset)
}

/// Runs the experiment on an already-loaded dataset.
///
/// Each repetition r draws a stratified split seeded with `seed ^ r`, fits
/// every requested method (cross-validating λ for RCSP/RSM), evaluates every
/// classifier on the held-out trials, and records Ratio1/Ratio2/correlation
/// diagnostics of the training-fit bank. Deterministic in the seed.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    dataset: &Dataset,
) -> Result<ExperimentReport> {
    config.validate()?;
    let (n0, n1) = dataset.class_counts();
    if n0 < 4 || n1 < 4 {
        return Err(Error::TooFewTrials(format!(
            "need at least 4 trials per label, got {n0} for label 0 and {n1} for label 1"
        )));
    }

    let pair_count = config.methods.len() * config.classifiers.len();
    let mut accuracies: Vec<Vec<f64>> = vec![Vec::new(); pair_count];
    let mut lambdas: Vec<Vec<f64>> = vec![Vec::new(); pair_count];
    let mut objectives: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); config.methods.len()];

    for r in 0..config.repetitions {
        let split_seed = config.seed ^ r as u64;
        let (train, test) = stratified_split(dataset, config.train_fraction, split_seed)?;
        let (s0, s1) = class_covariances(&train)?;

        for (mi, &method) in config.methods.iter().enumerate() {
            let mut diagnostic_bank: Option<FilterBank> = None;

            for (ci, &classifier) in config.classifiers.iter().enumerate() {
                let lambda = select_lambda(
                    &train,
                    config,
                    method,
                    classifier,
                    split_seed,
                )?;
                let bank = build_bank(method, &s0, &s1, config.c_prime, lambda)?;
                let accuracy = evaluate_bank(&bank, &train, &test, classifier, config.mdrm_raw)?;
                accuracies[mi * config.classifiers.len() + ci].push(accuracy);
                if method.is_regularized() {
                    lambdas[mi * config.classifiers.len() + ci].push(lambda.value());
                }
                if ci == 0 {
                    diagnostic_bank = Some(bank);
                }
            }

            let bank = match diagnostic_bank {
                Some(b) => b,
                // No classifiers requested: still report filter diagnostics,
                // selecting λ with LDA when the method needs one.
                None => {
                    let lambda =
                        select_lambda(&train, config, method, ClassifierName::Lda, split_seed)?;
                    build_bank(method, &s0, &s1, config.c_prime, lambda)?
                }
            };
            objectives[mi].push((
                ratio1(&bank, &s0, &s1)?,
                ratio2(&bank, &s0, &s1)?,
                column_correlation(&bank),
            ));
        }
    }

    Ok(report::assemble(config, &accuracies, &lambdas, &objectives))
}

fn select_lambda(
    train: &Dataset,
    config: &ExperimentConfig,
    method: MethodName,
    classifier: ClassifierName,
    seed: u64,
) -> Result<RegParam> {
    if !method.is_regularized() {
        return Ok(RegParam::ZERO);
    }
    crossval_lambda(
        train,
        &config.lambda_grid,
        config.cv_folds,
        method,
        classifier,
        config.c_prime,
        seed,
    )
}

/// Splits per label: shuffle that label's epoch indices with a ChaCha8 stream
/// seeded by `seed`, send the first ⌈fraction·N⌉ to the training set.
fn stratified_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for label in 0..2u8 {
        let mut indices: Vec<usize> = dataset
            .epochs()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label() == label)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(&mut rng);
        let n_train = (train_fraction * indices.len() as f64).ceil() as usize;
        if n_train < 2 {
            return Err(Error::TooFewTrials(format!(
                "label {label} gets only {n_train} training trial(s) at train_fraction {train_fraction}"
            )));
        }
        train_idx.extend_from_slice(&indices[..n_train]);
        test_idx.extend_from_slice(&indices[n_train..]);
    }
    if test_idx.is_empty() {
        return Err(Error::TooFewTrials(
            "train_fraction leaves no test trials".into(),
        ));
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| -> Result<Dataset> {
        Dataset::new(
            idx.iter().map(|&i| dataset.epochs()[i].clone()).collect(),
            dataset.sample_rate_hz(),
        )
    };
    Ok((pick(&train_idx)?, pick(&test_idx)?))
}

/// Selects λ by stratified k-fold cross-validation on the training set.
///
/// The grid is scanned in ascending order and the mean validation accuracy
/// must strictly improve to displace the incumbent, so ties resolve to the
/// smallest λ. A singleton grid is returned without running any folds.
pub fn crossval_lambda(
    train: &Dataset,
    grid: &[f64],
    folds: usize,
    method: MethodName,
    classifier: ClassifierName,
    c_prime: usize,
    seed: u64,
) -> Result<RegParam> {
    if grid.is_empty() {
        return Err(Error::BadConfig("λ grid must not be empty".into()));
    }
    if grid.len() == 1 {
        return RegParam::new(grid[0]);
    }
    if folds < 2 {
        return Err(Error::BadConfig(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    let mut sorted: Vec<f64> = grid.to_vec();
    for &l in &sorted {
        RegParam::new(l)?;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let (n0, n1) = train.class_counts();
    if n0 < folds || n1 < folds {
        return Err(Error::TooFewTrials(format!(
            "{folds}-fold cross-validation needs {folds} trials per label, got {n0} and {n1}"
        )));
    }

    // Stratified fold assignment: shuffle each label's indices, deal them
    // round-robin so every fold holds at least one trial per label.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; train.len()];
    for label in 0..2u8 {
        let mut indices: Vec<usize> = train
            .epochs()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label() == label)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(&mut rng);
        for (pos, &i) in indices.iter().enumerate() {
            fold_of[i] = pos % folds;
        }
    }

    let mut best_lambda = sorted[0];
    let mut best_score = f64::NEG_INFINITY;
    for &lambda in &sorted {
        let reg = RegParam::new(lambda)?;
        let mut score_sum = 0.0;
        for f in 0..folds {
            let mut fit_epochs = Vec::new();
            let mut val_epochs = Vec::new();
            for (i, e) in train.epochs().iter().enumerate() {
                if fold_of[i] == f {
                    val_epochs.push(e.clone());
                } else {
                    fit_epochs.push(e.clone());
                }
            }
            let fit = Dataset::new(fit_epochs, train.sample_rate_hz())?;
            let val = Dataset::new(val_epochs, train.sample_rate_hz())?;
            let (s0, s1) = class_covariances(&fit)?;
            let bank = build_bank(method, &s0, &s1, c_prime, reg)?;
            score_sum += evaluate_bank(&bank, &fit, &val, classifier, false)?;
        }
        let score = score_sum / folds as f64;
        if score > best_score {
            best_score = score;
            best_lambda = lambda;
        }
    }
    RegParam::new(best_lambda)
}

/// Fits one filter bank from a pair of class covariances; `lambda` is read
/// only by the regularized methods.
pub fn build_bank(
    method: MethodName,
    s0: &SpdMatrix,
    s1: &SpdMatrix,
    c_prime: usize,
    lambda: RegParam,
) -> Result<FilterBank> {
    match method {
        MethodName::Csp => csp_approach2(s0, s1, c_prime),
        MethodName::Sm => sm_filters(s0, s1, c_prime),
        MethodName::Rcsp => rcsp(s0, s1, c_prime, lambda),
        MethodName::Rsm => rsm_filters(s0, s1, c_prime, lambda),
    }
}

/// Fits the classifier on `train` and returns its accuracy on `test`.
fn evaluate_bank(
    bank: &FilterBank,
    train: &Dataset,
    test: &Dataset,
    classifier: ClassifierName,
    mdrm_raw: bool,
) -> Result<f64> {
    let correct = match classifier {
        ClassifierName::Lda => {
            let features: Vec<_> = train
                .epochs()
                .iter()
                .map(|e| logvar_features(bank, e))
                .collect::<Result<_>>()?;
            let labels: Vec<u8> = train.epochs().iter().map(|e| e.label()).collect();
            let model = lda_fit(&features, &labels)?;
            let mut correct = 0usize;
            for e in test.epochs() {
                if lda_predict(&model, &logvar_features(bank, e)?)? == e.label() {
                    correct += 1;
                }
            }
            correct
        }
        ClassifierName::Mdrm if mdrm_raw => {
            let model = mdrm_fit_raw(train)?;
            test.epochs()
                .iter()
                .map(|e| Ok(usize::from(mdrm_predict_raw(&model, e)? == e.label())))
                .sum::<Result<usize>>()?
        }
        ClassifierName::Mdrm => {
            let model = mdrm_fit(bank, train)?;
            test.epochs()
                .iter()
                .map(|e| Ok(usize::from(mdrm_predict(&model, bank, e)? == e.label())))
                .sum::<Result<usize>>()?
        }
    };
    Ok(correct as f64 / test.len() as f64)
}
