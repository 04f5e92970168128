//! Report aggregation and emission: JSON with the full structure, CSVs with
//! stable columns at six significant digits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

use super::{ClassifierName, ExperimentConfig, MethodName};

/// Accuracy of one method × classifier pair across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub method: MethodName,
    pub classifier: ClassifierName,
    pub mean: f64,
    pub std: f64,
}

/// Training-set filter diagnostics of one method across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRow {
    pub method: MethodName,
    pub ratio1_mean: f64,
    pub ratio2_mean: f64,
    pub correlation_mean: f64,
}

/// Cross-validated λ chosen at every repetition for a regularized method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub method: MethodName,
    pub classifier: ClassifierName,
    pub values: Vec<f64>,
}

/// Aggregated outcome of [`run_experiment`](super::run_experiment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub repetitions: usize,
    pub c_prime: usize,
    pub seed: u64,
    pub accuracy: Vec<AccuracyRow>,
    pub objectives: Vec<ObjectiveRow>,
    pub lambdas: Vec<LambdaRow>,
}

pub(super) fn assemble(
    config: &ExperimentConfig,
    accuracies: &[Vec<f64>],
    lambdas: &[Vec<f64>],
    objectives: &[Vec<(f64, f64, f64)>],
) -> ExperimentReport {
    let mut accuracy_rows = Vec::new();
    let mut lambda_rows = Vec::new();
    for (mi, &method) in config.methods.iter().enumerate() {
        for (ci, &classifier) in config.classifiers.iter().enumerate() {
            let samples = &accuracies[mi * config.classifiers.len() + ci];
            let (mean, std) = mean_std(samples);
            accuracy_rows.push(AccuracyRow {
                method,
                classifier,
                mean,
                std,
            });
            if method.is_regularized() {
                lambda_rows.push(LambdaRow {
                    method,
                    classifier,
                    values: lambdas[mi * config.classifiers.len() + ci].clone(),
                });
            }
        }
    }
    let objective_rows = config
        .methods
        .iter()
        .zip(objectives)
        .map(|(&method, samples)| ObjectiveRow {
            method,
            ratio1_mean: mean_of(samples.iter().map(|s| s.0)),
            ratio2_mean: mean_of(samples.iter().map(|s| s.1)),
            correlation_mean: mean_of(samples.iter().map(|s| s.2)),
        })
        .collect();
    ExperimentReport {
        repetitions: config.repetitions,
        c_prime: config.c_prime,
        seed: config.seed,
        accuracy: accuracy_rows,
        objectives: objective_rows,
        lambdas: lambda_rows,
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        return 0.0;
    }
    collected.iter().sum::<f64>() / collected.len() as f64
}

/// Mean and sample standard deviation (n−1 divisor; 0 for a single sample).
fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (samples.len() - 1) as f64;
    (mean, var.sqrt())
}

/// Formats with six significant digits: fixed-point in a moderate range,
/// scientific outside it, bare "0" for zero.
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `report.json` plus `accuracy.csv`, `ratios.csv`, and
/// `correlations.csv` into `out_dir`, creating the directory if needed.
///
/// The JSON carries full float precision; the CSVs round to six significant
/// digits with a fixed column order. Output is byte-deterministic in the
/// report contents.
pub fn render_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(out_dir.join("report.json"), json)?;

    let mut accuracy = String::from("method,classifier,mean,std\n");
    for row in &report.accuracy {
        accuracy.push_str(&format!(
            "{},{},{},{}\n",
            row.method,
            row.classifier,
            sig6(row.mean),
            sig6(row.std)
        ));
    }
    fs::write(out_dir.join("accuracy.csv"), accuracy)?;

    let mut ratios = String::from("method,ratio1_mean,ratio2_mean\n");
    for row in &report.objectives {
        ratios.push_str(&format!(
            "{},{},{}\n",
            row.method,
            sig6(row.ratio1_mean),
            sig6(row.ratio2_mean)
        ));
    }
    fs::write(out_dir.join("ratios.csv"), ratios)?;

    let mut correlations = String::from("method,correlation_mean\n");
    for row in &report.objectives {
        correlations.push_str(&format!(
            "{},{}\n",
            row.method,
            sig6(row.correlation_mean)
        ));
    }
    fs::write(out_dir.join("correlations.csv"), correlations)?;

    Ok(())
}
