//! Browser bindings for cspkit.
//!
//! Each exported function takes scalar inputs, runs entirely in memory, and
//! returns a JSON string ready to feed into canvas plots, so the wasm ABI
//! stays strings and numbers while the numerics stay in `cspkit`. The
//! `*_impl` functions carry the logic and are exercised by native tests;
//! the `#[wasm_bindgen]` wrappers only translate errors.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use cspkit::{
    build_bank, class_covariances, column_correlation, generate_synthetic, lda_fit, lda_predict,
    logvar_features, ratio1, ratio2, trace_ratio_max, Dataset, Error, FilterBank, MethodName,
    RegParam, Result, SpdMatrix, SynthParams,
};

fn into_js(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Even-indexed epochs for training, odd-indexed for testing. Synthetic
/// datasets interleave both classes across the parity split because epochs
/// are grouped per class, so both halves keep both labels.
fn split_even_odd(data: &Dataset) -> Result<(Dataset, Dataset)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, epoch) in data.epochs().iter().enumerate() {
        if i % 2 == 0 {
            train.push(epoch.clone());
        } else {
            test.push(epoch.clone());
        }
    }
    let rate = data.sample_rate_hz();
    Ok((Dataset::new(train, rate)?, Dataset::new(test, rate)?))
}

fn lda_accuracy(bank: &FilterBank, train: &Dataset, eval: &Dataset) -> Result<f64> {
    let features: Vec<_> = train
        .epochs()
        .iter()
        .map(|e| logvar_features(bank, e))
        .collect::<Result<_>>()?;
    let labels: Vec<u8> = train.epochs().iter().map(|e| e.label()).collect();
    let model = lda_fit(&features, &labels)?;
    let mut correct = 0usize;
    for epoch in eval.epochs() {
        if lda_predict(&model, &logvar_features(bank, epoch)?)? == epoch.label() {
            correct += 1;
        }
    }
    Ok(correct as f64 / eval.len() as f64)
}

fn synth(channels: u32, samples: u32, per_class: u32, noise_std: f64, seed: u32) -> SynthParams {
    SynthParams {
        channels: channels as usize,
        samples: samples as usize,
        epochs_per_class: per_class as usize,
        noise_std,
        seed: seed as u64,
        ..SynthParams::default()
    }
}

#[derive(Serialize)]
struct PointJson {
    x: f64,
    y: f64,
    label: u8,
}

#[derive(Serialize)]
struct FilterDemoJson {
    channels: usize,
    c_prime: usize,
    method: String,
    eigenvalues: Vec<f64>,
    ratio1: f64,
    ratio2: f64,
    correlation: f64,
    accuracy: f64,
    train: Vec<PointJson>,
    test: Vec<PointJson>,
}

#[allow(clippy::too_many_arguments)]
fn filter_demo_impl(
    channels: u32,
    samples: u32,
    per_class: u32,
    noise_std: f64,
    seed: u32,
    method: &str,
    c_prime: u32,
    lambda: f64,
) -> Result<String> {
    let method: MethodName = method.parse()?;
    let (data, _) = generate_synthetic(&synth(channels, samples, per_class, noise_std, seed))?;
    let (train, test) = split_even_odd(&data)?;
    let (s0, s1) = class_covariances(&train)?;
    let bank = build_bank(method, &s0, &s1, c_prime as usize, RegParam::new(lambda)?)?;

    let features: Vec<_> = train
        .epochs()
        .iter()
        .map(|e| logvar_features(&bank, e))
        .collect::<Result<_>>()?;
    let labels: Vec<u8> = train.epochs().iter().map(|e| e.label()).collect();
    let model = lda_fit(&features, &labels)?;
    let as_point = |f: &[f64], label: u8| PointJson {
        x: f[0],
        y: f[f.len() - 1],
        label,
    };
    let train_points = features
        .iter()
        .zip(&labels)
        .map(|(f, &l)| as_point(f, l))
        .collect();
    let mut test_points = Vec::with_capacity(test.len());
    let mut correct = 0usize;
    for epoch in test.epochs() {
        let f = logvar_features(&bank, epoch)?;
        if lda_predict(&model, &f)? == epoch.label() {
            correct += 1;
        }
        test_points.push(as_point(&f, epoch.label()));
    }

    Ok(json(&FilterDemoJson {
        channels: bank.channels(),
        c_prime: bank.c_prime(),
        method: method.to_string(),
        eigenvalues: bank.eigenvalues().to_vec(),
        ratio1: ratio1(&bank, &s0, &s1)?,
        ratio2: ratio2(&bank, &s0, &s1)?,
        correlation: column_correlation(&bank),
        accuracy: correct as f64 / test.len() as f64,
        train: train_points,
        test: test_points,
    }))
}

/// Fits the chosen filter method on half of a freshly generated synthetic
/// recording and reports log-variance features, objectives, and held-out
/// LDA accuracy as JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn filter_demo(
    channels: u32,
    samples: u32,
    per_class: u32,
    noise_std: f64,
    seed: u32,
    method: &str,
    c_prime: u32,
    lambda: f64,
) -> std::result::Result<String, JsError> {
    filter_demo_impl(
        channels, samples, per_class, noise_std, seed, method, c_prime, lambda,
    )
    .map_err(into_js)
}

#[derive(Serialize)]
struct LambdaSweepJson {
    grid: Vec<f64>,
    train_accuracy: Vec<f64>,
    test_accuracy: Vec<f64>,
    ratio1: Vec<f64>,
}

fn lambda_sweep_impl(
    channels: u32,
    samples: u32,
    per_class: u32,
    noise_std: f64,
    seed: u32,
    c_prime: u32,
) -> Result<String> {
    let (data, _) = generate_synthetic(&synth(channels, samples, per_class, noise_std, seed))?;
    let (train, test) = split_even_odd(&data)?;
    let (s0, s1) = class_covariances(&train)?;
    let grid = vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let mut train_accuracy = Vec::with_capacity(grid.len());
    let mut test_accuracy = Vec::with_capacity(grid.len());
    let mut ratios = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        let bank = build_bank(
            MethodName::Rcsp,
            &s0,
            &s1,
            c_prime as usize,
            RegParam::new(lambda)?,
        )?;
        train_accuracy.push(lda_accuracy(&bank, &train, &train)?);
        test_accuracy.push(lda_accuracy(&bank, &train, &test)?);
        ratios.push(ratio1(&bank, &s0, &s1)?);
    }
    Ok(json(&LambdaSweepJson {
        grid,
        train_accuracy,
        test_accuracy,
        ratio1: ratios,
    }))
}

/// Sweeps the RCSP shrinkage strength over a fixed grid on one synthetic
/// train/test split and reports accuracies and the training-set ratio1
/// objective per grid point.
#[wasm_bindgen]
pub fn lambda_sweep(
    channels: u32,
    samples: u32,
    per_class: u32,
    noise_std: f64,
    seed: u32,
    c_prime: u32,
) -> std::result::Result<String, JsError> {
    lambda_sweep_impl(channels, samples, per_class, noise_std, seed, c_prime).map_err(into_js)
}

#[derive(Serialize)]
struct TraceRatioJson {
    rho_trace: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
    random_best: f64,
}

fn random_spd(n: usize, rng: &mut impl Rng) -> SpdMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    SpdMatrix::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.1).expect("construction is SPD")
}

fn trace_ratio_demo_impl(dim: u32, k: u32, seed: u32) -> Result<String> {
    let dim = dim as usize;
    let k = k as usize;
    if !(2..=32).contains(&dim) {
        return Err(Error::BadConfig(format!(
            "dimension must be between 2 and 32, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let a = random_spd(dim, &mut rng);
    let b = random_spd(dim, &mut rng);
    let solved = trace_ratio_max(&a, &b, k, 1e-10, 200)?;
    let mut random_best = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let g = DMatrix::from_fn(dim, k, |_, _| rng.gen_range(-1.0..1.0));
        let q = g.qr().q();
        let num = (q.transpose() * a.matrix() * &q).trace();
        let den = (q.transpose() * b.matrix() * &q).trace();
        random_best = random_best.max(num / den);
    }
    Ok(json(&TraceRatioJson {
        rho_trace: solved.rho_trace.clone(),
        rho: solved.rho,
        iterations: solved.iterations,
        converged: solved.converged,
        random_best,
    }))
}

/// Maximizes the trace ratio of a seeded random SPD pair over C×k
/// orthonormal frames and reports the per-iteration objective together
/// with the best of 2000 random frames for reference.
#[wasm_bindgen]
pub fn trace_ratio_demo(dim: u32, k: u32, seed: u32) -> std::result::Result<String, JsError> {
    trace_ratio_demo_impl(dim, k, seed).map_err(into_js)
}
