//! Ground-truth synthetic generator for two-class spatial-filter benchmarks.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

use super::{Dataset, Epoch};

/// Nominal sampling rate stamped on generated datasets.
pub const SYNTH_SAMPLE_RATE_HZ: f64 = 100.0;

const MIXING_ATTEMPTS: usize = 1000;

/// Parameters of the forward model X = A·S + σ·E.
///
/// Source 1 has standard deviation `source_std_high` under class 0 and
/// `source_std_low` under class 1; source 2 swaps them; every other source
/// keeps `source_std_low` for both classes. A is a seeded random mixing
/// matrix rejection-sampled to condition number ≤ `mixing_condition_max`
/// (exactly the identity when that bound is 1). E is i.i.d. standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub channels: usize,
    pub samples: usize,
    pub epochs_per_class: usize,
    pub source_std_high: f64,
    pub source_std_low: f64,
    pub noise_std: f64,
    pub mixing_condition_max: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            channels: 8,
            samples: 500,
            epochs_per_class: 100,
            source_std_high: 3.0,
            source_std_low: 1.0,
            noise_std: 0.5,
            mixing_condition_max: 10.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        if self.channels < 2 {
            return Err(Error::TooFewChannels(self.channels));
        }
        let bad = |msg: &str| Err(Error::BadSynthParams(msg.into()));
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.epochs_per_class == 0 {
            return bad("epochs_per_class must be at least 1");
        }
        let (a, b) = (self.source_std_high, self.source_std_low);
        if !(a.is_finite() && b.is_finite()) || b <= 0.0 || a <= b {
            return bad("source stds must satisfy high > low > 0");
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return bad("noise_std must be nonnegative");
        }
        if !self.mixing_condition_max.is_finite() || self.mixing_condition_max < 1.0 {
            return bad("mixing_condition_max must be at least 1");
        }
        Ok(())
    }
}

/// Draws a labeled dataset from the forward model, together with the two
/// spatial filters that exactly recover sources 1 and 2.
///
/// Returns the dataset (all class-0 epochs first, then class 1) and a C×2
/// matrix whose columns are columns 1 and 2 of (A⁻¹)ᵀ, normalized to unit
/// length. Output is deterministic in `params.seed`, and every sample is
/// quantized to its nearest f32 so the in-memory dataset is value-identical
/// to its EPO1 serialization.
pub fn generate_synthetic(params: &SynthParams) -> Result<(Dataset, DMatrix<f64>)> {
    params.validate()?;
    let (c, t, n) = (params.channels, params.samples, params.epochs_per_class);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mixing = draw_mixing(c, params.mixing_condition_max, &mut rng)?;
    let inv_t = mixing
        .clone()
        .try_inverse()
        .ok_or(Error::SingularCovariance)?
        .transpose();
    let mut ground_truth = DMatrix::<f64>::zeros(c, 2);
    for j in 0..2 {
        let col = inv_t.column(j);
        ground_truth.set_column(j, &(col / col.norm()));
    }

    let mut epochs = Vec::with_capacity(2 * n);
    for class in 0..2u8 {
        for _ in 0..n {
            let mut sources = DMatrix::<f64>::zeros(c, t);
            for i in 0..c {
                let std = source_std(i, class, params);
                for j in 0..t {
                    let z: f64 = rng.sample(StandardNormal);
                    sources[(i, j)] = std * z;
                }
            }
            let mut x = &mixing * sources;
            if params.noise_std > 0.0 {
                for i in 0..c {
                    for j in 0..t {
                        let z: f64 = rng.sample(StandardNormal);
                        x[(i, j)] += params.noise_std * z;
                    }
                }
            }
            let x = x.map(|v| v as f32 as f64);
            epochs.push(Epoch::new(x, class)?);
        }
    }
    Ok((Dataset::new(epochs, SYNTH_SAMPLE_RATE_HZ)?, ground_truth))
}

fn source_std(source: usize, class: u8, p: &SynthParams) -> f64 {
    match (source, class) {
        (0, 0) | (1, 1) => p.source_std_high,
        _ => p.source_std_low,
    }
}

/// Seeded Gaussian mixing matrix with condition number ≤ kappa.
fn draw_mixing(c: usize, kappa: f64, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    if kappa == 1.0 {
        return Ok(DMatrix::identity(c, c));
    }
    for _ in 0..MIXING_ATTEMPTS {
        let mut a = DMatrix::<f64>::zeros(c, c);
        for j in 0..c {
            for i in 0..c {
                a[(i, j)] = rng.sample(StandardNormal);
            }
        }
        if condition_number(&a)? <= kappa {
            return Ok(a);
        }
    }
    Err(Error::MixingRejected {
        kappa,
        attempts: MIXING_ATTEMPTS,
    })
}

/// Ratio of extreme singular values, via the spectrum of AᵀA.
fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    let gram = a.transpose() * a;
    let eig = crate::spdgeom::sym_eig_raw(&gram)?;
    let max = eig.values[0];
    let min = *eig.values.last().unwrap();
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((max / min).sqrt())
}
