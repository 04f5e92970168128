//! Classifiers applied after spatial filtering: log-variance features with
//! binary LDA, and minimum distance to Riemannian mean (MDRM) on trial
//! covariances.

use nalgebra::{DMatrix, DVector};

use crate::covariance::SpdMatrix;
use crate::csp::FilterBank;
use crate::data::{Dataset, Epoch};
use crate::spdgeom::{
    airm_distance, riemannian_mean, RIEMANNIAN_MEAN_MAX_ITER, RIEMANNIAN_MEAN_TOL,
};
use crate::{Error, Result};

/// Per-trial feature vector, one component per spatial filter.
pub type FeatureVector = Vec<f64>;

const MDRM_RIDGE: f64 = 1e-9;

/// Log-variance features: fⱼ = log(wⱼᵀ·X·Xᵀ·wⱼ) for each filter column wⱼ.
pub fn logvar_features(bank: &FilterBank, epoch: &Epoch) -> Result<FeatureVector> {
    if bank.channels() != epoch.channels() {
        return Err(Error::DimensionMismatch {
            rows_a: bank.channels(),
            cols_a: bank.c_prime(),
            rows_b: epoch.channels(),
            cols_b: epoch.sample_count(),
        });
    }
    let projected = bank.filters().transpose() * epoch.samples();
    let mut features = Vec::with_capacity(bank.c_prime());
    for j in 0..bank.c_prime() {
        let var: f64 = projected.row(j).iter().map(|v| v * v).sum();
        if var <= 0.0 || !var.is_finite() {
            return Err(Error::DegenerateFilter);
        }
        features.push(var.ln());
    }
    Ok(features)
}

/// Binary linear discriminant: score(f) = weightᵀf + bias, label 1 when the
/// score is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    weight: DVector<f64>,
    bias: f64,
}

impl LdaModel {
    pub fn weight(&self) -> &[f64] {
        self.weight.as_slice()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

/// Fits LDA with a pooled within-class covariance and a trace-scaled ridge.
///
/// weight = (S_w + εI)⁻¹(μ₁−μ₀) with ε = 1e−6·trace(S_w)/d, where S_w is the
/// pooled (unbiased) within-class covariance; bias places the boundary at
/// the midpoint of the class means.
pub fn lda_fit(features: &[FeatureVector], labels: &[u8]) -> Result<LdaModel> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            rows_a: features.len(),
            cols_a: 1,
            rows_b: labels.len(),
            cols_b: 1,
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::BadLabel(bad));
    }
    let d = features.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::TooFewTrials("no feature vectors to fit".into()));
    }
    for f in features {
        if f.len() != d {
            return Err(Error::DimensionMismatch {
                rows_a: d,
                cols_a: 1,
                rows_b: f.len(),
                cols_b: 1,
            });
        }
    }
    let counts = [
        labels.iter().filter(|&&l| l == 0).count(),
        labels.iter().filter(|&&l| l == 1).count(),
    ];
    for (c, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::MissingClass(c as u8));
        }
        if n < 2 {
            return Err(Error::TooFewTrials(format!(
                "label {c} has {n} sample(s); LDA needs at least 2 per label"
            )));
        }
    }

    let mut means = [DVector::<f64>::zeros(d), DVector::<f64>::zeros(d)];
    for (f, &l) in features.iter().zip(labels) {
        means[l as usize] += DVector::from_column_slice(f);
    }
    for (c, m) in means.iter_mut().enumerate() {
        *m /= counts[c] as f64;
    }

    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for (f, &l) in features.iter().zip(labels) {
        let centered = DVector::from_column_slice(f) - &means[l as usize];
        scatter += &centered * centered.transpose();
    }
    let pooled = scatter / (features.len() - 2) as f64;
    let epsilon = 1e-6 * pooled.trace() / d as f64;
    let ridged = pooled + DMatrix::identity(d, d) * epsilon;
    let weight = ridged
        .lu()
        .solve(&(&means[1] - &means[0]))
        .ok_or(Error::SingularCovariance)?;
    let bias = -0.5 * weight.dot(&(&means[0] + &means[1]));
    Ok(LdaModel { weight, bias })
}

/// Applies the LDA decision rule; a score of exactly zero maps to label 1.
pub fn lda_predict(model: &LdaModel, features: &FeatureVector) -> Result<u8> {
    if features.len() != model.weight.len() {
        return Err(Error::DimensionMismatch {
            rows_a: model.weight.len(),
            cols_a: 1,
            rows_b: features.len(),
            cols_b: 1,
        });
    }
    let score = model.weight.dot(&DVector::from_column_slice(features)) + model.bias;
    Ok(u8::from(score >= 0.0))
}

/// Riemannian class means of trial covariances.
#[derive(Debug, Clone)]
pub struct MdrmModel {
    mean0: SpdMatrix,
    mean1: SpdMatrix,
}

impl MdrmModel {
    pub fn mean(&self, label: u8) -> &SpdMatrix {
        if label == 0 {
            &self.mean0
        } else {
            &self.mean1
        }
    }
}

/// Covariance of the spatially filtered trial: (WᵀX)(WᵀX)ᵀ/T plus a
/// trace-scaled ridge of 1e−9 to keep log maps of near-singular trials alive.
fn filtered_covariance(bank: &FilterBank, epoch: &Epoch) -> Result<SpdMatrix> {
    let projected = bank.filters().transpose() * epoch.samples();
    covariance_of(&projected)
}

fn raw_covariance(epoch: &Epoch) -> Result<SpdMatrix> {
    covariance_of(epoch.samples())
}

fn covariance_of(signal: &DMatrix<f64>) -> Result<SpdMatrix> {
    let t = signal.ncols() as f64;
    let mut cov = signal * signal.transpose() / t;
    let ridge = MDRM_RIDGE * cov.trace() / cov.nrows() as f64;
    for i in 0..cov.nrows() {
        cov[(i, i)] += ridge;
    }
    SpdMatrix::new(cov)
}

/// Fits MDRM on filtered-trial covariances: one Riemannian mean per class.
pub fn mdrm_fit(bank: &FilterBank, dataset: &Dataset) -> Result<MdrmModel> {
    if bank.channels() != dataset.channel_count() {
        return Err(Error::DimensionMismatch {
            rows_a: bank.channels(),
            cols_a: bank.c_prime(),
            rows_b: dataset.channel_count(),
            cols_b: dataset.sample_count(),
        });
    }
    fit_means(dataset, |e| filtered_covariance(bank, e))
}

/// Fits MDRM on raw C×C trial covariances, bypassing spatial filtering.
pub fn mdrm_fit_raw(dataset: &Dataset) -> Result<MdrmModel> {
    fit_means(dataset, raw_covariance)
}

fn fit_means<F>(dataset: &Dataset, cov: F) -> Result<MdrmModel>
where
    F: Fn(&Epoch) -> Result<SpdMatrix>,
{
    let mut per_class: [Vec<SpdMatrix>; 2] = [Vec::new(), Vec::new()];
    for e in dataset.epochs() {
        per_class[e.label() as usize].push(cov(e)?);
    }
    for (c, trials) in per_class.iter().enumerate() {
        if trials.is_empty() {
            return Err(Error::MissingClass(c as u8));
        }
    }
    let mean0 = riemannian_mean(&per_class[0], RIEMANNIAN_MEAN_TOL, RIEMANNIAN_MEAN_MAX_ITER)?;
    let mean1 = riemannian_mean(&per_class[1], RIEMANNIAN_MEAN_TOL, RIEMANNIAN_MEAN_MAX_ITER)?;
    Ok(MdrmModel {
        mean0: mean0.mean,
        mean1: mean1.mean,
    })
}

/// Assigns the class whose Riemannian mean is nearest to the filtered-trial
/// covariance; exact ties go to label 0.
pub fn mdrm_predict(model: &MdrmModel, bank: &FilterBank, epoch: &Epoch) -> Result<u8> {
    nearest_mean(model, &filtered_covariance(bank, epoch)?)
}

/// Raw-covariance counterpart of [`mdrm_predict`].
pub fn mdrm_predict_raw(model: &MdrmModel, epoch: &Epoch) -> Result<u8> {
    nearest_mean(model, &raw_covariance(epoch)?)
}

fn nearest_mean(model: &MdrmModel, cov: &SpdMatrix) -> Result<u8> {
    let d0 = airm_distance(cov, &model.mean0)?;
    let d1 = airm_distance(cov, &model.mean1)?;
    Ok(u8::from(d1 < d0))
}
