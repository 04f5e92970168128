//! Class mean covariance estimation and ridge regularization.
//!
//! Covariances follow the estimator Σ_c = (1/N_c) Σᵢ XᵢXᵢᵀ over the epochs of
//! each class: no mean subtraction, no division by the sample count, and no
//! per-trial trace normalization. Band-passed EEG is approximately zero-mean,
//! and keeping the raw quadratic form makes the Ratio1/Ratio2 diagnostics
//! comparable across methods.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::{Error, Result};

/// Relative tolerance for the symmetry check on construction.
pub const SYMMETRY_RTOL: f64 = 1e-10;

/// A symmetric positive semi-definite matrix.
///
/// Construction symmetrizes the input as (M + Mᵀ)/2 after checking that the
/// asymmetry is round-off sized, so downstream eigensolvers can rely on exact
/// symmetry. Positive semi-definiteness is a contract of the producing
/// operations rather than a per-construction eigenvalue check.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    entries: DMatrix<f64>,
}

impl SpdMatrix {
    /// Wrap a square symmetric matrix, symmetrizing away round-off asymmetry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                rows_a: m.nrows(),
                cols_a: m.ncols(),
                rows_b: m.ncols(),
                cols_b: m.nrows(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteMatrix);
        }
        let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let tol = SYMMETRY_RTOL * scale.max(1e-300);
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            entries: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

impl std::ops::Index<(usize, usize)> for SpdMatrix {
    type Output = f64;
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.entries[ij]
    }
}

/// Dimensionless ridge strength λ ≥ 0.
///
/// Applied scale-normalized: `regularize` adds λ·(trace(Σ)/C)·I, so a λ grid
/// carries across datasets with different units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegParam(f64);

impl RegParam {
    pub const ZERO: RegParam = RegParam(0.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::NegativeLambda(lambda));
        }
        Ok(Self(lambda))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Class mean covariances (Σ₀, Σ₁) of a labeled dataset.
///
/// Σ_c = (1/N_c) Σᵢ X_{c,i} X_{c,i}ᵀ, accumulated in dataset order and
/// symmetrized once at the end.
pub fn class_covariances(dataset: &Dataset) -> Result<(SpdMatrix, SpdMatrix)> {
    let c = dataset.channel_count();
    let mut acc = [DMatrix::<f64>::zeros(c, c), DMatrix::<f64>::zeros(c, c)];
    let mut counts = [0usize, 0usize];
    for epoch in dataset.epochs() {
        let x = epoch.samples();
        let label = epoch.label() as usize;
        acc[label] += x * x.transpose();
        counts[label] += 1;
    }
    for label in 0..2 {
        if counts[label] == 0 {
            return Err(Error::MissingClass(label as u8));
        }
        acc[label] /= counts[label] as f64;
    }
    let [a0, a1] = acc;
    Ok((SpdMatrix::new(a0)?, SpdMatrix::new(a1)?))
}

/// Ridge-regularize: Σ + λ·s·I with s = trace(Σ)/C.
///
/// λ = 0 returns the input unchanged.
pub fn regularize(sigma: &SpdMatrix, reg: RegParam) -> SpdMatrix {
    if reg.value() == 0.0 {
        return sigma.clone();
    }
    let c = sigma.dim();
    let scale = sigma.trace() / c as f64;
    let mut m = sigma.matrix().clone();
    for i in 0..c {
        m[(i, i)] += reg.value() * scale;
    }
    SpdMatrix { entries: m }
}

/// Composite covariance Σ = Σ₀ + Σ₁.
pub fn composite(s0: &SpdMatrix, s1: &SpdMatrix) -> Result<SpdMatrix> {
    if s0.dim() != s1.dim() {
        return Err(Error::DimensionMismatch {
            rows_a: s0.dim(),
            cols_a: s0.dim(),
            rows_b: s1.dim(),
            cols_b: s1.dim(),
        });
    }
    Ok(SpdMatrix {
        entries: s0.matrix() + s1.matrix(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Epoch};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dataset_from(epochs: Vec<Epoch>) -> Dataset {
        Dataset::new(epochs, 100.0).unwrap()
    }

    #[test]
    fn identity_and_diagonal_epochs() {
        let e0 = Epoch::new(DMatrix::identity(2, 2), 0).unwrap();
        let e1 = Epoch::new(DMatrix::from_diagonal(&nalgebra::dvector![2.0, 1.0]), 1).unwrap();
        let (s0, s1) = class_covariances(&dataset_from(vec![e0, e1])).unwrap();
        assert_eq!(s0.matrix(), &DMatrix::identity(2, 2));
        assert_eq!(s1[(0, 0)], 4.0);
        assert_eq!(s1[(1, 1)], 1.0);
        assert_eq!(s1[(0, 1)], 0.0);
    }

    #[test]
    fn duplicate_epochs_average_to_single_value() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let one = dataset_from(vec![
            Epoch::new(x.clone(), 0).unwrap(),
            Epoch::new(x.clone(), 1).unwrap(),
        ]);
        let two = dataset_from(vec![
            Epoch::new(x.clone(), 0).unwrap(),
            Epoch::new(x.clone(), 0).unwrap(),
            Epoch::new(x.clone(), 1).unwrap(),
        ]);
        let (a, _) = class_covariances(&one).unwrap();
        let (b, _) = class_covariances(&two).unwrap();
        assert_relative_eq!(a.matrix(), b.matrix(), max_relative = 1e-15);
    }

    // Brute-force oracle: accumulate entry products with plain loops, no
    // matrix library on the checked path.
    #[allow(clippy::needless_range_loop)]
    fn oracle_covariance(epochs: &[(Vec<Vec<f64>>, u8)], class: u8) -> Vec<Vec<f64>> {
        let c = epochs[0].0.len();
        let mut acc = vec![vec![0.0; c]; c];
        let mut n = 0usize;
        for (x, label) in epochs {
            if *label != class {
                continue;
            }
            n += 1;
            let t = x[0].len();
            for i in 0..c {
                for j in 0..c {
                    for k in 0..t {
                        acc[i][j] += x[i][k] * x[j][k];
                    }
                }
            }
        }
        for row in &mut acc {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        acc
    }

    #[test]
    fn random_epochs_match_accumulate_and_divide_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (c, t) = (4, 8);
        let mut raw = Vec::new();
        let mut epochs = Vec::new();
        for label in [0u8, 0, 0, 1, 1, 1] {
            let x: Vec<Vec<f64>> = (0..c)
                .map(|_| (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let flat: Vec<f64> = x.iter().flatten().copied().collect();
            epochs.push(Epoch::new(DMatrix::from_row_slice(c, t, &flat), label).unwrap());
            raw.push((x, label));
        }
        let (s0, s1) = class_covariances(&dataset_from(epochs)).unwrap();
        for (sigma, class) in [(&s0, 0u8), (&s1, 1u8)] {
            let expect = oracle_covariance(&raw, class);
            for i in 0..c {
                for j in 0..c {
                    assert_relative_eq!(sigma[(i, j)], expect[i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn missing_class_is_an_error() {
        let e0 = Epoch::new(DMatrix::identity(2, 2), 0).unwrap();
        let err = class_covariances(&dataset_from(vec![e0])).unwrap_err();
        assert!(matches!(err, Error::MissingClass(1)));
    }

    #[test]
    fn scaling_epochs_scales_covariance_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(3, 10, |_, _| rng.gen_range(-1.0..1.0));
        let alpha = 2.5;
        let base = dataset_from(vec![
            Epoch::new(x.clone(), 0).unwrap(),
            Epoch::new(x.clone(), 1).unwrap(),
        ]);
        let scaled = dataset_from(vec![
            Epoch::new(&x * alpha, 0).unwrap(),
            Epoch::new(x.clone(), 1).unwrap(),
        ]);
        let (s_base, _) = class_covariances(&base).unwrap();
        let (s_scaled, _) = class_covariances(&scaled).unwrap();
        assert_relative_eq!(
            s_scaled.matrix(),
            &(s_base.matrix() * alpha * alpha),
            max_relative = 1e-12
        );
    }

    #[test]
    fn regularize_examples() {
        let s = SpdMatrix::from_diagonal(&[4.0, 2.0]);
        let out = regularize(&s, RegParam::new(1.0).unwrap());
        assert_eq!(out[(0, 0)], 7.0);
        assert_eq!(out[(1, 1)], 5.0);

        let id = SpdMatrix::identity(3);
        let out = regularize(&id, RegParam::new(0.5).unwrap());
        assert_relative_eq!(out[(0, 0)], 1.5);
        assert_relative_eq!(out[(2, 2)], 1.5);

        let untouched = regularize(&s, RegParam::ZERO);
        assert_eq!(untouched.matrix(), s.matrix());
    }

    #[test]
    fn regularize_shifts_every_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let spd = SpdMatrix::new(&a * a.transpose()).unwrap();
        let lambda = 0.7;
        let shift = lambda * spd.trace() / 4.0;
        let reg = regularize(&spd, RegParam::new(lambda).unwrap());
        let before = crate::spdgeom::sym_eig(&spd).unwrap();
        let after = crate::spdgeom::sym_eig(&reg).unwrap();
        for (b, a) in before.values.iter().zip(after.values.iter()) {
            assert_relative_eq!(a - b, shift, epsilon = 1e-10);
        }
    }

    #[test]
    fn composite_sums_elementwise() {
        let a = SpdMatrix::from_diagonal(&[4.0, 1.0]);
        let b = SpdMatrix::from_diagonal(&[1.0, 4.0]);
        let sum = composite(&a, &b).unwrap();
        assert_eq!(sum.matrix(), &(DMatrix::identity(2, 2) * 5.0));

        let i2 = SpdMatrix::identity(2);
        assert_eq!(
            composite(&i2, &i2).unwrap().matrix(),
            &(DMatrix::identity(2, 2) * 2.0)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m1 = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let m2 = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let p = SpdMatrix::new(&m1 * m1.transpose()).unwrap();
        let q = SpdMatrix::new(&m2 * m2.transpose()).unwrap();
        let sum = composite(&p, &q).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(sum[(i, j)], p[(i, j)] + q[(i, j)], epsilon = 1e-15);
                assert_eq!(sum[(i, j)], sum[(j, i)]);
            }
        }

        let i3 = SpdMatrix::identity(3);
        assert!(matches!(
            composite(&i2, &i3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.1, 1.0]);
        assert!(matches!(SpdMatrix::new(m), Err(Error::NotSymmetric)));
    }
}
