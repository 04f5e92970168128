//! Common spatial pattern filters, their regularized form, and the
//! objective/diagnostic statistics computed from a filter bank.
//!
//! Two equivalent constructions are provided: a whitening-based procedure
//! ([`csp_approach1`]) and a direct generalized-eigenvalue solve
//! ([`csp_approach2`]). Both order columns from most class-0-discriminative
//! to most class-1-discriminative, store the generalized eigenvalues of the
//! covariance pencil, and normalize columns to unit length with the sign
//! convention of [`crate::spdgeom`].

use nalgebra::{DMatrix, DVector};

use crate::covariance::{composite, regularize, RegParam, SpdMatrix};
use crate::spdgeom::{fix_sign, sym_eig, whitening};
use crate::{Error, Result};

/// Which procedure produced a filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMethod {
    /// Whitening + eigendecomposition of the whitened class covariance.
    Csp1,
    /// Generalized eigenvalue solve on the covariance pencil.
    Csp2,
    /// Ridge-regularized generalized eigenvalue solve, one ridge per half.
    Rcsp,
    /// Orthonormal-column trace-ratio maximization, one frame per half.
    Sm,
    /// Regularized trace-ratio maximization.
    Rsm,
}

impl FilterMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterMethod::Csp1 => "CSP1",
            FilterMethod::Csp2 => "CSP2",
            FilterMethod::Rcsp => "RCSP",
            FilterMethod::Sm => "SM",
            FilterMethod::Rsm => "RSM",
        }
    }
}

impl std::fmt::Display for FilterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A C×C' spatial filter matrix with its provenance and per-column metadata.
///
/// The first C'/2 columns emphasize class 0 (large projected variance under
/// Σ₀ relative to Σ₁), the last C'/2 emphasize class 1. `eigenvalues` holds
/// the generalized eigenvalue of each column for CSP variants, or the
/// converged trace ratio of each half (repeated per column) for SM variants.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: DMatrix<f64>,
    method: FilterMethod,
    lambda: RegParam,
    eigenvalues: Vec<f64>,
}

impl FilterBank {
    pub(crate) fn from_parts(
        filters: DMatrix<f64>,
        method: FilterMethod,
        lambda: RegParam,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        let (c, c_prime) = (filters.nrows(), filters.ncols());
        check_c_prime(c_prime, c)?;
        debug_assert_eq!(eigenvalues.len(), c_prime);
        if filters.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteMatrix);
        }
        for j in 0..c_prime {
            if filters.column(j).norm() == 0.0 {
                return Err(Error::DegenerateFilter);
            }
        }
        Ok(Self {
            filters,
            method,
            lambda,
            eigenvalues,
        })
    }

    /// The filter matrix W, one spatial filter per column.
    pub fn filters(&self) -> &DMatrix<f64> {
        &self.filters
    }

    pub fn method(&self) -> FilterMethod {
        self.method
    }

    pub fn lambda(&self) -> RegParam {
        self.lambda
    }

    /// Generalized eigenvalues (CSP variants) or per-half trace ratios
    /// (SM variants), one entry per column.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn channels(&self) -> usize {
        self.filters.nrows()
    }

    pub fn c_prime(&self) -> usize {
        self.filters.ncols()
    }
}

pub(crate) fn check_c_prime(c_prime: usize, channels: usize) -> Result<()> {
    if !c_prime.is_multiple_of(2) || c_prime < 2 || c_prime > channels {
        return Err(Error::InvalidCPrime { c_prime, channels });
    }
    Ok(())
}

/// Σ^{-1/2} with the same relative-singularity guard as whitening.
fn invsqrt_strict(s: &SpdMatrix) -> Result<DMatrix<f64>> {
    let eig = sym_eig(s)?;
    let max = eig.values[0];
    let min = *eig.values.last().unwrap();
    if max <= 0.0 || min <= 1e-12 * max {
        return Err(Error::SingularCovariance);
    }
    let n = s.dim();
    let mut scaled = eig.vectors.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let w = 1.0 / lam.sqrt();
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    Ok(scaled * eig.vectors.transpose())
}

/// All C generalized eigenpairs of Σ₀w = λΣ₁w, eigenvalues descending,
/// filters unit-normalized with deterministic signs.
///
/// Solved through the symmetric equivalent Σ₁^{-1/2}·Σ₀·Σ₁^{-1/2} = QΛQᵀ
/// with w = Σ₁^{-1/2}q, which shares eigenvalues with Σ₁^{-1}Σ₀.
pub(crate) fn pencil_eig(s0: &SpdMatrix, s1: &SpdMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if s0.dim() != s1.dim() {
        return Err(Error::DimensionMismatch {
            rows_a: s0.dim(),
            cols_a: s0.dim(),
            rows_b: s1.dim(),
            cols_b: s1.dim(),
        });
    }
    let r = invsqrt_strict(s1)?;
    let m = SpdMatrix::new(&r * s0.matrix() * &r)?;
    let eig = sym_eig(&m)?;
    let c = s0.dim();
    let mut w = DMatrix::<f64>::zeros(c, c);
    for j in 0..c {
        let mut col: DVector<f64> = &r * eig.vectors.column(j);
        col /= col.norm();
        fix_sign(&mut col);
        w.set_column(j, &col);
    }
    Ok((w, eig.values))
}

fn take_extreme_columns(
    w: &DMatrix<f64>,
    values: &[f64],
    c_prime: usize,
) -> (DMatrix<f64>, Vec<f64>) {
    let (c, half) = (w.nrows(), c_prime / 2);
    let total = w.ncols();
    let mut filters = DMatrix::<f64>::zeros(c, c_prime);
    let mut kept = Vec::with_capacity(c_prime);
    for (j, &v) in values.iter().take(half).enumerate() {
        filters.set_column(j, &w.column(j));
        kept.push(v);
    }
    for j in 0..half {
        let src = total - half + j;
        filters.set_column(half + j, &w.column(src));
        kept.push(values[src]);
    }
    (filters, kept)
}

/// CSP by whitening: Σ = Σ₀+Σ₁ is whitened by P, the whitened class-0
/// covariance S₀ = PΣ₀Pᵀ is eigendecomposed, and the filters are W = PᵀV
/// for V the first and last C'/2 eigenvectors of S₀.
///
/// Stored eigenvalues are mapped from the whitened spectrum μ to the
/// covariance-pencil eigenvalues λ = μ/(1−μ), making them directly
/// comparable with [`csp_approach2`]'s.
pub fn csp_approach1(s0: &SpdMatrix, s1: &SpdMatrix, c_prime: usize) -> Result<FilterBank> {
    check_c_prime(c_prime, s0.dim())?;
    let sigma = composite(s0, s1)?;
    let p = whitening(&sigma)?;
    let white0 = SpdMatrix::new(p.matrix() * s0.matrix() * p.matrix().transpose())?;
    let eig = sym_eig(&white0)?;
    let full = p.matrix().transpose() * &eig.vectors;
    let mut unit = DMatrix::<f64>::zeros(s0.dim(), s0.dim());
    for j in 0..s0.dim() {
        let mut col = full.column(j).clone_owned();
        col /= col.norm();
        fix_sign(&mut col);
        unit.set_column(j, &col);
    }
    let lambdas: Vec<f64> = eig.values.iter().map(|&mu| mu / (1.0 - mu)).collect();
    let (filters, kept) = take_extreme_columns(&unit, &lambdas, c_prime);
    FilterBank::from_parts(filters, FilterMethod::Csp1, RegParam::ZERO, kept)
}

/// CSP by the generalized eigenvalue problem Σ₀w = λΣ₁w: the first and last
/// C'/2 eigenvectors (by descending λ) become the bank's columns.
pub fn csp_approach2(s0: &SpdMatrix, s1: &SpdMatrix, c_prime: usize) -> Result<FilterBank> {
    check_c_prime(c_prime, s0.dim())?;
    let (w, values) = pencil_eig(s0, s1)?;
    let (filters, kept) = take_extreme_columns(&w, &values, c_prime);
    FilterBank::from_parts(filters, FilterMethod::Csp2, RegParam::ZERO, kept)
}

/// Regularized CSP: each half solves its own ridge-regularized pencil.
///
/// The first C'/2 columns are the top eigenvectors of (Σ₁+λs₁I)⁻¹Σ₀ and the
/// last C'/2 the top eigenvectors of (Σ₀+λs₀I)⁻¹Σ₁ in reversed order, where
/// sᵢ = trace(Σᵢ)/C scales the ridge. λ = 0 reproduces [`csp_approach2`]
/// exactly; stored eigenvalues for the second half are reciprocals so the
/// whole list stays on the class-0/class-1 scale of the unregularized pencil.
pub fn rcsp(s0: &SpdMatrix, s1: &SpdMatrix, c_prime: usize, reg: RegParam) -> Result<FilterBank> {
    check_c_prime(c_prime, s0.dim())?;
    if reg.value() == 0.0 {
        let bank = csp_approach2(s0, s1, c_prime)?;
        return FilterBank::from_parts(
            bank.filters,
            FilterMethod::Rcsp,
            reg,
            bank.eigenvalues,
        );
    }
    let half = c_prime / 2;
    let c = s0.dim();
    let (w0, v0) = pencil_eig(s0, &regularize(s1, reg))?;
    let (w1, v1) = pencil_eig(s1, &regularize(s0, reg))?;
    let mut filters = DMatrix::<f64>::zeros(c, c_prime);
    let mut values = Vec::with_capacity(c_prime);
    for (j, &v) in v0.iter().take(half).enumerate() {
        filters.set_column(j, &w0.column(j));
        values.push(v);
    }
    for j in 0..half {
        let src = half - 1 - j;
        filters.set_column(half + j, &w1.column(src));
        values.push(1.0 / v1[src]);
    }
    FilterBank::from_parts(filters, FilterMethod::Rcsp, reg, values)
}

/// Sum-of-ratios objective of a bank: per-column variance ratios, class 0
/// over class 1 for the first half and inverted for the second.
pub fn ratio1(bank: &FilterBank, s0: &SpdMatrix, s1: &SpdMatrix) -> Result<f64> {
    check_bank_dims(bank, s0, s1)?;
    ratio1_matrix(bank.filters(), s0, s1)
}

/// Ratio-of-sums objective of a bank: each half contributes the ratio of its
/// summed projected variances.
pub fn ratio2(bank: &FilterBank, s0: &SpdMatrix, s1: &SpdMatrix) -> Result<f64> {
    check_bank_dims(bank, s0, s1)?;
    ratio2_matrix(bank.filters(), s0, s1)
}

fn check_bank_dims(bank: &FilterBank, s0: &SpdMatrix, s1: &SpdMatrix) -> Result<()> {
    if bank.channels() != s0.dim() || s0.dim() != s1.dim() {
        return Err(Error::DimensionMismatch {
            rows_a: bank.channels(),
            cols_a: bank.c_prime(),
            rows_b: s0.dim(),
            cols_b: s1.dim(),
        });
    }
    Ok(())
}

fn quad(s: &SpdMatrix, w: nalgebra::DVectorView<'_, f64>) -> f64 {
    w.dot(&(s.matrix() * w))
}

pub(crate) fn ratio1_matrix(w: &DMatrix<f64>, s0: &SpdMatrix, s1: &SpdMatrix) -> Result<f64> {
    let c_prime = w.ncols();
    if !c_prime.is_multiple_of(2) || c_prime == 0 {
        return Err(Error::InvalidCPrime {
            c_prime,
            channels: w.nrows(),
        });
    }
    let half = c_prime / 2;
    let mut total = 0.0;
    for j in 0..c_prime {
        let (num, den) = if j < half {
            (quad(s0, w.column(j)), quad(s1, w.column(j)))
        } else {
            (quad(s1, w.column(j)), quad(s0, w.column(j)))
        };
        if den <= 0.0 || !den.is_finite() {
            return Err(Error::DegenerateFilter);
        }
        total += num / den;
    }
    Ok(total)
}

pub(crate) fn ratio2_matrix(w: &DMatrix<f64>, s0: &SpdMatrix, s1: &SpdMatrix) -> Result<f64> {
    let c_prime = w.ncols();
    if !c_prime.is_multiple_of(2) || c_prime == 0 {
        return Err(Error::InvalidCPrime {
            c_prime,
            channels: w.nrows(),
        });
    }
    let half = c_prime / 2;
    let (mut n0, mut d0, mut n1, mut d1) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..half {
        n0 += quad(s0, w.column(j));
        d0 += quad(s1, w.column(j));
    }
    for j in half..c_prime {
        n1 += quad(s1, w.column(j));
        d1 += quad(s0, w.column(j));
    }
    if d0 <= 0.0 || d1 <= 0.0 || !(d0.is_finite() && d1.is_finite()) {
        return Err(Error::DegenerateFilter);
    }
    Ok(n0 / d0 + n1 / d1)
}

/// Mean absolute Pearson correlation over all unordered column pairs of W,
/// treating each column as a length-C sample. Pairs involving a constant
/// column contribute 0.
pub fn column_correlation(bank: &FilterBank) -> f64 {
    let w = bank.filters();
    let (c, c_prime) = (w.nrows(), w.ncols());
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..c_prime {
        for j in i + 1..c_prime {
            pairs += 1;
            let (a, b) = (w.column(i), w.column(j));
            let (ma, mb) = (a.mean(), b.mean());
            let mut cov = 0.0;
            let mut va = 0.0;
            let mut vb = 0.0;
            for k in 0..c {
                cov += (a[k] - ma) * (b[k] - mb);
                va += (a[k] - ma) * (a[k] - ma);
                vb += (b[k] - mb) * (b[k] - mb);
            }
            if va == 0.0 || vb == 0.0 {
                log::debug!("column_correlation: constant column in pair ({i},{j}), counted as 0");
                continue;
            }
            sum += (cov / (va * vb).sqrt()).abs();
        }
    }
    sum / pairs as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::{prop_assert, proptest};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut impl Rng) -> SpdMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        SpdMatrix::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.1).unwrap()
    }

    fn diag_pair() -> (SpdMatrix, SpdMatrix) {
        (
            SpdMatrix::from_diagonal(&[4.0, 1.0]),
            SpdMatrix::from_diagonal(&[1.0, 4.0]),
        )
    }

    fn assert_col_is_axis(w: &DMatrix<f64>, col: usize, axis: usize) {
        for i in 0..w.nrows() {
            let expect = if i == axis { 1.0 } else { 0.0 };
            assert_relative_eq!(w.column(col)[i].abs(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn approach1_diagonal_case_selects_axes() {
        let (s0, s1) = diag_pair();
        let bank = csp_approach1(&s0, &s1, 2).unwrap();
        assert_eq!(bank.method(), FilterMethod::Csp1);
        assert_col_is_axis(bank.filters(), 0, 0);
        assert_col_is_axis(bank.filters(), 1, 1);
        // whitened spectrum (0.8, 0.2) maps to pencil eigenvalues (4, 1/4)
        assert_relative_eq!(bank.eigenvalues()[0], 4.0, epsilon = 1e-10);
        assert_relative_eq!(bank.eigenvalues()[1], 0.25, epsilon = 1e-10);
    }

    #[test]
    fn approach1_identical_classes_give_flat_objective() {
        let s = SpdMatrix::identity(3);
        let bank = csp_approach1(&s, &s, 2).unwrap();
        assert_relative_eq!(ratio1(&bank, &s, &s).unwrap(), 2.0, epsilon = 1e-10);
        for &l in bank.eigenvalues() {
            assert_relative_eq!(l, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn approach2_diagonal_case_is_analytic() {
        let (s0, s1) = diag_pair();
        let bank = csp_approach2(&s0, &s1, 2).unwrap();
        assert_col_is_axis(bank.filters(), 0, 0);
        assert_col_is_axis(bank.filters(), 1, 1);
        assert_relative_eq!(bank.eigenvalues()[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(bank.eigenvalues()[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(ratio1(&bank, &s0, &s1).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn approach2_identical_classes_have_unit_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_spd(4, &mut rng);
        let bank = csp_approach2(&s, &s, 4).unwrap();
        for &l in bank.eigenvalues() {
            assert_relative_eq!(l, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn approach2_satisfies_the_generalized_eigen_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s0 = random_spd(4, &mut rng);
        let s1 = random_spd(4, &mut rng);
        let bank = csp_approach2(&s0, &s1, 4).unwrap();
        let bound = 1e-8 * s0.matrix().norm();
        for j in 0..4 {
            let w = bank.filters().column(j).clone_owned();
            let resid = s0.matrix() * &w - s1.matrix() * &w * bank.eigenvalues()[j];
            assert!(resid.norm() < bound, "column {j} residual {}", resid.norm());
        }
    }

    #[test]
    fn the_two_approaches_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let s0 = random_spd(6, &mut rng);
            let s1 = random_spd(6, &mut rng);
            let b1 = csp_approach1(&s0, &s1, 4).unwrap();
            let b2 = csp_approach2(&s0, &s1, 4).unwrap();
            for j in 0..4 {
                let cos = b1.filters().column(j).dot(&b2.filters().column(j));
                assert!(
                    cos.abs() > 1.0 - 1e-6,
                    "column {j} misaligned: |cos| = {}",
                    cos.abs()
                );
                assert!(
                    (b1.eigenvalues()[j] - b2.eigenvalues()[j]).abs() < 1e-8,
                    "eigenvalue {j}: {} vs {}",
                    b1.eigenvalues()[j],
                    b2.eigenvalues()[j]
                );
            }
        }
    }

    #[test]
    fn rcsp_at_zero_lambda_is_plain_csp() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let s0 = random_spd(5, &mut rng);
        let s1 = random_spd(5, &mut rng);
        let plain = csp_approach2(&s0, &s1, 4).unwrap();
        let reg = rcsp(&s0, &s1, 4, RegParam::ZERO).unwrap();
        assert_eq!(reg.method(), FilterMethod::Rcsp);
        assert_eq!(reg.filters(), plain.filters());
        assert_eq!(reg.eigenvalues(), plain.eigenvalues());
    }

    #[test]
    fn rcsp_diagonal_arithmetic() {
        let (s0, s1) = diag_pair();
        let bank = rcsp(&s0, &s1, 2, RegParam::new(1.0).unwrap()).unwrap();
        // ridge scale is trace/C = 2.5 for both classes
        assert_col_is_axis(bank.filters(), 0, 0);
        assert_col_is_axis(bank.filters(), 1, 1);
        assert_relative_eq!(bank.eigenvalues()[0], 4.0 / 3.5, epsilon = 1e-12);
        assert_relative_eq!(bank.eigenvalues()[1], 3.5 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn rcsp_large_lambda_approaches_class_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let s0 = random_spd(4, &mut rng);
        let s1 = random_spd(4, &mut rng);
        let bank = rcsp(&s0, &s1, 2, RegParam::new(1e6).unwrap()).unwrap();
        let top0 = sym_eig(&s0).unwrap().vectors.column(0).clone_owned();
        let top1 = sym_eig(&s1).unwrap().vectors.column(0).clone_owned();
        assert!(bank.filters().column(0).dot(&top0).abs() > 1.0 - 1e-4);
        assert!(bank.filters().column(1).dot(&top1).abs() > 1.0 - 1e-4);
    }

    #[test]
    fn ratio1_equals_stored_eigenvalue_expression() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let s0 = random_spd(6, &mut rng);
        let s1 = random_spd(6, &mut rng);
        let bank = csp_approach2(&s0, &s1, 4).unwrap();
        let ev = bank.eigenvalues();
        let expected = ev[0] + ev[1] + 1.0 / ev[2] + 1.0 / ev[3];
        assert_relative_eq!(
            ratio1(&bank, &s0, &s1).unwrap(),
            expected,
            epsilon = 1e-8
        );
    }

    #[test]
    fn ratio1_of_equal_classes_counts_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let s = random_spd(5, &mut rng);
        let bank = csp_approach2(&s, &s, 4).unwrap();
        assert_relative_eq!(ratio1(&bank, &s, &s).unwrap(), 4.0, epsilon = 1e-9);
        assert_relative_eq!(ratio2(&bank, &s, &s).unwrap(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn ratio2_equals_ratio1_for_two_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let s0 = random_spd(4, &mut rng);
        let s1 = random_spd(4, &mut rng);
        let bank = csp_approach2(&s0, &s1, 2).unwrap();
        assert_relative_eq!(
            ratio1(&bank, &s0, &s1).unwrap(),
            ratio2(&bank, &s0, &s1).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn ratio_hand_example_with_padded_halves() {
        let s0 = SpdMatrix::from_diagonal(&[4.0, 1.0, 1.0]);
        let s1 = SpdMatrix::from_diagonal(&[1.0, 4.0, 1.0]);
        let mut w = DMatrix::<f64>::zeros(3, 4);
        w[(0, 0)] = 1.0; // e1
        w[(2, 1)] = 1.0; // e3
        w[(2, 2)] = 1.0; // e3
        w[(1, 3)] = 1.0; // e2
        assert_relative_eq!(ratio1_matrix(&w, &s0, &s1).unwrap(), 10.0);
        assert_relative_eq!(ratio2_matrix(&w, &s0, &s1).unwrap(), 5.0);
    }

    #[test]
    fn ratios_reject_zero_variance_filters() {
        let s0 = SpdMatrix::from_diagonal(&[1.0, 0.0]);
        let s1 = SpdMatrix::from_diagonal(&[0.0, 1.0]);
        let w = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            ratio1_matrix(&w, &s0, &s1).unwrap_err(),
            Error::DegenerateFilter
        ));
    }

    #[test]
    fn swapping_classes_reverses_the_bank_and_keeps_ratio1() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let s0 = random_spd(6, &mut rng);
        let s1 = random_spd(6, &mut rng);
        let bank = csp_approach2(&s0, &s1, 4).unwrap();
        let swapped = csp_approach2(&s1, &s0, 4).unwrap();
        assert_relative_eq!(
            ratio1(&bank, &s0, &s1).unwrap(),
            ratio1(&swapped, &s1, &s0).unwrap(),
            epsilon = 1e-8
        );
        for j in 0..4 {
            let mirror = swapped.filters().column(3 - j);
            let cos = bank.filters().column(j).dot(&mirror);
            assert!(cos.abs() > 1.0 - 1e-8, "column {j} not mirrored");
        }
    }

    #[test]
    fn csp_selection_beats_every_other_eigenvector_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let s0 = random_spd(6, &mut rng);
        let s1 = random_spd(6, &mut rng);
        let bank = csp_approach2(&s0, &s1, 4).unwrap();
        let best = ratio1(&bank, &s0, &s1).unwrap();
        let (all, _) = pencil_eig(&s0, &s1).unwrap();
        for i in 0..6 {
            for j in i + 1..6 {
                for k in j + 1..6 {
                    for l in k + 1..6 {
                        let mut w = DMatrix::<f64>::zeros(6, 4);
                        for (dst, src) in [i, j, k, l].iter().enumerate() {
                            w.set_column(dst, &all.column(*src));
                        }
                        let r = ratio1_matrix(&w, &s0, &s1).unwrap();
                        assert!(
                            best >= r - 1e-9,
                            "subset ({i},{j},{k},{l}) beats CSP: {r} > {best}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let root = 2.0_f64.sqrt().recip();
        let w = DMatrix::from_columns(&[
            DVector::from_vec(vec![root, -root]),
            DVector::from_vec(vec![root, root]),
        ]);
        let bank =
            FilterBank::from_parts(w, FilterMethod::Csp2, RegParam::ZERO, vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(column_correlation(&bank), 0.0);

        let col = DVector::from_vec(vec![0.3, -0.9, 0.5]);
        let w = DMatrix::from_columns(&[col.clone(), col]);
        let bank =
            FilterBank::from_parts(w, FilterMethod::Csp2, RegParam::ZERO, vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(column_correlation(&bank), 1.0, epsilon = 1e-12);

        // constant column pairs count as zero correlation
        let w = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 1.0, 1.0]),
            DVector::from_vec(vec![0.3, -0.9, 0.5]),
        ]);
        let bank =
            FilterBank::from_parts(w, FilterMethod::Csp2, RegParam::ZERO, vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(column_correlation(&bank), 0.0);
    }

    #[test]
    fn correlation_matches_textbook_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = DMatrix::from_fn(5, 4, |_, _| rng.gen_range(-1.0..1.0));
        let bank = FilterBank::from_parts(
            w.clone(),
            FilterMethod::Csp2,
            RegParam::ZERO,
            vec![1.0; 4],
        )
        .unwrap();
        let mut sum = 0.0;
        let mut pairs = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = (w.column(i), w.column(j));
                let n = 5.0;
                let (ma, mb) = (a.sum() / n, b.sum() / n);
                let cov: f64 = (0..5).map(|k| (a[k] - ma) * (b[k] - mb)).sum::<f64>() / n;
                let sa = ((0..5).map(|k| (a[k] - ma).powi(2)).sum::<f64>() / n).sqrt();
                let sb = ((0..5).map(|k| (b[k] - mb).powi(2)).sum::<f64>() / n).sqrt();
                sum += (cov / (sa * sb)).abs();
                pairs += 1.0;
            }
        }
        assert_relative_eq!(column_correlation(&bank), sum / pairs, epsilon = 1e-12);
    }

    #[test]
    fn c_prime_validation() {
        let (s0, s1) = diag_pair();
        for bad in [0usize, 1, 3, 4] {
            let err = csp_approach2(&s0, &s1, bad).unwrap_err();
            assert!(matches!(err, Error::InvalidCPrime { .. }), "c'={bad}");
        }
        let err = csp_approach1(&s0, &s1, 6).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidCPrime {
                c_prime: 6,
                channels: 2
            }
        ));
    }

    #[test]
    fn singular_class_covariance_is_reported() {
        let v = DVector::from_vec(vec![1.0, 2.0]);
        let rank1 = SpdMatrix::new(&v * v.transpose()).unwrap();
        let ok = SpdMatrix::identity(2);
        assert!(matches!(
            csp_approach2(&ok, &rank1, 2),
            Err(Error::SingularCovariance)
        ));
    }

    proptest! {
        // Every term of both objectives is a quotient of quadratic forms, so
        // ratio1 ignores rescaling each column independently, while ratio2
        // (whose sums mix the columns of a half) ignores one common positive
        // scale per half.
        #[test]
        fn ratios_ignore_scalings_in_their_invariance_class(
            seed in proptest::prelude::any::<u64>(),
            scales in proptest::collection::vec(0.1f64..10.0, 4),
            half_scales in proptest::collection::vec(0.1f64..10.0, 2),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s0 = random_spd(4, &mut rng);
            let s1 = random_spd(4, &mut rng);
            let bank = csp_approach2(&s0, &s1, 4).unwrap();

            let mut per_column = bank.filters().clone();
            for (j, &a) in scales.iter().enumerate() {
                let col = per_column.column(j) * a;
                per_column.set_column(j, &col);
            }
            let r1 = ratio1_matrix(bank.filters(), &s0, &s1).unwrap();
            let r1s = ratio1_matrix(&per_column, &s0, &s1).unwrap();
            prop_assert!((r1 - r1s).abs() <= 1e-10 * r1.abs().max(1.0));

            let mut per_half = bank.filters().clone();
            for j in 0..4 {
                let col = per_half.column(j) * half_scales[j / 2];
                per_half.set_column(j, &col);
            }
            let r2 = ratio2_matrix(bank.filters(), &s0, &s1).unwrap();
            let r2s = ratio2_matrix(&per_half, &s0, &s1).unwrap();
            prop_assert!((r2 - r2s).abs() <= 1e-10 * r2.abs().max(1.0));
        }
    }
}
