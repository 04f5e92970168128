//! Symmetric eigendecomposition, whitening, SPD matrix functions, the
//! affine-invariant distance, and the Riemannian mean.
//!
//! The eigensolver is a cyclic Jacobi sweep: slower than LAPACK for large
//! matrices but dependency-free, accurate to round-off for the matrix sizes
//! EEG produces (tens of channels), and deterministic across platforms. All
//! eigenvector matrices follow one sign convention — the entry of largest
//! magnitude in each column is positive, ties broken by lowest index — so
//! every filter bank derived from them is reproducible.

use nalgebra::DMatrix;

use crate::covariance::SpdMatrix;
use crate::{Error, Result};

/// Default tolerance for [`riemannian_mean`].
pub const RIEMANNIAN_MEAN_TOL: f64 = 1e-8;
/// Default iteration cap for [`riemannian_mean`].
pub const RIEMANNIAN_MEAN_MAX_ITER: usize = 50;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_RTOL: f64 = 1e-14;

/// Eigendecomposition of a symmetric matrix: values sorted descending,
/// eigenvectors as columns of an orthonormal matrix.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

/// Whitening matrix P with P·Σ·Pᵀ = I for the source Σ.
#[derive(Debug, Clone)]
pub struct WhiteningMatrix {
    entries: DMatrix<f64>,
}

impl WhiteningMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Eigendecomposition of a symmetric positive semi-definite matrix.
///
/// Descending eigenvalue order; deterministic eigenvector signs.
pub fn sym_eig(s: &SpdMatrix) -> Result<EigenPair> {
    sym_eig_raw(s.matrix())
}

/// Jacobi eigendecomposition of any symmetric matrix (indefinite allowed).
pub(crate) fn sym_eig_raw(m: &DMatrix<f64>) -> Result<EigenPair> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    if n == 1 {
        return Ok(EigenPair {
            vectors: v,
            values: vec![a[(0, 0)]],
        });
    }

    let scale = a.norm();
    let stop = JACOBI_RTOL * scale;
    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_sq += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off_sq).sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                // tan of the rotation angle; series form when theta overflows
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[(j, p)];
                    let ajq = a[(j, q)];
                    let njp = ajp - s * (ajq + tau * ajp);
                    let njq = ajq + s * (ajp - tau * ajq);
                    a[(j, p)] = njp;
                    a[(p, j)] = njp;
                    a[(j, q)] = njq;
                    a[(q, j)] = njq;
                }
                for j in 0..n {
                    let vjp = v[(j, p)];
                    let vjq = v[(j, q)];
                    v[(j, p)] = vjp - s * (vjq + tau * vjp);
                    v[(j, q)] = vjq + s * (vjp - tau * vjq);
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off_sq = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_sq += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off_sq).sqrt() > stop {
            return Err(Error::EigFailed);
        }
    }

    // Sort descending, stable on ties, then fix signs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(EigenPair { vectors, values })
}

/// Flip a vector so its largest-magnitude entry (lowest index on ties) is positive.
pub(crate) fn fix_sign(col: &mut nalgebra::DVector<f64>) {
    let mut best = 0usize;
    for i in 1..col.len() {
        if col[i].abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        *col *= -1.0;
    }
}

/// Whitening matrix P = Λ^{-1/2}·Uᵀ of a strictly positive definite Σ.
pub fn whitening(sigma: &SpdMatrix) -> Result<WhiteningMatrix> {
    let eig = sym_eig(sigma)?;
    let max = eig.values[0];
    let min = *eig.values.last().unwrap();
    if max <= 0.0 || min <= 1e-12 * max {
        return Err(Error::SingularCovariance);
    }
    let n = sigma.dim();
    let mut p = eig.vectors.transpose();
    for (i, &lam) in eig.values.iter().enumerate() {
        let w = 1.0 / lam.sqrt();
        for j in 0..n {
            p[(i, j)] *= w;
        }
    }
    Ok(WhiteningMatrix { entries: p })
}

/// Spectral matrix functions applied through the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdFn {
    Sqrt,
    InvSqrt,
    Log,
    Exp,
}

/// U·diag(f(Λ))·Uᵀ.
///
/// `Sqrt`, `InvSqrt` and `Log` require a (strictly, for the latter two)
/// positive spectrum; `Exp` accepts any symmetric input.
pub fn spd_map(s: &SpdMatrix, f: SpdFn) -> Result<SpdMatrix> {
    let eig = sym_eig(s)?;
    let mapped: Vec<f64> = match f {
        SpdFn::Sqrt => {
            if eig.values.iter().any(|&l| l < 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            eig.values.iter().map(|&l| l.sqrt()).collect()
        }
        SpdFn::InvSqrt => {
            if eig.values.iter().any(|&l| l <= 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            eig.values.iter().map(|&l| 1.0 / l.sqrt()).collect()
        }
        SpdFn::Log => {
            if eig.values.iter().any(|&l| l <= 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            eig.values.iter().map(|&l| l.ln()).collect()
        }
        SpdFn::Exp => eig.values.iter().map(|&l| l.exp()).collect(),
    };
    let n = s.dim();
    let mut scaled = eig.vectors.clone();
    for (j, &m) in mapped.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= m;
        }
    }
    SpdMatrix::new(scaled * eig.vectors.transpose())
}

/// Affine-invariant Riemannian distance δ(A,B) = ‖log(A^{-1/2}·B·A^{-1/2})‖_F.
pub fn airm_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            rows_a: a.dim(),
            cols_a: a.dim(),
            rows_b: b.dim(),
            cols_b: b.dim(),
        });
    }
    let a_inv_sqrt = spd_map(a, SpdFn::InvSqrt)?;
    let m = SpdMatrix::new(a_inv_sqrt.matrix() * b.matrix() * a_inv_sqrt.matrix())?;
    let eig = sym_eig(&m)?;
    if eig.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(eig
        .values
        .iter()
        .map(|&l| l.ln() * l.ln())
        .sum::<f64>()
        .sqrt())
}

/// Riemannian (Karcher) mean with convergence metadata.
#[derive(Debug, Clone)]
pub struct RiemannianMean {
    pub mean: SpdMatrix,
    pub iterations: usize,
    pub converged: bool,
}

/// Fixed-point iteration for the Riemannian mean under the affine-invariant
/// metric, initialized at the arithmetic mean.
///
/// Each step maps the inputs to the tangent space at the current iterate,
/// averages, and maps back:
/// M ← M^{1/2}·exp((1/N)·Σ log(M^{-1/2}·Cᵢ·M^{-1/2}))·M^{1/2}.
/// Stops when the tangent-space mean has Frobenius norm below `tol`. If the
/// iteration cap is hit, the last iterate is returned with `converged: false`.
pub fn riemannian_mean(mats: &[SpdMatrix], tol: f64, max_iter: usize) -> Result<RiemannianMean> {
    if mats.is_empty() {
        return Err(Error::TooFewTrials(
            "riemannian mean of an empty set".into(),
        ));
    }
    let n = mats[0].dim();
    for m in mats {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                rows_a: n,
                cols_a: n,
                rows_b: m.dim(),
                cols_b: m.dim(),
            });
        }
    }
    let count = mats.len() as f64;
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for m in mats {
        acc += m.matrix();
    }
    let mut mean = SpdMatrix::new(acc / count)?;

    for iter in 0..=max_iter {
        let root = spd_map(&mean, SpdFn::Sqrt)?;
        let inv_root = spd_map(&mean, SpdFn::InvSqrt)?;
        let mut tangent = DMatrix::<f64>::zeros(n, n);
        for m in mats {
            let centered = SpdMatrix::new(inv_root.matrix() * m.matrix() * inv_root.matrix())?;
            tangent += spd_map(&centered, SpdFn::Log)?.matrix();
        }
        tangent /= count;
        if tangent.norm() < tol {
            return Ok(RiemannianMean {
                mean,
                iterations: iter,
                converged: true,
            });
        }
        if iter == max_iter {
            break;
        }
        let step = spd_map(&SpdMatrix::new(tangent)?, SpdFn::Exp)?;
        mean = SpdMatrix::new(root.matrix() * step.matrix() * root.matrix())?;
    }
    log::warn!(
        "riemannian_mean: no convergence after {} iterations (tol {})",
        max_iter,
        tol
    );
    Ok(RiemannianMean {
        mean,
        iterations: max_iter,
        converged: false,
    })
}
