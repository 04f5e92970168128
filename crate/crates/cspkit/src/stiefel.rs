//! Trace-ratio maximization over orthonormal frames, and the SM/RSM filter
//! banks built from it.
//!
//! The objective max tr(VᵀAV)/tr(VᵀBV) over C×k frames with VᵀV = I has no
//! closed form for k > 1. It is solved here by the classical trace-ratio
//! iteration: with the current ratio ρ, take V as the top-k eigenvectors of
//! the symmetric matrix A − ρB, recompute ρ, and repeat. Starting from a
//! feasible frame, the ρ sequence is nondecreasing and converges to the
//! global maximum (the unique root of ρ ↦ sum of top-k eigenvalues of A−ρB).

use nalgebra::DMatrix;

use crate::covariance::{regularize, RegParam, SpdMatrix};
use crate::csp::{check_c_prime, pencil_eig, FilterBank, FilterMethod};
use crate::spdgeom::{sym_eig, sym_eig_raw};
use crate::{Error, Result};

/// Default convergence threshold on the ρ increment.
pub const TRACE_RATIO_TOL: f64 = 1e-10;
/// Default iteration cap for [`trace_ratio_max`].
pub const TRACE_RATIO_MAX_ITER: usize = 100;

/// Outcome of a trace-ratio maximization.
#[derive(Debug, Clone)]
pub struct TraceRatioResult {
    /// C×k matrix with orthonormal columns attaining `rho`.
    pub frame: DMatrix<f64>,
    /// The achieved ratio tr(frameᵀ·A·frame) / tr(frameᵀ·B·frame).
    pub rho: f64,
    /// Iterations of the eigenvector update that were applied.
    pub iterations: usize,
    /// False when the iteration cap was hit before the increment fell
    /// below tolerance; `frame` and `rho` then hold the last iterate.
    pub converged: bool,
    /// ρ after the warm start and after every iteration, in order.
    pub rho_trace: Vec<f64>,
}

/// Maximizes tr(VᵀAV)/tr(VᵀBV) over C×k orthonormal frames.
///
/// Warm start: the top-k generalized eigenvectors of the pencil (A, B),
/// orthonormalized by QR so the starting point is feasible (for k = 1 this
/// is already the exact optimum). Each iteration replaces V with the top-k
/// eigenvectors of A − ρB and updates ρ; the update never decreases ρ.
/// Stops once an iteration improves ρ by less than `tol`.
pub fn trace_ratio_max(
    a: &SpdMatrix,
    b: &SpdMatrix,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<TraceRatioResult> {
    let c = a.dim();
    if b.dim() != c {
        return Err(Error::DimensionMismatch {
            rows_a: c,
            cols_a: c,
            rows_b: b.dim(),
            cols_b: b.dim(),
        });
    }
    if k == 0 || k > c {
        return Err(Error::InvalidSubspaceDim { k, channels: c });
    }
    let spectrum = sym_eig(b)?;
    if spectrum.values[0] <= 0.0 || *spectrum.values.last().unwrap() <= 1e-12 * spectrum.values[0]
    {
        return Err(Error::NotPositiveDefinite);
    }

    let (pencil, _) = pencil_eig(a, b)?;
    let warm = pencil.columns(0, k).into_owned().qr().q();
    let mut rho = trace_ratio(a, b, &warm);
    let mut frame = warm;
    let mut rho_trace = vec![rho];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        let shifted = a.matrix() - b.matrix() * rho;
        let eig = sym_eig_raw(&shifted)?;
        let candidate = eig.vectors.columns(0, k).into_owned();
        let next = trace_ratio(a, b, &candidate);
        iterations += 1;
        let gain = next - rho;
        frame = candidate;
        rho = next;
        rho_trace.push(rho);
        if gain < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "trace_ratio_max: no convergence after {max_iter} iterations (last rho {rho})"
        );
    }
    Ok(TraceRatioResult {
        frame,
        rho,
        iterations,
        converged,
        rho_trace,
    })
}

fn trace_ratio(a: &SpdMatrix, b: &SpdMatrix, v: &DMatrix<f64>) -> f64 {
    let num = (v.transpose() * a.matrix() * v).trace();
    let den = (v.transpose() * b.matrix() * v).trace();
    num / den
}

/// Filter bank whose halves maximize the two trace ratios independently:
/// the first C'/2 columns maximize tr(WᵀΣ₀W)/tr(WᵀΣ₁W) over orthonormal
/// frames, the last C'/2 the class-swapped ratio.
///
/// Each half is internally orthonormal; the stored values repeat each
/// half's converged ρ once per column.
pub fn sm_filters(s0: &SpdMatrix, s1: &SpdMatrix, c_prime: usize) -> Result<FilterBank> {
    build_sm(s0, s1, c_prime, RegParam::ZERO, FilterMethod::Sm)
}

/// Regularized SM: each half's denominator covariance gets a scaled ridge,
/// so the first half maximizes tr(WᵀΣ₀W)/tr(Wᵀ(Σ₁+λs₁I)W) and the second
/// half swaps the classes. λ = 0 reproduces [`sm_filters`] exactly.
pub fn rsm_filters(
    s0: &SpdMatrix,
    s1: &SpdMatrix,
    c_prime: usize,
    reg: RegParam,
) -> Result<FilterBank> {
    build_sm(s0, s1, c_prime, reg, FilterMethod::Rsm)
}

fn build_sm(
    s0: &SpdMatrix,
    s1: &SpdMatrix,
    c_prime: usize,
    reg: RegParam,
    method: FilterMethod,
) -> Result<FilterBank> {
    check_c_prime(c_prime, s0.dim())?;
    let half = c_prime / 2;
    let (den0, den1) = if reg.value() == 0.0 {
        (s1.clone(), s0.clone())
    } else {
        (regularize(s1, reg), regularize(s0, reg))
    };
    let lo = trace_ratio_max(s0, &den0, half, TRACE_RATIO_TOL, TRACE_RATIO_MAX_ITER)?;
    let hi = trace_ratio_max(s1, &den1, half, TRACE_RATIO_TOL, TRACE_RATIO_MAX_ITER)?;
    if !(lo.converged && hi.converged) {
        log::warn!("sm filter bank built from a non-converged trace-ratio iterate");
    }
    let c = s0.dim();
    let mut filters = DMatrix::<f64>::zeros(c, c_prime);
    let mut values = Vec::with_capacity(c_prime);
    for j in 0..half {
        filters.set_column(j, &lo.frame.column(j));
        values.push(lo.rho);
    }
    for j in 0..half {
        filters.set_column(half + j, &hi.frame.column(j));
        values.push(hi.rho);
    }
    FilterBank::from_parts(filters, method, reg, values)
}
