//! Time-window extraction and linear-phase FIR band-pass filtering.

use std::f64::consts::PI;

use crate::{Error, Result};

use super::Dataset;

/// Cuts every epoch down to the samples in `[t_start_s, t_end_s)` seconds.
///
/// Second boundaries map to sample indices by nearest-integer rounding; the
/// interval is half-open, so `[1, 3.5]` s at 2 Hz keeps indices 2..7.
pub fn extract_window(dataset: &Dataset, t_start_s: f64, t_end_s: f64) -> Result<Dataset> {
    let fs = dataset.sample_rate_hz();
    let t = dataset.sample_count();
    let duration = t as f64 / fs;
    let invalid = Error::InvalidWindow {
        t_start: t_start_s,
        t_end: t_end_s,
        duration,
    };
    if !t_start_s.is_finite() || !t_end_s.is_finite() {
        return Err(invalid);
    }
    if t_start_s < 0.0 || t_start_s >= t_end_s || t_end_s > duration + 1e-9 {
        return Err(invalid);
    }
    let i0 = (t_start_s * fs).round() as usize;
    let i1 = ((t_end_s * fs).round() as usize).min(t);
    if i0 >= i1 {
        return Err(invalid);
    }
    dataset.map_epochs(|e| Ok(e.samples().columns(i0, i1 - i0).into_owned()))
}

/// Band-pass filters every channel of every epoch with a windowed-sinc FIR.
///
/// The filter is a Hamming-windowed difference of two low-pass sincs with an
/// odd tap count, rescaled to unit gain at the band center. Filtering uses
/// valid-region convolution only: the symmetric group delay of (taps−1)/2
/// samples is absorbed by dropping that many samples at each end, so the
/// output has T − (taps−1) samples and no edge transients.
pub fn bandpass_fir(dataset: &Dataset, lo_hz: f64, hi_hz: f64, taps: usize) -> Result<Dataset> {
    let fs = dataset.sample_rate_hz();
    if taps.is_multiple_of(2) {
        return Err(Error::EvenTaps(taps));
    }
    if taps < 3 {
        return Err(Error::TooFewTaps(taps));
    }
    if !(lo_hz.is_finite() && hi_hz.is_finite()) || lo_hz <= 0.0 || lo_hz >= hi_hz || hi_hz >= fs / 2.0 {
        return Err(Error::InvalidBand {
            lo: lo_hz,
            hi: hi_hz,
            fs,
        });
    }
    let t = dataset.sample_count();
    if t < taps {
        return Err(Error::EpochTooShort { samples: t, taps });
    }

    let h = design_bandpass(lo_hz, hi_hz, fs, taps);
    let t_out = t - (taps - 1);
    dataset.map_epochs(|e| {
        let x = e.samples();
        let mut y = nalgebra::DMatrix::<f64>::zeros(x.nrows(), t_out);
        for ch in 0..x.nrows() {
            for k in 0..t_out {
                let mut acc = 0.0;
                for (j, &hj) in h.iter().enumerate() {
                    acc += hj * x[(ch, k + j)];
                }
                y[(ch, k)] = acc;
            }
        }
        Ok(y)
    })
}

/// Hamming-windowed sinc band-pass taps, unit gain at (lo+hi)/2.
fn design_bandpass(lo_hz: f64, hi_hz: f64, fs: f64, taps: usize) -> Vec<f64> {
    let mid = (taps - 1) as f64 / 2.0;
    let f_lo = lo_hz / fs;
    let f_hi = hi_hz / fs;
    let mut h: Vec<f64> = (0..taps)
        .map(|n| {
            let k = n as f64 - mid;
            let lp_hi = 2.0 * f_hi * sinc(2.0 * f_hi * k);
            let lp_lo = 2.0 * f_lo * sinc(2.0 * f_lo * k);
            let w = 0.54 - 0.46 * (2.0 * PI * n as f64 / (taps - 1) as f64).cos();
            (lp_hi - lp_lo) * w
        })
        .collect();
    let center = (lo_hz + hi_hz) / 2.0;
    let gain = frequency_gain(&h, center, fs);
    for v in &mut h {
        *v /= gain;
    }
    h
}

/// Magnitude response of a symmetric FIR at one frequency.
fn frequency_gain(h: &[f64], f_hz: f64, fs: f64) -> f64 {
    let omega = 2.0 * PI * f_hz / fs;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &hn) in h.iter().enumerate() {
        re += hn * (omega * n as f64).cos();
        im -= hn * (omega * n as f64).sin();
    }
    (re * re + im * im).sqrt()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}
