//! Epoched EEG data: containers, the EPO1 file format, window extraction,
//! FIR band-pass filtering, and a ground-truth synthetic generator.

mod dsp;
mod epo1;
mod synth;

pub use dsp::{bandpass_fir, extract_window};
pub use epo1::{read_epo, write_epo};
pub use synth::{generate_synthetic, SynthParams, SYNTH_SAMPLE_RATE_HZ};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// One labeled EEG trial: a channels × time-samples matrix and a binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    samples: DMatrix<f64>,
    label: u8,
}

impl Epoch {
    /// Wraps a C×T sample matrix with its class label (0 or 1).
    pub fn new(samples: DMatrix<f64>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::BadLabel(label));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteMatrix);
        }
        Ok(Self { samples, label })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.samples.ncols()
    }
}

/// An ordered collection of epochs with a shared shape and sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    epochs: Vec<Epoch>,
    sample_rate_hz: f64,
}

impl Dataset {
    /// Validates a uniform-shape, at-least-two-channel epoch collection.
    ///
    /// Epochs with fewer time samples than channels are accepted with a
    /// warning: their covariance estimates are rank-deficient.
    pub fn new(epochs: Vec<Epoch>, sample_rate_hz: f64) -> Result<Self> {
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::BadSampleRate(sample_rate_hz));
        }
        let first = epochs.first().ok_or(Error::EmptyDataset)?;
        let (channels, samples) = (first.channels(), first.sample_count());
        if channels < 2 {
            return Err(Error::TooFewChannels(channels));
        }
        for (i, e) in epochs.iter().enumerate() {
            if e.channels() != channels || e.sample_count() != samples {
                return Err(Error::InconsistentShape {
                    epoch: i,
                    got_channels: e.channels(),
                    got_samples: e.sample_count(),
                    channels,
                    samples,
                });
            }
        }
        if samples < channels {
            log::warn!(
                "epochs have {samples} samples across {channels} channels; \
                 covariance estimates will be rank-deficient"
            );
        }
        Ok(Self {
            epochs,
            sample_rate_hz,
        })
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_count(&self) -> usize {
        self.epochs[0].channels()
    }

    pub fn sample_count(&self) -> usize {
        self.epochs[0].sample_count()
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Number of epochs per class, as (count of label 0, count of label 1).
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.epochs.iter().filter(|e| e.label() == 1).count();
        (self.epochs.len() - ones, ones)
    }

    /// New dataset with the same labels and rate, epochs transformed in order.
    pub fn map_epochs<F>(&self, mut f: F) -> Result<Dataset>
    where
        F: FnMut(&Epoch) -> Result<DMatrix<f64>>,
    {
        let epochs = self
            .epochs
            .iter()
            .map(|e| Epoch::new(f(e)?, e.label()))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(epochs, self.sample_rate_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn epoch_rejects_bad_labels_and_nan() {
        assert!(matches!(
            Epoch::new(eye(2), 2),
            Err(Error::BadLabel(2))
        ));
        let mut m = eye(2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(Epoch::new(m, 0), Err(Error::NonFiniteMatrix)));
    }

    #[test]
    fn dataset_validates_shape_rate_and_channel_floor() {
        let e = Epoch::new(eye(2), 0).unwrap();
        assert!(matches!(
            Dataset::new(vec![], 100.0),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            Dataset::new(vec![e.clone()], 0.0),
            Err(Error::BadSampleRate(_))
        ));
        assert!(matches!(
            Dataset::new(vec![e.clone()], f64::NAN),
            Err(Error::BadSampleRate(_))
        ));

        let narrow = Epoch::new(DMatrix::zeros(1, 4), 0).unwrap();
        assert!(matches!(
            Dataset::new(vec![narrow], 100.0),
            Err(Error::TooFewChannels(1))
        ));

        let other = Epoch::new(DMatrix::zeros(2, 3), 1).unwrap();
        let err = Dataset::new(vec![e.clone(), other], 100.0).unwrap_err();
        assert!(matches!(err, Error::InconsistentShape { epoch: 1, .. }));

        let ds = Dataset::new(vec![e.clone(), e], 250.0).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.channel_count(), 2);
        assert_eq!(ds.sample_count(), 2);
        assert_eq!(ds.sample_rate_hz(), 250.0);
    }

    #[test]
    fn class_counts_tally_labels() {
        let e0 = Epoch::new(eye(2), 0).unwrap();
        let e1 = Epoch::new(eye(2), 1).unwrap();
        let ds = Dataset::new(vec![e0.clone(), e1.clone(), e1, e0.clone(), e0], 100.0).unwrap();
        assert_eq!(ds.class_counts(), (3, 2));
    }
}
