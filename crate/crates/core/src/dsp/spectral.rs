//! Hann-windowed periodograms and spectrograms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::trace::window_ranges;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Psd {
    /// Bin spacing in Hz.
    pub fn resolution(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }

    /// Integral of the density, `sum(power) * df`.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.power)
    }

    /// Index of the bin closest to `f`, clamped to the grid.
    pub fn bin_of(&self, f: f64) -> usize {
        let df = self.resolution();
        if df == 0.0 {
            return 0;
        }
        ((f / df).round().max(0.0) as usize).min(self.power.len() - 1)
    }
}

/// Time-indexed sequence of PSDs. `power[t][f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub times: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub power: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Peak frequency of every column.
    pub fn ridge(&self) -> Vec<f64> {
        self.power.iter().map(|col| self.frequencies[argmax(col)]).collect()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in v.iter().enumerate() {
        if p > v[best] {
            best = i;
        }
    }
    best
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Reusable periodogram with a planned FFT of fixed size.
///
/// Input is mean-removed, Hann-windowed and zero-padded to `nfft`. Power is
/// scaled so that `sum(power) * df` equals the mean square of the windowed
/// signal.
pub struct PsdEstimator {
    nfft: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    window: Vec<f64>,
}

impl PsdEstimator {
    pub fn new(nfft: usize) -> Result<Self> {
        if nfft == 0 {
            return Err(Error::invalid("nfft must be positive"));
        }
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            nfft,
            fft,
            buf: vec![Complex64::default(); nfft],
            scratch,
            window: Vec::new(),
        })
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    pub fn frequencies(&self, fs: f64) -> Vec<f64> {
        (0..=self.nfft / 2)
            .map(|k| k as f64 * fs / self.nfft as f64)
            .collect()
    }

    pub fn estimate(&mut self, x: &[f64], fs: f64) -> Result<Psd> {
        let power = self.power(x, fs)?;
        Ok(Psd {
            frequencies: self.frequencies(fs),
            power,
        })
    }

    /// Power values only, on the grid given by [`Self::frequencies`].
    pub fn power(&mut self, x: &[f64], fs: f64) -> Result<Vec<f64>> {
        let n = x.len();
        if n == 0 {
            return Err(Error::invalid("periodogram of an empty series"));
        }
        if n > self.nfft {
            return Err(Error::invalid(format!(
                "nfft {} is shorter than the input ({n} samples)",
                self.nfft
            )));
        }
        if self.window.len() != n {
            self.window = hann_window(n);
        }
        let mean = x.iter().sum::<f64>() / n as f64;
        for (i, slot) in self.buf.iter_mut().enumerate() {
            *slot = if i < n {
                Complex64::new((x[i] - mean) * self.window[i], 0.0)
            } else {
                Complex64::default()
            };
        }
        self.fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);

        let scale = 1.0 / (n as f64 * fs);
        let half = self.nfft / 2;
        let mut power: Vec<f64> = self.buf[..=half]
            .iter()
            .map(|c| c.norm_sqr() * scale)
            .collect();
        // fold the negative-frequency half onto the positive one
        let top = if self.nfft % 2 == 0 { half } else { half + 1 };
        for p in &mut power[1..top] {
            *p *= 2.0;
        }
        Ok(power)
    }
}

/// Periodogram of `x` sampled at `fs`, zero-padded to `nfft`.
pub fn periodogram(x: &[f64], fs: f64, nfft: usize) -> Result<Psd> {
    PsdEstimator::new(nfft)?.estimate(x, fs)
}

/// Short-time periodograms over sliding windows of `window` seconds.
///
/// Each window is mean-removed on its own; the time axis holds window
/// centres relative to the first sample.
pub fn spectrogram(x: &[f64], fs: f64, window: f64, hop: f64, nfft: usize) -> Result<Spectrogram> {
    let ranges: Vec<_> = window_ranges(x.len(), fs, window, hop)?.collect();
    let n = (window * fs).round() as usize;
    let mut est = PsdEstimator::new(nfft.max(n))?;
    let mut times = Vec::with_capacity(ranges.len());
    let mut power = Vec::with_capacity(ranges.len());
    for r in ranges {
        times.push((r.start as f64 + n as f64 / 2.0) / fs);
        power.push(est.power(&x[r], fs)?);
    }
    Ok(Spectrogram {
        times,
        frequencies: est.frequencies(fs),
        power,
    })
}
