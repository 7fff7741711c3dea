//! Signal-processing kernels shared by the sensing pipelines.

mod hampel;
mod iir;
mod spectral;
mod stats;

pub use hampel::{hampel_filter, HampelConfig, MAD_SCALE};
pub use iir::{butterworth_bandpass, butterworth_lowpass, filter_forward, IirFilter, Section};
pub use spectral::{hann_window, periodogram, spectrogram, Psd, PsdEstimator, Spectrogram};
pub use stats::{moving_average, moving_variance, remove_local_mean};
pub(crate) use spectral::argmax;
