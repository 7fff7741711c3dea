//! Device-free sensing from a one-dimensional received-signal-strength (RSS)
//! stream captured on a narrowband single-carrier link.
//!
//! The crate is organised as a small stack:
//!
//! * [`trace`] holds the shared RSS time-series type and its CSV form.
//! * [`dsp`] and [`wavelet`] are the signal-processing kernels.
//! * [`heart`], [`gesture`] and [`speed`] are the three sensing pipelines.
//! * [`sim`] generates ground-truth traces in place of radio hardware.

pub mod dsp;
pub mod error;
pub mod gesture;
pub mod heart;
pub mod sim;
pub mod speed;
pub mod trace;
pub mod wavelet;

pub use error::{Error, Result};
pub use trace::{RssTrace, TraceMetadata};

/// Nominal RSS sample rate of the receiver in Hz.
pub const NOMINAL_SAMPLE_RATE_HZ: f64 = 449.0;

/// Default carrier frequency in Hz.
pub const DEFAULT_CENTER_FREQUENCY_HZ: f64 = 434.0e6;
