//! Heart-rate estimation from RSS micro-motion.
//!
//! Each window is mean-subtracted, Hampel-filtered, band-passed and turned
//! into a zero-padded periodogram. The pulse is not sinusoidal, so the power
//! at `f` and `2f` are summed before peak picking inside the resting band.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp::{butterworth_bandpass, filter_forward, hampel_filter, HampelConfig, IirFilter, PsdEstimator};
use crate::error::{Error, Result};
use crate::trace::RssTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeartRateConfig {
    pub f_min: f64,
    pub f_max: f64,
    /// Window length in seconds.
    pub window: f64,
    /// Seconds between streamed estimates.
    pub update_period: f64,
    /// Windows whose peak summed power reaches this value are treated as
    /// motion. `None` disables suppression.
    pub psd_threshold: Option<f64>,
    pub bandpass_low: f64,
    pub bandpass_high: f64,
    pub bandpass_order: usize,
    pub hampel: HampelConfig,
    /// Largest acceptable PSD bin width in bpm.
    pub nfft_target_resolution: f64,
}

impl Default for HeartRateConfig {
    fn default() -> Self {
        Self {
            f_min: 0.84,
            f_max: 1.67,
            window: 20.0,
            update_period: 1.0,
            psd_threshold: None,
            bandpass_low: 0.8,
            bandpass_high: 5.0,
            bandpass_order: 4,
            hampel: HampelConfig::default(),
            nfft_target_resolution: 0.5,
        }
    }
}

impl HeartRateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.f_min && self.f_min < self.f_max) {
            return Err(Error::invalid("heart-rate band needs 0 < f_min < f_max"));
        }
        if !(2.0 * self.f_max < self.bandpass_high) {
            return Err(Error::invalid("second harmonic of f_max must lie below the bandpass upper edge"));
        }
        if !(self.window * self.f_min > 1.0) {
            return Err(Error::invalid("window must hold at least one period at f_min"));
        }
        if !(self.update_period > 0.0 && self.nfft_target_resolution > 0.0) {
            return Err(Error::invalid("update period and target resolution must be positive"));
        }
        if self.psd_threshold.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::invalid("psd threshold must be positive"));
        }
        Ok(())
    }

    /// Samples per window at `fs`.
    pub fn window_samples(&self, fs: f64) -> usize {
        (self.window * fs).round() as usize
    }

    /// Smallest power-of-two FFT size giving the target bin width and holding
    /// a whole window.
    pub fn nfft(&self, fs: f64) -> usize {
        let needed = (60.0 * fs / self.nfft_target_resolution).ceil() as usize;
        needed.max(self.window_samples(fs)).next_power_of_two()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    Estimate,
    SuppressedMotion,
    InsufficientData,
}

impl EstimateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateStatus::Estimate => "estimate",
            EstimateStatus::SuppressedMotion => "suppressed_motion",
            EstimateStatus::InsufficientData => "insufficient_data",
        }
    }
}

impl fmt::Display for EstimateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "estimate" => Ok(Self::Estimate),
            "suppressed_motion" => Ok(Self::SuppressedMotion),
            "insufficient_data" => Ok(Self::InsufficientData),
            other => Err(Error::invalid(format!("unknown estimate status '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeartRateEstimate {
    pub time: f64,
    pub bpm: Option<f64>,
    /// Peak of the summed PSD inside the band.
    pub peak_power: f64,
    pub status: EstimateStatus,
}

impl HeartRateEstimate {
    fn insufficient(time: f64) -> Self {
        Self {
            time,
            bpm: None,
            peak_power: 0.0,
            status: EstimateStatus::InsufficientData,
        }
    }
}

/// Which spectral lines enter the peak search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Harmonics {
    /// `PSD(f) + PSD(2f)`.
    #[default]
    Superposition,
    /// `PSD(f)` alone.
    Fundamental,
}

/// Per-window estimator holding the designed filter and FFT plan.
pub struct HeartRateEstimator {
    cfg: HeartRateConfig,
    fs: f64,
    bandpass: IirFilter,
    psd: PsdEstimator,
    harmonics: Harmonics,
}

impl HeartRateEstimator {
    pub fn new(cfg: &HeartRateConfig, fs: f64) -> Result<Self> {
        Self::with_harmonics(cfg, fs, Harmonics::Superposition)
    }

    pub fn with_harmonics(cfg: &HeartRateConfig, fs: f64, harmonics: Harmonics) -> Result<Self> {
        cfg.validate()?;
        let bandpass = butterworth_bandpass(cfg.bandpass_order, cfg.bandpass_low, cfg.bandpass_high, fs)?;
        let nfft = cfg.nfft(fs);
        if 2.0 * cfg.f_max >= fs / 2.0 {
            return Err(Error::invalid("second harmonic of f_max exceeds Nyquist"));
        }
        Ok(Self {
            cfg: cfg.clone(),
            fs,
            bandpass,
            psd: PsdEstimator::new(nfft)?,
            harmonics,
        })
    }

    pub fn config(&self) -> &HeartRateConfig {
        &self.cfg
    }

    /// Bin width of the zero-padded periodogram in Hz.
    pub fn resolution(&self) -> f64 {
        self.fs / self.psd.nfft() as f64
    }

    /// Summed PSD over the band bins, as `(frequencies, power)`.
    pub fn band_spectrum(&mut self, window_rss: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.cfg.window_samples(self.fs);
        if window_rss.len() != n {
            return Err(Error::TooShort {
                needed: n,
                got: window_rss.len(),
            });
        }
        let mean = window_rss.iter().sum::<f64>() / n as f64;
        let centred: Vec<f64> = window_rss.iter().map(|v| v - mean).collect();
        let cleaned = hampel_filter(&centred, &self.cfg.hampel)?;
        let filtered = filter_forward(&self.bandpass, &cleaned);
        let power = self.psd.power(&filtered, self.fs)?;

        let df = self.resolution();
        let k_lo = (self.cfg.f_min / df).ceil() as usize;
        let k_hi = (self.cfg.f_max / df).floor() as usize;
        let freqs = (k_lo..=k_hi).map(|k| k as f64 * df).collect();
        // bin 2k sits exactly at twice the frequency of bin k
        let summed = (k_lo..=k_hi)
            .map(|k| match self.harmonics {
                Harmonics::Superposition => power[k] + power[2 * k],
                Harmonics::Fundamental => power[k],
            })
            .collect();
        Ok((freqs, summed))
    }

    pub fn estimate(&mut self, window_rss: &[f64], time: f64) -> HeartRateEstimate {
        let Ok((freqs, summed)) = self.band_spectrum(window_rss) else {
            return HeartRateEstimate::insufficient(time);
        };
        let k = crate::dsp::argmax(&summed);
        let peak_power = summed[k];
        if self.cfg.psd_threshold.is_some_and(|thd| peak_power >= thd) {
            return HeartRateEstimate {
                time,
                bpm: None,
                peak_power,
                status: EstimateStatus::SuppressedMotion,
            };
        }
        HeartRateEstimate {
            time,
            bpm: Some(60.0 * freqs[k]),
            peak_power,
            status: EstimateStatus::Estimate,
        }
    }
}

/// Estimate from one window using harmonic superposition.
pub fn estimate_window(window_rss: &[f64], fs: f64, cfg: &HeartRateConfig) -> Result<HeartRateEstimate> {
    Ok(HeartRateEstimator::new(cfg, fs)?.estimate(window_rss, window_rss.len() as f64 / fs))
}

/// Baseline estimator searching the fundamental only.
pub fn estimate_window_single_harmonic(
    window_rss: &[f64],
    fs: f64,
    cfg: &HeartRateConfig,
) -> Result<HeartRateEstimate> {
    Ok(HeartRateEstimator::with_harmonics(cfg, fs, Harmonics::Fundamental)?
        .estimate(window_rss, window_rss.len() as f64 / fs))
}

/// One estimate per update period from the trailing window, stamped with the
/// time of the window's last sample.
pub fn stream_heart_rate(trace: &RssTrace, cfg: &HeartRateConfig) -> Result<Vec<HeartRateEstimate>> {
    stream_heart_rate_with(trace, cfg, Harmonics::Superposition)
}

pub fn stream_heart_rate_with(
    trace: &RssTrace,
    cfg: &HeartRateConfig,
    harmonics: Harmonics,
) -> Result<Vec<HeartRateEstimate>> {
    let fs = trace.sample_rate();
    let mut est = HeartRateEstimator::with_harmonics(cfg, fs, harmonics)?;
    let n = cfg.window_samples(fs);
    let step = ((cfg.update_period * fs).round() as usize).max(1);
    let x = trace.rss();
    let ts = trace.timestamps();
    Ok((1..=x.len() / step)
        .map(|k| {
            let end = k * step;
            let time = ts[end - 1];
            if end < n {
                HeartRateEstimate::insufficient(time)
            } else {
                est.estimate(&x[end - n..end], time)
            }
        })
        .collect())
}

/// Motion threshold from a quiet reference: `factor` times the median peak
/// summed power over its windows.
pub fn calibrate_threshold(reference: &RssTrace, cfg: &HeartRateConfig, factor: f64) -> Result<f64> {
    if !(factor > 0.0) {
        return Err(Error::invalid("threshold factor must be positive"));
    }
    let quiet = HeartRateConfig {
        psd_threshold: None,
        ..cfg.clone()
    };
    let mut peaks: Vec<f64> = stream_heart_rate(reference, &quiet)?
        .into_iter()
        .filter(|e| e.status == EstimateStatus::Estimate)
        .map(|e| e.peak_power)
        .collect();
    if peaks.is_empty() {
        return Err(Error::TooShort {
            needed: quiet.window_samples(reference.sample_rate()),
            got: reference.len(),
        });
    }
    peaks.sort_by(f64::total_cmp);
    let m = peaks.len();
    let median = if m % 2 == 1 {
        peaks[m / 2]
    } else {
        0.5 * (peaks[m / 2 - 1] + peaks[m / 2])
    };
    Ok(factor * median)
}

/// Root-mean-square error of the estimates against a per-sample ground-truth
/// series, over estimates carrying a bpm.
pub fn rmse_against(estimates: &[HeartRateEstimate], trace: &RssTrace, truth: &[f64]) -> Option<f64> {
    let ts = trace.timestamps();
    let mut acc = 0.0;
    let mut count = 0usize;
    for e in estimates {
        if let Some(bpm) = e.bpm {
            let i = ts.partition_point(|&t| t < e.time).min(truth.len() - 1);
            acc += (bpm - truth[i]).powi(2);
            count += 1;
        }
    }
    (count > 0).then(|| (acc / count as f64).sqrt())
}

pub fn write_estimates_csv<W: Write>(mut w: W, estimates: &[HeartRateEstimate]) -> std::io::Result<()> {
    writeln!(w, "t_s,bpm,status,peak_power")?;
    for e in estimates {
        let bpm = e.bpm.map(|b| b.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", e.time, bpm, e.status, e.peak_power)?;
    }
    Ok(())
}

pub fn read_estimates_csv(text: &str) -> Result<Vec<HeartRateEstimate>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "t_s,bpm,status,peak_power" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header t_s,bpm,status,peak_power".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::Parse { line: i + 1, message: m };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("'{s}': {e}")));
        out.push(HeartRateEstimate {
            time: num(f[0])?,
            bpm: if f[1].is_empty() { None } else { Some(num(f[1])?) },
            status: f[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            peak_power: num(f[3])?,
        });
    }
    Ok(out)
}
