//! Wavelet-domain gesture features.
//!
//! A segment is resampled to a fixed length and decomposed into three db3
//! levels. Each band {cD1, cD2, cD3, cA3} contributes seven statistics, and
//! the raw cA3 and cD3 coefficients are appended.

use std::sync::OnceLock;

use crate::dsp::PsdEstimator;
use crate::error::{Error, Result};
use crate::wavelet::{dwt_multilevel, level_lengths, Extension, WaveletFilterBank};

pub const RESAMPLED_LEN: usize = 1024;
pub const LEVELS: usize = 3;
pub const BAND_STATS: [&str; 7] = [
    "mean",
    "variance",
    "max",
    "min",
    "peak_power",
    "average_frequency",
    "median_frequency",
];
/// Bands in feature order with their decomposition level.
const BANDS: [(&str, usize); 4] = [("cD1", 1), ("cD2", 2), ("cD3", 3), ("cA3", 3)];

/// Band power below which frequency statistics are reported as zero.
const SILENT_POWER: f64 = 1e-20;

/// Names of every feature entry, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub names: Vec<String>,
}

impl FeatureLayout {
    pub fn standard() -> &'static FeatureLayout {
        static LAYOUT: OnceLock<FeatureLayout> = OnceLock::new();
        LAYOUT.get_or_init(|| {
            let taps = WaveletFilterBank::db3().taps();
            let deepest = level_lengths(RESAMPLED_LEN, LEVELS, taps, Extension::Symmetric)[LEVELS];
            let mut names = Vec::new();
            for (band, _) in BANDS {
                for stat in BAND_STATS {
                    names.push(format!("{band}_{stat}"));
                }
            }
            for block in ["cA3", "cD3"] {
                for i in 0..deepest {
                    names.push(format!("{block}[{i}]"));
                }
            }
            FeatureLayout { names }
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FeatureLayout::standard().index_of(name).and_then(|i| self.values.get(i).copied())
    }
}

/// Linear-interpolation resampling onto `n` points spanning the same interval.
pub fn resample_linear(x: &[f64], n: usize) -> Vec<f64> {
    if x.len() == 1 || n == 1 {
        return vec![x[0]; n];
    }
    let scale = (x.len() - 1) as f64 / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let pos = i as f64 * scale;
            let k = (pos.floor() as usize).min(x.len() - 2);
            let r = pos - k as f64;
            x[k] + r * (x[k + 1] - x[k])
        })
        .collect()
}

/// The seven statistics of one band sampled at `fs_band`.
fn band_stats(c: &[f64], fs_band: f64, out: &mut Vec<f64>) -> Result<()> {
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let variance = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut est = PsdEstimator::new(c.len().next_power_of_two())?;
    let psd = est.estimate(c, fs_band)?;
    let peak = psd.power.iter().cloned().fold(0.0, f64::max);
    let total: f64 = psd.power.iter().sum();
    let (avg, median) = if total * psd.resolution() > SILENT_POWER {
        let avg = psd.frequencies.iter().zip(&psd.power).map(|(f, p)| f * p).sum::<f64>() / total;
        let mut acc = 0.0;
        let k = psd
            .power
            .iter()
            .position(|p| {
                acc += p;
                acc >= 0.5 * total
            })
            .unwrap_or(psd.power.len() - 1);
        (avg, psd.frequencies[k])
    } else {
        (0.0, 0.0)
    };
    out.extend_from_slice(&[mean, variance, max, min, peak, avg, median]);
    Ok(())
}

/// Features of a segment sampled at `fs`.
pub fn extract_features(samples: &[f64], fs: f64) -> Result<FeatureVector> {
    if samples.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("segment holds non-finite samples"));
    }
    let bank = WaveletFilterBank::db3();
    let x = resample_linear(samples, RESAMPLED_LEN);
    // rate of the resampled series, keeping physical frequencies intact
    let fs_resampled = fs * (RESAMPLED_LEN - 1) as f64 / (samples.len() - 1) as f64;
    let dec = dwt_multilevel(&x, LEVELS, &bank)?;

    let layout = FeatureLayout::standard();
    let mut values = Vec::with_capacity(layout.len());
    for (name, level) in BANDS {
        let band: &[f64] = if name == "cA3" { &dec.approx } else { dec.detail(level) };
        band_stats(band, fs_resampled / (1u32 << level) as f64, &mut values)?;
    }
    values.extend_from_slice(&dec.approx);
    values.extend_from_slice(dec.detail(LEVELS));
    debug_assert_eq!(values.len(), layout.len());
    Ok(FeatureVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::periodogram;
    use std::f64::consts::PI;

    const FS: f64 = 449.0;

    #[test]
    fn layout_length_is_fixed() {
        let layout = FeatureLayout::standard();
        assert_eq!(layout.len(), 28 + 2 * 132);
        assert_eq!(layout.names[0], "cD1_mean");
        assert_eq!(layout.names[27], "cA3_median_frequency");
        assert_eq!(layout.names[28], "cA3[0]");
        for len in [50, 449, 1500] {
            let x: Vec<f64> = (0..len).map(|i| (i as f64 * 0.1).sin()).collect();
            assert_eq!(extract_features(&x, FS).unwrap().len(), layout.len());
        }
    }

    #[test]
    fn resampling_preserves_lines() {
        let x = [0.0, 1.0, 4.0];
        assert_eq!(resample_linear(&x, 5), vec![0.0, 0.5, 1.0, 2.5, 4.0]);
        assert_eq!(resample_linear(&x, 3), x.to_vec());
    }

    #[test]
    fn constant_segment() {
        let f = extract_features(&[2.0; 300], FS).unwrap();
        assert!((f.get("cA3_mean").unwrap() - 2.0 * 2f64.sqrt().powi(3)).abs() < 1e-9);
        for band in ["cD1", "cD2", "cD3", "cA3"] {
            assert!(f.get(&format!("{band}_variance")).unwrap().abs() < 1e-12);
            assert_eq!(f.get(&format!("{band}_average_frequency")), Some(0.0));
            assert_eq!(f.get(&format!("{band}_median_frequency")), Some(0.0));
        }
        for band in ["cD1", "cD2", "cD3"] {
            assert!(f.get(&format!("{band}_mean")).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn tone_frequency_survives_in_its_band() {
        // 2 s at 449 Hz resamples to ~511 Hz; cA3 runs at ~64 Hz and holds 5 Hz
        let x: Vec<f64> = (0..898).map(|i| (2.0 * PI * 5.0 * i as f64 / FS).sin()).collect();
        let f = extract_features(&x, FS).unwrap();
        let avg = f.get("cA3_average_frequency").unwrap();
        // oracle: average frequency of the periodogram of the raw segment
        let psd = periodogram(&x, FS, 4096).unwrap();
        let direct = psd.frequencies.iter().zip(&psd.power).map(|(a, b)| a * b).sum::<f64>() / psd.power.iter().sum::<f64>();
        assert!((avg - 5.0).abs() < 1.0, "{avg}");
        assert!((avg - direct).abs() < 1.0, "{avg} vs {direct}");
        assert!((f.get("cA3_median_frequency").unwrap() - 5.0).abs() < 1.0);
    }

    #[test]
    fn deterministic_and_offset_invariant_details() {
        let x: Vec<f64> = (0..700).map(|i| ((i * 7919) % 101) as f64 * 0.01 + (i as f64 * 0.05).sin()).collect();
        let a = extract_features(&x, FS).unwrap();
        assert_eq!(a, extract_features(&x, FS).unwrap());
        let shifted: Vec<f64> = x.iter().map(|v| v + 30.0).collect();
        let b = extract_features(&shifted, FS).unwrap();
        let layout = FeatureLayout::standard();
        for (i, name) in layout.names.iter().enumerate() {
            if name.starts_with("cD") {
                assert!((a.values[i] - b.values[i]).abs() <= 1e-6 * a.values[i].abs().max(1.0), "{name}");
            }
        }
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(extract_features(&[1.0], FS).is_err());
        assert!(extract_features(&[1.0, f64::NAN], FS).is_err());
    }
}
