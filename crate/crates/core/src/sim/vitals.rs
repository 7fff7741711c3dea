use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::noise::{NoiseModel, NoiseRealization};
use crate::error::{Error, Result};
use crate::trace::{gt, RssTrace, TraceMetadata};

/// Micro-motion of a resting subject: a Gaussian pulse per heartbeat plus a
/// slow breathing sinusoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VitalSignsProfile {
    /// `(time_s, bpm)` knots of a piecewise-linear heart rate, held constant
    /// outside the knot range.
    pub heart_rate: Vec<(f64, f64)>,
    /// Breaths per minute.
    pub breathing_rate: f64,
    pub pulse_amplitude: f64,
    pub breathing_amplitude: f64,
    /// Standard deviation of each Gaussian pulse in seconds.
    pub pulse_width: f64,
    pub baseline_db: f64,
}

impl Default for VitalSignsProfile {
    fn default() -> Self {
        Self {
            heart_rate: vec![(0.0, 60.0)],
            breathing_rate: 15.0,
            pulse_amplitude: 0.005,
            breathing_amplitude: 0.05,
            pulse_width: 0.08,
            baseline_db: -50.0,
        }
    }
}

impl VitalSignsProfile {
    pub fn constant(bpm: f64) -> Self {
        Self {
            heart_rate: vec![(0.0, bpm)],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.heart_rate.is_empty() {
            return Err(Error::invalid("heart-rate profile needs at least one knot"));
        }
        if self.heart_rate.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("heart-rate knots must have increasing times"));
        }
        if self.heart_rate.iter().any(|&(t, r)| !t.is_finite() || !(r > 0.0)) {
            return Err(Error::invalid("heart rates must be positive and finite"));
        }
        if !(self.pulse_width > 0.0) || self.breathing_rate < 0.0 {
            return Err(Error::invalid("pulse width must be positive, breathing rate non-negative"));
        }
        Ok(())
    }

    /// Heart rate at `t` in bpm.
    pub fn heart_rate_at(&self, t: f64) -> f64 {
        let k = &self.heart_rate;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, r0), (t1, r1)) = (w[0], w[1]);
            if t <= t1 {
                return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
            }
        }
        k[k.len() - 1].1
    }

    /// Beat instants in `[0, duration)`: times where the integrated heart-rate
    /// phase (cycles since t = 0) reaches `k + 1/2`.
    pub fn beat_times(&self, duration: f64) -> Vec<f64> {
        // the rate is linear between consecutive breakpoints
        let mut cuts = vec![0.0];
        cuts.extend(self.heart_rate.iter().map(|k| k.0).filter(|&t| t > 0.0 && t < duration));
        cuts.push(duration);
        let segments = cuts.windows(2).map(|w| {
            let (r0, r1) = (self.heart_rate_at(w[0]) / 60.0, self.heart_rate_at(w[1]) / 60.0);
            (w[0], w[1], r0, (r1 - r0) / (w[1] - w[0]))
        });

        let mut beats = Vec::new();
        let mut phase = 0.0;
        let mut target = 0.5;
        for (t0, t1, a, b) in segments {
            let span = t1 - t0;
            let end_phase = phase + a * span + 0.5 * b * span * span;
            while target <= end_phase {
                let need = target - phase;
                // root of a·u + b·u²/2 = need, written to avoid cancellation
                let u = 2.0 * need / (a + (a * a + 2.0 * b * need).max(0.0).sqrt());
                let tb = t0 + u;
                if tb < duration {
                    beats.push(tb);
                }
                target += 1.0;
            }
            phase = end_phase;
        }
        beats
    }
}

/// Noise-free vital-sign RSS on the grid `i / fs`.
pub fn vitals_signal(profile: &VitalSignsProfile, n: usize, fs: f64) -> Result<Vec<f64>> {
    profile.validate()?;
    let duration = n as f64 / fs;
    let fb = profile.breathing_rate / 60.0;
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            profile.baseline_db + profile.breathing_amplitude * (2.0 * PI * fb * t).sin()
        })
        .collect();
    if profile.pulse_amplitude != 0.0 {
        let sigma = profile.pulse_width;
        let reach = 6.0 * sigma;
        for tb in profile.beat_times(duration) {
            let lo = ((tb - reach) * fs).ceil().max(0.0) as usize;
            let hi = (((tb + reach) * fs).floor() as usize).min(n.saturating_sub(1));
            for (i, slot) in x.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let z = (i as f64 / fs - tb) / sigma;
                *slot += profile.pulse_amplitude * (-0.5 * z * z).exp();
            }
        }
    }
    Ok(x)
}

/// Vital-sign trace with ground-truth heart rate per sample.
pub fn simulate_vitals(
    profile: &VitalSignsProfile,
    noise: &NoiseModel,
    duration: f64,
    fs: f64,
) -> Result<RssTrace> {
    Ok(simulate_vitals_with_noise(profile, noise, duration, fs)?.0)
}

/// As [`simulate_vitals`], also returning the noise realization so callers
/// can locate the injected impulses.
pub fn simulate_vitals_with_noise(
    profile: &VitalSignsProfile,
    noise: &NoiseModel,
    duration: f64,
    fs: f64,
) -> Result<(RssTrace, NoiseRealization)> {
    if !(duration > 0.0 && fs > 0.0) {
        return Err(Error::invalid("duration and sample rate must be positive"));
    }
    let n = (duration * fs).round() as usize;
    let clean = vitals_signal(profile, n, fs)?;
    let realization = noise.realize(n)?;
    let rss: Vec<f64> = clean
        .iter()
        .zip(&realization.values)
        .map(|(c, e)| c + e)
        .collect();
    let mut md = TraceMetadata::new(fs).with_description("simulated vital signs");
    let hr: Vec<f64> = (0..n).map(|i| profile.heart_rate_at(i as f64 / fs)).collect();
    md.ground_truth.series.insert(gt::HEART_RATE_BPM.to_string(), hr);
    Ok((RssTrace::from_samples(md, rss)?, realization))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::periodogram;

    const FS: f64 = 449.0;

    #[test]
    fn silent_profile_is_constant() {
        let p = VitalSignsProfile {
            pulse_amplitude: 0.0,
            breathing_amplitude: 0.0,
            ..VitalSignsProfile::default()
        };
        let tr = simulate_vitals(&p, &NoiseModel::silent(), 10.0, FS).unwrap();
        assert!(tr.rss().iter().all(|&v| v == p.baseline_db));
        assert_eq!(tr.len(), 4490);
    }

    #[test]
    fn constant_rate_beats_one_second_apart() {
        let beats = VitalSignsProfile::constant(60.0).beat_times(30.0);
        assert_eq!(beats.len(), 30);
        for (k, b) in beats.iter().enumerate() {
            assert!((b - (k as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn beats_follow_integrated_ramp() {
        // 60 -> 120 bpm over 10 s: phase(t) = t + t²/20
        let p = VitalSignsProfile {
            heart_rate: vec![(0.0, 60.0), (10.0, 120.0)],
            ..VitalSignsProfile::default()
        };
        let beats = p.beat_times(20.0);
        for (k, &b) in beats.iter().enumerate() {
            let phase = if b <= 10.0 { b + b * b / 20.0 } else { 15.0 + 2.0 * (b - 10.0) };
            assert!((phase - (k as f64 + 0.5)).abs() < 1e-9, "beat {k} at {b}");
        }
        // 15 cycles in the ramp plus 20 after it
        assert_eq!(beats.len(), 35);
    }

    #[test]
    fn pulse_train_has_harmonics() {
        let p = VitalSignsProfile {
            breathing_amplitude: 0.0,
            ..VitalSignsProfile::constant(60.0)
        };
        let x = vitals_signal(&p, (40.0 * FS) as usize, FS).unwrap();
        let psd = periodogram(&x, FS, 1 << 16).unwrap();
        let near = |f: f64| {
            let k = psd.bin_of(f);
            psd.power[k - 3..=k + 3].iter().cloned().fold(0.0, f64::max)
        };
        let floor = near(1.5);
        for h in [1.0, 2.0, 3.0] {
            assert!(near(h) > 100.0 * floor, "harmonic {h}");
        }
        assert!(near(2.0) > 0.1 * near(1.0));
    }

    #[test]
    fn ground_truth_attached() {
        let p = VitalSignsProfile {
            heart_rate: vec![(0.0, 60.0), (300.0, 66.0)],
            ..VitalSignsProfile::default()
        };
        let tr = simulate_vitals(&p, &NoiseModel::default(), 300.0, FS).unwrap();
        let hr = &tr.ground_truth().series[gt::HEART_RATE_BPM];
        assert_eq!(hr.len(), tr.len());
        assert!((hr[hr.len() - 1] - 66.0).abs() < 0.01);
        assert_eq!(tr, simulate_vitals(&p, &NoiseModel::default(), 300.0, FS).unwrap());
    }
}
