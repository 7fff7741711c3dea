use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::gesture::GestureLabel;
use crate::trace::{gt, RssTrace, TraceMetadata};

/// Relative spread of the per-instance randomization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Jitter {
    pub amplitude: f64,
    pub duration: f64,
    pub frequency: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Self {
            amplitude: 0.2,
            duration: 0.15,
            frequency: 0.1,
        }
    }
}

/// Amplitude- and frequency-modulated oscillation describing one gesture.
///
/// `envelope` and `frequency_profile` are `(fraction of duration, value)`
/// knots interpolated linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureTemplate {
    pub label: GestureLabel,
    pub duration: f64,
    /// Peak oscillation amplitude in dB.
    pub amplitude: f64,
    pub envelope: Vec<(f64, f64)>,
    /// Instantaneous frequency in Hz.
    pub frequency_profile: Vec<(f64, f64)>,
    pub jitter: Jitter,
}

fn interp(knots: &[(f64, f64)], u: f64) -> f64 {
    if u <= knots[0].0 {
        return knots[0].1;
    }
    for w in knots.windows(2) {
        if u <= w[1].0 {
            let r = (u - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + r * (w[1].1 - w[0].1);
        }
    }
    knots[knots.len() - 1].1
}

impl GestureTemplate {
    /// The standard template of each label.
    pub fn standard(label: GestureLabel) -> Self {
        use GestureLabel::*;
        let (duration, amplitude, envelope, frequency_profile): (f64, f64, Vec<(f64, f64)>, Vec<(f64, f64)>) =
            match label {
                Punch => (
                    0.6,
                    2.0,
                    vec![(0.0, 0.0), (0.2, 1.0), (0.6, 1.0), (1.0, 0.0)],
                    vec![(0.0, 10.0), (1.0, 4.0)],
                ),
                Punchx2 => (
                    1.2,
                    2.0,
                    vec![(0.0, 0.0), (0.1, 1.0), (0.35, 1.0), (0.5, 0.45), (0.65, 1.0), (0.9, 1.0), (1.0, 0.0)],
                    vec![(0.0, 10.0), (0.45, 4.0), (0.55, 10.0), (1.0, 4.0)],
                ),
                Kick => (
                    0.9,
                    3.0,
                    vec![(0.0, 0.0), (0.5, 1.0), (0.7, 1.0), (1.0, 0.0)],
                    vec![(0.0, 3.0), (1.0, 12.0)],
                ),
                Strike => (
                    0.5,
                    2.5,
                    vec![(0.0, 0.0), (0.1, 1.0), (0.8, 0.5), (1.0, 0.0)],
                    vec![(0.0, 15.0), (1.0, 15.0)],
                ),
                Drag => (
                    2.0,
                    1.5,
                    vec![(0.0, 0.0), (0.1, 1.0), (0.9, 1.0), (1.0, 0.0)],
                    vec![(0.0, 3.0), (1.0, 3.0)],
                ),
                Dodge => (
                    0.8,
                    2.0,
                    vec![(0.0, 0.0), (0.3, 1.0), (0.7, 1.0), (1.0, 0.0)],
                    vec![(0.0, 5.0), (0.5, 9.0), (1.0, 5.0)],
                ),
                Push => (
                    1.0,
                    2.0,
                    vec![(0.0, 0.0), (0.8, 1.0), (1.0, 0.0)],
                    vec![(0.0, 4.0), (1.0, 8.0)],
                ),
                Pull => (
                    1.0,
                    2.0,
                    vec![(0.0, 0.0), (0.2, 1.0), (1.0, 0.0)],
                    vec![(0.0, 8.0), (1.0, 4.0)],
                ),
            };
        Self {
            label,
            duration,
            amplitude,
            envelope,
            frequency_profile,
            jitter: Jitter::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.3..=3.0).contains(&self.duration) {
            return Err(Error::invalid("gesture duration must lie in [0.3, 3] s"));
        }
        for knots in [&self.envelope, &self.frequency_profile] {
            if knots.is_empty() || knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::invalid("template knots must be non-empty with increasing positions"));
            }
        }
        if !(self.amplitude >= 0.0) {
            return Err(Error::invalid("template amplitude must be non-negative"));
        }
        Ok(())
    }

    /// Samples of one jittered instance at `fs`.
    pub fn render(&self, fs: f64, rng: &mut impl Rng) -> Vec<f64> {
        let j = &self.jitter;
        let mut spread = |s: f64| 1.0 + s * (2.0 * rng.random::<f64>() - 1.0);
        let amp = self.amplitude * spread(j.amplitude);
        let duration = self.duration * spread(j.duration);
        let freq_scale = spread(j.frequency);
        let phase0 = 2.0 * PI * rng.random::<f64>();
        let n = (duration * fs).round() as usize;
        let mut phase = phase0;
        (0..n)
            .map(|i| {
                let u = i as f64 / n as f64;
                let v = amp * interp(&self.envelope, u) * phase.sin();
                phase += 2.0 * PI * freq_scale * interp(&self.frequency_profile, u) / fs;
                v
            })
            .collect()
    }
}

/// Quiet padding, one jittered gesture, quiet padding; noise throughout.
pub fn simulate_gesture(
    template: &GestureTemplate,
    noise: &NoiseModel,
    pre_pad: f64,
    post_pad: f64,
    fs: f64,
    seed: u64,
) -> Result<RssTrace> {
    template.validate()?;
    if !(pre_pad >= 0.0 && post_pad >= 0.0) {
        return Err(Error::invalid("gesture pads must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = template.render(fs, &mut rng);
    let start = (pre_pad * fs).round() as usize;
    let n = start + body.len() + (post_pad * fs).round() as usize;
    let noise = noise.realize(n)?;
    let baseline = -50.0;
    let mut rss: Vec<f64> = noise.values.iter().map(|e| baseline + e).collect();
    for (slot, v) in rss[start..].iter_mut().zip(&body) {
        *slot += v;
    }
    let mut md = TraceMetadata::new(fs).with_description("simulated gesture");
    md.ground_truth.set_label(gt::GESTURE_LABEL, template.label);
    md.ground_truth.set_label(gt::GESTURE_START_S, start as f64 / fs);
    md.ground_truth.set_label(gt::GESTURE_END_S, (start + body.len()) as f64 / fs);
    RssTrace::from_samples(md, rss)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 449.0;

    #[test]
    fn standard_templates_are_valid_and_distinct() {
        let all: Vec<_> = GestureLabel::ALL.iter().map(|&l| GestureTemplate::standard(l)).collect();
        for (i, a) in all.iter().enumerate() {
            a.validate().unwrap();
            assert_eq!(a.label, GestureLabel::ALL[i]);
            for b in &all[i + 1..] {
                assert!(a.envelope != b.envelope || a.frequency_profile != b.frequency_profile || a.duration != b.duration);
            }
        }
    }

    #[test]
    fn zero_amplitude_is_pure_noise() {
        let t = GestureTemplate {
            amplitude: 0.0,
            ..GestureTemplate::standard(GestureLabel::Kick)
        };
        let noise = NoiseModel::default().with_seed(3);
        let tr = simulate_gesture(&t, &noise, 1.0, 1.0, FS, 5).unwrap();
        let pure = noise.realize(tr.len()).unwrap();
        for (v, e) in tr.rss().iter().zip(&pure.values) {
            assert_eq!(*v, -50.0 + e);
        }
    }

    #[test]
    fn seeded_and_labelled() {
        let t = GestureTemplate::standard(GestureLabel::Push);
        let n = NoiseModel::default();
        let a = simulate_gesture(&t, &n, 1.0, 2.0, FS, 17).unwrap();
        assert_eq!(a, simulate_gesture(&t, &n, 1.0, 2.0, FS, 17).unwrap());
        assert_ne!(a, simulate_gesture(&t, &n, 1.0, 2.0, FS, 18).unwrap());
        let g = a.ground_truth();
        assert_eq!(g.label(gt::GESTURE_LABEL), Some("push"));
        let (s, e) = (g.value(gt::GESTURE_START_S).unwrap(), g.value(gt::GESTURE_END_S).unwrap());
        assert!((s - 1.0).abs() < 1.0 / FS);
        assert!((0.85..=1.15 + 1e-9).contains(&(e - s)));
    }
}
