//! A person walking through a narrowband link.
//!
//! The channel is the line-of-sight path shadowed by the body, modelled as an
//! opaque strip (two knife edges), plus a weak point scatterer riding on the
//! body whose phase follows the excess path length.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fresnel::strip_gain;
use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::trace::{gt, RssTrace, TraceMetadata};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkGeometry {
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    pub wavelength: f64,
}

impl LinkGeometry {
    /// Link of length `d` along the x axis at carrier `center_frequency` Hz.
    pub fn straight(d: f64, center_frequency: f64) -> Self {
        Self {
            tx: [0.0, 0.0],
            rx: [d, 0.0],
            wavelength: SPEED_OF_LIGHT / center_frequency,
        }
    }

    pub fn length(&self) -> f64 {
        (self.rx[0] - self.tx[0]).hypot(self.rx[1] - self.tx[1])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length() > 0.0) {
            return Err(Error::invalid("transmitter and receiver coincide"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength must be positive"));
        }
        Ok(())
    }
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self::straight(2.0, crate::DEFAULT_CENTER_FREQUENCY_HZ)
    }
}

/// Straight walk crossing the link line at distance `crossing_point` from
/// the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub crossing_point: f64,
    /// Angle between the path and the link line; 90 is perpendicular.
    pub path_angle: f64,
    pub speed: f64,
    /// Distance walked before reaching the link line.
    pub start_offset: f64,
    pub duration: f64,
}

impl WalkPath {
    /// Path whose crossing falls at the centre of the trace.
    pub fn centred(crossing_point: f64, path_angle: f64, speed: f64, start_offset: f64) -> Self {
        Self {
            crossing_point,
            path_angle,
            speed,
            start_offset,
            duration: 2.0 * start_offset / speed,
        }
    }

    pub fn crossing_time(&self) -> f64 {
        self.start_offset / self.speed
    }

    pub fn validate(&self, geom: &LinkGeometry) -> Result<()> {
        let d = geom.length();
        if !(self.crossing_point > 0.0 && self.crossing_point < d) {
            return Err(Error::invalid(format!(
                "crossing point {} must lie strictly inside the {d} m link",
                self.crossing_point
            )));
        }
        if !(self.path_angle > 0.0 && self.path_angle <= 90.0) {
            return Err(Error::invalid("path angle must lie in (0, 90] degrees"));
        }
        if !(0.1..=3.0).contains(&self.speed) {
            return Err(Error::invalid("walking speed must lie in [0.1, 3] m/s"));
        }
        if !(self.start_offset >= 0.0 && self.duration > self.crossing_time()) {
            return Err(Error::invalid("the walk must reach the link line within the trace"));
        }
        Ok(())
    }
}

/// Body and propagation parameters of the crossing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossingModel {
    /// Body extent along the walking direction, m.
    pub body_depth: f64,
    /// Body extent across the walking direction, m.
    pub body_width: f64,
    /// Scatterer amplitude relative to the line-of-sight path.
    pub scatter_amplitude: f64,
    /// Exponent of the `(d / (r1 + r2))^p` scatterer range decay.
    pub scatter_decay: f64,
    /// Diffraction parameter scale beyond which shadowing fades out.
    pub shadow_taper: f64,
    pub baseline_db: f64,
}

impl Default for CrossingModel {
    fn default() -> Self {
        Self {
            body_depth: 0.25,
            body_width: 0.4,
            scatter_amplitude: 0.06,
            scatter_decay: 4.0,
            shadow_taper: 4.0,
            baseline_db: -50.0,
        }
    }
}

/// Complex channel relative to the unobstructed link at the given times.
pub fn crossing_channel(
    geom: &LinkGeometry,
    path: &WalkPath,
    model: &CrossingModel,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    geom.validate()?;
    path.validate(geom)?;
    let d = geom.length();
    let lambda = geom.wavelength;
    let e = [(geom.rx[0] - geom.tx[0]) / d, (geom.rx[1] - geom.tx[1]) / d];
    let nrm = [-e[1], e[0]];
    let theta = path.path_angle.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    let heading = [cos_t * e[0] + sin_t * nrm[0], cos_t * e[1] + sin_t * nrm[1]];
    let half = 0.5 * (model.body_depth * sin_t + model.body_width * cos_t.abs());
    let t_cross = path.crossing_time();

    Ok(times
        .iter()
        .map(|&t| {
            let s = path.speed * (t - t_cross);
            let along = path.crossing_point + s * cos_t;
            let across = s * sin_t;
            let p = [
                geom.tx[0] + path.crossing_point * e[0] + s * heading[0],
                geom.tx[1] + path.crossing_point * e[1] + s * heading[1],
            ];
            let r1 = (p[0] - geom.tx[0]).hypot(p[1] - geom.tx[1]);
            let r2 = (p[0] - geom.rx[0]).hypot(p[1] - geom.rx[1]);

            let shadow = if along > 0.0 && along < d {
                let scale = (2.0 * d / (lambda * along * (d - along))).sqrt();
                let strip = strip_gain((across - half) * scale, (across + half) * scale);
                let nu_c = across * scale / model.shadow_taper;
                Complex64::new(1.0, 0.0) + (strip - 1.0) * (-0.5 * nu_c * nu_c).exp()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let excess = r1 + r2 - d;
            let amp = model.scatter_amplitude * (d / (r1 + r2)).powf(model.scatter_decay);
            shadow + Complex64::from_polar(amp, -2.0 * PI * excess / lambda)
        })
        .collect())
}

/// Noise-free RSS in dB at the given times.
pub fn crossing_rss(
    geom: &LinkGeometry,
    path: &WalkPath,
    model: &CrossingModel,
    times: &[f64],
) -> Result<Vec<f64>> {
    Ok(crossing_channel(geom, path, model, times)?
        .iter()
        .map(|h| model.baseline_db + 20.0 * h.norm().log10())
        .collect())
}

pub fn simulate_crossing(
    geom: &LinkGeometry,
    path: &WalkPath,
    model: &CrossingModel,
    noise: &NoiseModel,
    fs: f64,
) -> Result<RssTrace> {
    let n = (path.duration * fs).round() as usize;
    let times: Vec<f64> = (0..n).map(|i| i as f64 / fs).collect();
    let clean = crossing_rss(geom, path, model, &times)?;
    let noise = noise.realize(n)?;
    let rss = clean.iter().zip(&noise.values).map(|(c, e)| c + e).collect();

    let mut md = TraceMetadata::new(fs).with_description("simulated link crossing");
    md.center_frequency = SPEED_OF_LIGHT / geom.wavelength;
    md.ground_truth.set_label(gt::SPEED_MPS, path.speed);
    md.ground_truth.set_label(gt::CROSSING_TIME_S, path.crossing_time());
    md.attributes.insert("link_length_m".into(), geom.length().to_string());
    md.attributes.insert("position_m".into(), path.crossing_point.to_string());
    md.attributes.insert("angle_deg".into(), path.path_angle.to_string());
    RssTrace::new(md, times, rss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::spectrogram;

    const FS: f64 = 449.0;

    fn times(secs: f64) -> Vec<f64> {
        (0..(secs * FS) as usize).map(|i| i as f64 / FS).collect()
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let g = LinkGeometry {
            tx: [1.0, 1.0],
            rx: [1.0, 1.0],
            wavelength: 0.69,
        };
        let p = WalkPath::centred(0.5, 90.0, 1.0, 5.0);
        assert!(crossing_rss(&g, &p, &CrossingModel::default(), &[0.0]).is_err());
        let g = LinkGeometry::default();
        assert!(crossing_rss(&g, &WalkPath::centred(2.5, 90.0, 1.0, 5.0), &CrossingModel::default(), &[0.0]).is_err());
    }

    #[test]
    fn wavelength_at_434_mhz() {
        assert!((LinkGeometry::default().wavelength - 0.6908).abs() < 1e-3);
    }

    #[test]
    fn far_body_leaves_link_at_baseline() {
        let g = LinkGeometry::default();
        let m = CrossingModel::default();
        // 200 m away on either side for the whole trace
        let p = WalkPath::centred(1.0, 90.0, 0.5, 200.0);
        let rss = crossing_rss(&g, &p, &m, &times(20.0)).unwrap();
        assert!(rss.iter().all(|v| (v - m.baseline_db).abs() < 1e-3));
    }

    #[test]
    fn crossing_causes_dip() {
        let g = LinkGeometry::default();
        let m = CrossingModel::default();
        let p = WalkPath::centred(1.0, 90.0, 1.0, 5.0);
        let t = times(p.duration);
        let rss = crossing_rss(&g, &p, &m, &t).unwrap();
        let mean = |lo: f64, hi: f64| {
            let v: Vec<f64> = t.iter().zip(&rss).filter(|(t, _)| **t >= lo && **t < hi).map(|(_, r)| *r).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let quiet = mean(0.0, 1.0);
        let at_cross = mean(4.9, 5.1);
        assert!(quiet - at_cross > 2.0, "{quiet} {at_cross}");
    }

    #[test]
    fn time_speed_equivalence() {
        let g = LinkGeometry::default();
        let m = CrossingModel::default();
        let k = 1.7;
        let slow = WalkPath::centred(0.8, 60.0, 0.6, 5.0);
        let fast = WalkPath::centred(0.8, 60.0, 0.6 * k, 5.0);
        let t_fast: Vec<f64> = (0..2000).map(|i| i as f64 * 0.003).collect();
        let t_slow: Vec<f64> = t_fast.iter().map(|t| t * k).collect();
        let a = crossing_rss(&g, &slow, &m, &t_slow).unwrap();
        let b = crossing_rss(&g, &fast, &m, &t_fast).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_falls_towards_crossing() {
        let g = LinkGeometry::default();
        let m = CrossingModel::default();
        let p = WalkPath::centred(1.0, 90.0, 1.0, 5.0);
        let rss = crossing_rss(&g, &p, &m, &times(p.duration)).unwrap();
        let sg = spectrogram(&rss, FS, 2.0, 0.25, 4096).unwrap();
        let ridge = sg.ridge();
        let before: Vec<f64> = sg.times.iter().zip(&ridge).filter(|(t, _)| **t > 1.5 && **t < 4.0).map(|(_, f)| *f).collect();
        // approaching the link line, the scatterer Doppler frequency falls
        assert!(before.first().unwrap() > before.last().unwrap());
        assert!(before.windows(2).filter(|w| w[1] <= w[0]).count() as f64 >= 0.8 * (before.len() - 1) as f64);
    }

    #[test]
    fn seeded_trace_is_deterministic_with_ground_truth() {
        let g = LinkGeometry::default();
        let p = WalkPath::centred(1.0, 45.0, 1.2, 5.0);
        let n = NoiseModel::default().with_seed(9);
        let a = simulate_crossing(&g, &p, &CrossingModel::default(), &n, FS).unwrap();
        let b = simulate_crossing(&g, &p, &CrossingModel::default(), &n, FS).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ground_truth().value(gt::SPEED_MPS), Some(1.2));
        assert!((a.ground_truth().value(gt::CROSSING_TIME_S).unwrap() - 5.0 / 1.2).abs() < 1e-12);
    }
}
