//! Butterworth IIR design by analog prototype and bilinear transform, realised
//! as a cascade of second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One biquad, `a[0]` normalised to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2)
            / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }
}

/// Second-order-section cascade with direct-form-II-transposed state.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    sections: Vec<Section>,
    state: Vec<[f64; 2]>,
}

impl IirFilter {
    pub fn new(sections: Vec<Section>) -> Result<Self> {
        for s in &sections {
            if s.poles().iter().any(|p| p.norm() >= 1.0) {
                return Err(Error::invalid("unstable section: pole on or outside unit circle"));
            }
        }
        let state = vec![[0.0; 2]; sections.len()];
        Ok(Self { sections, state })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = [0.0; 2]);
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let mut v = x;
        for (s, st) in self.sections.iter().zip(self.state.iter_mut()) {
            let y = s.b[0] * v + st[0];
            st[0] = s.b[1] * v - s.a[1] * y + st[1];
            st[1] = s.b[2] * v - s.a[2] * y;
            v = y;
        }
        v
    }

    /// Complex frequency response at `f` Hz for sample rate `fs`.
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / fs);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .fold(Complex64::new(1.0, 0.0), |acc, h| acc * h)
    }

    pub fn magnitude_db(&self, f: f64, fs: f64) -> f64 {
        20.0 * self.response(f, fs).norm().log10()
    }
}

/// Causal filtering from zero initial state; the design is left untouched.
pub fn filter_forward(filter: &IirFilter, x: &[f64]) -> Vec<f64> {
    let mut f = filter.clone();
    f.reset();
    x.iter().map(|&v| f.process(v)).collect()
}

/// Left-half-plane poles of the unit-cutoff analog Butterworth prototype.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn prewarp(f: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * f / fs).tan()
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

/// Groups z-plane poles into conjugate pairs (or pairs of reals) and builds
/// one denominator per pair.
fn pair_poles(poles: &[Complex64]) -> Vec<[f64; 3]> {
    const IM_EPS: f64 = 1e-12;
    let mut dens = Vec::new();
    let mut reals = Vec::new();
    for p in poles {
        if p.im > IM_EPS {
            dens.push([1.0, -2.0 * p.re, p.norm_sqr()]);
        } else if p.im.abs() <= IM_EPS {
            reals.push(p.re);
        }
    }
    reals.sort_by(f64::total_cmp);
    for pair in reals.chunks(2) {
        match *pair {
            [r1, r2] => dens.push([1.0, -(r1 + r2), r1 * r2]),
            [r] => dens.push([1.0, -r, 0.0]),
            _ => unreachable!(),
        }
    }
    dens
}

fn check_order(order: usize) -> Result<()> {
    if !matches!(order, 2 | 4 | 6 | 8) {
        return Err(Error::invalid(format!(
            "filter order must be one of 2, 4, 6, 8; got {order}"
        )));
    }
    Ok(())
}

/// Digital Butterworth lowpass of the given (even) order.
pub fn butterworth_lowpass(order: usize, f_c: f64, fs: f64) -> Result<IirFilter> {
    check_order(order)?;
    if !(f_c > 0.0 && f_c < fs / 2.0) {
        return Err(Error::invalid(format!(
            "lowpass cutoff {f_c} Hz must lie in (0, {}) Hz",
            fs / 2.0
        )));
    }
    let wc = prewarp(f_c, fs);
    let z_poles: Vec<Complex64> = prototype_poles(order)
        .into_iter()
        .map(|p| bilinear(p * wc, fs))
        .collect();
    let sections = pair_poles(&z_poles)
        .into_iter()
        .map(|a| {
            // zeros at z = -1, unit gain at DC
            let g = (a[0] + a[1] + a[2]) / 4.0;
            Section {
                b: [g, 2.0 * g, g],
                a,
            }
        })
        .collect();
    IirFilter::new(sections)
}

/// Digital Butterworth bandpass; `order` is the total order of the bandpass
/// (twice the analog prototype order).
pub fn butterworth_bandpass(order: usize, f_lo: f64, f_hi: f64, fs: f64) -> Result<IirFilter> {
    check_order(order)?;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0) {
        return Err(Error::invalid(format!(
            "band edges must satisfy 0 < {f_lo} < {f_hi} < {}",
            fs / 2.0
        )));
    }
    let w1 = prewarp(f_lo, fs);
    let w2 = prewarp(f_hi, fs);
    let bw = w2 - w1;
    let w0_sq = w1 * w2;
    let mut s_poles = Vec::with_capacity(order);
    for p in prototype_poles(order / 2) {
        let half = p * bw / 2.0;
        let root = (half * half - w0_sq).sqrt();
        s_poles.push(half + root);
        s_poles.push(half - root);
    }
    let z_poles: Vec<Complex64> = s_poles.into_iter().map(|s| bilinear(s, fs)).collect();

    // digital centre frequency where the prototype sees Ω = 0
    let f0 = fs / PI * (w0_sq.sqrt() / (2.0 * fs)).atan();
    let z0_inv = Complex64::from_polar(1.0, -2.0 * PI * f0 / fs);
    let sections = pair_poles(&z_poles)
        .into_iter()
        .map(|a| {
            // one zero at z = 1 and one at z = -1 per section
            let raw = Section {
                b: [1.0, 0.0, -1.0],
                a,
            };
            let g = 1.0 / raw.response(z0_inv).norm();
            Section {
                b: [g, 0.0, -g],
                a,
            }
        })
        .collect();
    IirFilter::new(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 449.0;

    /// Analytic magnitude of the analog prototype seen through the bilinear map.
    fn analytic_bandpass_db(order: usize, f_lo: f64, f_hi: f64, f: f64) -> f64 {
        let (w1, w2, w) = (prewarp(f_lo, FS), prewarp(f_hi, FS), prewarp(f, FS));
        let x = (w * w - w1 * w2) / (w * (w2 - w1));
        -10.0 * (1.0 + x.powi(2 * order as i32)).log10()
    }

    fn analytic_lowpass_db(order: usize, f_c: f64, f: f64) -> f64 {
        let x = prewarp(f, FS) / prewarp(f_c, FS);
        -10.0 * (1.0 + x.powi(2 * order as i32)).log10()
    }

    #[test]
    fn bandpass_band_edges_near_minus_3db() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        assert_eq!(h.order(), 4);
        for f in [0.8, 5.0] {
            let db = h.magnitude_db(f, FS);
            assert!((-3.2..=-2.8).contains(&db), "{f} Hz: {db} dB");
            assert!((db - analytic_bandpass_db(2, 0.8, 5.0, f)).abs() < 1e-6);
        }
        assert!(h.magnitude_db((0.8f64 * 5.0).sqrt(), FS) > -0.5);
        assert_eq!(h.response(0.0, FS).norm(), 0.0);
    }

    #[test]
    fn bandpass_matches_analytic_response_everywhere() {
        for order in [2, 4, 6, 8] {
            let h = butterworth_bandpass(order, 0.8, 5.0, FS).unwrap();
            for i in 1..400 {
                let f = 0.05 * i as f64;
                let got = h.magnitude_db(f, FS);
                let want = analytic_bandpass_db(order / 2, 0.8, 5.0, f);
                assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "order {order} f {f}");
            }
        }
    }

    #[test]
    fn lowpass_matches_analytic_response() {
        let h = butterworth_lowpass(4, 90.0, FS).unwrap();
        assert!(h.magnitude_db(0.0, FS).abs() < 1e-12);
        let at_cut = h.magnitude_db(90.0, FS);
        assert!((at_cut + 3.0).abs() <= 0.2, "{at_cut}");
        assert!(h.magnitude_db(180.0, FS) < -20.0);
        for i in 1..220 {
            let f = i as f64;
            assert!((h.magnitude_db(f, FS) - analytic_lowpass_db(4, 90.0, f)).abs() < 1e-6);
        }
    }

    #[test]
    fn responses_are_monotone_outside_the_centre() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        let mags: Vec<f64> = (1..2000).map(|i| h.response(i as f64 * 0.1, FS).norm()).collect();
        let peak = mags.iter().cloned().enumerate().fold((0, 0.0), |b, (i, m)| if m > b.1 { (i, m) } else { b }).0;
        assert!(mags[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(mags[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let l = butterworth_lowpass(6, 50.0, FS).unwrap();
        let mags: Vec<f64> = (0..224).map(|i| l.response(i as f64, FS).norm()).collect();
        assert!(mags.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn designs_are_stable() {
        for order in [2, 4, 6, 8] {
            for (lo, hi) in [(0.8, 5.0), (0.1, 200.0), (10.0, 11.0)] {
                let h = butterworth_bandpass(order, lo, hi, FS).unwrap();
                assert!(h.poles().iter().all(|p| p.norm() < 1.0 - 1e-9));
                assert_eq!(h.order(), order);
            }
            let l = butterworth_lowpass(order, 90.0, FS).unwrap();
            assert!(l.poles().iter().all(|p| p.norm() < 1.0 - 1e-9));
        }
    }

    #[test]
    fn invalid_designs_rejected() {
        assert!(butterworth_bandpass(4, 5.0, 0.8, FS).is_err());
        assert!(butterworth_bandpass(4, 0.0, 5.0, FS).is_err());
        assert!(butterworth_bandpass(4, 0.8, 230.0, FS).is_err());
        assert!(butterworth_bandpass(3, 0.8, 5.0, FS).is_err());
        assert!(butterworth_lowpass(4, 0.0, FS).is_err());
        assert!(butterworth_lowpass(4, 224.5, FS).is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        assert!(filter_forward(&h, &[0.0; 1000]).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn impulse_response_decays() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        let n = (10.0 * FS) as usize;
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        let y = filter_forward(&h, &x);
        let total: f64 = y.iter().map(|v| v * v).sum();
        let tail: f64 = y[n - n / 10..].iter().map(|v| v * v).sum();
        assert!(total.is_finite() && total > 0.0);
        assert!(tail < 1e-6 * total, "tail fraction {}", tail / total);
    }

    #[test]
    fn steady_state_sinusoid_matches_response() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        let f = (0.8f64 * 5.0).sqrt();
        let n = (60.0 * FS) as usize;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 / FS).sin()).collect();
        let y = filter_forward(&h, &x);
        let amp = y[n / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let expect = h.response(f, FS).norm();
        assert!((amp / expect - 1.0).abs() < 0.01, "{amp} vs {expect}");
    }

    #[test]
    fn filtering_is_linear() {
        let h = butterworth_bandpass(4, 0.8, 5.0, FS).unwrap();
        let x: Vec<f64> = (0..3000).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let y: Vec<f64> = (0..3000).map(|i| (i as f64 * 0.013).cos()).collect();
        let (a, b) = (2.5, -0.75);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = filter_forward(&h, &x);
        let fy = filter_forward(&h, &y);
        let fm = filter_forward(&h, &mix);
        let scale = fm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..3000 {
            assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() <= 1e-9 * scale);
        }
    }
}
