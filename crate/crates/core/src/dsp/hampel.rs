use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scale factor turning a median absolute deviation into a Gaussian-consistent
/// standard deviation estimate.
pub const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HampelConfig {
    /// Samples on each side of the centre; the window spans `2 * half_window + 1`.
    pub half_window: usize,
    /// Replacement threshold in scaled-MAD units.
    pub n_sigmas: f64,
}

impl Default for HampelConfig {
    fn default() -> Self {
        Self {
            half_window: 100,
            n_sigmas: 3.0,
        }
    }
}

impl HampelConfig {
    pub fn window(&self) -> usize {
        2 * self.half_window + 1
    }

    fn validate(&self) -> Result<()> {
        if self.half_window == 0 {
            return Err(Error::invalid("hampel half_window must be at least 1"));
        }
        if !(self.n_sigmas > 0.0) {
            return Err(Error::invalid("hampel n_sigmas must be positive"));
        }
        Ok(())
    }
}

/// Hampel outlier filter.
///
/// Each sample is compared with the median `m` of its window; when
/// `|x - m| > n_sigmas * 1.4826 * MAD` it is replaced by `m`. Windows shrink
/// to one side at the edges. A zero MAD makes any deviation an outlier.
pub fn hampel_filter(x: &[f64], cfg: &HampelConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() < cfg.window() {
        return Err(Error::TooShort {
            needed: cfg.window(),
            got: x.len(),
        });
    }
    let h = cfg.half_window;
    let n = x.len();
    let mut out = x.to_vec();
    let mut sorted = SortedWindow::with_capacity(cfg.window());
    for &v in &x[..=h.min(n - 1)] {
        sorted.insert(v);
    }
    for i in 0..n {
        if i > 0 {
            if i + h < n {
                sorted.insert(x[i + h]);
            }
            if i > h {
                sorted.remove(x[i - h - 1]);
            }
        }
        let m = sorted.median();
        let mad = sorted.median_abs_dev(m);
        if (x[i] - m).abs() > cfg.n_sigmas * MAD_SCALE * mad {
            out[i] = m;
        }
    }
    Ok(out)
}

/// Window contents kept in ascending order.
struct SortedWindow {
    values: Vec<f64>,
}

impl SortedWindow {
    fn with_capacity(cap: usize) -> Self {
        Self {
            values: Vec::with_capacity(cap),
        }
    }

    fn insert(&mut self, v: f64) {
        let pos = self.values.partition_point(|a| a.total_cmp(&v).is_lt());
        self.values.insert(pos, v);
    }

    fn remove(&mut self, v: f64) {
        let pos = self.values.partition_point(|a| a.total_cmp(&v).is_lt());
        debug_assert!(self.values[pos] == v);
        self.values.remove(pos);
    }

    fn median(&self) -> f64 {
        let s = &self.values;
        let k = s.len();
        if k % 2 == 1 {
            s[k / 2]
        } else {
            0.5 * (s[k / 2 - 1] + s[k / 2])
        }
    }

    /// Median of `|v - m|`, found by merging the two monotone deviation runs
    /// on either side of `m`.
    fn median_abs_dev(&self, m: f64) -> f64 {
        let s = &self.values;
        let k = s.len();
        let split = s.partition_point(|&a| a < m);
        // left run walks down from split-1, right run walks up from split
        let mut l = split as isize - 1;
        let mut r = split;
        let mut next = || {
            let dl = if l >= 0 { m - s[l as usize] } else { f64::INFINITY };
            let dr = if r < k { s[r] - m } else { f64::INFINITY };
            if dl <= dr {
                l -= 1;
                dl
            } else {
                r += 1;
                dr
            }
        };
        let mut prev = 0.0;
        for _ in 0..k / 2 {
            prev = next();
        }
        let cur = next();
        if k % 2 == 1 {
            cur
        } else {
            0.5 * (prev + cur)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct per-window evaluation, used as an oracle.
    fn hampel_brute(x: &[f64], cfg: &HampelConfig) -> Vec<f64> {
        let med = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            let k = v.len();
            if k % 2 == 1 {
                v[k / 2]
            } else {
                0.5 * (v[k / 2 - 1] + v[k / 2])
            }
        };
        let h = cfg.half_window;
        (0..x.len())
            .map(|i| {
                let lo = i.saturating_sub(h);
                let hi = (i + h + 1).min(x.len());
                let mut w = x[lo..hi].to_vec();
                let m = med(&mut w);
                let mut dev: Vec<f64> = x[lo..hi].iter().map(|v| (v - m).abs()).collect();
                let mad = med(&mut dev);
                if (x[i] - m).abs() > cfg.n_sigmas * MAD_SCALE * mad {
                    m
                } else {
                    x[i]
                }
            })
            .collect()
    }

    #[test]
    fn constant_series_unchanged() {
        let x = vec![-50.0; 300];
        assert_eq!(hampel_filter(&x, &HampelConfig::default()).unwrap(), x);
    }

    #[test]
    fn zero_mad_replaces_spike() {
        let x = [1.0, 1.0, 1.0, 9.0, 1.0, 1.0, 1.0];
        let cfg = HampelConfig {
            half_window: 3,
            n_sigmas: 3.0,
        };
        assert_eq!(hampel_filter(&x, &cfg).unwrap(), vec![1.0; 7]);
    }

    #[test]
    fn clean_sinusoid_untouched() {
        let fs = 449.0;
        let x: Vec<f64> = (0..(10.0 * fs) as usize)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / fs).sin())
            .collect();
        let cfg = HampelConfig::default();
        // oracle: no sample's deviation exceeds its own window threshold
        assert_eq!(hampel_brute(&x, &cfg), x);
        let y = hampel_filter(&x, &cfg).unwrap();
        let max_change = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(max_change < 1e-9);
    }

    #[test]
    fn too_short_is_error() {
        let cfg = HampelConfig {
            half_window: 3,
            n_sigmas: 3.0,
        };
        assert!(matches!(
            hampel_filter(&[1.0; 6], &cfg),
            Err(Error::TooShort { needed: 7, got: 6 })
        ));
        assert!(hampel_filter(&[1.0; 6], &HampelConfig { half_window: 0, n_sigmas: 3.0 }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_brute_force(
            x in prop::collection::vec(-5.0f64..5.0, 9..300),
            h in 1usize..4,
            n_sigmas in 0.5f64..4.0,
        ) {
            let cfg = HampelConfig { half_window: h, n_sigmas };
            prop_assert_eq!(hampel_filter(&x, &cfg).unwrap(), hampel_brute(&x, &cfg));
        }

        #[test]
        fn idempotent_on_smooth_signal_with_impulses(
            spikes in prop::collection::vec((200usize..1800, -3.0f64..3.0), 0..20),
            freq in 0.1f64..0.8,
        ) {
            let fs = 449.0;
            let mut x: Vec<f64> = (0..2000)
                .map(|i| 0.1 * (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
                .collect();
            for (i, a) in spikes {
                x[i] += if a.abs() < 1.0 { a.signum() * 1.0 } else { a };
            }
            let cfg = HampelConfig::default();
            let once = hampel_filter(&x, &cfg).unwrap();
            let twice = hampel_filter(&once, &cfg).unwrap();
            // shrunken edge windows can flag curved edge segments
            let margin = 2 * cfg.half_window;
            prop_assert_eq!(&once[margin..2000 - margin], &twice[margin..2000 - margin]);
        }
    }
}
