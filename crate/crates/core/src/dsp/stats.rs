use crate::error::{Error, Result};

/// Sliding sample variance (divisor `n - 1`), aligned to the window end.
///
/// Output has `len(x) - window + 1` values; entry `i` covers `x[i..i + window]`.
pub fn moving_variance(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::invalid("moving variance window must be at least 2"));
    }
    if x.len() < window {
        return Err(Error::TooShort {
            needed: window,
            got: x.len(),
        });
    }
    // recompute from scratch periodically to bound drift of the running update
    const RESYNC: usize = 4096;
    let n = window as f64;
    let exact = |w: &[f64]| {
        let mean = w.iter().sum::<f64>() / n;
        let m2 = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (mean, m2)
    };
    let (mut mean, mut m2) = exact(&x[..window]);
    let mut out = Vec::with_capacity(x.len() - window + 1);
    out.push((m2 / (n - 1.0)).max(0.0));
    for i in 1..=x.len() - window {
        if i % RESYNC == 0 {
            (mean, m2) = exact(&x[i..i + window]);
        } else {
            let old = x[i - 1];
            let new = x[i + window - 1];
            let new_mean = mean + (new - old) / n;
            m2 += (new - old) * (new - new_mean + old - mean);
            mean = new_mean;
        }
        out.push((m2 / (n - 1.0)).max(0.0));
    }
    Ok(out)
}

/// Centred moving mean; windows shrink at the edges so the output keeps the
/// input length.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let left = (window - 1) / 2;
    let right = window / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// `x` minus its centred moving mean.
pub fn remove_local_mean(x: &[f64], window: usize) -> Vec<f64> {
    x.iter()
        .zip(moving_average(x, window))
        .map(|(v, m)| v - m)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_variance(w: &[f64]) -> f64 {
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn variance_examples() {
        assert_eq!(moving_variance(&[3.0; 10], 4).unwrap(), vec![0.0; 7]);
        assert_eq!(moving_variance(&[0.0, 0.0, 4.0, 4.0], 2).unwrap(), vec![0.0, 8.0, 0.0]);
        assert!(moving_variance(&[1.0; 3], 4).is_err());
        assert!(moving_variance(&[1.0; 3], 1).is_err());
    }

    #[test]
    fn average_examples() {
        assert_eq!(moving_average(&[2.0; 5], 3), vec![2.0; 5]);
        assert_eq!(moving_average(&[0.0, 3.0, 0.0], 3), vec![1.5, 1.0, 1.5]);
        let ramp: Vec<f64> = (0..20).map(f64::from).collect();
        let avg = moving_average(&ramp, 5);
        for i in 2..18 {
            assert!((avg[i] - ramp[i]).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn variance_matches_brute_force(
            x in prop::collection::vec(-60.0f64..-40.0, 10..6000),
            window in 2usize..64,
        ) {
            prop_assume!(x.len() >= window);
            let got = moving_variance(&x, window).unwrap();
            prop_assert_eq!(got.len(), x.len() - window + 1);
            for (i, v) in got.iter().enumerate() {
                let want = brute_variance(&x[i..i + window]);
                prop_assert!((v - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", v, want);
            }
        }
    }
}
