//! Orthogonal discrete wavelet transform with the Daubechies-3 filter bank.
//!
//! Analysis keeps the odd samples of the full convolution of the extended
//! signal, giving `floor((n + taps - 1) / 2)` coefficients per branch in
//! symmetric mode. Synthesis applies the adjoint operator, which for an
//! orthogonal bank reconstructs the input exactly.

use crate::error::{Error, Result};

/// Daubechies-3 scaling filter (reconstruction lowpass order).
const DB3_REC_LO: [f64; 6] = [
    0.332_670_552_950_082_6,
    0.806_891_509_311_092_5,
    0.459_877_502_118_491_5,
    -0.135_011_020_010_254_6,
    -0.085_441_273_882_026_66,
    0.035_226_291_885_709_53,
];

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterBank {
    pub lowpass_dec: Vec<f64>,
    pub highpass_dec: Vec<f64>,
    pub lowpass_rec: Vec<f64>,
    pub highpass_rec: Vec<f64>,
}

impl WaveletFilterBank {
    pub fn db3() -> Self {
        Self::from_scaling_filter(&DB3_REC_LO)
    }

    /// Builds the four filters of an orthogonal bank from its scaling filter.
    pub fn from_scaling_filter(rec_lo: &[f64]) -> Self {
        let l = rec_lo.len();
        let lowpass_rec = rec_lo.to_vec();
        let lowpass_dec: Vec<f64> = rec_lo.iter().rev().copied().collect();
        // quadrature mirror: g[k] = (-1)^k h[L-1-k]
        let highpass_rec: Vec<f64> = (0..l)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * rec_lo[l - 1 - k])
            .collect();
        let highpass_dec: Vec<f64> = highpass_rec.iter().rev().copied().collect();
        Self {
            lowpass_dec,
            highpass_dec,
            lowpass_rec,
            highpass_rec,
        }
    }

    pub fn taps(&self) -> usize {
        self.lowpass_dec.len()
    }

    /// Checks unit norm, DC sums, the quadrature-mirror relation and
    /// double-shift orthogonality, each to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let l = self.taps();
        let bad = |what: &str| Err(Error::invalid(format!("filter bank: {what}")));
        if [&self.highpass_dec, &self.lowpass_rec, &self.highpass_rec]
            .iter()
            .any(|f| f.len() != l)
            || l % 2 != 0
        {
            return bad("filters must share one even length");
        }
        let norm = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>();
        if (norm(&self.lowpass_dec) - 1.0).abs() > tol || (norm(&self.highpass_dec) - 1.0).abs() > tol {
            return bad("decomposition filters must have unit norm");
        }
        if (self.lowpass_dec.iter().sum::<f64>() - 2f64.sqrt()).abs() > tol {
            return bad("lowpass must sum to sqrt(2)");
        }
        if self.highpass_dec.iter().sum::<f64>().abs() > tol {
            return bad("highpass must sum to 0");
        }
        for k in 0..l {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if (self.highpass_rec[k] - sign * self.lowpass_rec[l - 1 - k]).abs() > tol
                || (self.lowpass_dec[k] - self.lowpass_rec[l - 1 - k]).abs() > tol
                || (self.highpass_dec[k] - self.highpass_rec[l - 1 - k]).abs() > tol
            {
                return bad("quadrature-mirror relation violated");
            }
        }
        for shift in (2..l).step_by(2) {
            let c: f64 = (0..l - shift)
                .map(|k| self.lowpass_dec[k] * self.lowpass_dec[k + shift])
                .sum();
            if c.abs() > tol {
                return bad("lowpass not orthogonal to its even shifts");
            }
        }
        Ok(())
    }
}

/// Boundary handling for the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extension {
    /// Half-sample symmetric extension; `floor((n + taps - 1) / 2)` outputs.
    #[default]
    Symmetric,
    /// Circular extension of an even-length input; `n / 2` outputs.
    Periodic,
}

impl Extension {
    pub fn output_len(self, n: usize, taps: usize) -> usize {
        match self {
            Extension::Symmetric => (n + taps - 1) / 2,
            Extension::Periodic => n / 2,
        }
    }

    #[inline]
    fn index(self, j: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Extension::Symmetric => {
                // reflect about the half-sample points -1/2 and n - 1/2
                let period = 2 * n;
                let m = j.rem_euclid(period);
                (if m < n { m } else { period - 1 - m }) as usize
            }
            Extension::Periodic => j.rem_euclid(n) as usize,
        }
    }
}

fn check_input(x: &[f64], bank: &WaveletFilterBank, ext: Extension) -> Result<()> {
    if x.len() < bank.taps() {
        return Err(Error::TooShort {
            needed: bank.taps(),
            got: x.len(),
        });
    }
    if ext == Extension::Periodic && x.len() % 2 != 0 {
        return Err(Error::invalid("periodic extension needs an even-length input"));
    }
    Ok(())
}

/// One analysis level with symmetric extension.
pub fn dwt_level(x: &[f64], bank: &WaveletFilterBank) -> Result<(Vec<f64>, Vec<f64>)> {
    dwt_level_with(x, bank, Extension::Symmetric)
}

pub fn dwt_level_with(
    x: &[f64],
    bank: &WaveletFilterBank,
    ext: Extension,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_input(x, bank, ext)?;
    let n = x.len();
    let m = ext.output_len(n, bank.taps());
    let mut approx = Vec::with_capacity(m);
    let mut detail = Vec::with_capacity(m);
    for i in 0..m {
        let centre = 2 * i as isize + 1;
        let (mut a, mut d) = (0.0, 0.0);
        for (k, (lo, hi)) in bank.lowpass_dec.iter().zip(&bank.highpass_dec).enumerate() {
            let v = x[ext.index(centre - k as isize, n)];
            a += lo * v;
            d += hi * v;
        }
        approx.push(a);
        detail.push(d);
    }
    Ok((approx, detail))
}

/// Inverse of one analysis level, producing `n` samples.
pub fn idwt_level_with(
    approx: &[f64],
    detail: &[f64],
    n: usize,
    bank: &WaveletFilterBank,
    ext: Extension,
) -> Result<Vec<f64>> {
    let taps = bank.taps();
    let m = ext.output_len(n, taps);
    if approx.len() != m || detail.len() != m {
        return Err(Error::invalid(format!(
            "coefficient lengths {}/{} inconsistent with {n} output samples (expected {m})",
            approx.len(),
            detail.len()
        )));
    }
    let mut out = vec![0.0; n];
    match ext {
        Extension::Symmetric => {
            for (j, slot) in out.iter_mut().enumerate() {
                // coefficients i with 0 <= 2i + 1 - j < taps
                let i_lo = j.saturating_sub(1).div_ceil(2);
                let i_hi = (j + taps - 2) / 2;
                let mut acc = 0.0;
                for i in i_lo..=i_hi.min(m - 1) {
                    let k = 2 * i + 1 - j;
                    acc += approx[i] * bank.lowpass_dec[k] + detail[i] * bank.highpass_dec[k];
                }
                *slot = acc;
            }
        }
        Extension::Periodic => {
            for i in 0..m {
                let centre = 2 * i as isize + 1;
                for k in 0..taps {
                    let j = ext.index(centre - k as isize, n);
                    out[j] += approx[i] * bank.lowpass_dec[k] + detail[i] * bank.highpass_dec[k];
                }
            }
        }
    }
    Ok(out)
}

/// Multilevel decomposition: approximation at the deepest level plus the
/// detail bands of every level.
#[derive(Debug, Clone, PartialEq)]
pub struct DwtDecomposition {
    pub approx: Vec<f64>,
    /// `details[0]` is cD1 (finest), `details[levels - 1]` the coarsest.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub extension: Extension,
}

impl DwtDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail band of `level` (1-based).
    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - 1]
    }
}

/// Signal length at every level, starting with the input length.
pub fn level_lengths(n: usize, levels: usize, taps: usize, ext: Extension) -> Vec<usize> {
    let mut lens = vec![n];
    for _ in 0..levels {
        let last = *lens.last().unwrap();
        lens.push(ext.output_len(last, taps));
    }
    lens
}

pub fn dwt_multilevel(x: &[f64], levels: usize, bank: &WaveletFilterBank) -> Result<DwtDecomposition> {
    dwt_multilevel_with(x, levels, bank, Extension::Symmetric)
}

pub fn dwt_multilevel_with(
    x: &[f64],
    levels: usize,
    bank: &WaveletFilterBank,
    ext: Extension,
) -> Result<DwtDecomposition> {
    if levels == 0 {
        return Err(Error::invalid("at least one decomposition level is required"));
    }
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = dwt_level_with(&approx, bank, ext)?;
        details.push(d);
        approx = a;
    }
    Ok(DwtDecomposition {
        approx,
        details,
        original_length: x.len(),
        extension: ext,
    })
}

pub fn idwt_multilevel(d: &DwtDecomposition, bank: &WaveletFilterBank) -> Result<Vec<f64>> {
    let lens = level_lengths(d.original_length, d.levels(), bank.taps(), d.extension);
    for (level, detail) in d.details.iter().enumerate() {
        if detail.len() != lens[level + 1] {
            return Err(Error::invalid(format!(
                "cD{} has {} coefficients, expected {}",
                level + 1,
                detail.len(),
                lens[level + 1]
            )));
        }
    }
    let mut signal = d.approx.clone();
    for level in (0..d.levels()).rev() {
        signal = idwt_level_with(&signal, &d.details[level], lens[level], bank, d.extension)?;
    }
    Ok(signal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn db3_closed_form() -> [f64; 6] {
        let s10 = 10f64.sqrt();
        let r = (5.0 + 2.0 * s10).sqrt();
        let scale = 16.0 * 2f64.sqrt();
        [
            (1.0 + s10 + r) / scale,
            (5.0 + s10 + 3.0 * r) / scale,
            (10.0 - 2.0 * s10 + 2.0 * r) / scale,
            (10.0 - 2.0 * s10 - 2.0 * r) / scale,
            (5.0 + s10 - 3.0 * r) / scale,
            (1.0 + s10 - r) / scale,
        ]
    }

    #[test]
    fn shipped_constants_match_closed_form_and_invariants() {
        for (a, b) in DB3_REC_LO.iter().zip(db3_closed_form()) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        let bank = WaveletFilterBank::db3();
        bank.validate(1e-10).unwrap();
        // three vanishing moments of the highpass
        for p in 0..3 {
            let m: f64 = bank
                .highpass_dec
                .iter()
                .enumerate()
                .map(|(k, h)| (k as f64).powi(p) * h)
                .sum();
            assert!(m.abs() < 1e-10, "moment {p}: {m}");
        }
    }

    #[test]
    fn corrupted_bank_fails_validation() {
        let mut bank = WaveletFilterBank::db3();
        bank.lowpass_dec[2] += 1e-6;
        assert!(bank.validate(1e-10).is_err());
    }

    #[test]
    fn constant_input() {
        let bank = WaveletFilterBank::db3();
        let (a, d) = dwt_level(&[2.5; 40], &bank).unwrap();
        assert!(d.iter().all(|v| v.abs() <= 1e-10));
        assert!(a.iter().all(|v| (v - 2.5 * 2f64.sqrt()).abs() <= 1e-10));
    }

    #[test]
    fn branch_lengths_follow_recurrence() {
        let bank = WaveletFilterBank::db3();
        let (a, d) = dwt_level(&vec![1.0; 64], &bank).unwrap();
        assert_eq!((a.len(), d.len()), (34, 34));
        assert_eq!(level_lengths(1024, 3, 6, Extension::Symmetric), vec![1024, 514, 259, 132]);
        assert!(dwt_level(&[1.0; 5], &bank).is_err());
    }

    #[test]
    fn periodic_mode_preserves_energy() {
        let bank = WaveletFilterBank::db3();
        let x: Vec<f64> = (0..256).map(|i| ((i * 37 % 23) as f64).sin()).collect();
        let (a, d) = dwt_level_with(&x, &bank, Extension::Periodic).unwrap();
        let e = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!((e(&a) + e(&d) - e(&x)).abs() <= 0.01 * e(&x));
    }

    #[test]
    fn ramp_is_annihilated_in_coarse_details() {
        let bank = WaveletFilterBank::db3();
        let x: Vec<f64> = (0..1024).map(|i| 0.01 * i as f64 - 3.0).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = dwt_multilevel(&x, 3, &bank).unwrap();
        // interior coefficients only; the symmetric fold bends the ramp at the edges
        for level in [2, 3] {
            let cd = d.detail(level);
            let margin = 8;
            for v in &cd[margin..cd.len() - margin] {
                assert!(v.abs() < 1e-6 * norm, "cD{level}: {v}");
            }
        }
    }

    #[test]
    fn single_level_matches_dwt_level() {
        let bank = WaveletFilterBank::db3();
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).cos()).collect();
        let d = dwt_multilevel(&x, 1, &bank).unwrap();
        let (a, cd) = dwt_level(&x, &bank).unwrap();
        assert_eq!(d.approx, a);
        assert_eq!(d.details, vec![cd]);
    }

    #[test]
    fn zero_coefficients_reconstruct_zero_and_bad_lengths_fail() {
        let bank = WaveletFilterBank::db3();
        let mut d = dwt_multilevel(&[0.0; 200], 3, &bank).unwrap();
        assert!(idwt_multilevel(&d, &bank).unwrap().iter().all(|&v| v == 0.0));
        d.details[1].pop();
        assert!(idwt_multilevel(&d, &bank).is_err());
    }

    #[test]
    fn reconstruction_is_linear() {
        let bank = WaveletFilterBank::db3();
        let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.11).sin()).collect();
        let y: Vec<f64> = (0..300).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let dx = dwt_multilevel(&x, 3, &bank).unwrap();
        let dy = dwt_multilevel(&y, 3, &bank).unwrap();
        let mut mix = dx.clone();
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| 2.0 * p - 0.5 * q).collect::<Vec<_>>();
        mix.approx = comb(&dx.approx, &dy.approx);
        for l in 0..3 {
            mix.details[l] = comb(&dx.details[l], &dy.details[l]);
        }
        let r = idwt_multilevel(&mix, &bank).unwrap();
        for i in 0..300 {
            assert!((r[i] - (2.0 * x[i] - 0.5 * y[i])).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn perfect_reconstruction(x in prop::collection::vec(-100.0f64..100.0, 64..4096)) {
            let bank = WaveletFilterBank::db3();
            let d = dwt_multilevel(&x, 3, &bank).unwrap();
            let r = idwt_multilevel(&d, &bank).unwrap();
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let err = x.iter().zip(&r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-8 * scale, "err {}", err);
        }

        #[test]
        fn periodic_perfect_reconstruction(quarter in 8usize..256, seed in 0u64..1000) {
            let bank = WaveletFilterBank::db3();
            let x: Vec<f64> = (0..4 * quarter).map(|i| (((i as u64 + seed) * 2654435761) % 1000) as f64 / 500.0 - 1.0).collect();
            let d = dwt_multilevel_with(&x, 2, &bank, Extension::Periodic).unwrap();
            let r = idwt_multilevel(&d, &bank).unwrap();
            let err = x.iter().zip(&r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-10);
        }

        #[test]
        fn shift_by_two_shifts_level_one_by_one(x in prop::collection::vec(-1.0f64..1.0, 32..256)) {
            prop_assume!(x.len() % 2 == 0);
            let bank = WaveletFilterBank::db3();
            let n = x.len();
            let shifted: Vec<f64> = (0..n).map(|i| x[(i + n - 2) % n]).collect();
            let (a, d) = dwt_level_with(&x, &bank, Extension::Periodic).unwrap();
            let (sa, sd) = dwt_level_with(&shifted, &bank, Extension::Periodic).unwrap();
            let m = n / 2;
            for i in 0..m {
                prop_assert!((sa[(i + 1) % m] - a[i]).abs() < 1e-12);
                prop_assert!((sd[(i + 1) % m] - d[i]).abs() < 1e-12);
            }
        }
    }
}
