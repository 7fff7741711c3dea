//! Fresnel integrals and knife-edge diffraction gains.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 200;
const FP_MIN: f64 = 1e-300;
const SERIES_LIMIT: f64 = 1.5;

/// Returns `(C(x), S(x))` with `C(x) = ∫₀ˣ cos(πt²/2) dt` and
/// `S(x) = ∫₀ˣ sin(πt²/2) dt`.
///
/// Power series for `|x| <= 1.5`, Lentz continued fraction of the
/// complementary error function beyond.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax < FP_MIN.sqrt() {
        (ax, 0.0)
    } else if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series(ax: f64) -> (f64, f64) {
    let fact = FRAC_PI_2 * ax * ax;
    let mut sum = 0.0;
    let mut sum_s = 0.0;
    let mut sum_c = ax;
    let mut sign = 1.0;
    let mut odd = true;
    let mut term = ax;
    let mut n = 3.0;
    for k in 1..=MAX_ITER {
        term *= fact / k as f64;
        sum += sign * term / n;
        let test = sum.abs() * EPS;
        if odd {
            sign = -sign;
            sum_s = sum;
            sum = sum_c;
        } else {
            sum_c = sum;
            sum = sum_s;
        }
        if term < test {
            break;
        }
        odd = !odd;
        n += 2.0;
    }
    (sum_c, sum_s)
}

fn continued_fraction(ax: f64) -> (f64, f64) {
    let pix2 = PI * ax * ax;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / FP_MIN, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..=MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (a * d + b).inv();
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(ax, -ax);
    let cs = Complex64::new(0.5, 0.5)
        * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 0.5 * pix2) * h);
    (cs.re, cs.im)
}

/// Complex knife-edge field relative to free space for diffraction
/// parameter `nu`: `((1 + j) / 2) ∫_ν^∞ exp(-jπt²/2) dt`.
///
/// Tends to 1 for `nu → -∞` (clear path), equals 0.5 at grazing incidence
/// and decays towards 0 deep in the shadow.
pub fn knife_edge(nu: f64) -> Complex64 {
    let (c, s) = fresnel(nu);
    Complex64::new(0.5, 0.5) * Complex64::new(0.5 - c, -(0.5 - s))
}

/// Field behind an opaque strip occupying diffraction parameters
/// `[nu_lo, nu_hi]`: the two half-planes outside the strip add coherently.
pub fn strip_gain(nu_lo: f64, nu_hi: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - knife_edge(nu_lo) + knife_edge(nu_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    // composite Simpson on [0, x]
    fn quad(x: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut acc = f(0.0) + f(x);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn matches_quadrature() {
        for &x in &[0.0, 0.1, 0.5, 1.0, 1.49, 1.51, 2.0, 3.7, 5.0, -2.3] {
            let (c, s) = fresnel(x);
            let qc = quad(x, |t| (FRAC_PI_2 * t * t).cos());
            let qs = quad(x, |t| (FRAC_PI_2 * t * t).sin());
            assert!((c - qc).abs() < 1e-9, "C({x}) = {c}, oracle {qc}");
            assert!((s - qs).abs() < 1e-9, "S({x}) = {s}, oracle {qs}");
        }
    }

    #[test]
    fn asymptotes() {
        let (c, s) = fresnel(1e4);
        assert!((c - 0.5).abs() < 1e-4 && (s - 0.5).abs() < 1e-4);
        assert!((knife_edge(0.0).norm() - 0.5).abs() < 1e-12);
        assert!((knife_edge(-50.0) - Complex64::new(1.0, 0.0)).norm() < 1e-2);
        assert!(knife_edge(50.0).norm() < 1e-2);
    }

    #[test]
    fn grazing_loss_is_six_db() {
        let db = 20.0 * knife_edge(0.0).norm().log10();
        assert!((db + 6.0206).abs() < 1e-3);
    }

    #[test]
    fn vanishing_strip_is_transparent() {
        assert!((strip_gain(0.3, 0.3) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // a wide strip blocks almost everything
        assert!(strip_gain(-40.0, 40.0).norm() < 0.02);
    }
}
