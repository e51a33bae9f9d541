//! Complex Gamma-function family and the scalar Wiener-Hopf factors built on it.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ln sqrt(2 pi)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos coefficients for g = 7, n = 9 (Godfrey's set).
/// Relative error of Gamma below 2e-15 for Re z >= 1/2.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Bernoulli numbers B_0..B_16.
const BERNOULLI: [f64; 17] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
];

/// Magnitude above which Gamma ratios switch to the Stirling-difference series.
const STIRLING_SWITCH: f64 = 50.0;

fn fmt(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Is `z` (numerically) a non-positive integer?
fn at_gamma_pole(z: C64) -> bool {
    if z.re > 0.5 {
        return false;
    }
    let n = z.re.round();
    let tol = 1e-14 * (1.0 + n.abs());
    (z.re - n).abs() <= tol && z.im.abs() <= tol
}

/// tan(pi z) without overflow for large |Im z|.
pub fn tan_pi(z: C64) -> C64 {
    let w = z * PI;
    let i = C64::i();
    if w.im > 0.0 {
        let e = (i * 2.0 * w).exp();
        (e - 1.0) / (i * (e + 1.0))
    } else {
        let e = (-i * 2.0 * w).exp();
        (1.0 - e) / (i * (1.0 + e))
    }
}

/// cot(pi z) without overflow for large |Im z|.
pub fn cot_pi(z: C64) -> C64 {
    let w = z * PI;
    let i = C64::i();
    if w.im > 0.0 {
        let e = (i * 2.0 * w).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-i * 2.0 * w).exp();
        i * (1.0 + e) / (1.0 - e)
    }
}

/// log sin(pi z), stable for large |Im z| (branch not normalised).
fn ln_sin_pi(z: C64) -> C64 {
    let i = C64::i();
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    // sin w = (e^{iw} - e^{-iw}) / 2i; keep the dominant exponential analytic.
    let w = z * PI;
    if w.im > 0.0 {
        -i * w + (1.0 - (2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    } else {
        i * w + ((-2.0 * i * w).exp() - 1.0).ln() - (2.0 * i).ln()
    }
}

fn lanczos_parts(z: C64) -> (C64, C64, C64) {
    // returns (x, x', t) for the shifted argument z - 1
    let zm = z - 1.0;
    let mut x = C64::new(LANCZOS_COEF[0], 0.0);
    let mut dx = C64::new(0.0, 0.0);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        let den = zm + k as f64;
        x += c / den;
        dx -= c / (den * den);
    }
    let t = zm + LANCZOS_G + 0.5;
    (x, dx, t)
}

/// Principal (standard, continuous) branch of log Gamma.
pub fn ln_gamma(z: C64) -> Result<C64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Invalid(format!("ln_gamma of non-finite {}", fmt(z))));
    }
    if at_gamma_pole(z) {
        return Err(Error::Pole { func: "Gamma", at: fmt(z) });
    }
    if z.re >= 0.5 {
        let (x, _, t) = lanczos_parts(z);
        return Ok(LN_SQRT_2PI + (z - 0.5) * t.ln() - t + x.ln());
    }
    if z.re > -200.0 {
        // upward recurrence keeps the standard branch
        let n = (0.5 - z.re).ceil() as usize;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += (z + k as f64).ln();
        }
        return Ok(ln_gamma(z + n as f64)? - acc);
    }
    Ok(PI.ln() - ln_sin_pi(z) - ln_gamma(1.0 - z)?)
}

/// Gamma(z).
pub fn gamma(z: C64) -> Result<C64> {
    Ok(ln_gamma(z)?.exp())
}

/// Digamma psi(z) = Gamma'(z)/Gamma(z), from the derivative of the Lanczos form.
pub fn digamma(z: C64) -> Result<C64> {
    if at_gamma_pole(z) {
        return Err(Error::Pole { func: "digamma", at: fmt(z) });
    }
    if z.re >= 0.5 {
        let (x, dx, t) = lanczos_parts(z);
        return Ok(t.ln() + (z - 0.5) / t - 1.0 + dx / x);
    }
    Ok(digamma(1.0 - z)? - PI * cot_pi(z))
}

fn bernoulli_poly(n: usize, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=n {
        acc += binom * BERNOULLI[k] * x.powi((n - k) as i32);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// ln[Gamma(z+a)/Gamma(z+b)] by the Stirling-difference expansion, |z| large.
fn ln_gamma_ratio_stirling(z: C64, a: f64, b: f64) -> C64 {
    let mut acc = (a - b) * z.ln();
    let zi = 1.0 / z;
    let mut zp = zi;
    for n in 1..=15usize {
        let c = bernoulli_poly(n + 1, a) - bernoulli_poly(n + 1, b);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * c / ((n * (n + 1)) as f64) * zp;
        zp *= zi;
    }
    acc
}

/// Gamma(z+a)/Gamma(z+b) for real shifts a, b. Returns 0 at poles of the denominator.
pub fn gamma_ratio(z: C64, a: f64, b: f64) -> Result<C64> {
    let num = z + a;
    let den = z + b;
    if at_gamma_pole(num) {
        return Err(Error::Pole { func: "Gamma ratio", at: fmt(num) });
    }
    if at_gamma_pole(den) {
        return Ok(C64::new(0.0, 0.0));
    }
    if z.norm() > STIRLING_SWITCH && z.re > -0.5 * z.norm() {
        return Ok(ln_gamma_ratio_stirling(z, a, b).exp());
    }
    Ok((ln_gamma(num)? - ln_gamma(den)?).exp())
}

/// K+(s) = -Gamma(-s)/Gamma(1/2 - s), holomorphic and zero-free for Re s < 0.
pub fn k_plus(s: C64) -> Result<C64> {
    Ok(-gamma_ratio(-s, 0.0, 0.5)?)
}

/// K-(s) = Gamma(1/2 + s)/Gamma(1 + s), holomorphic and zero-free for Re s > -1/2.
pub fn k_minus(s: C64) -> Result<C64> {
    gamma_ratio(s, 0.5, 1.0)
}

/// a+(s) = Gamma(1/2 - s/2)/Gamma(-s/2).
pub fn a_plus(s: C64) -> Result<C64> {
    gamma_ratio(-0.5 * s, 0.5, 0.0)
}

/// a-(s) = Gamma(1 + s/2)/Gamma(1/2 + s/2).
pub fn a_minus(s: C64) -> Result<C64> {
    gamma_ratio(0.5 * s, 1.0, 0.5)
}

/// d/ds log a-(s) = (psi(1 + s/2) - psi(1/2 + s/2)) / 2.
pub fn a_minus_log_derivative(s: C64) -> Result<C64> {
    Ok(0.5 * (digamma(1.0 + 0.5 * s)? - digamma(0.5 + 0.5 * s)?))
}
