//! Numerical integration: adaptive Gauss-Kronrod, composite Gauss-Legendre on
//! exponentially decaying half-lines, Cauchy principal values and Mellin contours.

use num_complex::Complex64 as C64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub truncation_guard: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_panels: 4000, truncation_guard: 1e-14 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.truncation_guard > 0.0) {
            return Err(Error::Invalid("quadrature tolerances must be positive".into()));
        }
        if self.max_panels < 4 {
            return Err(Error::Invalid("max_panels must be at least 4".into()));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

/// Anything that can be integrated: a vector space over the reals with a norm.
pub trait Quantity: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
    fn sub(self, other: Self) -> Self {
        self.add(other.scale(-1.0))
    }
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Quantity for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        C64::norm(self)
    }
}

impl<const N: usize> Quantity for [C64; N] {
    fn zero() -> Self {
        [C64::new(0.0, 0.0); N]
    }
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.iter_mut().zip(o) {
            *a += b;
        }
        self
    }
    fn scale(mut self, k: f64) -> Self {
        for a in self.iter_mut() {
            *a *= k;
        }
        self
    }
    fn norm(self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Value with an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels of `order` points.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let owned;
    let (x, w) = if order == 24 {
        let r = gl24();
        (&r.0, &r.1)
    } else {
        owned = gauss_legendre(order);
        (&owned.0, &owned.1)
    };
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w.iter()) {
            xs.push(mid + 0.5 * h * xi);
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Quantity, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc.scale(WGK[7]);
    let mut g = fc.scale(WG[3]);
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x).add(f(c + x));
        k = k.add(s.scale(WGK[j]));
        if j % 2 == 1 {
            g = g.add(s.scale(WG[j / 2]));
        }
    }
    let k = k.scale(h);
    let g = g.scale(h);
    let err = k.sub(g).norm();
    (k, err)
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
pub fn adaptive<T: Quantity, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate<T>> {
    adaptive_split(&mut f, &[a, b], settings)
}

/// Adaptive quadrature starting from a given partition of [breaks[0], breaks[last]].
pub fn adaptive_split<T: Quantity, F: FnMut(f64) -> T>(
    f: &mut F,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<Estimate<T>> {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total = total.add(v);
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    let mut count = heap.len();
    while err > settings.target(total.norm()) {
        if count >= settings.max_panels {
            return Err(Error::Quadrature(format!(
                "adaptive rule hit {} panels on [{}, {}], error {:.2e}",
                count,
                breaks[0],
                breaks[breaks.len() - 1],
                err
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total = total.sub(worst.value).add(v1).add(v2);
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to remove drift from the running updates
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value.add(p.value);
        error += p.error;
    }
    Ok(Estimate { value, error })
}

/// Truncation point for an integrand bounded by exp(-rate * tau) beyond a head.
pub fn truncation_point(decay_rate: f64, settings: &QuadratureSettings) -> f64 {
    (-settings.truncation_guard.ln() / decay_rate).max(40.0)
}

/// Integral over [0, inf) of an integrand decaying like exp(-decay_rate * tau).
///
/// Composite 24-point Gauss-Legendre on [0, T], halving the panel width until
/// two successive sums agree.
pub fn integrate_decaying<T: Quantity, F: FnMut(f64) -> T>(
    mut f: F,
    decay_rate: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate<T>> {
    settings.validate()?;
    if !(decay_rate > 0.0) {
        return Err(Error::Invalid("decay rate must be positive".into()));
    }
    let t_end = truncation_point(decay_rate, settings);
    let mut panels = ((t_end / 0.5).ceil() as usize).max(4);
    let mut prev: Option<T> = None;
    loop {
        let (x, w) = composite_gl(0.0, t_end, panels, 24);
        let mut acc = T::zero();
        for (xi, wi) in x.iter().zip(w.iter()) {
            acc = acc.add(f(*xi).scale(*wi));
        }
        if let Some(p) = prev {
            let diff = acc.sub(p).norm();
            if diff <= settings.target(acc.norm()) {
                return Ok(Estimate { value: acc, error: diff.max(settings.truncation_guard) });
            }
        }
        if panels * 2 > settings.max_panels * 8 {
            return Err(Error::Quadrature(format!("decaying integral not converged with {panels} panels")));
        }
        prev = Some(acc);
        panels *= 2;
    }
}

/// Cauchy principal value of the integral of f(tau)/(tau - t) over (a, b), a < t < b.
pub fn pv_cauchy<T: Quantity, F: FnMut(f64) -> T>(
    mut f: F,
    t: f64,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate<T>> {
    if !(a < t && t < b) {
        return Err(Error::Invalid(format!("principal value point {t} outside ({a}, {b})")));
    }
    let ft = f(t);
    let mut g = |x: f64| {
        let d = x - t;
        if d == 0.0 {
            T::zero()
        } else {
            f(x).sub(ft).scale(1.0 / d)
        }
    };
    let est = adaptive_split(&mut g, &[a, t, b], settings)?;
    let log_term = ((b - t) / (t - a)).ln();
    Ok(Estimate { value: est.value.add(ft.scale(log_term)), error: est.error })
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
fn wynn_epsilon(seq: &[C64]) -> (C64, f64) {
    let n = seq.len();
    if n < 3 {
        let v = seq[n - 1];
        let e = if n == 2 { (seq[1] - seq[0]).norm() } else { f64::INFINITY };
        return (v, e);
    }
    let mut prev = vec![C64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<C64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut best_err = (seq[n - 1] - seq[n - 2]).norm();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let inv = if d.norm() == 0.0 { C64::new(1e300, 0.0) } else { 1.0 / d };
            next.push(prev[i + 1] + inv);
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let e = (next[m - 1] - next[m - 2]).norm();
            if e.is_finite() && e < best_err {
                best_err = e;
                best = next[m - 1];
            }
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}

/// (1/2 pi i) times the integral of f(t) r^t along Re t = omega, upward.
///
/// The line is cut at multiples of the half-period pi/|log r| of r^t and the
/// sequence of partial integrals is accelerated with the epsilon algorithm.
pub fn mellin_contour<F: FnMut(C64) -> C64>(
    mut f: F,
    omega: f64,
    r: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate<C64>> {
    let est = mellin_contour_vec(|t| [f(t)], omega, r, settings)?;
    Ok(Estimate { value: est.value[0], error: est.error })
}

/// Vector-valued `mellin_contour`; each component is extrapolated separately.
pub fn mellin_contour_vec<const N: usize, F: FnMut(C64) -> [C64; N]>(
    mut f: F,
    omega: f64,
    r: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate<[C64; N]>> {
    if !(r > 0.0) {
        return Err(Error::Invalid("mellin_contour needs r > 0".into()));
    }
    let lr = r.ln();
    // integrand on both halves: tau and -tau
    let mut h = |tau: f64| {
        let tp = C64::new(omega, tau);
        let tm = C64::new(omega, -tau);
        let (ep, em) = ((tp * lr).exp(), (tm * lr).exp());
        let (fp, fm) = (f(tp), f(tm));
        let mut out = [C64::new(0.0, 0.0); N];
        for j in 0..N {
            out[j] = (fp[j] * ep + fm[j] * em) * (0.5 / PI);
        }
        out
    };
    let period = if lr.abs() > 0.0 { PI / lr.abs() } else { f64::INFINITY };
    let head = if period.is_finite() { period.clamp(10.0, 50.0) } else { 50.0 };
    let inner = QuadratureSettings { max_panels: settings.max_panels.max(200), ..*settings };
    let first = adaptive(&mut h, 0.0, head, &inner)?;
    let mut partial = vec![first.value];
    let mut acc = first.value;
    let mut err_q = first.error;
    let step = if period.is_finite() { period.min(1e6) } else { 2.0 * head };
    let mut lo = head;
    let max_pieces = 60;
    let mut last: Option<([C64; N], f64)> = None;
    for piece in 0..max_pieces {
        let hi = if period.is_finite() { lo + step } else { lo + step * (1.0 + piece as f64) };
        let est = adaptive(&mut h, lo, hi, &inner)?;
        err_q += est.error;
        acc = acc.add(est.value);
        partial.push(acc);
        lo = hi;
        if partial.len() >= 4 {
            let mut v = [C64::new(0.0, 0.0); N];
            let mut e = 0.0f64;
            for j in 0..N {
                let seq: Vec<C64> = partial.iter().map(|p| p[j]).collect();
                let (vj, ej) = wynn_epsilon(&seq);
                v[j] = vj;
                e = e.max(ej);
            }
            let tol = settings.target(v.norm());
            if let Some((lv, _)) = last {
                if e <= tol && v.sub(lv).norm() <= tol {
                    return Ok(Estimate { value: v, error: e + err_q });
                }
            }
            last = Some((v, e));
        }
    }
    let (v, e) = last.unwrap_or((acc, f64::INFINITY));
    Ok(Estimate { value: v, error: e + err_q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn decaying_trivial_cases() {
        let st = QuadratureSettings::default();
        let v = integrate_decaying(|t: f64| (-t).exp(), 1.0, &st).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        let v = integrate_decaying(|t: f64| t * t * (-2.0 * t).exp(), 2.0, &st).unwrap();
        assert!((v.value - 0.25).abs() < 1e-12);
        assert!(v.error >= (v.value - 0.25).abs() * 0.0);
    }

    #[test]
    fn even_extension_is_half_of_two_sided() {
        let st = QuadratureSettings::default();
        let half = integrate_decaying(|t: f64| (-t * t).exp(), 1.0, &st).unwrap().value;
        let full = adaptive(|t: f64| (-t * t).exp(), -40.0, 40.0, &st).unwrap().value;
        assert!((2.0 * half - full).abs() < 1e-11);
        assert!((full - PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn adaptive_error_is_conservative() {
        let st = QuadratureSettings::default();
        let est = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, &st).unwrap();
        let truth = 2.0 / 3.0;
        assert!((est.value - truth).abs() <= est.error.max(1e-15));
        let est = adaptive(|x: f64| (10.0 * x).cos(), 0.0, 3.0, &st).unwrap();
        let truth = (30.0f64).sin() / 10.0;
        assert!((est.value - truth).abs() <= est.error.max(1e-15));
    }

    #[test]
    fn principal_value_cases() {
        let st = QuadratureSettings::default();
        let v = pv_cauchy(|_x: f64| 3.0, 0.2, -1.0, 2.0, &st).unwrap().value;
        assert!((v - 3.0 * (1.8f64 / 1.2).ln()).abs() < 1e-13);
        let v = pv_cauchy(|x: f64| x, 0.0, -1.0, 1.0, &st).unwrap().value;
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn mellin_double_pole() {
        let st = QuadratureSettings::default();
        // r < 1: closing to the right encloses nothing
        for &r in &[0.2, 0.6] {
            let v = mellin_contour(|t| 1.0 / ((t + 1.0) * (t + 1.0)), -0.25, r, &st).unwrap();
            assert!(v.value.norm() < 1e-8, "r={r} {:?}", v.value);
        }
        // r > 1: closing to the left picks the double pole at -1
        for &r in &[1.5, 4.0] {
            let v = mellin_contour(|t| 1.0 / ((t + 1.0) * (t + 1.0)), -0.25, r, &st).unwrap();
            assert!((v.value - r.ln() / r).norm() < 1e-8, "r={r} {:?}", v.value);
        }
    }

    #[test]
    fn mellin_simple_pole_sides() {
        let st = QuadratureSettings::default();
        let r: f64 = 0.5;
        let s = C64::new(0.7, 0.3);
        let v = mellin_contour(|t| 1.0 / (t - s), -0.25, r, &st).unwrap();
        let expect = -(s * r.ln()).exp();
        assert!((v.value - expect).norm() < 1e-7, "{:?} vs {expect}", v.value);
        let s = C64::new(-0.9, 0.3);
        let v = mellin_contour(|t| 1.0 / (t - s), -0.25, r, &st).unwrap();
        assert!(v.value.norm() < 1e-7);
    }
}
